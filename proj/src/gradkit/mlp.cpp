#include "codicon/gradkit/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "codicon/simd/kernels.hpp"

namespace codicon {

bool FlatGrad::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double FlatGrad::norm() const {
  return std::sqrt(simd::dot(values.data(), values.data(), values.size()));
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw std::invalid_argument("Mlp layer of size 0");
    offsets_.push_back(total);
    total += (sizes_[l] + 1) * sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::init_uniform(std::vector<std::size_t> layer_sizes, Rng& rng) {
  Mlp net(std::move(layer_sizes));
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    const std::size_t begin = net.weight_offset(l);
    const std::size_t end = begin + (net.sizes_[l] + 1) * net.sizes_[l + 1];
    for (std::size_t k = begin; k < end; ++k) net.params_[k] = rng.uniform(-bound, bound);
  }
  return net;
}

void Mlp::unflatten(std::span<const double> flat) {
  if (flat.size() != params_.size()) throw std::invalid_argument("Mlp::unflatten: length mismatch");
  params_.assign(flat.begin(), flat.end());
}

Matrix Mlp::weight(std::size_t layer) const {
  Matrix w(sizes_[layer + 1], sizes_[layer]);
  const double* src = params_.data() + weight_offset(layer);
  w.data.assign(src, src + w.rows * w.cols);
  return w;
}

void Mlp::set_weight(std::size_t layer, const Matrix& w) {
  if (w.rows != sizes_[layer + 1] || w.cols != sizes_[layer]) {
    throw std::invalid_argument("Mlp::set_weight: shape mismatch");
  }
  std::copy(w.data.begin(), w.data.end(), params_.begin() + weight_offset(layer));
}

std::span<const double> Mlp::bias(std::size_t layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

void Mlp::set_bias(std::size_t layer, std::span<const double> b) {
  if (b.size() != sizes_[layer + 1]) throw std::invalid_argument("Mlp::set_bias: length mismatch");
  std::copy(b.begin(), b.end(), params_.begin() + bias_offset(layer));
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  MlpTape tape;
  forward(input, tape);
  return std::move(tape.activations.back());
}

void Mlp::forward(std::span<const double> input, MlpTape& tape) const {
  if (input.size() != input_size()) {
    throw std::invalid_argument("Mlp::forward: input length " + std::to_string(input.size()) +
                                " != " + std::to_string(input_size()));
  }
  const std::size_t layers = num_weight_layers();
  tape.activations.resize(layers + 1);
  tape.activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    auto& y = tape.activations[l + 1];
    y.resize(out);
    simd::gemv(params_.data() + weight_offset(l), tape.activations[l].data(),
               params_.data() + bias_offset(l), y.data(), out, in);
    if (l + 1 < layers) {
      for (double& v : y) v = std::tanh(v);
    }
  }
}

FlatGrad Mlp::backward(std::span<const double> input, std::span<const double> output_grad) const {
  MlpTape tape;
  forward(input, tape);
  FlatGrad grad(params_.size());
  backward_accumulate(tape, output_grad, grad.span());
  return grad;
}

void Mlp::backward_accumulate(const MlpTape& tape, std::span<const double> output_grad,
                              std::span<double> grad, double scale) const {
  if (output_grad.size() != output_size()) {
    throw std::invalid_argument("Mlp::backward: output_grad length mismatch");
  }
  if (grad.size() != params_.size()) throw std::invalid_argument("Mlp::backward: grad length mismatch");
  if (tape.activations.size() != sizes_.size()) throw std::invalid_argument("Mlp::backward: stale tape");

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (double& d : delta) d *= scale;
  std::vector<double> prev;
  for (std::size_t l = num_weight_layers(); l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const auto& a = tape.activations[l];
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    simd::ger(delta.data(), a.data(), gw, out, in);
    for (std::size_t r = 0; r < out; ++r) gb[r] += delta[r];
    if (l == 0) break;
    prev.assign(in, 0.0);
    const double* w = params_.data() + weight_offset(l);
    simd::gemv_t(w, delta.data(), prev.data(), out, in);
    for (std::size_t k = 0; k < in; ++k) prev[k] *= 1.0 - a[k] * a[k];
    delta.swap(prev);
  }
}

std::vector<double> Mlp::jvp(const MlpTape& tape, std::span<const double> direction) const {
  if (direction.size() != params_.size()) throw std::invalid_argument("Mlp::jvp: direction length mismatch");
  if (tape.activations.size() != sizes_.size()) throw std::invalid_argument("Mlp::jvp: stale tape");
  std::vector<double> tangent;  // d activations[l], empty for the input
  std::vector<double> dz;
  std::vector<double> wt;
  for (std::size_t l = 0; l < num_weight_layers(); ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    dz.resize(out);
    simd::gemv(direction.data() + weight_offset(l), tape.activations[l].data(), direction.data() + bias_offset(l),
               dz.data(), out, in);
    if (!tangent.empty()) {
      wt.resize(out);
      simd::gemv(params_.data() + weight_offset(l), tangent.data(), nullptr, wt.data(), out, in);
      for (std::size_t r = 0; r < out; ++r) dz[r] += wt[r];
    }
    if (l + 1 == num_weight_layers()) return dz;
    const auto& a = tape.activations[l + 1];
    tangent.resize(out);
    for (std::size_t r = 0; r < out; ++r) tangent[r] = (1.0 - a[r] * a[r]) * dz[r];
  }
  return tangent;
}

}  // namespace codicon
