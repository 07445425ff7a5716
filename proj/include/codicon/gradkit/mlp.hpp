#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "codicon/gradkit/matrix.hpp"
#include "codicon/gradkit/rng.hpp"

namespace codicon {

// Gradient vector aligned with an Mlp's flattened parameter order.
struct FlatGrad {
  std::vector<double> values;

  FlatGrad() = default;
  explicit FlatGrad(std::size_t n) : values(n, 0.0) {}
  explicit FlatGrad(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }

  bool all_finite() const;
  double norm() const;
};

// Activations recorded by a forward pass. activations[0] is the input,
// activations[l + 1] the post-activation output of weight layer l.
struct MlpTape {
  std::vector<std::vector<double>> activations;

  std::span<const double> output() const { return activations.back(); }
};

// Fully connected net: tanh on hidden layers, identity on the output.
//
// Parameters live in one contiguous buffer. For each weight layer l the
// block is W_l (out x in, row-major) followed by b_l (out); this is the
// order every FlatGrad uses.
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialized net.
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Mlp init_uniform(std::vector<std::size_t> layer_sizes, Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t num_weight_layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::vector<double> flatten() const { return params_; }
  void unflatten(std::span<const double> flat);

  Matrix weight(std::size_t layer) const;
  void set_weight(std::size_t layer, const Matrix& w);
  std::span<const double> bias(std::size_t layer) const;
  void set_bias(std::size_t layer, std::span<const double> b);

  std::vector<double> forward(std::span<const double> input) const;
  void forward(std::span<const double> input, MlpTape& tape) const;

  // Gradient of dot(output_grad, forward(input)) with respect to the params.
  FlatGrad backward(std::span<const double> input, std::span<const double> output_grad) const;

  // grad += scale * d(dot(output_grad, output))/d(params), reusing a tape
  // recorded by forward() on the current parameters.
  void backward_accumulate(const MlpTape& tape, std::span<const double> output_grad,
                           std::span<double> grad, double scale = 1.0) const;

  // Directional derivative of the output along `direction` in parameter
  // space (forward mode), at the parameters the tape was recorded with.
  std::vector<double> jvp(const MlpTape& tape, std::span<const double> direction) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

}  // namespace codicon
