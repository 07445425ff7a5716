#include "codicon/gradkit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codicon {

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("log_softmax: empty logits");
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max);
  const double log_norm = max + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - log_norm;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p = log_softmax(logits);
  for (double& v : p) v = std::exp(v);
  return p;
}

ActionSample softmax_sample(std::span<const double> logits, Rng& rng) {
  const std::vector<double> logp = log_softmax(logits);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = logp.size() - 1;
  for (std::size_t k = 0; k < logp.size(); ++k) {
    cumulative += std::exp(logp[k]);
    if (u < cumulative) {
      chosen = k;
      break;
    }
  }
  return {chosen, logp[chosen]};
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty input");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace codicon
