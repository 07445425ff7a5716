#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "codicon/gradkit/rng.hpp"

namespace codicon {

struct ActionSample {
  std::size_t action = 0;
  double log_prob = 0.0;
};

// Max-subtracted, so finite for any finite logits.
std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

// Draws one index by inverse CDF on a single uniform.
ActionSample softmax_sample(std::span<const double> logits, Rng& rng);

// Lowest index on ties.
std::size_t argmax(std::span<const double> values);

}  // namespace codicon
