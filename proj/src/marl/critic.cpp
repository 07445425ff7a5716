#include "codicon/marl/critic.hpp"

#include <array>
#include <stdexcept>

#include "codicon/gradkit/optim.hpp"

namespace codicon::marl {
namespace {

// Mean of (V(s_t) - target_t)^2 and its gradient.
double regression_grad(const Mlp& critic, const TrajectoryBatch& batch, const std::vector<double>& targets,
                       FlatGrad& grad) {
  grad = FlatGrad(critic.parameter_count());
  const double w = 1.0 / static_cast<double>(batch.size());
  MlpTape tape;
  double loss = 0.0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    critic.forward(batch.steps[t].state, tape);
    const double err = tape.output()[0] - targets[t];
    loss += w * err * err;
    const std::array<double, 1> seed{2.0 * err};
    critic.backward_accumulate(tape, seed, grad.span(), w);
  }
  return loss;
}

}  // namespace

CriticLoss critic_update(CriticParams& critics, const TrajectoryBatch& batch, const CriticOptions& options) {
  if (batch.size() == 0) throw std::invalid_argument("critic_update: empty batch");
  CriticLoss loss;
  std::vector<double> targets(batch.size());
  FlatGrad grad;
  for (std::size_t a = 0; a < critics.hybrid.size(); ++a) {
    for (std::size_t t = 0; t < batch.size(); ++t) targets[t] = batch.steps[t].hybrid_return[a];
    for (int e = 0; e < options.epochs; ++e) {
      const double l = regression_grad(critics.hybrid[a], batch, targets, grad);
      if (e == 0) loss.hybrid += l / static_cast<double>(critics.hybrid.size());
      adam_step(critics.hybrid[a].params(), critics.hybrid_opt[a], grad, options.lr);
    }
  }
  for (std::size_t t = 0; t < batch.size(); ++t) targets[t] = batch.steps[t].extrinsic_return;
  for (int e = 0; e < options.epochs; ++e) {
    const double l = regression_grad(critics.extrinsic, batch, targets, grad);
    if (e == 0) loss.extrinsic = l;
    adam_step(critics.extrinsic.params(), critics.extrinsic_opt, grad, options.lr);
  }
  return loss;
}

}  // namespace codicon::marl
