#pragma once

#include "codicon/marl/policy.hpp"
#include "codicon/marl/trajectory.hpp"

namespace codicon::marl {

struct CriticOptions {
  double lr = 1e-3;
  int epochs = 4;  // full-batch Adam steps per call
};

struct CriticLoss {
  double hybrid = 0.0;     // mean over agents, before the first step
  double extrinsic = 0.0;
};

// Squared-error regression of each hybrid critic toward its agent's
// discounted hybrid return and of the extrinsic critic toward the discounted
// extrinsic return.
CriticLoss critic_update(CriticParams& critics, const TrajectoryBatch& batch, const CriticOptions& options);

}  // namespace codicon::marl
