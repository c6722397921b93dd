#pragma once

#include <limits>
#include <vector>

#include "reltr/tensor.hpp"

namespace reltr {

// Reduce-on-plateau bookkeeping for a single learning rate.  Min mode: a
// strictly lower metric counts as an improvement.
struct OptimizerState {
  double learning_rate = 1e-3;
  int patience = 3;
  int plateau_counter = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  double decay_factor = 0.1;
};

// p <- p - lr * grad, for every parameter.  Throws when a gradient has not
// been populated by a backward pass.
void sgd_step(const std::vector<Tensor>& params, double lr);

// Clears accumulated gradients ahead of the next backward pass.
void zero_grads(const std::vector<Tensor>& params);

// Feeds one validation metric.  When the metric fails to improve best_metric
// for patience+1 consecutive calls, multiplies the learning rate by
// decay_factor, resets the counter, and returns true.
bool plateau_update(OptimizerState& state, double metric);

}  // namespace reltr
