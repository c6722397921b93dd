#include "reltr/optimizer.hpp"

#include <cmath>

#include "reltr/error.hpp"

namespace reltr {

void sgd_step(const std::vector<Tensor>& params, double lr) {
  if (!(lr > 0.0))
    throw ConfigError("sgd_step: learning rate must be positive");
  for (const Tensor& p : params) {
    const std::vector<double>& g = p.grad();  // throws when unpopulated
    auto impl = p.impl();
    for (std::size_t i = 0; i < impl->data.size(); ++i)
      impl->data[i] -= lr * g[i];
  }
}

void zero_grads(const std::vector<Tensor>& params) {
  for (const Tensor& p : params) p.zero_grad();
}

bool plateau_update(OptimizerState& state, double metric) {
  if (!std::isfinite(metric))
    throw ValidationError("plateau_update: metric must be finite");
  if (metric < state.best_metric) {
    state.best_metric = metric;
    state.plateau_counter = 0;
    return false;
  }
  ++state.plateau_counter;
  if (state.plateau_counter > state.patience) {
    state.learning_rate *= state.decay_factor;
    state.plateau_counter = 0;
    return true;
  }
  return false;
}

}  // namespace reltr
