#include "kta/nn/optimizer.hpp"

#include <cmath>

#include "kta/common/error.hpp"

namespace kta::nn {

OptimizerState OptimizerState::sgd(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::sgd;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState OptimizerState::adam(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::adam;
  s.learning_rate = learning_rate;
  return s;
}

void OptimizerState::reset() {
  step = 0;
  first_moment.clear();
  second_moment.clear();
}

void optimizer_step(OptimizerState& state, std::span<double> params, std::span<const double> grads) {
  KTA_REQUIRE(params.size() == grads.size(), "optimizer_step: params/grads length mismatch");
  KTA_REQUIRE(state.learning_rate >= 0.0, "optimizer_step: negative learning rate");
  if (state.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= state.learning_rate * grads[i];
    ++state.step;
    return;
  }

  if (state.first_moment.empty() && state.second_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  KTA_REQUIRE(state.first_moment.size() == params.size() &&
                  state.second_moment.size() == params.size(),
              "optimizer_step: moment buffers do not match parameter vector");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace kta::nn
