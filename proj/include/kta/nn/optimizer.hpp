#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kta::nn {

enum class OptimizerKind { sgd, adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  static OptimizerState sgd(double learning_rate);
  static OptimizerState adam(double learning_rate);

  // Clears moments and the step counter; hyperparameters are kept.
  void reset();

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

// One in-place update. Adam moment buffers are sized lazily on the first
// step and must match the parameter vector afterwards.
void optimizer_step(OptimizerState& state, std::span<double> params, std::span<const double> grads);

}  // namespace kta::nn
