#pragma once

#include <functional>

#include "kta/nn/loss.hpp"
#include "kta/nn/model.hpp"

namespace kta::nn {

using LossClosure = std::function<LossTerms(MlpModel&)>;

// Central finite differences against the closure's analytic gradient.
// Returns max_i |g_fd - g_an| / max(1e-5, |g_fd| + |g_an|).
double gradient_check(MlpModel& model, const LossClosure& loss, double epsilon = 1e-5);

}  // namespace kta::nn
