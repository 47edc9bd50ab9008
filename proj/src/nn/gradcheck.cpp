#include "kta/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "kta/common/error.hpp"

namespace kta::nn {

double gradient_check(MlpModel& model, const LossClosure& loss, double epsilon) {
  KTA_REQUIRE(epsilon > 0.0, "gradient_check: epsilon must be positive");
  for (double v : model.parameters())
    KTA_REQUIRE(std::isfinite(v), "gradient_check: non-finite parameter");
  const LossTerms base = loss(model);
  KTA_REQUIRE(std::isfinite(base.total), "gradient_check: non-finite loss");
  KTA_REQUIRE(base.grad.size() == model.parameter_count(), "gradient_check: gradient length");

  auto params = model.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + epsilon;
    const double up = loss(model).total;
    params[i] = saved - epsilon;
    const double down = loss(model).total;
    params[i] = saved;
    KTA_REQUIRE(std::isfinite(up) && std::isfinite(down), "gradient_check: non-finite loss");
    const double fd = (up - down) / (2.0 * epsilon);
    const double an = base.grad[i];
    worst = std::max(worst, std::abs(fd - an) / std::max(1e-5, std::abs(fd) + std::abs(an)));
  }
  return worst;
}

}  // namespace kta::nn
