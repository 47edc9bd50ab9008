#include "kta/common/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kta/common/error.hpp"

namespace kta {

std::size_t Rng::uniform_index(std::size_t n) {
  KTA_REQUIRE(n > 0, "uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  // Box-Muller, one output per pair; no cached state.
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
  KTA_REQUIRE(shape > 0.0 && std::isfinite(shape), "gamma: shape must be positive");
  if (shape < 1.0) return std::exp(log_gamma(shape));
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::log_gamma(double shape) {
  KTA_REQUIRE(shape > 0.0 && std::isfinite(shape), "gamma: shape must be positive");
  if (shape >= 1.0) return std::log(gamma(shape));
  const double boosted = gamma(shape + 1.0);
  return std::log(boosted) + std::log(uniform_open()) / shape;
}

std::vector<double> Rng::dirichlet(double alpha, std::size_t n) {
  KTA_REQUIRE(n > 0, "dirichlet: dimension must be positive");
  std::vector<double> logs(n);
  for (auto& l : logs) l = log_gamma(alpha);
  double top = logs[0];
  for (double l : logs) top = std::max(top, l);
  double total = 0.0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logs[i] - top);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

}  // namespace kta
