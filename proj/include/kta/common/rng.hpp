#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace kta {

// Deterministic random source. The raw engine is std::mt19937_64, whose
// output sequence is fixed by the standard; every derived distribution is
// implemented here so that results do not depend on the standard library
// vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform integer on [0, n).
  std::size_t uniform_index(std::size_t n);

  double normal();

  // Gamma(shape, 1) variate. Marsaglia-Tsang for shape >= 1, boosted with
  // U^(1/shape) below 1.
  double gamma(double shape);

  // log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
  // variate itself underflows.
  double log_gamma(double shape);

  // Symmetric Dirichlet(alpha * 1_n) draw.
  std::vector<double> dirichlet(double alpha, std::size_t n);

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 mix of (base, stream, index): independent seeds for
// per-client and per-purpose streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

namespace streams {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kClientTrain = 2;
inline constexpr std::uint64_t kPartition = 3;
inline constexpr std::uint64_t kHoldout = 4;
inline constexpr std::uint64_t kTestSplit = 5;
inline constexpr std::uint64_t kData = 6;
}  // namespace streams

}  // namespace kta
