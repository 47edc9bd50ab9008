// Serial reference vs OpenMP kernels, plus one federated round at 1 and N
// workers. Usage: kta_bench [threads] [repeats]
#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include <omp.h>

#include "kta/common/rng.hpp"
#include "kta/federation/experiment.hpp"
#include "kta/nn/kernels.hpp"

using namespace kta;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> noise(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s %10.3f %10.3f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  omp_set_num_threads(threads);
  std::printf("threads %d, best of %d\n", threads, repeats);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  Rng rng(1);
  for (auto [m, n, k] : {std::array<std::size_t, 3>{64, 192, 256}, {512, 256, 256}}) {
    const auto x = noise(m * k, rng), w = noise(n * k, rng), b = noise(n, rng);
    std::vector<double> y1(m * n), y2(m * n);
    const double s = best_ms(repeats, [&] { kernels::serial::gemm_nt(x, w, b, y2, m, n, k); });
    const double p = best_ms(repeats, [&] { kernels::gemm_nt(x, w, b, y1, m, n, k); });
    char name[64];
    std::snprintf(name, sizeof name, "gemm_nt %zux%zux%zu", m, n, k);
    row(name, s, p, y1 == y2);

    const auto a = noise(m * n, rng);
    std::vector<double> o1(n * k), o2(n * k);
    const double s2 = best_ms(repeats, [&] { kernels::serial::gemm_tn(a, x, o2, m, n, k); });
    const double p2 = best_ms(repeats, [&] { kernels::gemm_tn(a, x, o1, m, n, k); });
    std::snprintf(name, sizeof name, "gemm_tn %zux%zux%zu", m, n, k);
    row(name, s2, p2, o1 == o2);

    std::vector<double> q1(m * k), q2(m * k);
    const double s3 = best_ms(repeats, [&] { kernels::serial::gemm_nn(a, w, q2, m, n, k); });
    const double p3 = best_ms(repeats, [&] { kernels::gemm_nn(a, w, q1, m, n, k); });
    std::snprintf(name, sizeof name, "gemm_nn %zux%zux%zu", m, n, k);
    row(name, s3, p3, q1 == q2);
  }
  {
    const std::size_t c = 20, len = 2000 * 10;
    const auto v = noise(c * len, rng);
    std::vector<double> g1(c * c), g2(c * c);
    const double s = best_ms(repeats, [&] { kernels::serial::gram(v, g2, c, len); });
    const double p = best_ms(repeats, [&] { kernels::gram(v, g1, c, len); });
    row("gram 20 x 20000", s, p, g1 == g2);

    std::vector<std::span<const double>> views;
    for (std::size_t j = 0; j < c; ++j) views.emplace_back(v.data() + j * len, len);
    const auto wts = noise(c, rng);
    std::vector<double> w1(len), w2(len);
    const double s2 = best_ms(repeats, [&] { kernels::serial::weighted_sum(views, wts, w2); });
    const double p2 = best_ms(repeats, [&] { kernels::weighted_sum(views, wts, w1); });
    row("weighted_sum 20 x 20000", s2, p2, w1 == w2);
  }

  federation::ExperimentConfig config;
  config.hidden = {256, 192};
  config.plan.rounds = 1;
  config.seeds = {1};
  std::vector<double> accs;
  for (int workers : {1, threads}) {
    config.plan.workers = workers;
    federation::ExperimentResult result;
    const double ms = best_ms(1, [&] { result = federation::run_experiment(config); });
    accs.push_back(result.runs[0].rounds.back().agg_acc);
    std::printf("kta_v2 round, %d worker(s)     %10.1f ms\n", workers, ms);
  }
  std::printf("round results %s\n", accs[0] == accs[1] ? "identical" : "MISMATCH");
}
