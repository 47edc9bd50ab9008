#include "kta/nn/kernels.hpp"

#include <algorithm>

#include "kta/common/error.hpp"

namespace kta::kernels {

namespace {

// Below this many multiply-adds a region is not worth forking.
constexpr std::size_t kParallelWork = 1 << 15;

void check_dims(std::size_t have, std::size_t want, const char* what) {
  KTA_REQUIRE(have == want, std::string("kernel dimension mismatch: ") + what);
}

}  // namespace

void gemm_nt(std::span<const double> x, std::span<const double> w, std::span<const double> bias,
             std::span<double> y, std::size_t m, std::size_t n, std::size_t k) {
  check_dims(x.size(), m * k, "gemm_nt x");
  check_dims(w.size(), n * k, "gemm_nt w");
  check_dims(y.size(), m * n, "gemm_nt y");
  KTA_REQUIRE(bias.empty() || bias.size() == n, "gemm_nt bias");
  const bool par = m * n * k >= kParallelWork;
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double* xi = x.data() + i * static_cast<std::ptrdiff_t>(k);
    double* yi = y.data() + i * static_cast<std::ptrdiff_t>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double* wj = w.data() + j * k;
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += xi[l] * wj[l];
      yi[j] = bias.empty() ? acc : acc + bias[j];
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k) {
  check_dims(a.size(), m * n, "gemm_tn a");
  check_dims(b.size(), m * k, "gemm_tn b");
  check_dims(out.size(), n * k, "gemm_tn out");
  const bool par = m * n * k >= kParallelWork;
  const auto out_rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t j = 0; j < out_rows; ++j) {
    double* oj = out.data() + j * static_cast<std::ptrdiff_t>(k);
    std::fill(oj, oj + k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double aij = a[i * n + static_cast<std::size_t>(j)];
      const double* bi = b.data() + i * k;
      for (std::size_t l = 0; l < k; ++l) oj[l] += aij * bi[l];
    }
  }
}

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k) {
  check_dims(a.size(), m * n, "gemm_nn a");
  check_dims(b.size(), n * k, "gemm_nn b");
  check_dims(out.size(), m * k, "gemm_nn out");
  const bool par = m * n * k >= kParallelWork;
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* oi = out.data() + i * static_cast<std::ptrdiff_t>(k);
    const double* ai = a.data() + i * static_cast<std::ptrdiff_t>(n);
    std::fill(oi, oi + k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double aij = ai[j];
      const double* bj = b.data() + j * k;
      for (std::size_t l = 0; l < k; ++l) oi[l] += aij * bj[l];
    }
  }
}

void column_sums(std::span<const double> a, std::span<double> out, std::size_t m, std::size_t n) {
  check_dims(a.size(), m * n, "column_sums a");
  check_dims(out.size(), n, "column_sums out");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += a[i * n + j];
}

void gram(std::span<const double> v, std::span<double> g, std::size_t c, std::size_t len) {
  check_dims(v.size(), c * len, "gram v");
  check_dims(g.size(), c * c, "gram g");
  const bool par = c * c * len / 2 >= kParallelWork;
  const auto count = static_cast<std::ptrdiff_t>(c);
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double* vi = v.data() + ui * len;
    for (std::size_t j = ui; j < c; ++j) {
      const double* vj = v.data() + j * len;
      double acc = 0.0;
      for (std::size_t l = 0; l < len; ++l) acc += vi[l] * vj[l];
      g[ui * c + j] = acc;
      g[j * c + ui] = acc;
    }
  }
}

void weighted_sum(std::span<const std::span<const double>> inputs, std::span<const double> weights,
                  std::span<double> out) {
  check_dims(inputs.size(), weights.size(), "weighted_sum weights");
  for (const auto& in : inputs) check_dims(in.size(), out.size(), "weighted_sum input");
  const auto len = static_cast<std::ptrdiff_t>(out.size());
  const bool par = out.size() * inputs.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t l = 0; l < len; ++l) {
    double acc = 0.0;
    for (std::size_t j = 0; j < inputs.size(); ++j) acc += weights[j] * inputs[j][static_cast<std::size_t>(l)];
    out[static_cast<std::size_t>(l)] = acc;
  }
}

namespace serial {

void gemm_nt(std::span<const double> x, std::span<const double> w, std::span<const double> bias,
             std::span<double> y, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += x[i * k + l] * w[j * k + l];
      y[i * n + j] = bias.empty() ? acc : acc + bias[j];
    }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < k; ++l) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += a[i * n + j] * b[i * k + l];
      out[j * k + l] = acc;
    }
}

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j] * b[j * k + l];
      out[i * k + l] = acc;
    }
}

void column_sums(std::span<const double> a, std::span<double> out, std::size_t m, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += a[i * n + j];
    out[j] = acc;
  }
}

void gram(std::span<const double> v, std::span<double> g, std::size_t c, std::size_t len) {
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t lo = std::min(i, j), hi = std::max(i, j);
      double acc = 0.0;
      for (std::size_t l = 0; l < len; ++l) acc += v[lo * len + l] * v[hi * len + l];
      g[i * c + j] = acc;
    }
}

void weighted_sum(std::span<const std::span<const double>> inputs, std::span<const double> weights,
                  std::span<double> out) {
  for (std::size_t l = 0; l < out.size(); ++l) {
    double acc = 0.0;
    for (std::size_t j = 0; j < inputs.size(); ++j) acc += weights[j] * inputs[j][l];
    out[l] = acc;
  }
}

}  // namespace serial

}  // namespace kta::kernels
