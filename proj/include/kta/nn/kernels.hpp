#pragma once

#include <cstddef>
#include <span>

// Dense kernels used by the training and market code. The default namespace
// holds OpenMP-parallel versions; kta::kernels::serial holds plain loop
// references used by the tests and the benchmark. Both sum every output
// element over the reduction index in increasing order, so the parallel
// results are bit-identical to the serial ones for any thread count.
//
// All matrices are row-major. Dimensions are given as (rows, cols).

namespace kta::kernels {

// y[m x n] = x[m x k] * w[n x k]^T (+ bias[n] when non-empty).
void gemm_nt(std::span<const double> x, std::span<const double> w, std::span<const double> bias,
             std::span<double> y, std::size_t m, std::size_t n, std::size_t k);

// out[n x k] = a[m x n]^T * b[m x k].
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k);

// out[m x k] = a[m x n] * b[n x k].
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k);

// out[n] = column sums of a[m x n].
void column_sums(std::span<const double> a, std::span<double> out, std::size_t m, std::size_t n);

// Gram matrix g[c x c] of the rows of v[c x len]; symmetric by construction.
void gram(std::span<const double> v, std::span<double> g, std::size_t c, std::size_t len);

// out[len] = sum_j weights[j] * inputs[j][len], terms added in j order.
void weighted_sum(std::span<const std::span<const double>> inputs, std::span<const double> weights,
                  std::span<double> out);

namespace serial {
void gemm_nt(std::span<const double> x, std::span<const double> w, std::span<const double> bias,
             std::span<double> y, std::size_t m, std::size_t n, std::size_t k);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k);
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k);
void column_sums(std::span<const double> a, std::span<double> out, std::size_t m, std::size_t n);
void gram(std::span<const double> v, std::span<double> g, std::size_t c, std::size_t len);
void weighted_sum(std::span<const std::span<const double>> inputs, std::span<const double> weights,
                  std::span<double> out);
}  // namespace serial

}  // namespace kta::kernels
