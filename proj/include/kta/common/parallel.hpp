#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace kta {

// Runs fn(i) for i in [0, n) on up to `workers` OpenMP threads (0 = runtime
// default). An exception thrown by any iteration is rethrown on the calling
// thread after the loop; when several iterations throw, the lowest index
// wins so the reported error does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  auto body = [&](std::ptrdiff_t i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (workers == 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  } else if (workers > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace kta
