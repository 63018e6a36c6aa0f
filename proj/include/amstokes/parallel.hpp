#pragma once

#include <cstddef>

namespace amstokes {

/// Execution policy for the element-wise kernels. Serial is the reference
/// path; Parallel runs the same per-element work under OpenMP. Both fill
/// per-element slots, so results are identical bit for bit.
enum class Exec { Serial, Parallel };

template <typename Fn>
void for_each_element(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace amstokes
