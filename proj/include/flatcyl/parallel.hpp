#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>

#include <omp.h>

namespace flatcyl {

// serial is the reference path; parallel must reproduce it bit for bit.
enum class exec { serial, parallel };

// Runs f(i) for i in [0, n). Results must be stored by index so the
// outcome does not depend on scheduling. The exception of the lowest
// failing index is rethrown.
template <class F>
void for_each_index(std::size_t n, exec e, F&& f) {
  if (e == exec::serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr first;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      f(i);
    } catch (...) {
#pragma omp critical(flatcyl_for_each_index)
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

inline int worker_count() { return omp_get_max_threads(); }

}  // namespace flatcyl
