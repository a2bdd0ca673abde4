#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace offsetctrl::kernels {

// Data-parallel grid primitives used by the frequency scans, offset sweeps
// and level searches.  Each primitive has a serial reference implementation
// and an OpenMP variant; the two are required (and tested) to produce
// identical results, since every grid point is computed independently and
// max/argmax reductions are exact regardless of evaluation order.

struct GridMax {
  std::size_t index = 0;
  double value = 0.0;
};

/// Serial reference: evaluate f on [0, count) and return max and argmax.
/// Ties resolve to the smallest index.
template <typename F>
GridMax grid_max_serial(std::size_t count, F&& f) {
  GridMax best;
  best.value = -1.0 / 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = f(i);
    if (v > best.value) {
      best.value = v;
      best.index = i;
    }
  }
  return best;
}

/// OpenMP variant of grid_max_serial with the same tie-breaking contract.
template <typename F>
GridMax grid_max_parallel(std::size_t count, F&& f) {
#ifdef _OPENMP
  GridMax best;
  best.value = -1.0 / 0.0;
#pragma omp parallel
  {
    GridMax local;
    local.value = -1.0 / 0.0;
#pragma omp for nowait schedule(static)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      const double v = f(static_cast<std::size_t>(i));
      if (v > local.value) {
        local.value = v;
        local.index = static_cast<std::size_t>(i);
      }
    }
#pragma omp critical
    {
      if (local.value > best.value ||
          (local.value == best.value && local.index < best.index)) {
        best = local;
      }
    }
  }
  return best;
#else
  return grid_max_serial(count, std::forward<F>(f));
#endif
}

/// Serial reference: out[i] = f(i) for i in [0, count).
template <typename T, typename F>
std::vector<T> grid_map_serial(std::size_t count, F&& f) {
  std::vector<T> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = f(i);
  }
  return out;
}

/// OpenMP variant of grid_map_serial.
template <typename T, typename F>
std::vector<T> grid_map_parallel(std::size_t count, F&& f) {
  std::vector<T> out(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  }
#else
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = f(i);
  }
#endif
  return out;
}

/// Dispatchers used by library code: parallel when compiled with OpenMP.
template <typename F>
GridMax grid_max(std::size_t count, F&& f) {
  return grid_max_parallel(count, std::forward<F>(f));
}

template <typename T, typename F>
std::vector<T> grid_map(std::size_t count, F&& f) {
  return grid_map_parallel<T>(count, std::forward<F>(f));
}

}  // namespace offsetctrl::kernels
