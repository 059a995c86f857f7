#pragma once

// Sample grids and per-point sweeps.
//
// `sweep` evaluates a pure per-point function with OpenMP; `sweep_serial` is
// the reference implementation. Both return results in grid order, and every
// reduction in the library runs over that vector serially, so the two paths
// produce bitwise-identical verdicts regardless of thread count.

#include <exception>
#include <vector>

#include "dualgeo/types.hpp"

namespace dualgeo {

struct GridSpec {
  Vec lo;
  Vec hi;
  int per_axis = 5;
};

/// Uniform tensor-product grid including the box corners; last axis varies fastest.
std::vector<Point> grid_points(const GridSpec& spec);

/// Number of worker threads OpenMP will use (1 when built without OpenMP).
int parallel_workers();

template <class R, class F>
std::vector<R> sweep_serial(const std::vector<Point>& points, F&& f) {
  std::vector<R> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(f(p));
  return out;
}

template <class R, class F>
std::vector<R> sweep(const std::vector<Point>& points, F&& f) {
  const long count = static_cast<long>(points.size());
  std::vector<R> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(points[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  // Rethrow the failure at the lowest grid index so errors are deterministic too.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Serial in-order maximum of a per-point scalar.
template <class T, class Key>
double max_over(const std::vector<T>& items, Key&& key) {
  double m = 0.0;
  for (const auto& it : items) {
    const double v = key(it);
    if (!(v <= m)) m = v;  // NaN propagates
  }
  return m;
}

}  // namespace dualgeo
