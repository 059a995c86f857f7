#include "dualgeo/grid.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dualgeo {

std::vector<Point> grid_points(const GridSpec& spec) {
  const int n = static_cast<int>(spec.lo.size());
  if (spec.per_axis < 1) throw Error("grid needs at least one point per axis");
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(spec.per_axis);
  std::vector<Point> pts;
  pts.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t c = 0; c < total; ++c) {
    Point p(n);
    for (int i = 0; i < n; ++i) {
      const double t = spec.per_axis == 1 ? 0.5 : static_cast<double>(idx[i]) / (spec.per_axis - 1);
      p[i] = spec.lo[i] + t * (spec.hi[i] - spec.lo[i]);
    }
    pts.push_back(p);
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < spec.per_axis) break;
      idx[i] = 0;
    }
  }
  return pts;
}

int parallel_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dualgeo
