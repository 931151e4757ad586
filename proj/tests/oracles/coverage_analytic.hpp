#pragma once

// Independent references for coverage and covering radii: the disk-in-square
// area on Z^2 (closed form and midpoint quadrature) and a dense-grid covering
// radius in dimension 3 built on the boxed CVP oracle.

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles/lattice_box.hpp"

namespace oracle {

/// Area of B(0, r) inside [-1/2, 1/2]^2, i.e. the covered fraction of Z^2 + B(0, r).
inline double disk_coverage(double r) {
  if (r <= 0.5) return M_PI * r * r;
  if (r >= std::sqrt(0.5)) return 1.0;
  const double segment = r * r * std::acos(0.5 / r) - 0.25 * std::sqrt(4 * r * r - 1);
  return M_PI * r * r - 4 * segment;
}

/// Same area by midpoint quadrature in x of the clipped chord length.
inline double disk_coverage_quadrature(double r, int steps = 200000) {
  double s = 0;
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const double x = -0.5 + (i + 0.5) * h;
    if (std::abs(x) >= r) continue;
    s += std::min(2 * std::sqrt(r * r - x * x), 1.0) * h;
  }
  return s;
}

/// Max over a pitch-1/steps grid of cell coordinates of dist(x, L), then a
/// shrinking pattern search around the best few grid points.
inline double grid_covering_radius(const M3& b, int steps = 64) {
  double r0 = 0;
  for (int j = 0; j < 3; ++j) r0 += b[0][j] * b[0][j] + b[1][j] * b[1][j] + b[2][j] * b[2][j];
  r0 = 0.5 * std::sqrt(r0) * 1.0001;
  auto dist = [&](const V3& x) { return box_search(b, x, r0, false)->dist; };
  auto point = [&](double u0, double u1, double u2) {
    V3 x{};
    for (int i = 0; i < 3; ++i) x[i] = b[i][0] * u0 + b[i][1] * u1 + b[i][2] * u2;
    return x;
  };
  std::vector<std::pair<double, V3>> best;
  for (int a = 0; a < steps; ++a)
    for (int c = 0; c < steps; ++c)
      for (int e = 0; e < steps; ++e) {
        const V3 x = point(double(a) / steps, double(c) / steps, double(e) / steps);
        best.emplace_back(dist(x), x);
        if (best.size() > 64) {
          std::partial_sort(best.begin(), best.begin() + 8, best.end(),
                            [](const auto& p, const auto& q) { return p.first > q.first; });
          best.resize(8);
        }
      }
  std::partial_sort(best.begin(), best.begin() + 8, best.end(),
                    [](const auto& p, const auto& q) { return p.first > q.first; });
  best.resize(8);
  double top = best.front().first;
  for (auto [d, x] : best) {
    double step = 1.0 / steps;
    while (step > 1e-7) {
      bool moved = false;
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            const V3 y{x[0] + dx * step, x[1] + dy * step, x[2] + dz * step};
            const double dy_ = dist(y);
            if (dy_ > d) {
              d = dy_;
              x = y;
              moved = true;
            }
          }
      if (!moved) step /= 2;
    }
    top = std::max(top, d);
  }
  return top;
}

}  // namespace oracle
