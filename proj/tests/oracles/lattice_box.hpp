#pragma once

// Boxed brute-force SVP/CVP in dimension 3. Coefficient boxes come from the
// dual basis: |c_i - t_i| <= R * |d_i| for any point within distance R, where d_i
// are the rows of B^{-1}. No reduction is involved.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

namespace oracle {

using M3 = std::array<std::array<double, 3>, 3>;  // M[i][j]: row i, column j; columns are generators
using V3 = std::array<double, 3>;

inline M3 inverse3(const M3& m) {
  M3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      c[j][i] = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];  // adjugate
    }
  const double det = m[0][0] * c[0][0] + m[0][1] * c[1][0] + m[0][2] * c[2][0];
  for (auto& row : c)
    for (auto& x : row) x /= det;
  return c;
}

struct BoxResult {
  double dist;
  std::array<long, 3> coeffs;
};

/// Minimum of |x - B c| over c in a provable box; skip_zero excludes c = 0.
/// Returns nullopt when the box would exceed `max_points`.
inline std::optional<BoxResult> box_search(const M3& b, const V3& x, double radius, bool skip_zero,
                                           double max_points = 2e7) {
  const M3 inv = inverse3(b);
  std::array<long, 3> lo{}, hi{};
  double count = 1;
  for (int i = 0; i < 3; ++i) {
    const double t = inv[i][0] * x[0] + inv[i][1] * x[1] + inv[i][2] * x[2];
    const double dn = std::sqrt(inv[i][0] * inv[i][0] + inv[i][1] * inv[i][1] + inv[i][2] * inv[i][2]);
    lo[i] = static_cast<long>(std::floor(t - radius * dn)) - 1;
    hi[i] = static_cast<long>(std::ceil(t + radius * dn)) + 1;
    count *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (count > max_points) return std::nullopt;
  BoxResult best{std::numeric_limits<double>::infinity(), {0, 0, 0}};
  for (long a = lo[0]; a <= hi[0]; ++a)
    for (long c = lo[1]; c <= hi[1]; ++c)
      for (long e = lo[2]; e <= hi[2]; ++e) {
        if (skip_zero && a == 0 && c == 0 && e == 0) continue;
        double d2 = 0;
        for (int i = 0; i < 3; ++i) {
          const double v = b[i][0] * a + b[i][1] * c + b[i][2] * e - x[i];
          d2 += v * v;
        }
        if (d2 < best.dist) best = {d2, {a, c, e}};
      }
  best.dist = std::sqrt(best.dist);
  return best;
}

inline double column_length(const M3& b, int j) {
  return std::sqrt(b[0][j] * b[0][j] + b[1][j] * b[1][j] + b[2][j] * b[2][j]);
}

}  // namespace oracle
