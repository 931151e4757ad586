#pragma once

// Floating-point lattice geometry: LLL reduction with a tracked unimodular
// transform and Schnorr-Euchner enumeration of lattice points in a ball.

#include <cmath>
#include <cstdint>
#include <vector>

#include "coverlab/errors.hpp"

namespace coverlab::geom {

using Vec = std::vector<double>;

/// Column basis b_0..b_{n-1} of R^n stored as basis[j][i] = i-th coordinate of b_j.
struct ReducedBasis {
  std::size_t n = 0;
  std::vector<Vec> b;                       // reduced basis vectors
  std::vector<std::vector<std::int64_t>> u;  // b_j = sum_k u[j][k] * original_k
  std::vector<Vec> mu;                      // Gram-Schmidt coefficients, mu[i][j] for j < i
  Vec bstar_sq;                             // |b*_i|^2
  std::vector<Vec> bstar;                   // Gram-Schmidt vectors
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void gram_schmidt(ReducedBasis& r) {
  const std::size_t n = r.n;
  r.bstar = r.b;
  r.mu.assign(n, Vec(n, 0.0));
  r.bstar_sq.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      r.mu[i][j] = dot(r.b[i], r.bstar[j]) / r.bstar_sq[j];
      for (std::size_t k = 0; k < n; ++k) r.bstar[i][k] -= r.mu[i][j] * r.bstar[j][k];
    }
    r.bstar_sq[i] = dot(r.bstar[i], r.bstar[i]);
    if (!(r.bstar_sq[i] > 0)) throw PreconditionError("gram_schmidt: basis is (numerically) singular");
  }
}

/// LLL with parameter delta (0.99). Gram-Schmidt data is recomputed after each
/// swap, which is plenty for n <= 12.
inline ReducedBasis lll_reduce(const std::vector<Vec>& basis, double delta = 0.99) {
  ReducedBasis r;
  r.n = basis.size();
  r.b = basis;
  r.u.assign(r.n, std::vector<std::int64_t>(r.n, 0));
  for (std::size_t i = 0; i < r.n; ++i) r.u[i][i] = 1;
  if (r.n == 0) return r;
  gram_schmidt(r);
  auto size_reduce = [&](std::size_t k, std::size_t j) {
    const double q = std::round(r.mu[k][j]);
    if (q == 0) return;
    if (std::abs(q) > 9e15) throw ConvergenceError("lll_reduce: transform coefficient overflow");
    const auto qi = static_cast<std::int64_t>(q);
    for (std::size_t i = 0; i < r.n; ++i) {
      r.b[k][i] -= q * r.b[j][i];
      r.u[k][i] -= qi * r.u[j][i];
    }
    for (std::size_t l = 0; l < j; ++l) r.mu[k][l] -= q * r.mu[j][l];
    r.mu[k][j] -= q;
  };
  std::size_t k = 1;
  std::size_t iterations = 0;
  while (k < r.n) {
    if (++iterations > 1'000'000) throw ConvergenceError("lll_reduce: no convergence");
    for (std::size_t j = k; j-- > 0;) size_reduce(k, j);
    if (r.bstar_sq[k] >= (delta - r.mu[k][k - 1] * r.mu[k][k - 1]) * r.bstar_sq[k - 1]) {
      ++k;
    } else {
      std::swap(r.b[k], r.b[k - 1]);
      std::swap(r.u[k], r.u[k - 1]);
      gram_schmidt(r);
      k = k > 1 ? k - 1 : 1;
    }
  }
  gram_schmidt(r);
  return r;
}

/// Visits every lattice vector v = sum y_j b_j with |x - v|^2 <= radius_sq.
/// The visitor receives (y, dist_sq) with y in reduced-basis coefficients and
/// returns the radius_sq to continue with, which may only shrink.
template <class Visitor>
void enumerate_ball(const ReducedBasis& r, const Vec& x, double radius_sq, Visitor&& visit) {
  const std::size_t n = r.n;
  if (n == 0) return;
  Vec t(n);  // x in Gram-Schmidt coordinates
  for (std::size_t i = 0; i < n; ++i) t[i] = dot(x, r.bstar[i]) / r.bstar_sq[i];

  std::vector<std::int64_t> y(n, 0), base(n, 0), step(n, 0), dir(n, 0);
  Vec center(n), partial(n + 1, 0.0);
  double bound = radius_sq;

  auto start_level = [&](std::size_t i) {
    double c = t[i];
    for (std::size_t j = i + 1; j < n; ++j) c -= r.mu[j][i] * static_cast<double>(y[j]);
    center[i] = c;
    base[i] = std::llround(c);
    dir[i] = c >= static_cast<double>(base[i]) ? 1 : -1;
    step[i] = 0;
    y[i] = base[i];
  };
  // Zigzag base, base+dir, base-dir, base+2dir, ...: |center - y| is nondecreasing,
  // so the first candidate outside the ball ends the level.
  auto next_candidate = [&](std::size_t i) {
    const std::int64_t s = ++step[i];
    const std::int64_t off = (s + 1) / 2;
    y[i] = base[i] + ((s & 1) ? dir[i] * off : -dir[i] * off);
  };

  std::size_t i = n - 1;
  start_level(i);
  for (;;) {
    const double diff = center[i] - static_cast<double>(y[i]);
    const double val = partial[i + 1] + diff * diff * r.bstar_sq[i];
    if (val <= bound * (1 + 1e-12)) {
      if (i > 0) {
        partial[i] = val;
        start_level(--i);
        continue;
      }
      bound = visit(static_cast<const std::vector<std::int64_t>&>(y), val);
      next_candidate(0);
    } else {
      if (i + 1 == n) return;
      next_candidate(++i);
    }
  }
}

}  // namespace coverlab::geom
