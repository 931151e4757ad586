#pragma once

// Binomial confidence intervals, two-sample Kolmogorov-Smirnov, chi-square.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "coverlab/errors.hpp"

namespace coverlab::stats {

struct Interval {
  double lo = 0, hi = 1;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
inline Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double level = 0.99) {
  require(n >= 1 && k <= n, "clopper_pearson: need 0 <= k <= n, n >= 1");
  require(level > 0 && level < 1, "clopper_pearson: level must lie in (0, 1)");
  const double alpha = 1 - level;
  Interval ci;
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  ci.lo = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(kd, nd - kd + 1), alpha / 2);
  ci.hi = k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(kd + 1, nd - kd), 1 - alpha / 2);
  return ci;
}

/// Kolmogorov distribution survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 1.18) {
    // Small-lambda form: 1 - sqrt(2 pi)/lambda sum e^{-(2j-1)^2 pi^2 / (8 lambda^2)}.
    const double y = std::exp(-M_PI * M_PI / (8 * lambda * lambda));
    double s = 0;
    for (int j = 1; j <= 7; ++j) s += std::pow(y, (2 * j - 1) * (2 * j - 1));
    return std::clamp(1.0 - std::sqrt(2 * M_PI) / lambda * s, 0.0, 1.0);
  }
  double sum = 0, sign = 1;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0;  // sup |F_a - F_b|
  double p_value = 1;    // asymptotic
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: samples must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  return {d, kolmogorov_q((root + 0.12 + 0.11 / root) * d)};
}

/// Upper tail P(chi^2_dof > x).
inline double chi_square_sf(double x, double dof) {
  require(dof > 0, "chi_square_sf: dof must be positive");
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2, x / 2);
}

}  // namespace coverlab::stats
