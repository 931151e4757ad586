#pragma once

// Coverage of R^n by lattice translates of a convex body: uncovered fraction,
// covering and packing densities, the half-to-full check, the dilation trial
// built on Hecke lifts, and the closed-form bound calculators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coverlab/convex_body.hpp"
#include "coverlab/errors.hpp"
#include "coverlab/ffield.hpp"
#include "coverlab/lattice.hpp"
#include "coverlab/parallel.hpp"
#include "coverlab/reduction.hpp"
#include "coverlab/rng.hpp"
#include "coverlab/stats.hpp"

namespace coverlab::cover {

using geom::ConvexBody;
using geom::Vec;
using lat::Lattice;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min over l in L of g_K(x - l), by enumerating lattice points within
/// Euclidean distance R * (best so far) of x. Not thread-safe (scratch space).
class GaugeDistance {
 public:
  GaugeDistance(const ConvexBody& k, const Lattice& l) : k_(k), r_(l.reduced()), n_(l.dim()), diff_(n_) {
    if (k.dim() != n_) throw PreconditionError("gauge distance: body and lattice dimensions differ");
    if (n_ > lat::kMaxEnumerationDim) throw CapExceeded("gauge distance: dimension above enumeration cap");
  }

  double operator()(const Vec& x) {
    double best = kInf;
    const double R = k_.circumradius();
    geom::enumerate_ball(r_, x, kInf, [&](const std::vector<std::int64_t>& y, double) {
      const double g = gauge_to(x, y);
      if (g < best) best = g;
      return best * R * best * R;
    });
    return best;
  }

  /// Is x in L + tK? Stops at the first witness.
  bool covered(const Vec& x, double t) {
    bool hit = false;
    const double rad = t * k_.circumradius();
    geom::enumerate_ball(r_, x, rad * rad, [&](const std::vector<std::int64_t>& y, double) {
      if (gauge_to(x, y) <= t) {
        hit = true;
        return -1.0;
      }
      return rad * rad;
    });
    return hit;
  }

  /// Uniform point of the fundamental cell of the reduced basis.
  Vec sample_cell(Rng& rng) const {
    Vec x(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double u = rng.uniform01();
      for (std::size_t i = 0; i < n_; ++i) x[i] += u * r_.b[j][i];
    }
    return x;
  }

  const geom::ReducedBasis& basis() const noexcept { return r_; }

 private:
  double gauge_to(const Vec& x, const std::vector<std::int64_t>& y) {
    for (std::size_t i = 0; i < n_; ++i) diff_[i] = x[i];
    for (std::size_t j = 0; j < n_; ++j) {
      if (y[j] == 0) continue;
      const double c = static_cast<double>(y[j]);
      for (std::size_t i = 0; i < n_; ++i) diff_[i] -= c * r_.b[j][i];
    }
    return k_.gauge(diff_.data());
  }

  const ConvexBody& k_;
  const geom::ReducedBasis& r_;
  std::size_t n_;
  Vec diff_;
};

inline double covolume(const Lattice& l) { return std::abs(to_double(l.covolume())); }

// ---------------------------------------------------------------------------

struct CoverageReport {
  std::string body;
  std::size_t dim = 0;
  std::uint64_t samples = 0;
  std::uint64_t uncovered = 0;
  double uncovered_fraction = 0;
  stats::Interval ci;
  double level = 0.99;
  std::uint64_t seed = 0;
};

struct CoverageOptions {
  double level = 0.99;
  unsigned threads = 1;
};

inline constexpr std::uint64_t kBatch = 2048;

/// Estimate of eps(J, L) = 1 - m_L(pi_L(J)).
inline CoverageReport coverage_fraction(const ConvexBody& j, const Lattice& l, std::uint64_t samples, Rng& rng,
                                        const CoverageOptions& opt = {}) {
  require(samples >= 1, "coverage_fraction: need at least one sample");
  if (l.dim() > lat::kMaxEnumerationDim) throw CapExceeded("coverage_fraction: dimension above enumeration cap");
  if (j.dim() != l.dim()) throw PreconditionError("coverage_fraction: body and lattice dimensions differ");
  const std::uint64_t seed = rng.next_u64();
  const std::size_t batches = static_cast<std::size_t>((samples + kBatch - 1) / kBatch);
  std::vector<std::uint64_t> miss(batches, 0);
  l.reduced();
  parallel_for(batches, opt.threads, [&](std::size_t b) {
    GaugeDistance gd(j, l);
    Rng local(derive_seed(seed, {b}));
    const std::uint64_t lo = b * kBatch, hi = std::min<std::uint64_t>(samples, lo + kBatch);
    for (std::uint64_t s = lo; s < hi; ++s)
      if (!gd.covered(gd.sample_cell(local), 1.0)) ++miss[b];
  });
  CoverageReport rep;
  rep.body = j.describe();
  rep.dim = j.dim();
  rep.samples = samples;
  rep.uncovered = std::accumulate(miss.begin(), miss.end(), std::uint64_t{0});
  rep.uncovered_fraction = static_cast<double>(rep.uncovered) / static_cast<double>(samples);
  rep.level = opt.level;
  rep.ci = stats::clopper_pearson(rep.uncovered, samples, opt.level);
  rep.seed = seed;
  return rep;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Nelder-Mead maximization of f from x0 with initial edge h.
template <class F>
std::pair<Vec, double> nelder_mead_max(F&& f, const Vec& x0, double h, std::size_t max_evals) {
  const std::size_t n = x0.size();
  std::vector<Vec> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += h;
  std::size_t evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    return -f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) val[i] = eval(pts[i]);
  std::vector<std::size_t> idx(n + 1);
  Vec centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](Vec& out, double t, const Vec& worst) {
    for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + t * (worst[i] - centroid[i]);
  };
  while (evals < max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];
    double size = 0;
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t i = 0; i < n; ++i) size = std::max(size, std::abs(pts[k][i] - pts[best][i]));
    if (size < 1e-11 * (1 + h) || val[worst] - val[best] < 1e-15 * (1 + std::abs(val[best]))) break;
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k)
      if (k != worst)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
    along(xr, -1, pts[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      along(xe, -2, pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      const bool outside = fr < val[worst];
      along(xc, outside ? -0.5 : 0.5, pts[worst]);
      const double fc = eval(xc);
      if (fc < (outside ? fr : val[worst])) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (std::size_t k = 0; k <= n; ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
          val[k] = eval(pts[k]);
        }
      }
    }
  }
  const std::size_t b = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
  return {pts[b], -val[b]};
}

struct ProbeMax {
  double value = -1;
  Vec point;
  std::vector<std::pair<double, Vec>> top;  // largest distances, descending
};

/// Gauge distances of `count` uniform cell points; deterministic in `seed`.
inline ProbeMax probe(const ConvexBody& k, const Lattice& l, std::size_t count, std::uint64_t seed, unsigned threads,
                      std::size_t keep = 0) {
  const std::size_t batches = (count + kBatch - 1) / kBatch;
  std::vector<std::vector<std::pair<double, Vec>>> slots(batches);
  parallel_for(batches, threads, [&](std::size_t b) {
    GaugeDistance gd(k, l);
    Rng local(derive_seed(seed, {b}));
    const std::size_t lo = b * kBatch, hi = std::min(count, lo + kBatch);
    auto& out = slots[b];
    for (std::size_t s = lo; s < hi; ++s) {
      Vec x = gd.sample_cell(local);
      const double d = gd(x);
      out.emplace_back(d, std::move(x));
      // Keep the slot small: only the best max(keep,1) survive.
      const std::size_t cap = std::max<std::size_t>(keep, 1);
      if (out.size() > 4 * cap + 16) {
        std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(cap), out.end(),
                          [](const auto& a, const auto& c) { return a.first > c.first; });
        out.resize(cap);
      }
    }
  });
  std::vector<std::pair<double, Vec>> all;
  for (auto& s : slots)
    for (auto& e : s) all.push_back(std::move(e));
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& c) { return a.first > c.first; });
  ProbeMax out;
  if (!all.empty()) {
    out.value = all.front().first;
    out.point = all.front().second;
  }
  all.resize(std::min(all.size(), keep));
  out.top = std::move(all);
  return out;
}

}  // namespace detail

struct CoveringOptions {
  std::size_t probes = 2000;          // Monte-Carlo probes per bisection step
  std::size_t starts = 0;             // local ascents; 0 = 4 + 2n
  std::size_t max_iterations = 200;   // bisection cap
  unsigned threads = 1;
};

struct CoveringResult {
  double theta = 0;        // at r_star
  double r_star = 0;       // midpoint of the bracket
  double r_lower = 0;      // deepest hole found (a true lower bound)
  double r_upper = 0;      // Monte-Carlo upper end
  double theta_lower = 0, theta_upper = 0;
  Vec deepest_hole;
  std::size_t probes_used = 0;
  std::size_t iterations = 0;
  std::size_t ascents = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

/// Theta_K(L) = vol(r* K) / covol(L) with r* the covering dilation, bracketed by a
/// deep-hole lower bound and a Monte-Carlo upper end; rel_tol bounds the
/// relative width of the Theta bracket.
inline CoveringResult covering_density(const ConvexBody& k, const Lattice& l, double rel_tol, Rng& rng,
                                       const CoveringOptions& opt = {}) {
  require(rel_tol > 0, "covering_density: rel_tol must be positive");
  require(opt.probes >= 1, "covering_density: need at least one probe");
  const std::size_t n = l.dim();
  if (n > lat::kMaxEnumerationDim) throw CapExceeded("covering_density: dimension above enumeration cap");
  if (k.dim() != n) throw PreconditionError("covering_density: body and lattice dimensions differ");
  const auto& r = l.reduced();
  const double vol = k.volume(), cov = covolume(l), nd = static_cast<double>(n);
  auto theta_at = [&](double t) { return vol * std::pow(t, nd) / cov; };

  CoveringResult res;
  res.seed = rng.next_u64();
  const std::size_t starts = opt.starts ? opt.starts : 4 + 2 * n;
  double min_len = kInf;
  for (const auto& b : r.b) min_len = std::min(min_len, std::sqrt(geom::dot(b, b)));
  const double h = 0.1 * min_len;
  const std::size_t max_evals = 150 * (n + 1);

  auto ascend = [&](const std::vector<Vec>& from) {
    std::vector<std::pair<Vec, double>> got(from.size());
    parallel_for(from.size(), opt.threads, [&](std::size_t i) {
      GaugeDistance gd(k, l);
      got[i] = detail::nelder_mead_max([&](const Vec& x) { return gd(x); }, from[i], h, max_evals);
    });
    res.ascents += from.size();
    for (auto& [x, v] : got)
      if (v > res.r_lower) {
        res.r_lower = v;
        res.deepest_hole = x;
      }
  };

  // Deep-hole search: ascend from the deepest sampled points.
  auto first = detail::probe(k, l, opt.probes, derive_seed(res.seed, {0}), opt.threads, starts);
  res.probes_used += opt.probes;
  res.r_lower = first.value;
  res.deepest_hole = first.point;
  {
    std::vector<Vec> from;
    for (auto& [d, x] : first.top) from.push_back(x);
    ascend(from);
  }

  double s = 0;
  for (double b2 : r.bstar_sq) s += b2;
  res.r_upper = std::max(res.r_lower, 0.5 * std::sqrt(s) / k.inradius());

  auto width_ok = [&] {
    const double lo = theta_at(res.r_lower), hi = theta_at(res.r_upper);
    return hi - lo <= rel_tol * lo;
  };
  while (!width_ok()) {
    if (res.iterations >= opt.max_iterations) break;
    ++res.iterations;
    const double mid = 0.5 * (res.r_lower + res.r_upper);
    auto pm = detail::probe(k, l, opt.probes, derive_seed(res.seed, {res.iterations}), opt.threads, 1);
    res.probes_used += opt.probes;
    if (pm.value > mid) {
      if (pm.value > res.r_lower) {
        res.r_lower = pm.value;
        res.deepest_hole = pm.point;
      }
      ascend({pm.point});
      res.r_upper = std::max(res.r_upper, res.r_lower);
    } else {
      res.r_upper = std::max(mid, res.r_lower);
    }
  }
  res.converged = width_ok();
  res.r_star = 0.5 * (res.r_lower + res.r_upper);
  res.theta = theta_at(res.r_star);
  res.theta_lower = theta_at(res.r_lower);
  res.theta_upper = theta_at(res.r_upper);
  return res;
}

// ---------------------------------------------------------------------------

struct PackingResult {
  double delta = 0;
  double r_max = 0;
  Vec shortest;  // nonzero lattice vector attaining the minimal gauge
};

/// Largest r with the translates l + rK pairwise interior-disjoint:
/// r_max = min over v != 0 of g_{K-K}(v) = min g_K(v) / 2 for symmetric K.
inline PackingResult packing_density(const ConvexBody& k, const Lattice& l) {
  const std::size_t n = l.dim();
  if (n > lat::kMaxEnumerationDim) throw CapExceeded("packing_density: dimension above enumeration cap");
  if (k.dim() != n) throw PreconditionError("packing_density: body and lattice dimensions differ");
  if (!k.symmetric()) throw PreconditionError("packing_density: body must be centrally symmetric");
  const auto& r = l.reduced();
  PackingResult out;
  double best = kInf;
  for (const auto& b : r.b) {
    const double g = k.gauge(b);
    if (g < best) {
      best = g;
      out.shortest = b;
    }
  }
  const double R = k.circumradius();
  Vec v(n);
  geom::enumerate_ball(r, Vec(n, 0.0), best * R * best * R, [&](const std::vector<std::int64_t>& y, double) {
    if (std::all_of(y.begin(), y.end(), [](std::int64_t c) { return c == 0; })) return best * R * best * R;
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) v[i] += static_cast<double>(y[j]) * r.b[j][i];
    const double g = k.gauge(v);
    if (g < best) {
      best = g;
      out.shortest = v;
    }
    return best * R * best * R;
  });
  out.r_max = best / 2;
  out.delta = k.volume() * std::pow(out.r_max, static_cast<double>(n)) / covolume(l);
  return out;
}

// ---------------------------------------------------------------------------

struct HalfToFull {
  CoverageReport coverage;  // of K itself
  bool premise_ok = false;  // coverage > 1/2 with the whole interval
  bool conclusion_ok = false;
  std::uint64_t probes = 0;
  std::uint64_t uncovered_probes = 0;  // by L + 2K
};

/// Statistical check of: m_L(pi_L(K)) > 1/2 implies L + 2K = R^n.
inline HalfToFull half_to_full_check(const ConvexBody& k, const Lattice& l, std::uint64_t probes, Rng& rng,
                                     std::uint64_t coverage_samples = 20000, const CoverageOptions& opt = {}) {
  require(probes >= 1, "half_to_full_check: need at least one probe");
  HalfToFull out;
  out.coverage = coverage_fraction(k, l, coverage_samples, rng, opt);
  out.premise_ok = out.coverage.ci.hi < 0.5;
  out.probes = probes;
  const std::uint64_t seed = rng.next_u64();
  const std::size_t batches = static_cast<std::size_t>((probes + kBatch - 1) / kBatch);
  std::vector<std::uint64_t> miss(batches, 0);
  parallel_for(batches, opt.threads, [&](std::size_t b) {
    GaugeDistance gd(k, l);
    Rng local(derive_seed(seed, {b}));
    const std::uint64_t lo = b * kBatch, hi = std::min<std::uint64_t>(probes, lo + kBatch);
    for (std::uint64_t s = lo; s < hi; ++s)
      if (!gd.covered(gd.sample_cell(local), 2.0)) ++miss[b];
  });
  out.uncovered_probes = std::accumulate(miss.begin(), miss.end(), std::uint64_t{0});
  out.conclusion_ok = out.uncovered_probes == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form calculators.

/// eta_n = (n/4) log(27/16) - 3 log n.
inline double rogers_eta(double n) {
  require(n >= 1, "rogers_eta: n must be at least 1");
  return n / 4 * std::log(27.0 / 16.0) - 3 * std::log(n);
}

/// (1/kappa)(e^{-V} + c_rog e^{-eta_n}); c_rog is the caller's choice.
inline double rogers_tail_bound(double n, double V, double kappa, double c_rog) {
  require(V > 0 && kappa > 0, "rogers_tail_bound: V and kappa must be positive");
  return (std::exp(-V) + c_rog * std::exp(-rogers_eta(n))) / kappa;
}

/// zeta(s) for s > 1: partial sum plus an Euler-Maclaurin tail.
inline double riemann_zeta(double s) {
  require(s > 1, "riemann_zeta: series diverges for s <= 1");
  constexpr int kTerms = 64;
  double sum = 0;
  for (int k = kTerms - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double N = kTerms;
  // sum_{k >= N} k^{-s} = N^{1-s}/(s-1) + N^{-s}/2 + sum_j B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}
  double tail = std::pow(N, 1 - s) / (s - 1) + 0.5 * std::pow(N, -s);
  static constexpr double kB[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730};
  double rising = s, fact = 2;
  for (int j = 1; j <= 6; ++j) {
    tail += kB[j - 1] / fact * rising * std::pow(N, -s - 2 * j + 1);
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    fact *= (2 * j + 1) * (2 * j + 2);
  }
  return sum + tail;
}

struct KmTail {
  double value = 0;
  double first_term = 0;
  double second_term = 0;  // subtracted; zero when unavailable
  bool second_term_available = false;
};

/// Lower bound V_n t^n / (2 zeta(n)) - V_n^2 t^{2n} / (4 zeta(n-1) zeta(n)) for
/// mu_n(lambda_1 < t). zeta(1) diverges, so n = 2 returns the first term only.
inline KmTail km_lambda1_tail(std::size_t n, double t) {
  require(n >= 2, "km_lambda1_tail: need n >= 2");
  require(t > 0, "km_lambda1_tail: t must be positive");
  const double nd = static_cast<double>(n), vn = geom::unit_ball_volume(n), zn = riemann_zeta(nd);
  KmTail out;
  out.first_term = vn * std::pow(t, nd) / (2 * zn);
  if (n >= 3) {
    out.second_term = vn * vn * std::pow(t, 2 * nd) / (4 * riemann_zeta(nd - 1) * zn);
    out.second_term_available = true;
  }
  out.value = out.first_term - out.second_term;
  return out;
}

// ---------------------------------------------------------------------------

struct DualGap {
  double lambda1_dual = 0;
  double covrad_lb = 0;       // 1 / (2 lambda1(L*))
  Vec witness;                // u / (2|u|^2) for a shortest dual vector u
  double witness_distance = 0;  // its Euclidean distance to L
};

/// The slab argument: x = u/(2|u|^2) has <u, x - l> in 1/2 + Z for l in L, so
/// dist(x, L) >= 1/(2|u|).
inline DualGap dual_gap_bound(const Lattice& l) {
  if (l.dim() > lat::kMaxEnumerationDim) throw CapExceeded("dual_gap_bound: dimension above enumeration cap");
  const Lattice d = lat::dual(l);
  const auto sv = lat::shortest_vector(d);
  DualGap out;
  out.lambda1_dual = sv.length;
  out.covrad_lb = 1 / (2 * sv.length);
  out.witness = sv.point;
  const double u2 = geom::dot(sv.point, sv.point);
  for (auto& x : out.witness) x /= 2 * u2;
  out.witness_distance = lat::closest_vector(l, out.witness).length;
  return out;
}

// ---------------------------------------------------------------------------

inline std::uint64_t smallest_prime_in(std::uint64_t lo, std::uint64_t hi) {
  for (std::uint64_t p = std::max<std::uint64_t>(lo, 2); p <= hi; ++p)
    if (ff::is_prime(p)) return p;
  throw PreconditionError("smallest_prime_in: no prime in range");
}

struct TrialOptions {
  std::uint64_t sampler_prime = 10007;  // haar_sample's P
  std::uint64_t coverage_samples = 20000;
  std::size_t candidates = 64;          // u's tried for the averaging step
  std::uint64_t probes = 4000;          // final cover check
  std::uint64_t net_cap = 5'000'000;    // p^n above this is refused
  unsigned threads = 1;
};

struct TrialRecord {
  std::size_t n = 0;
  std::uint64_t p = 0;
  double M = 0, V = 0, kappa = 0, eps = 0;
  bool premise_available = false;  // V > 2 log 2
  double eps_hat = 0;              // estimate of eps(J, L)
  stats::Interval eps_ci;
  bool bound_on_hole_ok = false;   // eps(J, L) <= e^{-V/2}
  std::uint64_t grid_uncovered = 0;  // net points of u + (1/p)L outside L' + J
  bool grid_covered = false;
  double dilation = 0;             // max over probes of the J-gauge distance to L'
  bool full_cover_ok = false;      // dilation <= 1 + 2/p
  double volume_ratio = 0;         // vol(dilation J) / (M / p^2)
  Vec u;
  Lattice lattice = Lattice::integer(1);
  Lattice lifted = Lattice::integer(1);
  std::uint64_t seed = 0;

  bool success() const { return bound_on_hole_ok && grid_covered && full_cover_ok; }
};

namespace detail {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  auto label = [&](const std::exception& e) { return std::string(stage) + ": " + e.what(); };
  try {
    return f();
  } catch (const PreconditionError& e) {
    throw PreconditionError(label(e));
  } catch (const CapExceeded& e) {
    throw CapExceeded(label(e));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(label(e));
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(label(e));
  } catch (const Error& e) {
    throw Error(label(e));
  }
}

}  // namespace detail

/// One run of the construction: L ~ haar_sample, J = K scaled to volume
/// V = p^{-2}(1+2/p)^{-n} M, the hole bound, a Hecke lift L' by a random plane
/// S of F_p^n, the grid cover u + (1/p)L in L' + J, and L' + (1+2/p)J = R^n.
inline TrialRecord theorem_main_trial(std::size_t n, const ConvexBody& k, double M, Rng& rng,
                                      const TrialOptions& opt = {}) {
  require(n >= 2 && n <= 8, "theorem_main_trial: need 2 <= n <= 8");
  require(M > 0, "theorem_main_trial: M must be positive");
  require(k.dim() == n, "theorem_main_trial: body dimension differs from n");
  TrialRecord t;
  t.n = n;
  t.M = M;
  t.seed = rng.next_u64();
  const double nd = static_cast<double>(n);
  t.p = smallest_prime_in(n, 2 * n);
  const double pd = static_cast<double>(t.p);
  t.V = M / (pd * pd) * std::pow(1 + 2 / pd, -nd);
  t.kappa = std::exp(-t.V / 2);
  t.eps = std::exp(-t.V / 2) * std::exp(2 * nd / pd);
  t.premise_available = t.V > 2 * std::log(2.0);

  const std::uint64_t net_size = ipow(BigInt(t.p), static_cast<unsigned>(n)) > BigInt(opt.net_cap)
                                     ? 0
                                     : static_cast<std::uint64_t>(std::pow(pd, nd) + 0.5);
  if (net_size == 0) throw CapExceeded("theorem_main_trial: p^n net points above net_cap");

  Rng sampler(derive_seed(t.seed, {1}));
  t.lattice = detail::staged("sample", [&] { return lat::haar_sample(n, opt.sampler_prime, 1, sampler); });
  const ConvexBody j = detail::staged("body", [&] { return k.with_volume(t.V * covolume(t.lattice)); });

  detail::staged("hole bound", [&] {
    Rng r(derive_seed(t.seed, {2}));
    const auto rep = coverage_fraction(j, t.lattice, opt.coverage_samples, r, {0.99, opt.threads});
    t.eps_hat = rep.uncovered_fraction;
    t.eps_ci = rep.ci;
    t.bound_on_hole_ok = t.eps_hat <= t.kappa;
    return 0;
  });

  // Net offsets sum (a_i / p) v_i in geometric coordinates.
  const auto gb = t.lattice.float_basis();
  std::vector<Vec> offsets(net_size, Vec(n, 0.0));
  for (std::uint64_t idx = 0; idx < net_size; ++idx) {
    std::uint64_t rest = idx;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = static_cast<double>(rest % t.p) / pd;
      rest /= t.p;
      for (std::size_t c = 0; c < n; ++c) offsets[idx][c] += a * gb[i][c];
    }
  }
  auto uncovered_net = [&](const Lattice& target, const Vec& u) {
    GaugeDistance gd(j, target);
    std::uint64_t miss = 0;
    Vec x(n);
    for (const auto& off : offsets) {
      for (std::size_t c = 0; c < n; ++c) x[c] = u[c] + off[c];
      if (!gd.covered(x, 1.0)) ++miss;
    }
    return miss;
  };

  // Averaging step: the u whose net meets the fewest holes of L + J.
  detail::staged("averaging", [&] {
    Rng r(derive_seed(t.seed, {3}));
    GaugeDistance gd(j, t.lattice);
    std::vector<Vec> cand(opt.candidates);
    for (auto& c : cand) c = gd.sample_cell(r);
    std::vector<std::uint64_t> miss(cand.size());
    parallel_for(cand.size(), opt.threads, [&](std::size_t i) { miss[i] = uncovered_net(t.lattice, cand[i]); });
    const auto best = std::min_element(miss.begin(), miss.end()) - miss.begin();
    t.u = cand[static_cast<std::size_t>(best)];
    return 0;
  });

  detail::staged("hecke lift", [&] {
    Rng r(derive_seed(t.seed, {4}));
    t.lifted = lat::hecke_sample(t.lattice, t.p, 2, r).lifted;
    return 0;
  });

  detail::staged("grid cover", [&] {
    t.grid_uncovered = uncovered_net(t.lifted, t.u);
    t.grid_covered = t.grid_uncovered == 0;
    return 0;
  });

  detail::staged("full cover", [&] {
    const std::uint64_t seed = derive_seed(t.seed, {5});
    const std::size_t batches = static_cast<std::size_t>((opt.probes + kBatch - 1) / kBatch);
    std::vector<double> worst(batches, 0.0);
    parallel_for(batches, opt.threads, [&](std::size_t b) {
      GaugeDistance cell(j, t.lattice), gd(j, t.lifted);
      Rng local(derive_seed(seed, {b}));
      const std::uint64_t lo = b * kBatch, hi = std::min<std::uint64_t>(opt.probes, lo + kBatch);
      for (std::uint64_t s = lo; s < hi; ++s) worst[b] = std::max(worst[b], gd(cell.sample_cell(local)));
    });
    t.dilation = *std::max_element(worst.begin(), worst.end());
    t.full_cover_ok = t.dilation <= 1 + 2 / pd;
    t.volume_ratio = t.V * std::pow(t.dilation, nd) / (M / (pd * pd));
    return 0;
  });
  return t;
}

}  // namespace coverlab::cover
