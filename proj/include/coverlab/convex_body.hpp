#pragma once

// Centered convex bodies with a membership oracle and a gauge function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "coverlab/errors.hpp"
#include "coverlab/reduction.hpp"
#include "coverlab/rng.hpp"

namespace coverlab::geom {

enum class BodyKind { euclidean_ball, box, cross_polytope, h_polytope };

inline std::string to_string(BodyKind k) {
  switch (k) {
    case BodyKind::euclidean_ball: return "euclidean_ball";
    case BodyKind::box: return "box";
    case BodyKind::cross_polytope: return "cross_polytope";
    case BodyKind::h_polytope: return "h_polytope";
  }
  return "?";
}

inline double unit_ball_volume(std::size_t n) {
  const double h = static_cast<double>(n) / 2;
  return std::exp(h * std::log(M_PI) - std::lgamma(h + 1));
}

class ConvexBody {
 public:
  static ConvexBody ball(std::size_t n, double radius = 1) {
    require(n >= 1, "ConvexBody: dimension must be positive");
    require(radius > 0 && std::isfinite(radius), "ConvexBody: degenerate ball");
    ConvexBody k(BodyKind::euclidean_ball, n);
    k.scale_ = radius;
    k.finish();
    return k;
  }
  /// Axis box with the given half-widths.
  static ConvexBody box(std::vector<double> half_widths) {
    require(!half_widths.empty(), "ConvexBody: dimension must be positive");
    for (double h : half_widths) require(h > 0 && std::isfinite(h), "ConvexBody: degenerate box");
    ConvexBody k(BodyKind::box, half_widths.size());
    k.half_ = std::move(half_widths);
    k.finish();
    return k;
  }
  /// Cube [-side/2, side/2]^n.
  static ConvexBody cube(std::size_t n, double side = 1) { return box(std::vector<double>(n, side / 2)); }
  /// {x : |x|_1 <= radius}.
  static ConvexBody cross_polytope(std::size_t n, double radius = 1) {
    require(n >= 1, "ConvexBody: dimension must be positive");
    require(radius > 0 && std::isfinite(radius), "ConvexBody: degenerate cross-polytope");
    ConvexBody k(BodyKind::cross_polytope, n);
    k.scale_ = radius;
    k.finish();
    return k;
  }
  /// {x : A x <= b}, recentered at the mean of its vertices. Must be bounded
  /// with nonempty interior; vertices are found by brute force over n-subsets.
  static ConvexBody h_polytope(std::vector<Vec> a, Vec b) {
    require(!a.empty() && a.size() == b.size(), "ConvexBody: inconsistent half-space data");
    const std::size_t n = a.front().size();
    require(n >= 1 && n <= 8, "ConvexBody: h_polytope dimension must be in [1, 8]");
    for (const auto& row : a) require(row.size() == n, "ConvexBody: ragged constraint matrix");
    ConvexBody k(BodyKind::h_polytope, n);
    auto verts = vertices(a, b);
    require(verts.size() > n, "ConvexBody: h_polytope is empty, unbounded or flat");
    Vec c(n, 0.0);
    for (const auto& v : verts)
      for (std::size_t i = 0; i < n; ++i) c[i] += v[i] / static_cast<double>(verts.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double nrm = std::sqrt(dot(a[i], a[i]));
      require(nrm > 0, "ConvexBody: zero constraint row");
      b[i] -= dot(a[i], c);
      require(b[i] > 1e-12 * nrm, "ConvexBody: h_polytope has empty interior");
    }
    for (auto& v : verts)
      for (std::size_t i = 0; i < n; ++i) v[i] -= c[i];
    // Cheap necessary check for boundedness; callers own the rest.
    for (std::size_t i = 0; i < n; ++i)
      for (double s : {-1.0, 1.0}) {
        bool hit = false;
        for (const auto& row : a) hit = hit || s * row[i] > 1e-12;
        require(hit, "ConvexBody: h_polytope is unbounded");
      }
    k.a_ = std::move(a);
    k.b_ = std::move(b);
    k.center_ = std::move(c);
    k.vertices_ = std::move(verts);
    k.finish();
    return k;
  }

  BodyKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return n_; }
  double circumradius() const noexcept { return circum_; }
  double inradius() const noexcept { return in_; }
  double volume() const noexcept { return volume_; }
  /// Standard error of the volume; zero for closed forms.
  double volume_error() const noexcept { return volume_err_; }
  /// Translation applied by the centering step (h_polytope only).
  const Vec& center_shift() const noexcept { return center_; }

  /// min t >= 0 with x in t K.
  double gauge(const double* x) const {
    switch (kind_) {
      case BodyKind::euclidean_ball: {
        double s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += x[i] * x[i];
        return std::sqrt(s) / scale_;
      }
      case BodyKind::box: {
        double g = 0;
        for (std::size_t i = 0; i < n_; ++i) g = std::max(g, std::abs(x[i]) / half_[i]);
        return g;
      }
      case BodyKind::cross_polytope: {
        double s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += std::abs(x[i]);
        return s / scale_;
      }
      case BodyKind::h_polytope: {
        double g = 0;
        for (std::size_t k = 0; k < a_.size(); ++k) {
          double s = 0;
          for (std::size_t i = 0; i < n_; ++i) s += a_[k][i] * x[i];
          g = std::max(g, s / b_[k]);
        }
        return g;
      }
    }
    return 0;
  }
  double gauge(const Vec& x) const {
    require(x.size() == n_, "ConvexBody: point dimension mismatch");
    return gauge(x.data());
  }
  bool contains(const Vec& x) const { return gauge(x) <= 1; }

  bool symmetric() const noexcept { return symmetric_; }

  /// t K.
  ConvexBody dilated(double t) const {
    require(t > 0 && std::isfinite(t), "ConvexBody: dilation must be positive");
    ConvexBody k = *this;
    k.scale_ *= t;
    for (auto& h : k.half_) h *= t;
    for (auto& x : k.b_) x *= t;
    for (auto& v : k.vertices_)
      for (auto& x : v) x *= t;
    k.circum_ *= t;
    k.in_ *= t;
    const double f = std::pow(t, static_cast<double>(n_));
    k.volume_ *= f;
    k.volume_err_ *= f;
    return k;
  }
  /// The dilate of K with the given volume.
  ConvexBody with_volume(double v) const {
    require(v > 0, "ConvexBody: target volume must be positive");
    return dilated(std::pow(v / volume_, 1.0 / static_cast<double>(n_)));
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(n=" << n_;
    if (kind_ == BodyKind::euclidean_ball || kind_ == BodyKind::cross_polytope) os << ", r=" << scale_;
    if (kind_ == BodyKind::box) {
      os << ", half=";
      for (std::size_t i = 0; i < n_; ++i) os << (i ? "," : "") << half_[i];
    }
    if (kind_ == BodyKind::h_polytope) os << ", facets=" << a_.size();
    os << ")";
    return os.str();
  }

 private:
  ConvexBody(BodyKind k, std::size_t n) : kind_(k), n_(n) {}

  static std::vector<Vec> vertices(const std::vector<Vec>& a, const Vec& b) {
    const std::size_t m = a.size(), n = a.front().size();
    std::vector<Vec> out;
    std::vector<std::size_t> pick(n);
    std::iota(pick.begin(), pick.end(), 0);
    if (m < n) return out;
    for (;;) {
      // Solve the n x n system a_pick x = b_pick by Gaussian elimination.
      std::vector<Vec> m_(n, Vec(n + 1));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m_[r][c] = a[pick[r]][c];
        m_[r][n] = b[pick[r]];
      }
      bool singular = false;
      for (std::size_t c = 0; c < n && !singular; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
          if (std::abs(m_[r][c]) > std::abs(m_[p][c])) p = r;
        if (std::abs(m_[p][c]) < 1e-12) {
          singular = true;
          break;
        }
        std::swap(m_[p], m_[c]);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == c) continue;
          const double f = m_[r][c] / m_[c][c];
          for (std::size_t k = c; k <= n; ++k) m_[r][k] -= f * m_[c][k];
        }
      }
      if (!singular) {
        Vec x(n);
        for (std::size_t r = 0; r < n; ++r) x[r] = m_[r][n] / m_[r][r];
        bool feasible = true;
        for (std::size_t k = 0; k < m && feasible; ++k) feasible = dot(a[k], x) <= b[k] + 1e-9 * (1 + std::abs(b[k]));
        bool fresh = true;
        for (const auto& v : out) {
          double d = 0;
          for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(v[i] - x[i]));
          if (d < 1e-9) fresh = false;
        }
        if (feasible && fresh) out.push_back(std::move(x));
      }
      // Next n-subset in lexicographic order.
      std::size_t i = n;
      while (i > 0 && pick[i - 1] == m - n + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
  }

  void finish() {
    const double nd = static_cast<double>(n_);
    switch (kind_) {
      case BodyKind::euclidean_ball:
        circum_ = in_ = scale_;
        volume_ = unit_ball_volume(n_) * std::pow(scale_, nd);
        symmetric_ = true;
        break;
      case BodyKind::box: {
        double s = 0;
        volume_ = 1;
        for (double h : half_) {
          s += h * h;
          volume_ *= 2 * h;
        }
        circum_ = std::sqrt(s);
        in_ = *std::min_element(half_.begin(), half_.end());
        symmetric_ = true;
        break;
      }
      case BodyKind::cross_polytope:
        circum_ = scale_;
        in_ = scale_ / std::sqrt(nd);
        volume_ = std::exp(nd * std::log(2 * scale_) - std::lgamma(nd + 1));
        symmetric_ = true;
        break;
      case BodyKind::h_polytope: {
        circum_ = 0;
        for (const auto& v : vertices_) circum_ = std::max(circum_, std::sqrt(dot(v, v)));
        in_ = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < a_.size(); ++k) in_ = std::min(in_, b_[k] / std::sqrt(dot(a_[k], a_[k])));
        symmetric_ = true;
        for (std::size_t k = 0; k < a_.size() && symmetric_; ++k) {
          bool found = false;
          for (std::size_t j = 0; j < a_.size() && !found; ++j) {
            double d = 0;
            for (std::size_t i = 0; i < n_; ++i) d = std::max(d, std::abs(a_[k][i] / b_[k] + a_[j][i] / b_[j]));
            found = d < 1e-9;
          }
          symmetric_ = found;
        }
        estimate_volume();
        break;
      }
    }
    require(in_ > 0 && in_ <= circum_ * (1 + 1e-12), "ConvexBody: degenerate body");
  }

  // Monte-Carlo in the vertex bounding box; fixed stream so the value is reproducible.
  void estimate_volume() {
    Vec lo(n_, 0.0), hi(n_, 0.0);
    for (const auto& v : vertices_)
      for (std::size_t i = 0; i < n_; ++i) {
        lo[i] = std::min(lo[i], v[i]);
        hi[i] = std::max(hi[i], v[i]);
      }
    double box = 1;
    for (std::size_t i = 0; i < n_; ++i) box *= hi[i] - lo[i];
    constexpr std::size_t kSamples = 400'000;
    Rng rng(0x766f6c756d65ULL);
    Vec x(n_);
    std::size_t hit = 0;
    for (std::size_t s = 0; s < kSamples; ++s) {
      for (std::size_t i = 0; i < n_; ++i) x[i] = rng.uniform(lo[i], hi[i]);
      if (gauge(x.data()) <= 1) ++hit;
    }
    const double p = static_cast<double>(hit) / kSamples;
    volume_ = box * p;
    volume_err_ = box * std::sqrt(p * (1 - p) / kSamples);
  }

  BodyKind kind_;
  std::size_t n_;
  double scale_ = 1;
  Vec half_;
  std::vector<Vec> a_;
  Vec b_, center_;
  std::vector<Vec> vertices_;
  double circum_ = 0, in_ = 0, volume_ = 0, volume_err_ = 0;
  bool symmetric_ = false;
};

}  // namespace coverlab::geom
