#pragma once

// Full-rank lattices in R^n with exact rational bases, Hecke lifts
// L ⊂ L' ⊂ (1/p)L, the discrete net, and the Hecke-point sampler.
//
// A Lattice is scale * span_Z(columns of basis) where the geometric scale is
// root_scale^{1/n}. Keeping the n-th power rational lets P^{r/n}-rescaled Hecke
// lattices have covolume exactly 1 while all algebra stays in Q.

#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coverlab/errors.hpp"
#include "coverlab/ffield.hpp"
#include "coverlab/rational.hpp"
#include "coverlab/ratmat.hpp"
#include "coverlab/reduction.hpp"
#include "coverlab/rng.hpp"

namespace coverlab::lat {

inline constexpr std::size_t kMaxEnumerationDim = 12;

class Lattice {
 public:
  explicit Lattice(RatMatrix basis, Rational root_scale = 1)
      : basis_(std::move(basis)), root_scale_(std::move(root_scale)), geo_(std::make_shared<GeoCache>()) {
    if (basis_.rows() != basis_.cols() || basis_.rows() == 0)
      throw PreconditionError("Lattice: basis must be a nonempty square matrix");
    if (root_scale_ <= 0) throw PreconditionError("Lattice: root scale must be positive");
    det_ = abs(determinant(basis_));
    if (det_ == 0) throw PreconditionError("Lattice: basis is singular");
  }

  static Lattice integer(std::size_t n) { return Lattice(RatMatrix::identity(n)); }

  std::size_t dim() const noexcept { return basis_.rows(); }
  const RatMatrix& basis() const noexcept { return basis_; }
  const Rational& root_scale() const noexcept { return root_scale_; }
  /// Geometric scale factor root_scale^{1/n}.
  double scale() const { return std::pow(to_double(root_scale_), 1.0 / static_cast<double>(dim())); }
  /// |det basis|, ignoring the root scale.
  const Rational& basis_covolume() const noexcept { return det_; }
  /// Covolume of the geometric lattice: root_scale * |det basis|.
  Rational covolume() const { return root_scale_ * det_; }

  std::vector<Rational> generator(std::size_t j) const { return basis_.column(j); }

  Lattice scaled(const Rational& c) const { return Lattice(basis_.scaled(c), root_scale_); }

  /// Coordinates of an (unscaled) vector in this basis; integral iff member.
  std::vector<Rational> coordinates(const std::vector<Rational>& v) const { return inverse_basis().apply(v); }
  bool contains(const std::vector<Rational>& v) const {
    for (const auto& c : coordinates(v))
      if (!is_integer(c)) return false;
    return true;
  }

  RatMatrix hnf() const { return hermite_normal_form(basis_); }

  /// Same geometric lattice: equal root scale and equal HNF.
  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.dim() == b.dim() && a.root_scale_ == b.root_scale_ && a.hnf() == b.hnf();
  }

  /// Geometric (scaled, floating) coordinates of an unscaled rational vector.
  geom::Vec to_geometric(const std::vector<Rational>& v) const {
    const double s = scale();
    geom::Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * to_double(v[i]);
    return out;
  }

  /// Exact lattice vector sum_j c_j v_j (unscaled).
  std::vector<Rational> combine(const std::vector<BigInt>& c) const {
    std::vector<Rational> x(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) x[j] = Rational(c[j]);
    return basis_.apply(x);
  }

  std::vector<geom::Vec> float_basis() const {
    std::vector<geom::Vec> b;
    for (std::size_t j = 0; j < dim(); ++j) b.push_back(to_geometric(generator(j)));
    return b;
  }

  /// LLL-reduced geometric basis, computed once per lattice value.
  const geom::ReducedBasis& reduced() const {
    std::call_once(geo_->once, [&] {
      auto r = geom::lll_reduce(float_basis());
      // Rebuild the reduced vectors from the exact basis to shed rounding drift.
      for (std::size_t j = 0; j < dim(); ++j) {
        std::vector<BigInt> c(r.u[j].begin(), r.u[j].end());
        r.b[j] = to_geometric(combine(c));
      }
      geom::gram_schmidt(r);
      geo_->reduced = std::move(r);
    });
    return geo_->reduced;
  }

  const RatMatrix& inverse_basis() const {
    std::call_once(geo_->inv_once, [&] { geo_->inverse = inverse(basis_); });
    return geo_->inverse;
  }

 private:
  struct GeoCache {
    std::once_flag once, inv_once;
    geom::ReducedBasis reduced;
    RatMatrix inverse;
  };

  RatMatrix basis_;
  Rational root_scale_;
  Rational det_;
  std::shared_ptr<GeoCache> geo_;
};

// ---------------------------------------------------------------------------

/// L* = {u : u.v in Z for all v in L}: basis (B^T)^{-1}, reciprocal scale.
inline Lattice dual(const Lattice& l) { return Lattice(inverse(l.basis().transpose()), Rational(1) / l.root_scale()); }

struct LatticeVector {
  double length = 0;               // Euclidean, geometric
  std::vector<BigInt> coeffs;      // in the lattice's own basis
  std::vector<Rational> exact;     // unscaled coordinates
  geom::Vec point;                 // geometric coordinates
};

namespace detail {

inline LatticeVector make_vector(const Lattice& l, const std::vector<std::int64_t>& y, double length) {
  const auto& r = l.reduced();
  const std::size_t n = l.dim();
  LatticeVector v;
  v.coeffs.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) v.coeffs[k] += BigInt(y[j]) * r.u[j][k];
  v.exact = l.combine(v.coeffs);
  v.point = l.to_geometric(v.exact);
  v.length = length;
  return v;
}

inline void check_dim(const Lattice& l) {
  if (l.dim() > kMaxEnumerationDim)
    throw CapExceeded("lattice enumeration: dimension " + std::to_string(l.dim()) + " exceeds " +
                      std::to_string(kMaxEnumerationDim));
}

}  // namespace detail

/// Shortest nonzero vector by enumeration on the LLL-reduced basis; the
/// initial radius is the shortest reduced basis vector.
inline LatticeVector shortest_vector(const Lattice& l) {
  detail::check_dim(l);
  const auto& r = l.reduced();
  double best = geom::dot(r.b[0], r.b[0]);
  for (const auto& b : r.b) best = std::min(best, geom::dot(b, b));
  std::vector<std::int64_t> arg;
  geom::enumerate_ball(r, geom::Vec(l.dim(), 0.0), best, [&](const std::vector<std::int64_t>& y, double d2) {
    bool zero = true;
    for (auto c : y) zero = zero && c == 0;
    if (!zero && (arg.empty() || d2 < best)) {
      best = d2;
      arg = y;
    }
    return best;
  });
  if (arg.empty()) throw InvariantViolation("shortest_vector: enumeration found no vector");
  auto v = detail::make_vector(l, arg, 0);
  v.length = std::sqrt(geom::dot(v.point, v.point));
  return v;
}

/// Closest lattice vector to a geometric point; the first leaf visited is the
/// Babai nearest-plane point, after which the radius shrinks.
inline LatticeVector closest_vector(const Lattice& l, const geom::Vec& x) {
  detail::check_dim(l);
  if (x.size() != l.dim()) throw PreconditionError("closest_vector: point dimension mismatch");
  const auto& r = l.reduced();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> arg;
  geom::enumerate_ball(r, x, best, [&](const std::vector<std::int64_t>& y, double d2) {
    if (arg.empty() || d2 < best) {
      best = d2;
      arg = y;
    }
    return best;
  });
  auto v = detail::make_vector(l, arg, 0);
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - v.point[i]) * (x[i] - v.point[i]);
  v.length = std::sqrt(d2);  // distance to x
  return v;
}

inline double lambda1(const Lattice& l) { return shortest_vector(l).length; }

// ---------------------------------------------------------------------------
// Quotients, Hecke lifts, nets.

/// Nontrivial elementary divisors of Lsup / Lsub; requires Lsub ⊆ Lsup.
inline std::vector<BigInt> quotient_structure(const Lattice& sub, const Lattice& sup) {
  if (sub.dim() != sup.dim()) throw PreconditionError("quotient_structure: dimension mismatch");
  if (sub.root_scale() != sup.root_scale())
    throw PreconditionError("quotient_structure: lattices carry different root scales");
  const RatMatrix coords = sup.inverse_basis() * sub.basis();
  if (!is_integral(coords)) throw PreconditionError("quotient_structure: containment violated");
  std::vector<BigInt> out;
  for (auto& d : elementary_divisors(to_integer(coords)))
    if (d != 1) out.push_back(d);
  return out;
}

struct HeckeLift {
  Lattice parent;
  std::uint64_t prime = 0;
  std::size_t rank = 0;
  ff::Subspace subspace;
  Lattice lifted;
};

/// L' = span_Z(v_1..v_n, w_1..w_r) with w = (1/p) sum x_i v_i for each RREF row x of S.
/// Every structural claim is certified before returning.
inline HeckeLift hecke_lift(const Lattice& l, std::uint64_t p, const ff::Subspace& s) {
  const std::size_t n = l.dim(), r = s.rank();
  if (s.ambient_dim() != n) throw PreconditionError("hecke_lift: subspace ambient dimension differs from lattice");
  if (s.field().modulus() != p) throw PreconditionError("hecke_lift: subspace is over a different field");
  if (r < 1 || r > n) throw PreconditionError("hecke_lift: rank out of range");
  RatMatrix gens(n, n + r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gens(i, j) = l.basis()(i, j);
  const Rational inv_p(1, p);
  for (std::size_t k = 0; k < r; ++k) {
    std::vector<Rational> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = Rational(s.basis()(k, j)) * inv_p;
    const auto w = l.basis().apply(x);
    for (std::size_t i = 0; i < n; ++i) gens(i, n + k) = w[i];
  }
  Lattice lifted(hermite_normal_form(gens), l.root_scale());

  // L ⊆ L': coordinates of L's basis in L' are integral (checked inside).
  const auto divisors = [&] {
    try {
      return quotient_structure(l, lifted);
    } catch (const PreconditionError&) {
      throw InvariantViolation("hecke_lift: parent lattice not contained in lift");
    }
  }();
  // L' ⊆ (1/p) L.
  if (!is_integral(l.inverse_basis() * lifted.basis().scaled(Rational(p))))
    throw InvariantViolation("hecke_lift: lift not contained in (1/p) L");
  if (lifted.basis_covolume() * Rational(ipow(BigInt(p), static_cast<unsigned>(r))) != l.basis_covolume())
    throw InvariantViolation("hecke_lift: covolume is not covol(L)/p^r");
  if (divisors != std::vector<BigInt>(r, BigInt(p)))
    throw InvariantViolation("hecke_lift: quotient is not (Z/p)^r");
  return {l, p, r, s, std::move(lifted)};
}

inline HeckeLift hecke_sample(const Lattice& l, std::uint64_t p, std::size_t r, Rng& rng) {
  const ff::PrimeField F(p);
  if (r < 1 || r > l.dim()) throw PreconditionError("hecke_sample: rank out of range");
  return hecke_lift(l, p, ff::grassmannian_sample(l.dim(), r, F, rng));
}

/// Hecke-approximate Haar sample: P^{r/n} * (uniform lift of Z^n in Λ_{P,r}),
/// of covolume exactly one.
inline Lattice haar_sample(std::size_t n, std::uint64_t P, std::size_t r, Rng& rng) {
  if (n < 2) throw PreconditionError("haar_sample: need n >= 2");
  if (r < 1 || r + 1 > n) throw PreconditionError("haar_sample: need 1 <= r <= n-1");
  if (!ff::is_prime(P)) throw PreconditionError("haar_sample: P must be prime");
  auto lift = hecke_sample(Lattice::integer(n), P, r, rng);
  Lattice out(lift.lifted.basis(), Rational(ipow(BigInt(P), static_cast<unsigned>(r))));
  if (out.covolume() != 1) throw InvariantViolation("haar_sample: covolume is not one");
  return out;
}

struct DiscreteNet {
  Lattice lattice;
  std::uint64_t prime;
};

inline DiscreteNet discrete_net(const Lattice& l, std::uint64_t p) {
  if (p < 2) throw PreconditionError("discrete_net: p must be at least 2");
  return {l, p};
}

/// sum_i (a_i / p) v_i, unscaled.
inline std::vector<Rational> net_point(const DiscreteNet& net, const std::vector<std::uint64_t>& a) {
  if (a.size() != net.lattice.dim()) throw PreconditionError("net_point: address dimension mismatch");
  std::vector<Rational> x(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= net.prime) throw PreconditionError("net_point: address out of range");
    x[i] = Rational(a[i], net.prime);
  }
  return net.lattice.basis().apply(x);
}

// ---------------------------------------------------------------------------
// File format: "n", then n rows of the basis matrix (rationals p/q), optional
// "root-scale c" line. Generators are the columns.

inline void write_lattice(std::ostream& os, const Lattice& l) {
  const std::size_t n = l.dim();
  os << n << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) os << (j ? " " : "") << to_string(l.basis()(i, j));
    os << '\n';
  }
  if (l.root_scale() != 1) os << "root-scale " << to_string(l.root_scale()) << '\n';
}

inline Lattice read_lattice(std::istream& is) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  if (lines.empty()) throw ParseError("lattice: empty input");
  std::istringstream header(lines[0]);
  long long n = 0;
  std::string extra;
  if (!(header >> n) || n <= 0 || (header >> extra)) throw ParseError("lattice: malformed dimension line");
  const auto dim = static_cast<std::size_t>(n);
  if (lines.size() < dim + 1) throw ParseError("lattice: expected " + std::to_string(dim) + " basis rows");
  RatMatrix b(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::istringstream row(lines[i + 1]);
    std::string tok;
    std::size_t j = 0;
    while (row >> tok) {
      if (j == dim) throw ParseError("lattice: too many entries in row " + std::to_string(i + 1));
      b(i, j++) = parse_rational(tok);
    }
    if (j != dim) throw ParseError("lattice: too few entries in row " + std::to_string(i + 1));
  }
  Rational root_scale = 1;
  for (std::size_t k = dim + 1; k < lines.size(); ++k) {
    std::istringstream extra_line(lines[k]);
    std::string key, value, tail;
    if (!(extra_line >> key >> value) || key != "root-scale" || (extra_line >> tail))
      throw ParseError("lattice: unexpected line '" + lines[k] + "'");
    root_scale = parse_rational(value);
  }
  try {
    return Lattice(std::move(b), root_scale);
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("lattice: ") + e.what());
  }
}

}  // namespace coverlab::lat
