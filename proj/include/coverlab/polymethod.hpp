#pragma once

// Multivariate polynomials over F_q with Hasse derivatives and vanishing
// multiplicity; the linear-algebra construction of polynomials vanishing to
// high order on a point set; executable checks of the multiplicity lemmas.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "coverlab/errors.hpp"
#include "coverlab/ffield.hpp"
#include "coverlab/rational.hpp"

namespace coverlab::poly {

using ff::Elem;
using ff::PrimeField;
using Exponent = std::vector<unsigned>;
using Point = std::vector<Elem>;

inline unsigned norm(const Exponent& e) {
  unsigned s = 0;
  for (auto x : e) s += x;
  return s;
}

/// Graded-lex: total degree first, then lexicographic.
struct GradedLex {
  bool operator()(const Exponent& a, const Exponent& b) const {
    const auto na = norm(a), nb = norm(b);
    if (na != nb) return na < nb;
    return a < b;
  }
};

/// Calls f(e) for every exponent tuple of length n and norm d, in lex order.
template <class F>
void for_each_exponent(std::size_t n, unsigned d, F&& f) {
  if (n == 0) {
    if (d == 0) f(Exponent{});
    return;
  }
  Exponent e(n, 0);
  // Recursive fill: e[pos] takes every value, the tail absorbs the rest.
  auto rec = [&](auto& self, std::size_t pos, unsigned left) -> void {
    if (pos + 1 == n) {
      e[pos] = left;
      f(static_cast<const Exponent&>(e));
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      e[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, d);
}

/// All exponents of norm <= k in graded-lex order.
inline std::vector<Exponent> exponents_up_to(std::size_t n, unsigned k) {
  std::vector<Exponent> out;
  for (unsigned d = 0; d <= k; ++d) for_each_exponent(n, d, [&](const Exponent& e) { out.push_back(e); });
  return out;
}

/// C(j, i) mod q from a Pascal triangle reduced mod q, grown on demand.
inline Elem binomial_mod(unsigned j, unsigned i, std::uint64_t q) {
  if (i > j) return 0;
  static std::mutex mutex;
  static std::unordered_map<std::uint64_t, std::vector<std::vector<Elem>>> tables;
  std::lock_guard lock(mutex);
  auto& rows = tables[q];
  while (rows.size() <= j) {
    const std::size_t r = rows.size();
    std::vector<Elem> row(r + 1, 1 % q);
    for (std::size_t c = 1; c < r; ++c) {
      const Elem s = rows[r - 1][c - 1] + rows[r - 1][c];
      row[c] = s >= q ? s - q : s;
    }
    rows.push_back(std::move(row));
  }
  return rows[j][i];
}

class MultiPoly {
 public:
  using Terms = std::map<Exponent, Elem, GradedLex>;

  MultiPoly(PrimeField field, std::size_t n) : field_(field), n_(n) {}

  static MultiPoly constant(PrimeField F, std::size_t n, Elem c) {
    MultiPoly p(F, n);
    p.add_term(Exponent(n, 0), c);
    return p;
  }
  static MultiPoly variable(PrimeField F, std::size_t n, std::size_t k) {
    require(k < n, "MultiPoly::variable: index out of range");
    Exponent e(n, 0);
    e[k] = 1;
    MultiPoly p(F, n);
    p.add_term(e, 1);
    return p;
  }
  static MultiPoly monomial(PrimeField F, Exponent e, Elem c) {
    MultiPoly p(F, e.size());
    p.add_term(std::move(e), c);
    return p;
  }

  const PrimeField& field() const noexcept { return field_; }
  std::size_t num_vars() const noexcept { return n_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Total degree; nullopt for the zero polynomial (degree -infinity).
  std::optional<unsigned> degree() const {
    if (terms_.empty()) return std::nullopt;
    return norm(terms_.rbegin()->first);
  }

  Elem coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0 : it->second;
  }

  /// Adds c X^e, dropping the term if it cancels.
  void add_term(Exponent e, Elem c) {
    if (e.size() != n_) throw PreconditionError("MultiPoly: exponent length mismatch");
    c %= field_.modulus();
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second = field_.add(it->second, c);
      if (it->second == 0) terms_.erase(it);
    }
  }

  Elem evaluate(std::span<const Elem> a) const {
    if (a.size() != n_) throw PreconditionError("MultiPoly::evaluate: point dimension mismatch");
    Elem acc = 0;
    for (const auto& [e, c] : terms_) {
      Elem t = c;
      for (std::size_t k = 0; k < n_; ++k)
        if (e[k]) t = field_.mul(t, field_.pow(a[k] % field_.modulus(), e[k]));
      acc = field_.add(acc, t);
    }
    return acc;
  }

  MultiPoly homogeneous_part() const {
    MultiPoly h(field_, n_);
    if (auto d = degree())
      for (const auto& [e, c] : terms_)
        if (norm(e) == *d) h.terms_.emplace(e, c);
    return h;
  }

  friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
    a.check_compatible(b);
    MultiPoly out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, c);
    return out;
  }
  friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) {
    a.check_compatible(b);
    MultiPoly out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, a.field_.neg(c));
    return out;
  }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    a.check_compatible(b);
    MultiPoly out(a.field_, a.n_);
    Exponent e(a.n_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t k = 0; k < a.n_; ++k) e[k] = ea[k] + eb[k];
        out.add_term(e, a.field_.mul(ca, cb));
      }
    return out;
  }
  MultiPoly scaled(Elem s) const {
    MultiPoly out(field_, n_);
    for (const auto& [e, c] : terms_) out.add_term(e, field_.mul(c, s % field_.modulus()));
    return out;
  }

  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    return a.field_ == b.field_ && a.n_ == b.n_ && a.terms_ == b.terms_;
  }

 private:
  void check_compatible(const MultiPoly& o) const {
    if (!(field_ == o.field_) || n_ != o.n_) throw PreconditionError("MultiPoly: operands over different rings");
  }

  PrimeField field_;
  std::size_t n_;
  Terms terms_;
};

/// Substitution P(f_1, ..., f_n) for polynomials f_k in a common ring.
inline MultiPoly compose(const MultiPoly& p, const std::vector<MultiPoly>& images) {
  if (images.size() != p.num_vars()) throw PreconditionError("compose: need one image per variable");
  if (images.empty()) throw PreconditionError("compose: polynomial has no variables");
  const auto& F = p.field();
  const std::size_t m = images[0].num_vars();
  std::vector<std::vector<MultiPoly>> powers(images.size());  // powers[k][e] = f_k^e
  MultiPoly out(F, m);
  for (const auto& [e, c] : p.terms()) {
    MultiPoly term = MultiPoly::constant(F, m, c);
    for (std::size_t k = 0; k < e.size(); ++k) {
      auto& pk = powers[k];
      if (pk.empty()) pk.push_back(MultiPoly::constant(F, m, 1));
      while (pk.size() <= e[k]) pk.push_back(pk.back() * images[k]);
      if (e[k]) term = term * pk[e[k]];
    }
    out = out + term;
  }
  return out;
}

/// P^{(i)}: X^j contributes prod_k C(j_k, i_k) X^{j-i}.
inline MultiPoly hasse_derivative(const MultiPoly& p, const Exponent& i) {
  if (i.size() != p.num_vars()) throw PreconditionError("hasse_derivative: exponent length mismatch");
  const auto& F = p.field();
  MultiPoly out(F, p.num_vars());
  Exponent d(i.size());
  for (const auto& [j, c] : p.terms()) {
    Elem coef = c;
    for (std::size_t k = 0; k < i.size() && coef; ++k) {
      if (j[k] < i[k]) {
        coef = 0;
        break;
      }
      coef = F.mul(coef, binomial_mod(j[k], i[k], F.modulus()));
      d[k] = j[k] - i[k];
    }
    if (coef) out.add_term(d, coef);
  }
  return out;
}

/// P^{(i)}(a) without forming the derivative.
inline Elem hasse_value(const MultiPoly& p, const Exponent& i, std::span<const Elem> a) {
  const auto& F = p.field();
  Elem acc = 0;
  for (const auto& [j, c] : p.terms()) {
    Elem t = c;
    for (std::size_t k = 0; k < i.size() && t; ++k) {
      if (j[k] < i[k]) {
        t = 0;
        break;
      }
      t = F.mul(t, binomial_mod(j[k], i[k], F.modulus()));
      if (j[k] > i[k]) t = F.mul(t, F.pow(a[k] % F.modulus(), j[k] - i[k]));
    }
    acc = F.add(acc, t);
  }
  return acc;
}

/// Vanishing multiplicity; the zero polynomial has infinite multiplicity,
/// which compares above every finite value.
class Multiplicity {
 public:
  constexpr Multiplicity() = default;
  constexpr explicit Multiplicity(std::uint64_t v) : value_(v) {}
  static constexpr Multiplicity infinite() {
    Multiplicity m;
    m.infinite_ = true;
    return m;
  }
  constexpr bool is_infinite() const noexcept { return infinite_; }
  std::uint64_t value() const {
    if (infinite_) throw PreconditionError("Multiplicity: value of infinite multiplicity");
    return value_;
  }
  friend constexpr bool operator==(const Multiplicity&, const Multiplicity&) = default;
  friend constexpr std::strong_ordering operator<=>(const Multiplicity& a, const Multiplicity& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }
  std::string str() const { return infinite_ ? "inf" : std::to_string(value_); }

 private:
  std::uint64_t value_ = 0;
  bool infinite_ = false;
};

/// Largest m with P^{(i)}(a) = 0 for all ||i|| < m.
inline Multiplicity multiplicity(const MultiPoly& p, std::span<const Elem> a) {
  if (a.size() != p.num_vars()) throw PreconditionError("multiplicity: point dimension mismatch");
  if (p.is_zero()) return Multiplicity::infinite();
  const unsigned deg = *p.degree();
  for (unsigned d = 0; d <= deg; ++d) {
    bool nonzero = false;
    for_each_exponent(p.num_vars(), d, [&](const Exponent& i) {
      if (!nonzero && hasse_value(p, i, a) != 0) nonzero = true;
    });
    if (nonzero) return Multiplicity(d);
  }
  throw InvariantViolation("multiplicity: nonzero polynomial with all Hasse derivatives vanishing");
}

// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kVanishingCoefficientCap = 5'000'000;
inline constexpr std::uint64_t kVanishingMatrixCap = 25'000'000;  // dense system entries

/// A nonzero P with deg P <= k and mu(P, s) >= m on S, from the kernel of the
/// linear system P^{(i)}(s) = 0 (s in S, ||i|| < m). The first free column of
/// the reduced system is set to 1.
inline MultiPoly construct_vanishing(const PrimeField& F, std::size_t n, const std::vector<Point>& S, unsigned m,
                                     unsigned k) {
  require(n >= 1, "construct_vanishing: need n >= 1");
  const BigInt conditions = binomial(m + static_cast<unsigned>(n) - 1, static_cast<unsigned>(n)) * S.size();
  const BigInt unknowns = binomial(static_cast<unsigned>(n) + k, static_cast<unsigned>(n));
  if (!(conditions < unknowns))
    throw PreconditionError("construct_vanishing: C(m+n-1,n)|S| = " + conditions.str() +
                            " is not below C(n+k,n) = " + unknowns.str());
  if (unknowns > kVanishingCoefficientCap)
    throw CapExceeded("construct_vanishing: " + unknowns.str() + " coefficients exceed cap");
  if (conditions * unknowns > kVanishingMatrixCap)
    throw CapExceeded("construct_vanishing: linear system too large");
  for (const auto& s : S) {
    if (s.size() != n) throw PreconditionError("construct_vanishing: point dimension mismatch");
    for (auto x : s)
      if (x >= F.modulus()) throw PreconditionError("construct_vanishing: coordinate out of range");
  }

  const auto cols = exponents_up_to(n, k);
  std::vector<Exponent> derivs;
  for (unsigned d = 0; d < m; ++d) for_each_exponent(n, d, [&](const Exponent& i) { derivs.push_back(i); });

  ff::FqMatrix sys(F, S.size() * derivs.size(), cols.size());
  std::size_t row = 0;
  for (const auto& s : S)
    for (const auto& i : derivs) {
      for (std::size_t c = 0; c < cols.size(); ++c)
        sys(row, c) = hasse_value(MultiPoly::monomial(F, cols[c], 1), i, s);
      ++row;
    }
  const auto red = ff::rref(sys);
  std::vector<char> is_pivot(cols.size(), 0);
  for (auto p : red.pivots) is_pivot[p] = 1;
  std::size_t free_col = 0;
  while (is_pivot[free_col]) ++free_col;  // exists: rank <= rows < cols

  MultiPoly out(F, n);
  out.add_term(cols[free_col], 1);
  for (std::size_t r = 0; r < red.rank; ++r) out.add_term(cols[red.pivots[r]], F.neg(red.form(r, free_col)));
  return out;
}

// ---------------------------------------------------------------------------
// Lemma checks. Each returns both sides and whether the inequality holds.

struct SchwartzZippelCheck {
  Rational lhs;  // |S|^{-(n-1)} sum_{z in S^n} mu(P, z)
  std::uint64_t rhs = 0;  // deg P
  bool ok = false;
};

inline SchwartzZippelCheck schwartz_zippel_check(const MultiPoly& p, const std::vector<Elem>& S,
                                                 std::uint64_t cap = 10'000'000) {
  if (p.is_zero()) throw PreconditionError("schwartz_zippel_check: zero polynomial");
  if (S.empty()) throw PreconditionError("schwartz_zippel_check: S must be nonempty");
  const std::size_t n = p.num_vars();
  const std::uint64_t points = ff::checked_power(S.size(), n);
  if (points > cap) throw CapExceeded("schwartz_zippel_check: |S|^n exceeds cap");
  BigInt total = 0;
  Point z(n);
  for (std::uint64_t c = 0; c < points; ++c) {
    auto digits = ff::decode(c, n, S.size());
    for (std::size_t j = 0; j < n; ++j) z[j] = S[digits[j]];
    total += multiplicity(p, z).value();
  }
  SchwartzZippelCheck res;
  res.lhs = Rational(total, ipow(BigInt(S.size()), static_cast<unsigned>(n - 1)));
  res.rhs = *p.degree();
  res.ok = res.lhs <= res.rhs;
  return res;
}

/// P restricted to the affine subspace b + T_1 d_1 + ... + T_r d_r.
inline MultiPoly restrict_to_flat(const MultiPoly& p, const Point& b, const std::vector<Point>& d) {
  const auto& F = p.field();
  const std::size_t n = p.num_vars(), r = d.size();
  require(r >= 1, "restrict_to_flat: need at least one direction");
  std::vector<MultiPoly> images;
  for (std::size_t k = 0; k < n; ++k) {
    MultiPoly lin = MultiPoly::constant(F, r, b[k]);
    for (std::size_t j = 0; j < r; ++j) lin = lin + MultiPoly::variable(F, r, j).scaled(d[j][k]);
    images.push_back(std::move(lin));
  }
  return compose(p, images);
}

struct RestrictionCheck {
  Multiplicity left;   // mu(P restricted, t)
  Multiplicity right;  // mu(P, b + sum t_j d_j)
  bool ok = false;
};

inline RestrictionCheck restriction_multiplicity_check(const MultiPoly& p, const Point& b, const std::vector<Point>& d,
                                                       const Point& t) {
  if (p.is_zero()) throw PreconditionError("restriction_multiplicity_check: zero polynomial");
  const auto& F = p.field();
  const std::size_t n = p.num_vars();
  require(b.size() == n && t.size() == d.size(), "restriction_multiplicity_check: dimension mismatch");
  for (const auto& dj : d) require(dj.size() == n, "restriction_multiplicity_check: direction dimension mismatch");
  Point x = b;
  for (std::size_t j = 0; j < d.size(); ++j)
    for (std::size_t k = 0; k < n; ++k) x[k] = F.add(x[k], F.mul(t[j], d[j][k]));
  RestrictionCheck res;
  res.left = multiplicity(restrict_to_flat(p, b, d), t);
  res.right = multiplicity(p, x);
  res.ok = res.left >= res.right;
  return res;
}

struct HasseDecreaseCheck {
  Multiplicity left;  // mu(P^{(i)}, a)
  std::int64_t right = 0;  // mu(P, a) - ||i||
  bool ok = false;
};

inline HasseDecreaseCheck hasse_mu_decrease_check(const MultiPoly& p, const Point& a, const Exponent& i) {
  if (p.is_zero()) throw PreconditionError("hasse_mu_decrease_check: zero polynomial");
  HasseDecreaseCheck res;
  res.left = multiplicity(hasse_derivative(p, i), a);
  res.right = static_cast<std::int64_t>(multiplicity(p, a).value()) - static_cast<std::int64_t>(norm(i));
  res.ok = res.left.is_infinite() || res.right < 0 ||
           res.left.value() >= static_cast<std::uint64_t>(res.right);
  return res;
}

// ---------------------------------------------------------------------------

struct KakeyaBoundWitness {
  BigInt k, m, l;
  bool counting_ok = false;  // k < delta q^r l
  Rational bound;            // C(n+k, n) / C(m+n-1, n)
  double value = 0;
};

/// Parameter choice k = N q^{r+1} - 1, m = ceil((q^r + (q-1)/delta) N),
/// l = ceil((q m - k)/(q - 1)) and the resulting size bound.
inline KakeyaBoundWitness kakeya_bound_witness(std::uint64_t q, std::size_t n, std::size_t r, const Rational& delta,
                                               std::uint64_t N) {
  require(q >= 2 && n >= 1 && r >= 1, "kakeya_bound_witness: need q >= 2, n >= 1, r >= 1");
  require(N >= 1, "kakeya_bound_witness: N >= 1");
  require(delta > 0 && delta <= 1, "kakeya_bound_witness: delta must lie in (0, 1]");
  const BigInt Q(q);
  const BigInt qr = ipow(Q, static_cast<unsigned>(r));
  KakeyaBoundWitness w;
  w.k = BigInt(N) * qr * Q - 1;
  w.m = ceil((Rational(qr) + Rational(Q - 1) / delta) * Rational(BigInt(N)));
  w.l = ceil(Rational(Q * w.m - w.k, Q - 1));
  w.counting_ok = Rational(w.k) < delta * Rational(qr * w.l);
  if (w.k > 1'000'000 || w.m > 1'000'000) throw CapExceeded("kakeya_bound_witness: parameters too large");
  const auto nn = static_cast<unsigned>(n);
  w.bound = Rational(binomial(nn + w.k.convert_to<unsigned>(), nn),
                     binomial(w.m.convert_to<unsigned>() + nn - 1, nn));
  w.value = to_double(w.bound);
  return w;
}

// ---------------------------------------------------------------------------
// Text format: "q n" then "coeff e1 ... en" per term, graded-lex order.

inline void write_poly(std::ostream& os, const MultiPoly& p) {
  os << p.field().modulus() << ' ' << p.num_vars() << '\n';
  for (const auto& [e, c] : p.terms()) {
    os << c;
    for (auto x : e) os << ' ' << x;
    os << '\n';
  }
}

inline MultiPoly read_poly(std::istream& is) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line))
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    return false;
  };
  if (!next_line()) throw ParseError("polynomial: missing 'q n' header");
  std::istringstream header(line);
  std::uint64_t q = 0;
  std::size_t n = 0;
  std::string extra;
  if (!(header >> q >> n) || n == 0 || (header >> extra)) throw ParseError("polynomial: malformed header '" + line + "'");
  PrimeField F(q);
  MultiPoly p(F, n);
  while (next_line()) {
    std::istringstream row(line);
    long long c;
    if (!(row >> c)) throw ParseError("polynomial: malformed term '" + line + "'");
    Exponent e;
    long long x;
    while (row >> x) {
      if (x < 0) throw ParseError("polynomial: negative exponent in '" + line + "'");
      e.push_back(static_cast<unsigned>(x));
    }
    if (!row.eof() || e.size() != n) throw ParseError("polynomial: malformed term '" + line + "'");
    p.add_term(std::move(e), F.from_int(c));
  }
  return p;
}

}  // namespace coverlab::poly
