#pragma once

// Prime-field arithmetic, dense linear algebra over F_q and the discrete
// Grassmannian Gr_{n,r}(F_q).
//
// Conventions:
//   * vectors are column vectors and GL_n(F_q) acts on the left;
//   * a Subspace stores a row basis in reduced row-echelon form, so g maps
//     rowspace(B) to rowspace(B * g^T);
//   * vectors of F_q^n are indexed by the big-endian mixed-radix code
//     x_0 q^{n-1} + ... + x_{n-1}.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "coverlab/errors.hpp"
#include "coverlab/rational.hpp"
#include "coverlab/rng.hpp"

namespace coverlab::ff {

using Elem = std::uint64_t;

namespace detail {

constexpr std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

constexpr std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
constexpr bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = detail::powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = detail::mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Smallest prime >= n.
inline std::uint64_t next_prime(std::uint64_t n) {
  while (!is_prime(n)) ++n;
  return n;
}

class PrimeField {
 public:
  explicit PrimeField(std::uint64_t q) : q_(q) {
    if (!is_prime(q)) throw PreconditionError("field modulus " + std::to_string(q) + " is not prime");
  }

  std::uint64_t modulus() const noexcept { return q_; }

  Elem add(Elem a, Elem b) const noexcept {
    const Elem s = a + b;
    return (s >= q_ || s < a) ? s - q_ : s;
  }
  Elem sub(Elem a, Elem b) const noexcept { return a >= b ? a - b : a + (q_ - b); }
  Elem neg(Elem a) const noexcept { return a == 0 ? 0 : q_ - a; }
  Elem mul(Elem a, Elem b) const noexcept { return detail::mulmod(a, b, q_); }
  Elem pow(Elem a, std::uint64_t e) const noexcept { return detail::powmod(a, e, q_); }
  Elem inv(Elem a) const {
    if (a % q_ == 0) throw PreconditionError("inverse of zero in F_" + std::to_string(q_));
    return pow(a, q_ - 2);
  }
  Elem from_int(std::int64_t v) const noexcept {
    const auto m = static_cast<std::int64_t>(q_);
    std::int64_t r = v % m;
    return static_cast<Elem>(r < 0 ? r + m : r);
  }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  std::uint64_t q_;
};

/// q^n as a machine integer; throws when it does not fit.
inline std::uint64_t checked_power(std::uint64_t q, std::size_t n) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (r > UINT64_MAX / q) throw CapExceeded("q^n overflows 64 bits");
    r *= q;
  }
  return r;
}

inline std::uint64_t encode(std::span<const Elem> x, std::uint64_t q) {
  std::uint64_t idx = 0;
  for (Elem v : x) idx = idx * q + v;
  return idx;
}

inline std::vector<Elem> decode(std::uint64_t idx, std::size_t n, std::uint64_t q) {
  std::vector<Elem> x(n);
  for (std::size_t i = n; i-- > 0;) {
    x[i] = idx % q;
    idx /= q;
  }
  return x;
}

/// Dense row-major matrix over a prime field.
class FqMatrix {
 public:
  FqMatrix(PrimeField field, std::size_t rows, std::size_t cols)
      : field_(field), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  FqMatrix(PrimeField field, std::size_t rows, std::size_t cols, std::vector<Elem> entries)
      : field_(field), rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) throw PreconditionError("FqMatrix: entry count does not match shape");
    for (Elem e : data_)
      if (e >= field_.modulus()) throw PreconditionError("FqMatrix: entry out of range [0, q)");
  }

  static FqMatrix identity(PrimeField field, std::size_t n) {
    FqMatrix m(field, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  const PrimeField& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<Elem>& entries() const noexcept { return data_; }

  Elem operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  Elem& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const Elem> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<Elem> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  FqMatrix transpose() const {
    FqMatrix t(field_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend FqMatrix operator*(const FqMatrix& a, const FqMatrix& b) {
    if (a.cols_ != b.rows_ || !(a.field_ == b.field_)) throw PreconditionError("FqMatrix product: shape/field mismatch");
    const auto& F = a.field_;
    FqMatrix c(F, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Elem aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) = F.add(c(i, j), F.mul(aik, b(k, j)));
      }
    return c;
  }

  /// g * x for a column vector x.
  std::vector<Elem> apply(std::span<const Elem> x) const {
    if (x.size() != cols_) throw PreconditionError("FqMatrix::apply: dimension mismatch");
    std::vector<Elem> y(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[i] = field_.add(y[i], field_.mul((*this)(i, j), x[j]));
    return y;
  }

  friend bool operator==(const FqMatrix&, const FqMatrix&) = default;

 private:
  PrimeField field_;
  std::size_t rows_, cols_;
  std::vector<Elem> data_;
};

struct RrefResult {
  FqMatrix form;
  std::size_t rank;
  std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

inline RrefResult rref(FqMatrix m) {
  const auto& F = m.field();
  std::size_t rank = 0;
  std::vector<std::size_t> pivots;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t piv = rank;
    while (piv < m.rows() && m(piv, col) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != rank)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(rank, j));
    const Elem s = F.inv(m(rank, col));
    for (std::size_t j = col; j < m.cols(); ++j) m(rank, j) = F.mul(m(rank, j), s);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == rank || m(i, col) == 0) continue;
      const Elem f = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) = F.sub(m(i, j), F.mul(f, m(rank, j)));
    }
    pivots.push_back(col);
    ++rank;
  }
  return {std::move(m), rank, std::move(pivots)};
}

inline std::size_t rank(const FqMatrix& m) { return rref(m).rank; }

inline Elem determinant(FqMatrix m) {
  if (m.rows() != m.cols()) throw PreconditionError("determinant of a non-square matrix");
  const auto& F = m.field();
  Elem det = 1;
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      det = F.neg(det);
    }
    det = F.mul(det, m(c, c));
    const Elem s = F.inv(m(c, c));
    for (std::size_t i = c + 1; i < n; ++i) {
      const Elem f = F.mul(m(i, c), s);
      if (f == 0) continue;
      for (std::size_t j = c; j < n; ++j) m(i, j) = F.sub(m(i, j), F.mul(f, m(c, j)));
    }
  }
  return det;
}

/// An r-dimensional subspace of F_q^n, stored by its RREF row basis.
class Subspace {
 public:
  /// Canonicalizes an r x n basis; throws unless its rows are independent.
  static Subspace from_basis(const FqMatrix& basis) {
    auto red = rref(basis);
    if (red.rank != basis.rows() || red.rank == 0)
      throw PreconditionError("Subspace: basis rows must be linearly independent and nonempty");
    return Subspace(std::move(red.form), std::move(red.pivots));
  }

  /// Row space of an arbitrary spanning matrix (rank >= 1).
  static Subspace span_of(const FqMatrix& generators) {
    auto red = rref(generators);
    if (red.rank == 0) throw PreconditionError("Subspace: zero subspace has no rank >= 1 representative");
    FqMatrix b(generators.field(), red.rank, generators.cols());
    for (std::size_t i = 0; i < red.rank; ++i)
      std::copy(red.form.row(i).begin(), red.form.row(i).end(), b.row(i).begin());
    return Subspace(std::move(b), std::move(red.pivots));
  }

  std::size_t ambient_dim() const noexcept { return basis_.cols(); }
  std::size_t rank() const noexcept { return basis_.rows(); }
  const FqMatrix& basis() const noexcept { return basis_; }
  const std::vector<std::size_t>& pivots() const noexcept { return pivots_; }
  const PrimeField& field() const noexcept { return basis_.field(); }

  bool contains(std::span<const Elem> v) const {
    if (v.size() != ambient_dim()) throw PreconditionError("Subspace::contains: dimension mismatch");
    const auto& F = field();
    // Residual after eliminating along the pivots must vanish.
    std::vector<Elem> w(v.begin(), v.end());
    for (std::size_t i = 0; i < rank(); ++i) {
      const Elem c = w[pivots_[i]];
      if (c == 0) continue;
      for (std::size_t j = 0; j < w.size(); ++j) w[j] = F.sub(w[j], F.mul(c, basis_(i, j)));
    }
    return std::all_of(w.begin(), w.end(), [](Elem e) { return e == 0; });
  }

  /// g . S = rowspace(B g^T) for g in GL_n(F_q) acting on column vectors.
  Subspace transformed(const FqMatrix& g) const { return from_basis(basis_ * g.transpose()); }

  /// All q^r vectors of the subspace, in mixed-radix order of coefficients.
  std::vector<std::vector<Elem>> elements() const {
    const auto q = field().modulus();
    const std::uint64_t count = checked_power(q, rank());
    std::vector<std::vector<Elem>> out;
    out.reserve(count);
    for (std::uint64_t c = 0; c < count; ++c) {
      const auto coeff = decode(c, rank(), q);
      std::vector<Elem> v(ambient_dim(), 0);
      for (std::size_t i = 0; i < rank(); ++i)
        for (std::size_t j = 0; j < ambient_dim(); ++j)
          v[j] = field().add(v[j], field().mul(coeff[i], basis_(i, j)));
      out.push_back(std::move(v));
    }
    return out;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) { return a.basis_ == b.basis_; }

  /// Canonical order: pivot sets lexicographically, then entries row-major.
  friend std::strong_ordering operator<=>(const Subspace& a, const Subspace& b) {
    if (auto c = a.ambient_dim() <=> b.ambient_dim(); c != 0) return c;
    if (auto c = a.rank() <=> b.rank(); c != 0) return c;
    if (auto c = a.pivots_ <=> b.pivots_; c != 0) return c;
    return a.basis_.entries() <=> b.basis_.entries();
  }

  std::size_t hash() const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL ^ ambient_dim();
    for (Elem e : basis_.entries()) h = splitmix64(h ^ e);
    return static_cast<std::size_t>(h);
  }

 private:
  Subspace(FqMatrix basis, std::vector<std::size_t> pivots)
      : basis_(std::move(basis)), pivots_(std::move(pivots)) {}

  FqMatrix basis_;
  std::vector<std::size_t> pivots_;
};

struct SubspaceHash {
  std::size_t operator()(const Subspace& s) const noexcept { return s.hash(); }
};

/// Gaussian binomial [n choose r]_q, exact.
inline BigInt grassmannian_count(std::size_t n, std::size_t r, const PrimeField& F) {
  if (r < 1 || r > n) throw PreconditionError("grassmannian_count: need 1 <= r <= n");
  const BigInt q = F.modulus();
  BigInt num = 1, den = 1;
  for (std::size_t i = 0; i < r; ++i) {
    num *= ipow(q, static_cast<unsigned>(n)) - ipow(q, static_cast<unsigned>(i));
    den *= ipow(q, static_cast<unsigned>(r)) - ipow(q, static_cast<unsigned>(i));
  }
  return num / den;
}

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Visits every S in Gr_{n,r}(F_q) exactly once, in canonical order.
/// The visitor may return void, or bool where false stops the walk.
template <class Visitor>
void for_each_subspace(std::size_t n, std::size_t r, const PrimeField& F, Visitor&& visit,
                       std::uint64_t cap = kDefaultEnumerationCap) {
  if (grassmannian_count(n, r, F) > cap)
    throw CapExceeded("grassmannian_enumerate: |Gr_{" + std::to_string(n) + "," + std::to_string(r) +
                      "}| exceeds cap " + std::to_string(cap));
  const auto q = F.modulus();
  std::vector<std::size_t> piv(r);
  std::iota(piv.begin(), piv.end(), 0);
  for (;;) {
    // Free positions: (row i, column j) with j > piv[i] and j not a pivot.
    std::vector<std::pair<std::size_t, std::size_t>> free;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = piv[i] + 1; j < n; ++j)
        if (!std::binary_search(piv.begin(), piv.end(), j)) free.emplace_back(i, j);
    std::vector<Elem> digits(free.size(), 0);
    for (;;) {
      FqMatrix b(F, r, n);
      for (std::size_t i = 0; i < r; ++i) b(i, piv[i]) = 1;
      for (std::size_t f = 0; f < free.size(); ++f) b(free[f].first, free[f].second) = digits[f];
      if constexpr (std::is_same_v<std::invoke_result_t<Visitor, Subspace>, bool>) {
        if (!visit(Subspace::from_basis(b))) return;
      } else {
        visit(Subspace::from_basis(b));
      }
      std::size_t k = free.size();
      while (k > 0 && ++digits[k - 1] == q) digits[--k] = 0;
      if (k == 0) break;
    }
    // Next pivot combination in lexicographic order.
    std::size_t i = r;
    while (i > 0 && piv[i - 1] == n - r + (i - 1)) --i;
    if (i == 0) return;
    ++piv[i - 1];
    for (std::size_t j = i; j < r; ++j) piv[j] = piv[j - 1] + 1;
  }
}

inline std::vector<Subspace> grassmannian_enumerate(std::size_t n, std::size_t r, const PrimeField& F,
                                                    std::uint64_t cap = kDefaultEnumerationCap) {
  std::vector<Subspace> out;
  for_each_subspace(n, r, F, [&](Subspace s) { out.push_back(std::move(s)); }, cap);
  return out;
}

inline FqMatrix random_matrix(const PrimeField& F, std::size_t rows, std::size_t cols, Rng& rng) {
  FqMatrix m(F, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform_below(F.modulus());
  return m;
}

/// Uniform on Gr_{n,r}(F_q): reject until full rank, then canonicalize.
/// Every subspace has |GL_r(F_q)| full-rank preimages, so the law is exact.
inline Subspace grassmannian_sample(std::size_t n, std::size_t r, const PrimeField& F, Rng& rng) {
  if (r < 1 || r > n) throw PreconditionError("grassmannian_sample: need 1 <= r <= n");
  for (;;) {
    auto m = random_matrix(F, r, n, rng);
    auto red = rref(m);
    if (red.rank == r) return Subspace::from_basis(m);
  }
}

/// Uniform element of GL_n(F_q) by rejection on rank.
inline FqMatrix gl_sample(std::size_t n, const PrimeField& F, Rng& rng) {
  for (;;) {
    auto m = random_matrix(F, n, n, rng);
    if (rank(m) == n) return m;
  }
}

}  // namespace coverlab::ff
