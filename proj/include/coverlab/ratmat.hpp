#pragma once

// Dense exact matrices over Q and Z: determinant, inverse, column-style Hermite
// normal form and Smith elementary divisors.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "coverlab/errors.hpp"
#include "coverlab/rational.hpp"

namespace coverlab {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) throw PreconditionError("Matrix: entry count mismatch");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }
  static Matrix diagonal(const std::vector<T>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<T>& entries() const noexcept { return data_; }

  std::vector<T> column(std::size_t j) const {
    std::vector<T> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw PreconditionError("Matrix: shape mismatch in product");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  std::vector<T> apply(const std::vector<T>& x) const {
    if (x.size() != cols_) throw PreconditionError("Matrix: shape mismatch in apply");
    std::vector<T> y(rows_, T(0));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Matrix scaled(const T& s) const {
    Matrix m = *this;
    for (auto& e : m.data_) e *= s;
    return m;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using RatMatrix = Matrix<Rational>;
using IntMatrix = Matrix<BigInt>;

inline Rational determinant(RatMatrix m) {
  if (m.rows() != m.cols()) throw PreconditionError("determinant: matrix not square");
  const std::size_t n = m.rows();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m(r, c) == 0) continue;
      const Rational f = m(r, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return det;
}

inline RatMatrix inverse(const RatMatrix& a) {
  if (a.rows() != a.cols()) throw PreconditionError("inverse: matrix not square");
  const std::size_t n = a.rows();
  RatMatrix m = a, inv = RatMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) throw PreconditionError("inverse: matrix is singular");
    if (p != c)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(p, j), m(c, j));
        std::swap(inv(p, j), inv(c, j));
      }
    const Rational piv = m(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      m(c, j) /= piv;
      inv(c, j) /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      const Rational f = m(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        m(r, j) -= f * m(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

inline bool is_integral(const RatMatrix& m) {
  return std::all_of(m.entries().begin(), m.entries().end(), [](const Rational& x) { return is_integer(x); });
}

inline BigInt common_denominator(const RatMatrix& m) {
  BigInt d = 1;
  for (const auto& x : m.entries()) d = boost::multiprecision::lcm(d, denominator(x));
  return d;
}

inline IntMatrix to_integer(const RatMatrix& m) {
  IntMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!is_integer(m(i, j))) throw PreconditionError("to_integer: non-integral entry");
      out(i, j) = numerator(m(i, j));
    }
  return out;
}

inline RatMatrix to_rational(const IntMatrix& m) {
  RatMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j));
  return out;
}

/// Column-style Hermite normal form of the lattice spanned by the columns of an
/// n x m integer matrix of rank n: lower triangular, positive diagonal, and
/// 0 <= H(i, j) < H(i, i) for j < i. Unique for the lattice.
inline IntMatrix hermite_normal_form(IntMatrix a) {
  const std::size_t n = a.rows(), m = a.cols();
  if (m < n) throw PreconditionError("hermite_normal_form: fewer generators than rows");
  auto col_combine = [&](std::size_t c1, std::size_t c2, const BigInt& x, const BigInt& y, const BigInt& u,
                         const BigInt& v) {
    // (c1, c2) <- (x c1 + y c2, u c1 + v c2), unimodular when xv - yu = +-1
    for (std::size_t r = 0; r < n; ++r) {
      const BigInt a1 = a(r, c1), a2 = a(r, c2);
      a(r, c1) = x * a1 + y * a2;
      a(r, c2) = u * a1 + v * a2;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (a(i, j) == 0) continue;
      if (a(i, i) == 0) {
        for (std::size_t r = 0; r < n; ++r) std::swap(a(r, i), a(r, j));
        continue;
      }
      // Extended gcd on (a_ii, a_ij).
      BigInt old_r = a(i, i), r = a(i, j), old_s = 1, s = 0, old_t = 0, t = 1;
      while (r != 0) {
        const BigInt q = old_r / r;
        old_r -= q * r; std::swap(old_r, r);
        old_s -= q * s; std::swap(old_s, s);
        old_t -= q * t; std::swap(old_t, t);
      }
      // old_s a_ii + old_t a_ij = g; s, t annihilate: s a_ii + t a_ij = 0.
      col_combine(i, j, old_s, old_t, s, t);
    }
    if (a(i, i) == 0) throw PreconditionError("hermite_normal_form: generators are rank deficient");
    if (a(i, i) < 0)
      for (std::size_t r = 0; r < n; ++r) a(r, i) = -a(r, i);
    for (std::size_t k = 0; k < i; ++k) {
      const BigInt f = floor_div(a(i, k), a(i, i));
      if (f != 0)
        for (std::size_t r = 0; r < n; ++r) a(r, k) -= f * a(r, i);
    }
  }
  IntMatrix h(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) h(r, c) = a(r, c);
  return h;
}

/// HNF of the Z-span of rational columns, over the common denominator.
inline RatMatrix hermite_normal_form(const RatMatrix& generators) {
  const BigInt d = common_denominator(generators);
  const IntMatrix h = hermite_normal_form(to_integer(generators.scaled(Rational(d))));
  return to_rational(h).scaled(Rational(1) / Rational(d));
}

/// Elementary divisors d_1 | d_2 | ... of a square nonsingular integer matrix.
inline std::vector<BigInt> elementary_divisors(IntMatrix a) {
  if (a.rows() != a.cols()) throw PreconditionError("elementary_divisors: matrix not square");
  const std::size_t n = a.rows();
  std::vector<BigInt> out;
  for (std::size_t t = 0; t < n; ++t) {
    for (;;) {
      // Bring the smallest nonzero entry of the trailing block to (t, t).
      std::size_t pi = n, pj = n;
      for (std::size_t i = t; i < n; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (a(i, j) != 0 && (pi == n || abs(a(i, j)) < abs(a(pi, pj)))) {
            pi = i;
            pj = j;
          }
      if (pi == n) throw PreconditionError("elementary_divisors: matrix is singular");
      for (std::size_t j = 0; j < n; ++j) std::swap(a(t, j), a(pi, j));
      for (std::size_t i = 0; i < n; ++i) std::swap(a(i, t), a(i, pj));
      bool clean = true;
      for (std::size_t i = t + 1; i < n; ++i) {
        const BigInt q = a(i, t) / a(t, t);
        if (q != 0)
          for (std::size_t j = t; j < n; ++j) a(i, j) -= q * a(t, j);
        if (a(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        const BigInt q = a(t, j) / a(t, t);
        if (q != 0)
          for (std::size_t i = t; i < n; ++i) a(i, j) -= q * a(i, t);
        if (a(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // Divisibility: fold any offending row into row t.
      std::size_t bad = n;
      for (std::size_t i = t + 1; i < n && bad == n; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (a(i, j) % a(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad == n) break;
      for (std::size_t j = t; j < n; ++j) a(t, j) += a(bad, j);
    }
    out.push_back(abs(a(t, t)));
  }
  return out;
}

}  // namespace coverlab
