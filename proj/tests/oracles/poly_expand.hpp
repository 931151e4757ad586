#pragma once

// Naive polynomial expansion oracle. P(X + Y) is expanded by multiplying out
// (X_k + Y_k) one factor at a time; no binomial coefficients are used.

#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

using Exp = std::vector<unsigned>;
using Dict = std::map<Exp, std::uint64_t>;  // exponent -> coefficient mod q

inline Dict mul(const Dict& a, const Dict& b, std::uint64_t q) {
  Dict out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      Exp e(ea.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
      out[e] = (out[e] + ca * cb) % q;
    }
  for (auto it = out.begin(); it != out.end();) it = it->second ? std::next(it) : out.erase(it);
  return out;
}

/// P(X + Y) as a polynomial in 2n variables (X first, then Y).
inline Dict expand_shift(const Dict& p, std::size_t n, std::uint64_t q) {
  Dict out;
  for (const auto& [j, c] : p) {
    Dict term{{Exp(2 * n, 0), c % q}};
    for (std::size_t k = 0; k < n; ++k) {
      Exp ex(2 * n, 0), ey(2 * n, 0);
      ex[k] = 1;
      ey[n + k] = 1;
      const Dict factor{{ex, 1}, {ey, 1}};
      for (unsigned t = 0; t < j[k]; ++t) term = mul(term, factor, q);
    }
    for (const auto& [e, v] : term) out[e] = (out[e] + v) % q;
  }
  for (auto it = out.begin(); it != out.end();) it = it->second ? std::next(it) : out.erase(it);
  return out;
}

/// Coefficient of X^i in P(X + Y), as a polynomial in Y.
inline Dict x_coefficient(const Dict& shifted, const Exp& i, std::size_t n) {
  Dict out;
  for (const auto& [e, c] : shifted) {
    bool match = true;
    for (std::size_t k = 0; k < n; ++k) match = match && e[k] == i[k];
    if (match) out[Exp(e.begin() + static_cast<std::ptrdiff_t>(n), e.end())] = c;
  }
  return out;
}

/// P(X + a) by substituting Y = a in the expansion.
inline Dict shift_by(const Dict& p, const std::vector<std::uint64_t>& a, std::uint64_t q) {
  const std::size_t n = a.size();
  Dict out;
  for (const auto& [e, c] : expand_shift(p, n, q)) {
    std::uint64_t v = c;
    for (std::size_t k = 0; k < n; ++k)
      for (unsigned t = 0; t < e[n + k]; ++t) v = v * a[k] % q;
    Exp ex(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(n));
    out[ex] = (out[ex] + v) % q;
  }
  for (auto it = out.begin(); it != out.end();) it = it->second ? std::next(it) : out.erase(it);
  return out;
}

/// Largest m with P(X + a) = sum over ||i|| >= m; -1 stands for infinity.
inline long shift_multiplicity(const Dict& p, const std::vector<std::uint64_t>& a, std::uint64_t q) {
  const auto s = shift_by(p, a, q);
  if (s.empty()) return -1;
  long best = -1;
  for (const auto& [e, c] : s) {
    long d = 0;
    for (auto x : e) d += x;
    if (best < 0 || d < best) best = d;
  }
  return best;
}

}  // namespace oracle
