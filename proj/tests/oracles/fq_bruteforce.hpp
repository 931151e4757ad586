#pragma once

// Brute-force finite-field oracles. Deliberately naive: spans are computed by
// enumerating every coefficient combination, never by elimination.

#include <cstdint>
#include <set>
#include <vector>

namespace oracle {

using Vec = std::vector<std::uint64_t>;

inline std::uint64_t code(const Vec& v, std::uint64_t q) {
  std::uint64_t c = 0;
  for (auto e : v) c = c * q + e;
  return c;
}

inline Vec uncode(std::uint64_t c, std::size_t n, std::uint64_t q) {
  Vec v(n);
  for (std::size_t i = n; i-- > 0;) {
    v[i] = c % q;
    c /= q;
  }
  return v;
}

/// Codes of every linear combination of `rows`.
inline std::set<std::uint64_t> span_codes(const std::vector<Vec>& rows, std::size_t n, std::uint64_t q) {
  std::set<std::uint64_t> out;
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < rows.size(); ++i) combos *= q;
  for (std::uint64_t c = 0; c < combos; ++c) {
    Vec coeff = uncode(c, rows.size(), q);
    Vec v(n, 0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) v[j] = (v[j] + coeff[i] * rows[i][j]) % q;
    out.insert(code(v, q));
  }
  return out;
}

/// Rank as log_q |span|.
inline std::size_t span_rank(const std::vector<Vec>& rows, std::size_t n, std::uint64_t q) {
  std::size_t size = span_codes(rows, n, q).size();
  std::size_t r = 0;
  while (size > 1) {
    size /= q;
    ++r;
  }
  return r;
}

/// All r-dimensional subspaces of F_q^n, as sets of member codes, found by
/// spanning every r-tuple of vectors.
inline std::set<std::set<std::uint64_t>> all_subspaces(std::size_t n, std::size_t r, std::uint64_t q) {
  std::uint64_t qn = 1;
  for (std::size_t i = 0; i < n; ++i) qn *= q;
  std::uint64_t expected = 1;
  for (std::size_t i = 0; i < r; ++i) expected *= q;
  std::set<std::set<std::uint64_t>> out;
  std::vector<std::uint64_t> idx(r, 0);
  for (;;) {
    std::vector<Vec> rows;
    for (auto c : idx) rows.push_back(uncode(c, n, q));
    auto s = span_codes(rows, n, q);
    if (s.size() == expected) out.insert(std::move(s));
    std::size_t k = r;
    while (k > 0 && ++idx[k - 1] == qn) idx[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

}  // namespace oracle

namespace oracle {

/// Every affine flat x + S (as a code set) of rank r, grouped by direction.
inline std::vector<std::vector<std::set<std::uint64_t>>> all_flats(std::size_t n, std::size_t r, std::uint64_t q) {
  std::uint64_t qn = 1;
  for (std::size_t i = 0; i < n; ++i) qn *= q;
  std::vector<std::vector<std::set<std::uint64_t>>> out;
  for (const auto& s : all_subspaces(n, r, q)) {
    std::set<std::set<std::uint64_t>> translates;
    for (std::uint64_t x = 0; x < qn; ++x) {
      std::set<std::uint64_t> t;
      const Vec xv = uncode(x, n, q);
      for (auto c : s) {
        Vec v = uncode(c, n, q);
        for (std::size_t j = 0; j < n; ++j) v[j] = (v[j] + xv[j]) % q;
        t.insert(code(v, q));
      }
      translates.insert(std::move(t));
    }
    out.emplace_back(translates.begin(), translates.end());
  }
  return out;
}

/// Number of rank-r directions with a translate inside `members`.
inline std::size_t covered_directions(const std::set<std::uint64_t>& members, std::size_t n, std::size_t r,
                                      std::uint64_t q) {
  std::size_t covered = 0;
  for (const auto& dir : all_flats(n, r, q)) {
    for (const auto& flat : dir) {
      bool inside = true;
      for (auto c : flat) inside = inside && members.count(c);
      if (inside) {
        ++covered;
        break;
      }
    }
  }
  return covered;
}

/// Exhaustive minimum over all subsets of F_q^n (q^n <= 16) of the size of a set
/// covering at least `need` rank-r directions.
inline std::size_t exhaustive_minimum(std::size_t n, std::size_t r, std::uint64_t q, std::size_t need) {
  std::uint64_t qn = 1;
  for (std::size_t i = 0; i < n; ++i) qn *= q;
  std::vector<std::vector<std::uint32_t>> masks;
  for (const auto& dir : all_flats(n, r, q)) {
    std::vector<std::uint32_t> m;
    for (const auto& flat : dir) {
      std::uint32_t b = 0;
      for (auto c : flat) b |= 1u << c;
      m.push_back(b);
    }
    masks.push_back(std::move(m));
  }
  std::size_t best = qn;
  for (std::uint32_t set = 0; set < (1u << qn); ++set) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(set));
    if (size >= best) continue;
    std::size_t covered = 0;
    for (const auto& dir : masks)
      for (auto b : dir)
        if ((b & set) == b) {
          ++covered;
          break;
        }
    if (covered >= need) best = size;
  }
  return best;
}

}  // namespace oracle
