#pragma once

// (eps-)Kakeya sets of rank r in F_q^n: membership, direction census,
// the union-of-translates construction, lower-bound calculators and an exact
// search for minimal sets on small instances.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coverlab/errors.hpp"
#include "coverlab/ffield.hpp"
#include "coverlab/parallel.hpp"
#include "coverlab/rational.hpp"
#include "coverlab/rng.hpp"

namespace coverlab::kakeya {

using ff::Elem;
using ff::FqMatrix;
using ff::PrimeField;
using ff::Subspace;

struct DirectionCensus {
  std::size_t rank = 0;
  std::vector<Subspace> covered;  // canonical order
  BigInt total;                   // |Gr_{n,r}(F_q)|
  Rational fraction;              // covered.size() / total
};

/// A subset of F_q^n as a bitset over mixed-radix vector codes.
/// Immutable; censuses are cached per rank and shared between copies.
class KakeyaSet {
 public:
  KakeyaSet(PrimeField field, std::size_t n)
      : field_(field), n_(n), universe_(ff::checked_power(field.modulus(), n)),
        words_((universe_ + 63) / 64, 0), cache_(std::make_shared<Cache>()) {
    if (n == 0) throw PreconditionError("KakeyaSet: dimension must be >= 1");
    if (universe_ > (std::uint64_t{1} << 32)) throw CapExceeded("KakeyaSet: q^n too large for a bitset");
  }

  static KakeyaSet full(PrimeField field, std::size_t n) {
    KakeyaSet k(field, n);
    for (std::uint64_t i = 0; i < k.universe_; ++i) k.set(i);
    return k;
  }

  static KakeyaSet from_indices(PrimeField field, std::size_t n, const std::vector<std::uint64_t>& idx) {
    KakeyaSet k(field, n);
    for (auto i : idx) {
      if (i >= k.universe_) throw PreconditionError("KakeyaSet: index out of range");
      k.set(i);
    }
    return k;
  }

  static KakeyaSet from_points(PrimeField field, std::size_t n, const std::vector<std::vector<Elem>>& pts) {
    KakeyaSet k(field, n);
    for (const auto& p : pts) {
      if (p.size() != n) throw PreconditionError("KakeyaSet: point has wrong dimension");
      for (Elem e : p)
        if (e >= field.modulus()) throw PreconditionError("KakeyaSet: coordinate out of range");
      k.set(ff::encode(p, field.modulus()));
    }
    return k;
  }

  /// The affine flat x + S.
  static KakeyaSet flat(const Subspace& s, const std::vector<Elem>& x) {
    KakeyaSet k(s.field(), s.ambient_dim());
    for (auto v : s.elements()) {
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = s.field().add(v[j], x[j]);
      k.set(ff::encode(v, s.field().modulus()));
    }
    return k;
  }

  const PrimeField& field() const noexcept { return field_; }
  std::uint64_t q() const noexcept { return field_.modulus(); }
  std::size_t n() const noexcept { return n_; }
  std::uint64_t universe_size() const noexcept { return universe_; }

  bool contains_index(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  bool contains(std::span<const Elem> x) const { return contains_index(ff::encode(x, q())); }

  std::uint64_t size() const noexcept {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  std::vector<std::uint64_t> members() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i < universe_; ++i)
      if (contains_index(i)) out.push_back(i);
    return out;
  }

  /// g K = { g x : x in K }.
  KakeyaSet transformed(const FqMatrix& g) const {
    KakeyaSet out(field_, n_);
    for (auto i : members()) out.set(ff::encode(g.apply(ff::decode(i, n_, q())), q()));
    return out;
  }

  KakeyaSet united(const KakeyaSet& other) const {
    if (!(other.field_ == field_) || other.n_ != n_) throw PreconditionError("KakeyaSet union: shape mismatch");
    KakeyaSet out(field_, n_);
    for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = words_[w] | other.words_[w];
    return out;
  }

  friend bool operator==(const KakeyaSet& a, const KakeyaSet& b) {
    return a.field_ == b.field_ && a.n_ == b.n_ && a.words_ == b.words_;
  }

  // Census cache, used by direction_census.
  std::shared_ptr<const DirectionCensus> cached_census(std::size_t r) const {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->by_rank.find(r);
    return it == cache_->by_rank.end() ? nullptr : it->second;
  }
  void store_census(std::shared_ptr<const DirectionCensus> c) const {
    std::lock_guard lock(cache_->mutex);
    cache_->by_rank[c->rank] = std::move(c);
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::size_t, std::shared_ptr<const DirectionCensus>> by_rank;
  };

  void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  PrimeField field_;
  std::size_t n_;
  std::uint64_t universe_;
  std::vector<std::uint64_t> words_;
  std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Text format: "q n" then one member per line as space-separated digits.

inline void write_kakeya_set(std::ostream& os, const KakeyaSet& k) {
  os << k.q() << ' ' << k.n() << '\n';
  for (auto i : k.members()) {
    auto x = ff::decode(i, k.n(), k.q());
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? " " : "") << x[j];
    os << '\n';
  }
}

inline KakeyaSet read_kakeya_set(std::istream& is) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("kakeya set: missing 'q n' header");
  std::istringstream header(line);
  std::uint64_t q = 0;
  std::size_t n = 0;
  if (!(header >> q >> n) || n == 0) throw ParseError("kakeya set: malformed header '" + line + "'");
  std::string extra;
  if (header >> extra) throw ParseError("kakeya set: trailing tokens in header");
  PrimeField F(q);
  std::vector<std::vector<Elem>> pts;
  while (next_line()) {
    std::istringstream row(line);
    std::vector<Elem> x;
    long long v;
    while (row >> v) {
      if (v < 0 || static_cast<std::uint64_t>(v) >= q) throw ParseError("kakeya set: digit out of range in '" + line + "'");
      x.push_back(static_cast<Elem>(v));
    }
    if (!row.eof() || x.size() != n) throw ParseError("kakeya set: malformed member line '" + line + "'");
    pts.push_back(std::move(x));
  }
  return KakeyaSet::from_points(F, n, pts);
}

// ---------------------------------------------------------------------------
// Direction census.

struct CensusOptions {
  std::uint64_t cap = 1'000'000'000;  // membership tests
  unsigned threads = 1;
};

namespace detail {

/// Coset representatives of S: vectors vanishing on the pivot coordinates.
inline std::vector<std::vector<Elem>> transversal(const Subspace& s) {
  const auto q = s.field().modulus();
  const std::size_t n = s.ambient_dim();
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < n; ++j)
    if (!std::binary_search(s.pivots().begin(), s.pivots().end(), j)) free.push_back(j);
  const std::uint64_t count = ff::checked_power(q, free.size());
  std::vector<std::vector<Elem>> reps;
  reps.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) {
    auto digits = ff::decode(c, free.size(), q);
    std::vector<Elem> x(n, 0);
    for (std::size_t f = 0; f < free.size(); ++f) x[free[f]] = digits[f];
    reps.push_back(std::move(x));
  }
  return reps;
}

/// Does K contain some translate x + S?
inline bool covers_direction(const KakeyaSet& k, const Subspace& s) {
  const auto& F = s.field();
  const auto q = F.modulus();
  const auto elems = s.elements();
  std::vector<Elem> y(s.ambient_dim());
  for (const auto& x : transversal(s)) {
    bool all = true;
    for (const auto& v : elems) {
      for (std::size_t j = 0; j < y.size(); ++j) y[j] = F.add(x[j], v[j]);
      if (!k.contains_index(ff::encode(y, q))) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace detail

/// Exact census of the rank-r directions S with a translate x + S inside K.
inline DirectionCensus direction_census(const KakeyaSet& k, std::size_t r, const CensusOptions& opt = {}) {
  if (auto cached = k.cached_census(r)) return *cached;
  const BigInt total = ff::grassmannian_count(k.n(), r, k.field());
  if (total * k.universe_size() > opt.cap)
    throw CapExceeded("direction_census: |Gr| * q^n = " + BigInt(total * k.universe_size()).str() +
                      " exceeds cap " + std::to_string(opt.cap));
  const auto all = ff::grassmannian_enumerate(k.n(), r, k.field(), opt.cap);
  std::vector<char> hit(all.size(), 0);
  parallel_for(all.size(), opt.threads, [&](std::size_t i) { hit[i] = detail::covers_direction(k, all[i]); });
  auto census = std::make_shared<DirectionCensus>();
  census->rank = r;
  census->total = total;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (hit[i]) census->covered.push_back(all[i]);
  census->fraction = Rational(BigInt(census->covered.size()), total);
  k.store_census(census);
  return *census;
}

inline bool is_eps_kakeya(const KakeyaSet& k, std::size_t r, const Rational& eps, const CensusOptions& opt = {}) {
  return direction_census(k, r, opt).fraction >= eps;
}

// ---------------------------------------------------------------------------
// Lower-bound calculators. Natural logarithms throughout.

struct Bound {
  double value = 0;
  std::optional<Rational> exact;  // present when the formula is rational
};

/// (1 + (q-1) q^{-r} / delta)^{-n} q^n, for 0 < delta <= 1.
inline Bound bound_weak_delta(std::uint64_t q, std::size_t n, std::size_t r, const Rational& delta) {
  require(q >= 2, "bound_weak_delta: q >= 2");
  require(delta > 0 && delta <= 1, "bound_weak_delta: delta must lie in (0, 1]");
  const Rational qq(q);
  const Rational base = 1 + (qq - 1) / (pow(qq, static_cast<int>(r)) * delta);
  const Rational exact = pow(qq, static_cast<int>(n)) / pow(base, static_cast<int>(n));
  return {to_double(exact), exact};
}

/// eps (1 + 2(q-1) q^{-r})^{-n} q^n. The theorem is stated for eps in (0,1);
/// eps = 1 is also accepted, where the inequality follows from the weak bound.
inline Bound bound_eps_general(std::uint64_t q, std::size_t n, std::size_t r, const Rational& eps) {
  require(q >= 2, "bound_eps_general: q >= 2");
  require(eps > 0 && eps <= 1, "bound_eps_general: eps must lie in (0, 1]");
  const Rational qq(q);
  const Rational base = 1 + 2 * (qq - 1) / pow(qq, static_cast<int>(r));
  const Rational exact = eps * pow(qq, static_cast<int>(n)) / pow(base, static_cast<int>(n));
  return {to_double(exact), exact};
}

/// eps e^{-1} / log(2 e n) 2^{-n} q^n (rank one).
inline double bound_eps_rank1(std::uint64_t q, std::size_t n, double eps) {
  require(q >= 2 && n >= 1, "bound_eps_rank1: q >= 2, n >= 1");
  require(eps > 0 && eps < 1, "bound_eps_rank1: eps must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  return eps * std::exp(-1.0) / std::log(2.0 * std::exp(1.0) * nn) * std::pow(static_cast<double>(q) / 2.0, nn);
}

struct Rank2Threshold {
  double density;     // eps e^{-2n/q}: any eps-Kakeya set of rank 2 has |K|/q^n above this
  double complement;  // 1 - eps e^{-2n/q}
};

inline Rank2Threshold corollary_rank2_threshold(std::uint64_t q, std::size_t n, double eps) {
  require(q >= 2, "corollary_rank2_threshold: q >= 2");
  require(eps > 0 && eps <= 1, "corollary_rank2_threshold: eps must lie in (0, 1]");
  const double t = eps * std::exp(-2.0 * static_cast<double>(n) / static_cast<double>(q));
  return {t, 1.0 - t};
}

// ---------------------------------------------------------------------------
// Union of GL-translates.

/// Smallest N with (1 - eps)^N <= 1 - delta, i.e. ceil(log(1-delta)/log(1-eps)),
/// evaluated exactly.
inline std::uint64_t union_generator_count(const Rational& eps, const Rational& delta) {
  require(eps > 0 && eps < delta && delta < 1, "union_generator_count: need 0 < eps < delta < 1");
  const Rational miss = 1 - eps, target = 1 - delta;
  Rational acc = miss;
  std::uint64_t n = 1;
  while (acc > target) {
    acc *= miss;
    ++n;
  }
  return n;
}

struct UnionResult {
  KakeyaSet set;
  std::uint64_t generator_count = 0;
  std::vector<FqMatrix> generators;
  Rational fraction;           // census fraction of `set`
  std::uint64_t attempts = 0;  // batches drawn
};

class RetryLimitExhausted : public ConvergenceError {
 public:
  RetryLimitExhausted(const std::string& what, Rational best) : ConvergenceError(what), best_fraction(std::move(best)) {}
  Rational best_fraction;
};

struct UnionOptions {
  std::uint64_t retry_limit = 64;
  bool verify_input = true;  // census-check that K is eps-Kakeya when within cap
  CensusOptions census{};
};

/// A = union of g_i K over N uniform g_i in GL_n(F_q), N = ceil(log(1-delta)/log(1-eps)).
/// Whole batches are redrawn until A is delta-Kakeya of rank r.
inline UnionResult union_construct(const KakeyaSet& k, std::size_t r, const Rational& eps, const Rational& delta,
                                   Rng& rng, const UnionOptions& opt = {}) {
  const std::uint64_t count = union_generator_count(eps, delta);
  if (opt.verify_input) {
    bool feasible = true;
    try {
      if (!is_eps_kakeya(k, r, eps, opt.census))
        throw PreconditionError("union_construct: input set is not eps-Kakeya of rank " + std::to_string(r));
    } catch (const CapExceeded&) {
      feasible = false;
    }
    (void)feasible;
  }
  Rational best = -1;
  for (std::uint64_t attempt = 1; attempt <= opt.retry_limit; ++attempt) {
    std::vector<FqMatrix> gens;
    gens.reserve(count);
    std::optional<KakeyaSet> acc;
    for (std::uint64_t i = 0; i < count; ++i) {
      gens.push_back(ff::gl_sample(k.n(), k.field(), rng));
      auto gk = k.transformed(gens.back());
      acc = acc ? acc->united(gk) : gk;
    }
    const auto census = direction_census(*acc, r, opt.census);
    if (census.fraction >= delta) return {*acc, count, std::move(gens), census.fraction, attempt};
    best = std::max(best, census.fraction);
  }
  throw RetryLimitExhausted("union_construct: retry limit exhausted; best fraction " + to_string(best), best);
}

/// Greedy augmentation: keep adding random translates g K until the target
/// fraction is reached. Not the probabilistic construction above; provided for
/// comparison of achieved sizes.
inline UnionResult union_construct_greedy(const KakeyaSet& k, std::size_t r, const Rational& delta, Rng& rng,
                                          std::uint64_t max_generators = 256, const CensusOptions& census_opt = {}) {
  require(delta > 0 && delta <= 1, "union_construct_greedy: delta must lie in (0, 1]");
  std::vector<FqMatrix> gens;
  std::optional<KakeyaSet> acc;
  for (std::uint64_t i = 0; i < max_generators; ++i) {
    gens.push_back(ff::gl_sample(k.n(), k.field(), rng));
    auto gk = k.transformed(gens.back());
    acc = acc ? acc->united(gk) : gk;
    const auto census = direction_census(*acc, r, census_opt);
    if (census.fraction >= delta) return {*acc, gens.size(), gens, census.fraction, 1};
  }
  const auto census = direction_census(*acc, r, census_opt);
  throw RetryLimitExhausted("union_construct_greedy: generator limit reached", census.fraction);
}

// ---------------------------------------------------------------------------
// Exact minimal eps-Kakeya sets on small instances.
//
// A minimal eps-Kakeya set is a union of t = ceil(eps |Gr|) flats with distinct
// directions. The search is IDA*: for a size threshold s it runs a depth-first
// branch-and-bound that either picks a coset for some uncovered direction or
// forbids that direction entirely. The first flat is fixed to span(e_1..e_r),
// which is no loss since the affine group acts transitively on r-flats. Each
// threshold that is exhausted certifies a lower bound.

struct MinimalSearchOptions {
  std::uint64_t node_budget = 20'000'000;
};

struct MinimalSearchResult {
  std::uint64_t size = 0;         // best size found (upper bound)
  std::uint64_t lower_bound = 0;  // certified: no eps-Kakeya set is smaller
  bool exact = false;             // lower_bound == size
  KakeyaSet witness;
  std::uint64_t required_directions = 0;
  std::uint64_t nodes = 0;
};

namespace detail {

struct Mask {
  std::uint64_t lo = 0, hi = 0;
  void set(std::uint64_t i) { (i < 64 ? lo : hi) |= std::uint64_t{1} << (i & 63); }
  Mask operator|(const Mask& o) const { return {lo | o.lo, hi | o.hi}; }
  Mask minus(const Mask& o) const { return {lo & ~o.lo, hi & ~o.hi}; }
  int count() const { return std::popcount(lo) + std::popcount(hi); }
};

class MinimalSearch {
 public:
  MinimalSearch(const PrimeField& F, std::size_t n, std::size_t r, std::uint64_t need, std::uint64_t budget)
      : n_(n), need_(need), budget_(budget) {
    const auto q = F.modulus();
    const auto subspaces = ff::grassmannian_enumerate(n, r, F);
    for (const auto& s : subspaces) {
      std::vector<Mask> cosets;
      const auto elems = s.elements();
      for (const auto& x : transversal(s)) {
        Mask m;
        std::vector<Elem> y(n);
        for (const auto& v : elems) {
          for (std::size_t j = 0; j < n; ++j) y[j] = F.add(x[j], v[j]);
          m.set(ff::encode(y, q));
        }
        cosets.push_back(m);
      }
      flats_.push_back(std::move(cosets));
    }
  }

  std::size_t directions() const { return flats_.size(); }

  /// Greedy upper bound: repeatedly add the cheapest flat of an uncovered direction.
  Mask greedy() const {
    Mask k = flats_[0][0];
    for (;;) {
      std::uint64_t covered = 0;
      int best_cost = 1 << 30;
      const Mask* best = nullptr;
      for (const auto& cosets : flats_) {
        int c = min_cost(cosets, k, nullptr);
        if (c == 0) {
          ++covered;
        } else if (c < best_cost) {
          best_cost = c;
          best = &cosets[static_cast<std::size_t>(min_index(cosets, k))];
        }
      }
      if (covered >= need_ || best == nullptr) return k;
      k = k | *best;
    }
  }

  enum class Outcome { Found, Exhausted, BudgetOut };

  /// Is there a set of size <= threshold? Updates next_threshold_ on failure.
  Outcome decide(std::uint64_t threshold, Mask& witness) {
    threshold_ = threshold;
    next_threshold_ = UINT64_MAX;
    forbidden_.assign(flats_.size(), 0);
    found_ = false;
    out_of_budget_ = false;
    dfs(flats_[0][0]);
    if (found_) {
      witness = witness_;
      return Outcome::Found;
    }
    return out_of_budget_ ? Outcome::BudgetOut : Outcome::Exhausted;
  }

  std::uint64_t next_threshold() const { return next_threshold_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  static int min_cost(const std::vector<Mask>& cosets, const Mask& k, int* count_at_min) {
    int best = 1 << 30, cnt = 0;
    for (const auto& c : cosets) {
      const int v = c.minus(k).count();
      if (v < best) {
        best = v;
        cnt = 1;
      } else if (v == best) {
        ++cnt;
      }
    }
    if (count_at_min) *count_at_min = cnt;
    return best;
  }
  static int min_index(const std::vector<Mask>& cosets, const Mask& k) {
    int best = 1 << 30, idx = 0;
    for (std::size_t i = 0; i < cosets.size(); ++i) {
      const int v = cosets[i].minus(k).count();
      if (v < best) {
        best = v;
        idx = static_cast<int>(i);
      }
    }
    return idx;
  }

  void dfs(const Mask& k) {
    if (found_ || out_of_budget_) return;
    if (++nodes_ > budget_) {
      out_of_budget_ = true;
      return;
    }
    const auto size = static_cast<std::uint64_t>(k.count());
    std::uint64_t covered = 0;
    std::vector<int> costs;
    costs.reserve(flats_.size());
    std::size_t branch = flats_.size();
    int branch_cost = -1, branch_ties = 0;
    const bool all_required = (need_ == flats_.size());
    for (std::size_t d = 0; d < flats_.size(); ++d) {
      int ties = 0;
      const int c = min_cost(flats_[d], k, &ties);
      if (c == 0) {
        if (forbidden_[d]) return;  // a forbidden direction became covered
        ++covered;
        continue;
      }
      if (forbidden_[d]) continue;
      costs.push_back(c);
      // All directions required: fail-first on the most expensive direction.
      // Otherwise: dive on the cheapest one.
      const bool better = all_required ? (c > branch_cost || (c == branch_cost && ties < branch_ties))
                                       : (branch_cost < 0 || c < branch_cost ||
                                          (c == branch_cost && ties < branch_ties));
      if (better) {
        branch = d;
        branch_cost = c;
        branch_ties = ties;
      }
    }
    if (covered >= need_) {
      if (size <= threshold_) {
        found_ = true;
        witness_ = k;
      } else {
        next_threshold_ = std::min(next_threshold_, size);
      }
      return;
    }
    const std::uint64_t missing = need_ - covered;
    if (costs.size() < missing) return;
    std::nth_element(costs.begin(), costs.begin() + static_cast<std::ptrdiff_t>(missing - 1), costs.end());
    const std::uint64_t lb = size + static_cast<std::uint64_t>(costs[missing - 1]);
    if (lb > threshold_) {
      next_threshold_ = std::min(next_threshold_, lb);
      return;
    }
    // Cover the branch direction with one of its cosets, cheapest first.
    const auto& cosets = flats_[branch];
    std::vector<std::pair<int, std::size_t>> order;
    for (std::size_t i = 0; i < cosets.size(); ++i) order.emplace_back(cosets[i].minus(k).count(), i);
    std::sort(order.begin(), order.end());
    for (const auto& [cost, i] : order) {
      if (size + static_cast<std::uint64_t>(cost) > threshold_) {
        next_threshold_ = std::min(next_threshold_, size + static_cast<std::uint64_t>(cost));
        break;
      }
      dfs(k | cosets[i]);
      if (found_ || out_of_budget_) return;
    }
    // ... or never cover it.
    if (costs.size() > missing) {
      forbidden_[branch] = 1;
      dfs(k);
      forbidden_[branch] = 0;
    }
  }

  std::size_t n_;
  std::uint64_t need_;
  std::uint64_t budget_;
  std::vector<std::vector<Mask>> flats_;
  std::vector<char> forbidden_;
  std::uint64_t threshold_ = 0, next_threshold_ = 0, nodes_ = 0;
  bool found_ = false, out_of_budget_ = false;
  Mask witness_;
};

}  // namespace detail

inline MinimalSearchResult minimal_kakeya_search(std::uint64_t q, std::size_t n, std::size_t r, const Rational& eps,
                                                 const MinimalSearchOptions& opt = {}) {
  const PrimeField F(q);
  require(r >= 1 && r <= n, "minimal_kakeya_search: need 1 <= r <= n");
  require(eps > 0 && eps <= 1, "minimal_kakeya_search: eps must lie in (0, 1]");
  const std::uint64_t universe = ff::checked_power(q, n);
  if (universe > 81) throw CapExceeded("minimal_kakeya_search: instance too large (q^n > 81)");
  const BigInt total = ff::grassmannian_count(n, r, F);
  const auto need = ceil(Rational(eps * total)).convert_to<std::uint64_t>();

  detail::MinimalSearch search(F, n, r, need, opt.node_budget);
  auto to_set = [&](const detail::Mask& m) {
    std::vector<std::uint64_t> idx;
    for (std::uint64_t i = 0; i < universe; ++i)
      if ((i < 64 ? (m.lo >> i) : (m.hi >> (i - 64))) & 1u) idx.push_back(i);
    return KakeyaSet::from_indices(F, n, idx);
  };

  detail::Mask best = search.greedy();
  std::uint64_t upper = static_cast<std::uint64_t>(best.count());
  std::uint64_t lower = ff::checked_power(q, r);  // K contains at least one flat
  while (lower < upper) {
    detail::Mask w;
    const auto outcome = search.decide(lower, w);
    if (outcome == detail::MinimalSearch::Outcome::Found) {
      best = w;
      upper = static_cast<std::uint64_t>(w.count());
      lower = upper;
      break;
    }
    if (outcome == detail::MinimalSearch::Outcome::BudgetOut) break;
    lower = std::min(upper, search.next_threshold());
  }
  MinimalSearchResult res{upper, lower, lower == upper, to_set(best), need, search.nodes()};
  return res;
}

}  // namespace coverlab::kakeya
