#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "coverlab/kakeya.hpp"
#include "oracles/fq_bruteforce.hpp"

using namespace coverlab;
using namespace coverlab::kakeya;

namespace {

KakeyaSet random_set(const PrimeField& F, std::size_t n, double density, Rng& rng) {
  std::vector<std::uint64_t> idx;
  const auto universe = ff::checked_power(F.modulus(), n);
  for (std::uint64_t i = 0; i < universe; ++i)
    if (rng.uniform01() < density) idx.push_back(i);
  return KakeyaSet::from_indices(F, n, idx);
}

std::set<std::uint64_t> as_codes(const KakeyaSet& k) {
  auto m = k.members();
  return {m.begin(), m.end()};
}

// Two lines through the origin in F_5^2.
KakeyaSet two_lines_f5() {
  PrimeField F(5);
  std::vector<std::vector<ff::Elem>> pts;
  for (ff::Elem t = 0; t < 5; ++t) {
    pts.push_back({t, 0});
    pts.push_back({0, t});
  }
  return KakeyaSet::from_points(F, 2, pts);
}

}  // namespace

TEST(KakeyaSet, MembershipAndSize) {
  PrimeField F(3);
  auto k = KakeyaSet::from_points(F, 2, {{0, 0}, {1, 2}, {1, 2}});
  EXPECT_EQ(k.size(), 2u);
  EXPECT_EQ(k.universe_size(), 9u);
  EXPECT_TRUE(k.contains(std::vector<ff::Elem>{1, 2}));
  EXPECT_FALSE(k.contains(std::vector<ff::Elem>{2, 1}));
  EXPECT_THROW(KakeyaSet::from_points(F, 2, {{3, 0}}), PreconditionError);
  EXPECT_THROW(KakeyaSet::from_points(F, 2, {{1}}), PreconditionError);
}

TEST(KakeyaSet, TextRoundTrip) {
  Rng rng(1);
  for (std::uint64_t q : {2, 3, 5}) {
    auto k = random_set(PrimeField(q), 3, 0.4, rng);
    std::stringstream ss;
    write_kakeya_set(ss, k);
    EXPECT_EQ(read_kakeya_set(ss), k);
  }
  std::stringstream bad("3 2\n0 3\n");
  EXPECT_THROW(read_kakeya_set(bad), ParseError);
  std::stringstream short_line("3 2\n0\n");
  EXPECT_THROW(read_kakeya_set(short_line), ParseError);
  std::stringstream no_header("");
  EXPECT_THROW(read_kakeya_set(no_header), ParseError);
}

TEST(Census, FullSpaceAndEmptySet) {
  for (std::uint64_t q : {2, 3}) {
    PrimeField F(q);
    for (std::size_t r = 1; r <= 3; ++r) {
      EXPECT_EQ(direction_census(KakeyaSet::full(F, 3), r).fraction, 1);
      EXPECT_EQ(direction_census(KakeyaSet(F, 3), r).fraction, 0);
    }
  }
}

TEST(Census, SingleLineInF3Squared) {
  PrimeField F(3);
  auto line = KakeyaSet::from_points(F, 2, {{1, 0}, {2, 1}, {0, 2}});  // (1,0) + span(1,1)
  auto c = direction_census(line, 1);
  EXPECT_EQ(c.fraction, Rational(1, 4));
  ASSERT_EQ(c.covered.size(), 1u);
  EXPECT_TRUE(c.covered[0].contains(std::vector<ff::Elem>{1, 1}));
  EXPECT_TRUE(is_eps_kakeya(line, 1, Rational(1, 4)));
  EXPECT_FALSE(is_eps_kakeya(line, 1, Rational(1, 4) + Rational(1, 1000)));
  EXPECT_FALSE(is_eps_kakeya(KakeyaSet(F, 2), 1, Rational(1, 10)));
  EXPECT_TRUE(is_eps_kakeya(KakeyaSet::full(F, 2), 1, 1));
}

TEST(Census, MatchesBruteForceOnRandomSets) {
  Rng rng(2);
  struct Case { std::uint64_t q; std::size_t n; };
  for (auto [q, n] : {Case{2, 3}, Case{3, 2}, Case{2, 4}, Case{3, 3}}) {
    PrimeField F(q);
    for (int trial = 0; trial < 6; ++trial) {
      auto k = random_set(F, n, 0.5 + 0.08 * trial, rng);
      for (std::size_t r = 1; r < n; ++r) {
        const auto census = direction_census(k, r);
        EXPECT_EQ(census.covered.size(), oracle::covered_directions(as_codes(k), n, r, q)) << q << n << r;
        EXPECT_TRUE(std::is_sorted(census.covered.begin(), census.covered.end()));
        for (const auto& s : census.covered) EXPECT_EQ(s.rank(), r);
      }
    }
  }
}

TEST(Census, ParallelMatchesSerial) {
  Rng rng(3);
  PrimeField F(3);
  auto k = random_set(F, 4, 0.7, rng);
  auto a = direction_census(k, 2, {1'000'000'000, 1});
  auto copy = KakeyaSet::from_indices(F, 4, k.members());  // fresh cache
  auto b = direction_census(copy, 2, {1'000'000'000, 4});
  EXPECT_EQ(a.fraction, b.fraction);
  EXPECT_EQ(a.covered, b.covered);
}

TEST(Census, CapIsEnforced) {
  auto k = KakeyaSet::full(PrimeField(3), 4);
  EXPECT_THROW(direction_census(k, 2, {1000, 1}), CapExceeded);
}

TEST(Census, GlInvariance) {
  Rng rng(4);
  struct Case { std::uint64_t q; std::size_t n; std::size_t r; };
  for (auto [q, n, r] : {Case{2, 4, 2}, Case{3, 3, 1}, Case{5, 2, 1}, Case{3, 3, 2}}) {
    PrimeField F(q);
    for (int trial = 0; trial < 5; ++trial) {
      auto k = random_set(F, n, 0.6, rng);
      auto g = ff::gl_sample(n, F, rng);
      EXPECT_EQ(direction_census(k.transformed(g), r).fraction, direction_census(k, r).fraction);
    }
  }
}

TEST(Census, EpsMonotonicity) {
  Rng rng(5);
  PrimeField F(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto k = random_set(F, 3, 0.7, rng);
    const auto f = direction_census(k, 1).fraction;
    for (int a = 1; a <= 10; ++a)
      for (int b = a; b <= 10; ++b) {
        Rational e1(a, 10), e2(b, 10);
        if (is_eps_kakeya(k, 1, e2)) {
          EXPECT_TRUE(is_eps_kakeya(k, 1, e1));
        }
      }
    EXPECT_TRUE(is_eps_kakeya(k, 1, f));
  }
}

TEST(Census, RankMonotonicity) {
  // Whatever fraction delta of rank-r directions is covered, at least that
  // fraction of rank-r' directions (r' <= r) is covered too.
  Rng rng(6);
  struct Case { std::uint64_t q; std::size_t n; };
  for (auto [q, n] : {Case{2, 4}, Case{3, 3}, Case{2, 5}}) {
    PrimeField F(q);
    for (int trial = 0; trial < 6; ++trial) {
      auto k = random_set(F, n, 0.75, rng);
      for (std::size_t r = 2; r < n; ++r) {
        const auto delta = direction_census(k, r).fraction;
        for (std::size_t rp = 1; rp < r; ++rp) EXPECT_TRUE(is_eps_kakeya(k, rp, delta)) << q << n << r << rp;
      }
    }
  }
}

TEST(Bounds, WeakDeltaExamples) {
  auto b = bound_weak_delta(3, 2, 2, 1);
  EXPECT_EQ(*b.exact, Rational(729, 121));
  EXPECT_NEAR(b.value, 6.0248, 1e-4);
  EXPECT_EQ(*bound_weak_delta(2, 1, 1, 1).exact, Rational(4, 3));
  EXPECT_EQ(*bound_weak_delta(2, 2, 1, 1).exact, Rational(16, 9));
  EXPECT_EQ(ceil(*bound_weak_delta(3, 2, 1, 1).exact), 4);
  for (std::uint64_t q : {2, 3, 5})
    for (std::size_t n = 1; n <= 5; ++n) EXPECT_LT(*bound_weak_delta(q, n, n, 1).exact, Rational(ff::checked_power(q, n)));
  EXPECT_THROW(bound_weak_delta(3, 2, 1, 0), PreconditionError);
  EXPECT_THROW(bound_weak_delta(3, 2, 1, Rational(3, 2)), PreconditionError);
}

TEST(Bounds, EpsGeneralExamples) {
  auto b = bound_eps_general(3, 2, 1, Rational(1, 2));
  EXPECT_EQ(*b.exact, Rational(81, 98));
  EXPECT_NEAR(b.value, 0.8265, 1e-4);
  for (std::uint64_t q : {2, 3, 5})
    for (std::size_t n = 2; n <= 4; ++n)
      for (std::size_t r = 1; r < n; ++r) {
        const Rational e(1, 7);
        EXPECT_EQ(*bound_eps_general(q, n, r, 2 * e).exact, 2 * *bound_eps_general(q, n, r, e).exact);
        EXPECT_LE(*bound_eps_general(q, n, r, Rational(999, 1000)).exact, *bound_weak_delta(q, n, r, 1).exact);
      }
  EXPECT_THROW(bound_eps_general(3, 2, 1, 0), PreconditionError);
}

TEST(Bounds, Rank1Formula) {
  const double q = 100003;
  const double expected = 0.5 * std::exp(-1.0) / std::log(4 * std::exp(1.0)) * (q * q / 4);
  EXPECT_NEAR(bound_eps_rank1(100003, 2, 0.5), expected, 1e-12 * expected);
  EXPECT_LT(bound_eps_rank1(101, 2, 0.5), bound_eps_rank1(103, 2, 0.5));
  EXPECT_NEAR(bound_eps_rank1(7, 3, 0.4), 2 * bound_eps_rank1(7, 3, 0.2), 1e-12);
  EXPECT_THROW(bound_eps_rank1(3, 2, 1.0), PreconditionError);
}

TEST(Bounds, Rank2Corollary) {
  EXPECT_NEAR(corollary_rank2_threshold(10, 5, 1).density, std::exp(-1.0), 1e-15);
  auto c = corollary_rank2_threshold(3, 2, 0.5);
  EXPECT_NEAR(c.density, 0.5 * std::exp(-4.0 / 3.0), 1e-15);
  EXPECT_NEAR(c.density, 0.13174, 1e-4);
  EXPECT_NEAR(c.complement, 1 - c.density, 1e-15);
  for (std::uint64_t q : {2, 3, 5, 7})
    for (std::size_t n = 2; n <= 8; ++n) {
      const double bound = bound_eps_general(q, n, 2, Rational(1, 2)).value / std::pow(double(q), double(n));
      EXPECT_LE(corollary_rank2_threshold(q, n, 0.5).density, bound * (1 + 1e-12)) << q << " " << n;
    }
}

TEST(Union, GeneratorCount) {
  EXPECT_EQ(union_generator_count(Rational(1, 5), Rational(9, 10)), 11u);
  EXPECT_EQ(union_generator_count(Rational(1, 2), Rational(3, 4)), 2u);  // equality hit exactly
  EXPECT_EQ(union_generator_count(Rational(1, 2), Rational(3, 4) + Rational(1, 1000)), 3u);
  for (int a = 1; a < 20; ++a)
    for (int b = a + 1; b < 20; ++b) {
      const double eps = a / 20.0, delta = b / 20.0;
      const double expected = std::ceil(std::log(1 - delta) / std::log(1 - eps) - 1e-12);
      EXPECT_EQ(double(union_generator_count(Rational(a, 20), Rational(b, 20))), expected) << a << " " << b;
    }
  EXPECT_THROW(union_generator_count(Rational(1, 2), Rational(1, 2)), PreconditionError);
}

TEST(Union, SingleTranslatePreservesFraction) {
  Rng rng(7);
  PrimeField F(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto k = random_set(F, 3, 0.6, rng);
    auto g = ff::gl_sample(3, F, rng);
    EXPECT_EQ(direction_census(k.transformed(g), 1).fraction, direction_census(k, 1).fraction);
    EXPECT_EQ(k.transformed(g).size(), k.size());
  }
}

TEST(Union, ConstructsDeltaKakeyaInF5Squared) {
  auto k = two_lines_f5();
  ASSERT_EQ(direction_census(k, 1).fraction, Rational(2, 6));
  Rng rng(8);
  auto res = union_construct(k, 1, Rational(1, 5), Rational(9, 10), rng);
  EXPECT_EQ(res.generator_count, 11u);
  EXPECT_EQ(res.generators.size(), 11u);
  EXPECT_TRUE(is_eps_kakeya(res.set, 1, Rational(9, 10)));
  EXPECT_LE(res.set.size(), 11 * k.size());
  // A is exactly the union of the recorded translates.
  std::set<std::uint64_t> expected;
  for (const auto& g : res.generators)
    for (auto c : k.transformed(g).members()) expected.insert(c);
  EXPECT_EQ(as_codes(res.set), expected);
}

TEST(Union, RejectsNonKakeyaInput) {
  PrimeField F(5);
  auto line = KakeyaSet::from_points(F, 2, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});  // 1/6 of directions
  Rng rng(9);
  EXPECT_THROW(union_construct(line, 1, Rational(1, 5), Rational(9, 10), rng), PreconditionError);
}

TEST(Union, RetryLimitReportsBestFraction) {
  PrimeField F(5);
  auto dot = KakeyaSet::from_points(F, 2, {{0, 0}});  // no line fits in a point
  Rng rng(10);
  UnionOptions opt;
  opt.retry_limit = 3;
  opt.verify_input = false;
  try {
    union_construct(dot, 1, Rational(1, 5), Rational(9, 10), rng, opt);
    FAIL() << "expected RetryLimitExhausted";
  } catch (const RetryLimitExhausted& e) {
    EXPECT_EQ(e.best_fraction, 0);
  }
}

TEST(Union, GreedyVariantReachesTarget) {
  Rng rng(11);
  auto res = union_construct_greedy(two_lines_f5(), 1, Rational(9, 10), rng);
  EXPECT_GE(res.fraction, Rational(9, 10));
  EXPECT_EQ(res.generators.size(), res.generator_count);
}

TEST(MinimalSearch, TrivialAndSmallExamples) {
  auto one = minimal_kakeya_search(2, 1, 1, 1);
  EXPECT_TRUE(one.exact);
  EXPECT_EQ(one.size, 2u);
  auto f2 = minimal_kakeya_search(2, 2, 1, 1);
  EXPECT_TRUE(f2.exact);
  EXPECT_GE(Rational(f2.size), *bound_weak_delta(2, 2, 1, 1).exact);
  auto f3 = minimal_kakeya_search(3, 2, 1, 1);
  EXPECT_TRUE(f3.exact);
  EXPECT_GE(f3.size, 4u);
  EXPECT_THROW(minimal_kakeya_search(3, 5, 1, 1), CapExceeded);
}

TEST(MinimalSearch, MatchesExhaustiveMinimum) {
  struct Case { std::uint64_t q; std::size_t n; };
  for (auto [q, n] : {Case{2, 2}, Case{3, 2}, Case{2, 3}, Case{2, 4}}) {
    PrimeField F(q);
    for (std::size_t r = 1; r < n; ++r) {
      const BigInt total = ff::grassmannian_count(n, r, F);
      for (Rational eps : {Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)}) {
        const auto need = ceil(Rational(eps * total)).convert_to<std::size_t>();
        auto res = minimal_kakeya_search(q, n, r, eps);
        ASSERT_TRUE(res.exact);
        EXPECT_EQ(res.size, oracle::exhaustive_minimum(n, r, q, need)) << q << n << r << " " << eps;
        EXPECT_EQ(res.witness.size(), res.size);
        EXPECT_TRUE(is_eps_kakeya(res.witness, r, eps));
      }
    }
  }
}

TEST(MinimalSearch, BudgetedSearchBracketsTheMinimum) {
  auto res = minimal_kakeya_search(2, 5, 2, 1, {2000});
  EXPECT_LE(res.lower_bound, res.size);
  EXPECT_TRUE(is_eps_kakeya(res.witness, 2, 1));
  EXPECT_EQ(res.witness.size(), res.size);
  auto full = minimal_kakeya_search(2, 5, 2, 1, {50'000});
  EXPECT_GE(full.lower_bound, res.lower_bound);
}
