#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "coverlab/ffield.hpp"
#include "oracles/fq_bruteforce.hpp"

using namespace coverlab;
using namespace coverlab::ff;

namespace {

std::vector<oracle::Vec> rows_of(const FqMatrix& m) {
  std::vector<oracle::Vec> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

std::set<std::uint64_t> subspace_codes(const Subspace& s) {
  return oracle::span_codes(rows_of(s.basis()), s.ambient_dim(), s.field().modulus());
}

// Binomial 3-sigma band for a frequency.
void expect_within_3sigma(double count, double draws, double p) {
  const double sigma = std::sqrt(draws * p * (1 - p));
  EXPECT_LE(std::abs(count - draws * p), 3 * sigma) << "count " << count << " expected " << draws * p;
}

}  // namespace

TEST(PrimeField, RejectsComposite) {
  EXPECT_THROW(PrimeField(1), PreconditionError);
  EXPECT_THROW(PrimeField(9), PreconditionError);
  EXPECT_THROW(PrimeField(561), PreconditionError);  // Carmichael
  EXPECT_NO_THROW(PrimeField(10007));
  EXPECT_NO_THROW(PrimeField(18446744073709551557ULL));  // largest 64-bit prime
}

TEST(PrimeField, Arithmetic) {
  PrimeField F(7);
  EXPECT_EQ(F.add(5, 4), 2u);
  EXPECT_EQ(F.sub(2, 5), 4u);
  EXPECT_EQ(F.mul(3, 5), 1u);
  EXPECT_EQ(F.inv(3), 5u);
  EXPECT_EQ(F.from_int(-1), 6u);
  EXPECT_THROW(F.inv(0), PreconditionError);
  PrimeField big(18446744073709551557ULL);
  const Elem a = 18446744073709551556ULL;  // -1
  EXPECT_EQ(big.mul(a, a), 1u);
  EXPECT_EQ(big.add(a, a), 18446744073709551555ULL);
  EXPECT_EQ(big.mul(a, big.inv(a)), 1u);
}

TEST(PrimeField, IsPrimeAgreesWithTrialDivision) {
  for (std::uint64_t n = 0; n < 5000; ++n) {
    bool trial = n >= 2;
    for (std::uint64_t d = 2; d * d <= n; ++d)
      if (n % d == 0) trial = false;
    ASSERT_EQ(is_prime(n), trial) << n;
  }
}

TEST(Rref, IdentityOverF3) {
  PrimeField F(3);
  auto res = rref(FqMatrix::identity(F, 2));
  EXPECT_EQ(res.rank, 2u);
  EXPECT_EQ(res.form, FqMatrix::identity(F, 2));
}

TEST(Rref, DependentRowsOverF5) {
  PrimeField F(5);
  auto res = rref(FqMatrix(F, 2, 2, {1, 2, 2, 4}));
  EXPECT_EQ(res.rank, 1u);
  EXPECT_EQ(res.form, FqMatrix(F, 2, 2, {1, 2, 0, 0}));
}

TEST(Rref, RankMatchesSpanEnumerationF2) {
  PrimeField F(2);
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = random_matrix(F, 3, 3, rng);
    EXPECT_EQ(rank(m), oracle::span_rank(rows_of(m), 3, 2));
  }
}

TEST(Rref, IdempotentAndRowspacePreserving) {
  Rng rng(12);
  for (std::uint64_t q : {2, 3, 5}) {
    PrimeField F(q);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = q == 2 ? 4 : 2 + trial % 2;
      auto m = random_matrix(F, 1 + trial % 3, n, rng);
      auto once = rref(m);
      auto twice = rref(once.form);
      EXPECT_EQ(once.form, twice.form);
      EXPECT_EQ(once.rank, twice.rank);
      EXPECT_EQ(oracle::span_codes(rows_of(m), n, q), oracle::span_codes(rows_of(once.form), n, q));
    }
  }
}

TEST(Determinant, NonzeroIffFullRank) {
  PrimeField F(3);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto m = random_matrix(F, 3, 3, rng);
    EXPECT_EQ(determinant(m) != 0, rank(m) == 3);
  }
}

TEST(Grassmannian, CountExamples) {
  EXPECT_EQ(grassmannian_count(2, 1, PrimeField(3)), 4);
  EXPECT_EQ(grassmannian_count(4, 2, PrimeField(3)), 130);
  for (std::uint64_t q : {2, 3, 5, 7})
    for (std::size_t n = 1; n <= 5; ++n) EXPECT_EQ(grassmannian_count(n, n, PrimeField(q)), 1);
  EXPECT_THROW(grassmannian_count(3, 0, PrimeField(2)), PreconditionError);
  EXPECT_THROW(grassmannian_count(3, 4, PrimeField(2)), PreconditionError);
}

TEST(Grassmannian, CountMatchesBruteForceSubspaces) {
  EXPECT_EQ(oracle::all_subspaces(2, 1, 3).size(), 4u);
  EXPECT_EQ(oracle::all_subspaces(4, 2, 3).size(), 130u);
}

TEST(Grassmannian, EnumerateLinesOfF2Squared) {
  auto all = grassmannian_enumerate(2, 1, PrimeField(2));
  ASSERT_EQ(all.size(), 3u);
  std::set<std::set<std::uint64_t>> seen;
  for (const auto& s : all) seen.insert(subspace_codes(s));
  EXPECT_EQ(seen, oracle::all_subspaces(2, 1, 2));
}

TEST(Grassmannian, EnumerateFullSpace) {
  auto all = grassmannian_enumerate(3, 3, PrimeField(2));
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].basis(), FqMatrix::identity(PrimeField(2), 3));
}

TEST(Grassmannian, EnumerateCountEqualsCountOpForSmallCases) {
  for (std::uint64_t q : {2, 3, 5, 7}) {
    PrimeField F(q);
    for (std::size_t n = 1; checked_power(q, n) <= 81; ++n) {
      for (std::size_t r = 1; r <= n; ++r) {
        auto all = grassmannian_enumerate(n, r, F);
        ASSERT_EQ(BigInt(all.size()), grassmannian_count(n, r, F)) << q << " " << n << " " << r;
        ASSERT_TRUE(std::is_sorted(all.begin(), all.end()));
        ASSERT_TRUE(std::adjacent_find(all.begin(), all.end()) == all.end());
        std::set<std::set<std::uint64_t>> spans;
        for (const auto& s : all) spans.insert(subspace_codes(s));
        ASSERT_EQ(spans.size(), all.size());
      }
    }
  }
  EXPECT_EQ(grassmannian_enumerate(3, 1, PrimeField(3)).size(), 13u);
}

TEST(Grassmannian, EnumerateRespectsCap) {
  EXPECT_THROW(grassmannian_enumerate(6, 3, PrimeField(3), 1000), CapExceeded);
}

TEST(Grassmannian, SampleIsCanonicalFixedPoint) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    auto s = grassmannian_sample(4, 2, PrimeField(3), rng);
    EXPECT_EQ(Subspace::from_basis(s.basis()), s);
    EXPECT_EQ(s.rank(), 2u);
  }
}

TEST(Grassmannian, SampleFullSpace) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i)
    EXPECT_EQ(grassmannian_sample(3, 3, PrimeField(5), rng).basis(), FqMatrix::identity(PrimeField(5), 3));
}

TEST(Grassmannian, SampleUniformOnLinesOfF2Squared) {
  Rng rng(7);
  std::map<Subspace, int> freq;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) ++freq[grassmannian_sample(2, 1, PrimeField(2), rng)];
  ASSERT_EQ(freq.size(), 3u);
  for (auto& [s, c] : freq) expect_within_3sigma(c, draws, 1.0 / 3);
}

TEST(Grassmannian, SampleHitsAllPlanesOfF3Cubed) {
  Rng rng(8);
  std::set<Subspace> seen;
  for (int i = 0; i < 100000; ++i) seen.insert(grassmannian_sample(3, 2, PrimeField(3), rng));
  EXPECT_EQ(seen.size(), 13u);
}

TEST(GlSample, TrivialGroupOverF2) {
  Rng rng(9);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(gl_sample(1, PrimeField(2), rng), FqMatrix(PrimeField(2), 1, 1, {1}));
}

TEST(GlSample, UniformOnGL2F2) {
  Rng rng(10);
  std::map<std::vector<Elem>, int> freq;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    auto g = gl_sample(2, PrimeField(2), rng);
    EXPECT_NE(determinant(g), 0u);
    ++freq[g.entries()];
  }
  ASSERT_EQ(freq.size(), 6u);
  for (auto& [g, c] : freq) expect_within_3sigma(c, draws, 1.0 / 6);
}

TEST(GlAction, ConventionMapsRowspaceByTranspose) {
  PrimeField F(5);
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    auto g = gl_sample(3, F, rng);
    auto s = grassmannian_sample(3, 1, F, rng);
    auto image = s.transformed(g);
    // The image must contain g * v for every v in S (column-vector action).
    for (const auto& v : s.elements()) EXPECT_TRUE(image.contains(g.apply(v)));
  }
}

TEST(GlAction, TranslatesUniformToUniform) {
  PrimeField F(3);
  Rng rng(14);
  std::map<Subspace, int> freq;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    auto g = gl_sample(2, F, rng);
    ++freq[grassmannian_sample(2, 1, F, rng).transformed(g)];
  }
  ASSERT_EQ(freq.size(), 4u);
  double chi2 = 0;
  for (auto& [s, c] : freq) chi2 += std::pow(c - draws / 4.0, 2) / (draws / 4.0);
  EXPECT_LT(chi2, 11.34);  // chi^2_3 upper 1% point
}

TEST(Subspace, RejectsDependentBasis) {
  PrimeField F(3);
  EXPECT_THROW(Subspace::from_basis(FqMatrix(F, 2, 2, {1, 1, 2, 2})), PreconditionError);
  EXPECT_EQ(Subspace::span_of(FqMatrix(F, 2, 2, {1, 1, 2, 2})).rank(), 1u);
}
