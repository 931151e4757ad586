#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coverlab/experiments.hpp"

using namespace coverlab;
using exp::Config;

namespace {

Config parse(const std::string& text) {
  std::istringstream is(text);
  return Config::parse(is);
}

std::string cell(const exp::Table& t, std::size_t row, const std::string& col) {
  const auto it = std::find(t.header.begin(), t.header.end(), col);
  EXPECT_NE(it, t.header.end()) << col;
  return t.rows.at(row).at(static_cast<std::size_t>(it - t.header.begin()));
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("coverlab-test-" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, ParsesScalarsListsAndRanges) {
  const auto c = parse(
      "[run]\nseed = 42\nthreads = 2\n"
      "[x]\ndims = 2..4, 7\neps = 1/4, 1/2, 1\nflag = true\nname = ball\nratio = 0.25\n");
  EXPECT_EQ(c.seed(), 42u);
  EXPECT_EQ(c.threads(), 2u);
  EXPECT_EQ(c.get_list<std::size_t>("x", "dims"), (std::vector<std::size_t>{2, 3, 4, 7}));
  const auto eps = c.get_list<Rational>("x", "eps");
  ASSERT_EQ(eps.size(), 3u);
  EXPECT_EQ(eps[0], Rational(1, 4));
  EXPECT_EQ(eps[2], Rational(1));
  EXPECT_TRUE(c.get<bool>("x", "flag"));
  EXPECT_EQ(c.get<std::string>("x", "name"), "ball");
  EXPECT_DOUBLE_EQ(c.get<double>("x", "ratio"), 0.25);
  EXPECT_EQ(c.get<int>("x", "missing", 9), 9);
}

TEST(Config, ErrorsAreConfigErrors) {
  EXPECT_THROW(parse("[x]\na = 1\n").seed(), ConfigError);
  EXPECT_THROW(parse("[run]\nseed = -3\n").seed(), ConfigError);
  EXPECT_THROW(parse("[x]\na = abc\n").get<double>("x", "a"), ConfigError);
  EXPECT_THROW(parse("[x]\na = 1/0\n").get<Rational>("x", "a"), ConfigError);
  EXPECT_THROW(parse("[x]\na = 5..2\n").get_list<int>("x", "a"), ConfigError);
  std::istringstream bad("[x\na=1");
  EXPECT_THROW(Config::parse(bad), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/coverlab.ini"), ConfigError);
  EXPECT_THROW(exp::run_experiment("nope", parse("[run]\nseed=1\n")), ConfigError);
}

TEST(Config, HashIgnoresLayoutButNotValues) {
  const auto a = parse("[run]\nseed = 1\n[b]\nx = 2\ny = 3\n");
  const auto b = parse("[b]\ny=3\nx=2\n\n[run]\nseed=1\n");
  auto c = a;
  c.set("b", "x", "4");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Table, CsvQuotesWhenNeeded) {
  exp::Table t{"t", {"a", "b"}, {{"1", "x,y"}, {"say \"hi\"", ""}}};
  EXPECT_EQ(t.csv(), "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",\n");
}

TEST(Manifest, RoundTripsAndVerifies) {
  const auto cfg = parse("[run]\nseed = 5\n[kakeya_table]\nq = 2\nn = 2\neps = 1\n");
  const auto res = exp::run_experiment("kakeya_table", cfg);
  const auto dir = scratch("manifest");
  const auto m = exp::write_outputs(res, cfg, dir.string(), exp::utc_now());
  const auto back = exp::load_manifest((dir / "kakeya_table.manifest.json").string());
  EXPECT_EQ(back.experiment, "kakeya_table");
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.config_hash, cfg.hash());
  EXPECT_EQ(back.outputs, m.outputs);
  EXPECT_EQ(back.stage_counts, res.stage_counts);
  EXPECT_TRUE(exp::verify_manifest(back, &cfg));
  for (const auto& f : back.outputs) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;

  auto edited = cfg;
  edited.set("kakeya_table", "q", "3");
  EXPECT_FALSE(exp::verify_manifest(back, &edited));
  auto tampered = back;
  tampered.config_text += "x";
  EXPECT_FALSE(exp::verify_manifest(tampered));
  std::ofstream(dir / "broken.json") << "{\"experiment\": 1}";
  EXPECT_THROW(exp::load_manifest((dir / "broken.json").string()), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(KakeyaTable, SmallCasesAreCertified) {
  const auto cfg = parse("[run]\nseed = 3\n[kakeya_table]\nq = 2, 3\nn = 2\neps = 1/2, 1\n");
  const auto res = exp::run_experiment("kakeya_table", cfg);
  const auto& t = res.tables.at(0);
  ASSERT_EQ(t.rows.size(), 8u);
  EXPECT_EQ(res.violations, 0u);
  EXPECT_EQ(res.stage_counts.at("certified"), 8u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(cell(t, i, "status"), "ok");
    // Full rank, eps = 1: the set is the whole plane.
    if (cell(t, i, "r") == "2" && cell(t, i, "eps") == "1") {
      const auto q = std::stoul(cell(t, i, "q"));
      EXPECT_EQ(cell(t, i, "search_size"), std::to_string(q * q));
    }
  }
}

TEST(KakeyaTable, InfeasibleRowsAreMarked) {
  const auto cfg = parse("[run]\nseed = 3\n[kakeya_table]\nq = 5\nn = 3\nr = 1\neps = 1\nmax_universe = 81\n");
  const auto res = exp::run_experiment("kakeya_table", cfg);
  ASSERT_EQ(res.tables.at(0).rows.size(), 1u);
  EXPECT_EQ(cell(res.tables[0], 0, "status"), "infeasible");
  EXPECT_FALSE(cell(res.tables[0], 0, "bound_general").empty());
  EXPECT_THROW(exp::run_experiment("kakeya_table", parse("[run]\nseed=1\n[kakeya_table]\nq=4\nn=2\neps=1\n")),
               ConfigError);
}

TEST(PolymethodSuite, SmallRunHasNoFailures) {
  const auto cfg = parse(
      "[run]\nseed = 8\n[polymethod_suite]\ninstances = 30\nvanishing_instances = 15\n"
      "witness_q = 2, 3\nwitness_n = 2, 3\nwitness_max_N = 2\n");
  const auto res = exp::run_experiment("polymethod_suite", cfg);
  EXPECT_EQ(res.violations, 0u);
  for (const auto& row : res.tables.at(0).rows) EXPECT_EQ(row.back(), "ok") << row[0] << " q=" << row[1];
  EXPECT_EQ(res.stage_counts.at("vanishing_ok"), 15u);
  EXPECT_GT(res.tables.at(1).rows.size(), 0u);
  EXPECT_EQ(res.stage_counts.count("witness_failed"), 0u);
}

TEST(TailSweep, IndependentOfThreadCount) {
  const std::string body =
      "[tail_sweep]\ndims = 2\ncount = 12\nm_grid = 1.2, 1.5, 2, 3\nrel_tol = 0.05\nprobes = 300\n";
  const auto one = exp::run_experiment("tail_sweep", parse("[run]\nseed = 21\nthreads = 1\n" + body));
  const auto two = exp::run_experiment("tail_sweep", parse("[run]\nseed = 21\nthreads = 2\n" + body));
  ASSERT_EQ(one.tables.size(), two.tables.size());
  for (std::size_t i = 0; i < one.tables.size(); ++i) EXPECT_EQ(one.tables[i].csv(), two.tables[i].csv());
  EXPECT_EQ(one.plot, two.plot);
  EXPECT_EQ(one.violations, 0u);

  // Empirical tail is non-increasing in M; every covering density exceeds 1.
  const auto& t = one.tables[0];
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(cell(t, 0, "exceed"), "12");
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    EXPECT_LE(std::stoul(cell(t, i, "exceed")), std::stoul(cell(t, i - 1, "exceed")));
}

TEST(DualTailCheck, SmallRunHasNoViolations) {
  const auto cfg = parse(
      "[run]\nseed = 4\n[appendixB]\ndims = 3\ncount = 10\nt_grid = 0.5, 1\nrel_tol = 0.05\nprobes = 300\n");
  const auto res = exp::run_experiment("appendixB", cfg);
  EXPECT_EQ(res.violations, 0u);
  const auto& t = res.tables.at(0);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(cell(t, 0, "lattices"), "10");
  // The second KM term is absent for n = 2 only.
  EXPECT_NE(cell(t, 0, "km_second_term"), "n/a");
  EXPECT_LE(std::stoul(cell(t, 0, "small_dual")), std::stoul(cell(t, 1, "small_dual")));
  EXPECT_THROW(exp::run_experiment("appendixB", parse("[run]\nseed=1\n[appendixB]\ndims=2\ncount=1\nt_grid=1\n")),
               ConfigError);
}
