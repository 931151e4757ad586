// cover-lab: command-line front end for the coverlab library.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "coverlab/covering.hpp"
#include "coverlab/experiments.hpp"
#include "coverlab/kakeya.hpp"
#include "coverlab/lattice.hpp"

using namespace coverlab;
using geom::ConvexBody;
using lat::Lattice;

namespace {

constexpr int kExitOk = 0, kExitError = 1, kExitViolation = 2, kExitConfig = 3;

/// One output record: ordered fields, printed as a CSV header + row or a JSON object.
class Record {
 public:
  Record& add(const std::string& k, double v) { return put(k, v, exp::fmt(v)); }
  Record& add(const std::string& k, std::uint64_t v) { return put(k, v, std::to_string(v)); }
  Record& add(const std::string& k, int v) { return put(k, v, std::to_string(v)); }
  Record& add(const std::string& k, bool v) { return put(k, v, v ? "1" : "0"); }
  Record& add(const std::string& k, const std::string& v) { return put(k, v, v); }
  Record& add(const std::string& k, const char* v) { return add(k, std::string(v)); }

  void print(std::ostream& os, const std::string& format) const {
    if (format == "json") {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < keys_.size(); ++i) j[keys_[i]] = json_[i];
      os << j.dump(2) << "\n";
      return;
    }
    exp::Table t{"", keys_, {text_}};
    os << t.csv();
  }

 private:
  Record& put(const std::string& k, nlohmann::json j, std::string text) {
    // JSON has no inf/nan; keep them as strings there. Finite values get the
    // same 12 significant digits as the CSV.
    if (j.is_number_float()) j = std::isfinite(j.get<double>()) ? nlohmann::json(std::stod(text)) : nlohmann::json(text);
    keys_.push_back(k);
    json_.push_back(std::move(j));
    text_.push_back(std::move(text));
    return *this;
  }
  std::vector<std::string> keys_, text_;
  std::vector<nlohmann::json> json_;
};

std::string vec_str(const geom::Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + exp::fmt(v[i]);
  return s;
}

struct LatticeArgs {
  std::size_t n = 2;
  std::string file;
  bool random = false;
  std::uint64_t prime = 10007;

  void attach(CLI::App* app) {
    app->add_option("--n", n, "dimension")->check(CLI::Range(1, 12));
    app->add_option("--lattice", file, "lattice file (default: Z^n)")->check(CLI::ExistingFile);
    app->add_flag("--random", random, "use a Hecke-approximate Haar lattice (rank 1 lift) instead of Z^n");
    app->add_option("--prime", prime, "prime for --random")->check(CLI::PositiveNumber);
  }
  std::string label() const {
    if (!file.empty()) return file;
    return random ? "Hecke-approximate Haar (P=" + std::to_string(prime) + ")" : "Z^" + std::to_string(n);
  }
  Lattice make(Rng& rng) const {
    if (!file.empty()) {
      std::ifstream is(file);
      return lat::read_lattice(is);
    }
    if (random) return lat::haar_sample(n, prime, 1, rng);
    return Lattice::integer(n);
  }
};

struct BodyArgs {
  std::string kind = "ball";
  double scale = 1;
  void attach(CLI::App* app) {
    app->add_option("--body", kind, "ball | cube | cross")->check(CLI::IsMember({"ball", "cube", "cross"}));
    app->add_option("--scale", scale, "dilation factor of the unit body")->check(CLI::PositiveNumber);
  }
  ConvexBody make(std::size_t n) const { return exp::make_body(kind, n).dilated(scale); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cover-lab: lattice coverings, Kakeya bounds and the polynomial method"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string format = "csv";
  unsigned threads = 1;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "worker threads");
  };

  LatticeArgs la;
  BodyArgs ba;
  std::uint64_t samples = 20000, probes = 4000;
  double rel_tol = 1e-3, level = 0.99;

  auto* coverage = app.add_subcommand("coverage", "estimate eps(J, L), the uncovered fraction of L + J");
  common(coverage);
  la.attach(coverage);
  ba.attach(coverage);
  coverage->add_option("--samples", samples)->check(CLI::PositiveNumber);
  coverage->add_option("--level", level, "confidence level")->check(CLI::Range(0.5, 0.999999));

  auto* cdens = app.add_subcommand("covering-density", "bracket the covering density Theta_K(L)");
  common(cdens);
  la.attach(cdens);
  ba.attach(cdens);
  cdens->add_option("--rel-tol", rel_tol)->check(CLI::PositiveNumber);
  cdens->add_option("--samples", probes, "probes per bisection step")->check(CLI::PositiveNumber);

  auto* pdens = app.add_subcommand("packing-density", "packing density delta_K(L) of a symmetric body");
  common(pdens);
  la.attach(pdens);
  ba.attach(pdens);

  auto* h2f = app.add_subcommand("half-to-full", "check coverage > 1/2 implies L + 2K = R^n");
  common(h2f);
  la.attach(h2f);
  ba.attach(h2f);
  h2f->add_option("--samples", samples, "coverage samples")->check(CLI::PositiveNumber);
  h2f->add_option("--probes", probes, "probes for the 2K cover")->check(CLI::PositiveNumber);

  auto* trial = app.add_subcommand("thm-main-trial", "one run of the Hecke-lift covering construction");
  common(trial);
  std::size_t trial_n = 2;
  std::optional<double> trial_M, trial_V;
  std::string trial_body = "ball";
  trial->add_option("--n", trial_n)->check(CLI::Range(2, 8));
  trial->add_option("--body", trial_body)->check(CLI::IsMember({"ball", "cube", "cross"}));
  auto* mopt = trial->add_option("--M", trial_M, "target covering volume");
  trial->add_option("--V", trial_V, "set M so that V has this value")->excludes(mopt);
  trial->add_option("--samples", samples, "coverage samples")->check(CLI::PositiveNumber);
  trial->add_option("--probes", probes, "final cover probes")->check(CLI::PositiveNumber);

  auto* dgap = app.add_subcommand("dual-gap", "covering radius lower bound from lambda_1 of the dual");
  common(dgap);
  la.attach(dgap);

  auto* bounds = app.add_subcommand("bounds", "closed-form bound calculators");
  common(bounds);
  std::string which;
  double bn = 150, bV = 1, bkappa = 0, bcrog = 1, bt = 0.3;
  std::uint64_t bq = 3;
  std::size_t br = 1;
  std::string beps = "1";
  bounds->add_option("which", which, "eta | rogers | km | kakeya-weak | kakeya-general | kakeya-rank1 | kakeya-rank2")
      ->required()
      ->check(CLI::IsMember({"eta", "rogers", "km", "kakeya-weak", "kakeya-general", "kakeya-rank1", "kakeya-rank2"}));
  bounds->add_option("--n", bn, "dimension");
  bounds->add_option("--V", bV, "volume (rogers)");
  bounds->add_option("--kappa", bkappa, "kappa (rogers; default e^{-V/2})");
  bounds->add_option("--c-rog", bcrog, "Rogers constant (user-supplied)");
  bounds->add_option("--t", bt, "threshold (km)");
  bounds->add_option("--q", bq, "field size (kakeya-*)");
  bounds->add_option("--r", br, "rank (kakeya-*)");
  bounds->add_option("--eps", beps, "eps or delta as p/q (kakeya-*)");

  auto* sample = app.add_subcommand("sample-lattice", "draw Hecke-approximate Haar lattices and print them");
  std::size_t s_n = 2, s_rank = 1, s_count = 1;
  std::uint64_t s_prime = 10007;
  std::string s_out;
  sample->add_option("--n", s_n)->check(CLI::Range(2, 12));
  sample->add_option("--prime", s_prime)->check(CLI::PositiveNumber);
  sample->add_option("--rank", s_rank)->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);
  sample->add_option("--count", s_count)->check(CLI::PositiveNumber);
  sample->add_option("--out", s_out, "output file (count 1) or directory");

  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> exp_seed;
  std::optional<unsigned> exp_threads;
  std::vector<std::pair<CLI::App*, std::string>> experiments;
  for (auto [verb, kind] : {std::pair{"tail-sweep", "tail_sweep"}, {"appendixb", "appendixB"},
                            {"kakeya-table", "kakeya_table"}, {"polymethod-suite", "polymethod_suite"}}) {
    auto* e = app.add_subcommand(verb, std::string("run the ") + kind + " experiment from a config file");
    e->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    e->add_option("--seed", exp_seed, "override [run] seed");
    e->add_option("--threads", exp_threads, "override [run] threads");
    e->add_option("--out", out_dir, "output directory");
    experiments.emplace_back(e, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Rng rng(seed);
    Record rec;
    if (*coverage) {
      const auto l = la.make(rng);
      const auto j = ba.make(l.dim());
      const auto r = cover::coverage_fraction(j, l, samples, rng, {level, threads});
      rec.add("lattice", la.label());
      rec.add("body", r.body).add("n", std::uint64_t(r.dim)).add("samples", r.samples).add("uncovered", r.uncovered);
      rec.add("uncovered_fraction", r.uncovered_fraction).add("ci_lo", r.ci.lo).add("ci_hi", r.ci.hi);
      rec.add("level", r.level).add("seed", seed);
    } else if (*cdens) {
      const auto l = la.make(rng);
      const auto k = ba.make(l.dim());
      cover::CoveringOptions opt;
      opt.probes = probes;
      opt.threads = threads;
      const auto c = cover::covering_density(k, l, rel_tol, rng, opt);
      rec.add("lattice", la.label());
      rec.add("body", k.describe()).add("n", std::uint64_t(l.dim())).add("theta", c.theta).add("r_star", c.r_star);
      rec.add("r_lower", c.r_lower).add("r_upper", c.r_upper).add("theta_lower", c.theta_lower);
      rec.add("theta_upper", c.theta_upper).add("deepest_hole", vec_str(c.deepest_hole));
      rec.add("probes", std::uint64_t(c.probes_used)).add("iterations", std::uint64_t(c.iterations));
      rec.add("converged", c.converged).add("seed", seed);
      if (!c.converged) std::cerr << "warning: bracket did not close within the iteration cap\n";
    } else if (*pdens) {
      const auto l = la.make(rng);
      const auto k = ba.make(l.dim());
      const auto p = cover::packing_density(k, l);
      rec.add("lattice", la.label());
      rec.add("body", k.describe()).add("n", std::uint64_t(l.dim())).add("delta", p.delta).add("r_max", p.r_max);
      rec.add("shortest", vec_str(p.shortest));
    } else if (*h2f) {
      const auto l = la.make(rng);
      const auto k = ba.make(l.dim());
      const auto h = cover::half_to_full_check(k, l, probes, rng, samples, {level, threads});
      rec.add("lattice", la.label());
      rec.add("body", k.describe()).add("coverage", 1 - h.coverage.uncovered_fraction);
      rec.add("coverage_ci_lo", 1 - h.coverage.ci.hi).add("coverage_ci_hi", 1 - h.coverage.ci.lo);
      rec.add("premise_ok", h.premise_ok).add("conclusion_ok", h.conclusion_ok);
      rec.add("probes", h.probes).add("uncovered_probes", h.uncovered_probes).add("seed", seed);
      if (h.premise_ok && !h.conclusion_ok) {
        rec.print(std::cout, format);
        std::cerr << "violation: premise holds but L + 2K left probes uncovered\n";
        return kExitViolation;
      }
    } else if (*trial) {
      const double p = static_cast<double>(cover::smallest_prime_in(trial_n, 2 * trial_n));
      double M = 0;
      if (trial_V) M = *trial_V * p * p * std::pow(1 + 2 / p, static_cast<double>(trial_n));
      else if (trial_M) M = *trial_M;
      else throw ConfigError("thm-main-trial: give --M or --V");
      cover::TrialOptions opt;
      opt.coverage_samples = samples;
      opt.probes = probes;
      opt.threads = threads;
      const auto t = cover::theorem_main_trial(trial_n, exp::make_body(trial_body, trial_n), M, rng, opt);
      rec.add("n", std::uint64_t(t.n)).add("p", t.p).add("M", t.M).add("V", t.V).add("kappa", t.kappa);
      rec.add("eps", t.eps).add("premise_available", t.premise_available).add("eps_hat", t.eps_hat);
      rec.add("bound_on_hole_ok", t.bound_on_hole_ok).add("grid_uncovered", t.grid_uncovered);
      rec.add("grid_covered", t.grid_covered).add("dilation", t.dilation).add("full_cover_ok", t.full_cover_ok);
      rec.add("volume_ratio", t.volume_ratio).add("success", t.success()).add("seed", seed);
      if (!t.premise_available) std::cerr << "note: V <= 2 log 2, half-to-full premise unavailable\n";
    } else if (*dgap) {
      const auto l = la.make(rng);
      const auto g = cover::dual_gap_bound(l);
      rec.add("lattice", la.label());
      rec.add("n", std::uint64_t(l.dim())).add("lambda1_dual", g.lambda1_dual).add("covrad_lb", g.covrad_lb);
      rec.add("witness", vec_str(g.witness)).add("witness_distance", g.witness_distance);
    } else if (*bounds) {
      rec.add("bound", which);
      if (which == "eta") {
        rec.add("n", bn).add("value", cover::rogers_eta(bn));
      } else if (which == "rogers") {
        const double kappa = bkappa > 0 ? bkappa : std::exp(-bV / 2);
        rec.add("n", bn).add("V", bV).add("kappa", kappa).add("c_rog", bcrog);
        rec.add("eta", cover::rogers_eta(bn)).add("value", cover::rogers_tail_bound(bn, bV, kappa, bcrog));
      } else if (which == "km") {
        const auto k = cover::km_lambda1_tail(static_cast<std::size_t>(bn), bt);
        rec.add("n", bn).add("t", bt).add("first_term", k.first_term);
        rec.add("second_term", k.second_term_available ? exp::fmt(k.second_term) : std::string("n/a"));
        rec.add("value", k.value).add("second_term_available", k.second_term_available);
      } else {
        const auto n = static_cast<std::size_t>(bn);
        const Rational e = parse_rational(beps);
        rec.add("q", bq).add("n", std::uint64_t(n)).add("r", std::uint64_t(br)).add("eps", to_string(e));
        if (which == "kakeya-weak") {
          const auto b = kakeya::bound_weak_delta(bq, n, br, e);
          rec.add("value", b.value).add("exact", b.exact ? to_string(*b.exact) : std::string(""));
        } else if (which == "kakeya-general") {
          const auto b = kakeya::bound_eps_general(bq, n, br, e);
          rec.add("value", b.value).add("exact", b.exact ? to_string(*b.exact) : std::string(""));
        } else if (which == "kakeya-rank1") {
          rec.add("value", kakeya::bound_eps_rank1(bq, n, to_double(e)));
        } else {
          const auto c = kakeya::corollary_rank2_threshold(bq, n, to_double(e));
          rec.add("density", c.density).add("complement", c.complement);
        }
      }
    } else if (*sample) {
      std::vector<Lattice> ls;
      for (std::size_t i = 0; i < s_count; ++i) {
        Rng r(derive_seed(seed, {i}));
        ls.push_back(lat::haar_sample(s_n, s_prime, s_rank, r));
      }
      auto emit = [&](std::ostream& os, std::size_t i) {
        os << "# Hecke-approximate Haar lattice " << i << ": P=" << s_prime << " rank=" << s_rank
           << " seed=" << derive_seed(seed, {i}) << "\n";
        lat::write_lattice(os, ls[i]);
      };
      if (s_out.empty()) {
        for (std::size_t i = 0; i < ls.size(); ++i) emit(std::cout, i);
      } else if (s_count == 1) {
        std::ofstream os(s_out);
        if (!os) throw ConfigError("cannot write '" + s_out + "'");
        emit(os, 0);
      } else {
        std::filesystem::create_directories(s_out);
        for (std::size_t i = 0; i < ls.size(); ++i) {
          std::ofstream os(std::filesystem::path(s_out) / ("lattice-" + std::to_string(i) + ".txt"));
          emit(os, i);
        }
      }
      return kExitOk;
    } else {
      for (auto& [sub, kind] : experiments) {
        if (!*sub) continue;
        auto cfg = exp::Config::load(config_path);
        if (exp_seed) cfg.set("run", "seed", std::to_string(*exp_seed));
        if (exp_threads) cfg.set("run", "threads", std::to_string(*exp_threads));
        cfg.seed();  // required
        const auto started = exp::utc_now();
        const auto res = exp::run_experiment(kind, cfg);
        const auto m = exp::write_outputs(res, cfg, out_dir, started);
        for (const auto& f : m.outputs) std::cout << (std::filesystem::path(out_dir) / f).string() << "\n";
        std::cout << (std::filesystem::path(out_dir) / (kind + ".manifest.json")).string() << "\n";
        if (res.violations) {
          std::cerr << kind << ": " << res.violations << " violation(s)\n";
          return kExitViolation;
        }
        return kExitOk;
      }
    }
    rec.print(std::cout, format);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    std::cerr << "violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
