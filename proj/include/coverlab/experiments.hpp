#pragma once

// Config-driven sweeps: covering tail curves, the dual-slab comparison, Kakeya
// bound tables and randomized polynomial-method checks. Every run is a pure
// function of its config (seed included); files are written by write_outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "coverlab/covering.hpp"
#include "coverlab/errors.hpp"
#include "coverlab/kakeya.hpp"
#include "coverlab/lattice.hpp"
#include "coverlab/parallel.hpp"
#include "coverlab/polymethod.hpp"
#include "coverlab/rational.hpp"
#include "coverlab/rng.hpp"
#include "coverlab/stats.hpp"
#include "coverlab/version.hpp"

namespace coverlab::exp {

using ff::Elem;
using ff::PrimeField;

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Config: INI sections of key = value. [run] carries seed (required) and threads.

class Config {
 public:
  static Config parse(std::istream& is, const std::string& origin = "<config>") {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    Config c;
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty())
        throw ConfigError(origin + ": key '" + section + "' outside any section");
      for (const auto& [key, value] : body) c.values_[section][key] = boost::algorithm::trim_copy(value.data());
    }
    return c;
  }
  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    return parse(is, path);
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
  }
  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }
  bool has_section(const std::string& section) const { return values_.count(section) > 0; }

  std::string raw(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing key '" + key + "' in [" + section + "]");
    return values_.at(section).at(key);
  }

  template <class T>
  T get(const std::string& section, const std::string& key) const {
    return convert<T>(raw(section, key), section, key);
  }
  template <class T>
  T get(const std::string& section, const std::string& key, const T& fallback) const {
    return has(section, key) ? get<T>(section, key) : fallback;
  }

  /// Comma-separated list; integer entries may use a..b ranges.
  template <class T>
  std::vector<T> get_list(const std::string& section, const std::string& key) const {
    std::vector<std::string> parts;
    const std::string text = raw(section, key);
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    std::vector<T> out;
    for (auto part : parts) {
      boost::algorithm::trim(part);
      if (part.empty()) continue;
      const auto dots = part.find("..");
      if constexpr (std::is_integral_v<T>) {
        if (dots != std::string::npos) {
          const T lo = convert<T>(part.substr(0, dots), section, key);
          const T hi = convert<T>(part.substr(dots + 2), section, key);
          if (hi < lo) throw ConfigError("empty range '" + part + "' for " + section + "." + key);
          for (T v = lo; v <= hi; ++v) out.push_back(v);
          continue;
        }
      }
      out.push_back(convert<T>(part, section, key));
    }
    if (out.empty()) throw ConfigError("empty list for " + section + "." + key);
    return out;
  }
  template <class T>
  std::vector<T> get_list(const std::string& section, const std::string& key, std::vector<T> fallback) const {
    return has(section, key) ? get_list<T>(section, key) : fallback;
  }

  std::uint64_t seed() const { return get<std::uint64_t>("run", "seed"); }
  unsigned threads() const { return get<unsigned>("run", "threads", 1u); }

  /// Sorted "section.key=value" lines: the text that is hashed.
  std::string canonical() const {
    std::string out;
    for (const auto& [s, kv] : values_)
      for (const auto& [k, v] : kv) out += s + "." + k + "=" + v + "\n";
    return out;
  }
  std::string hash() const { return hex64(fnv1a64(canonical())); }

 private:
  template <class T>
  static T convert(const std::string& text, const std::string& section, const std::string& key) {
    try {
      if constexpr (std::is_same_v<T, Rational>) {
        return parse_rational(text);
      } else if constexpr (std::is_same_v<T, bool>) {
        const auto t = boost::algorithm::to_lower_copy(text);
        if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
        if (t == "false" || t == "0" || t == "no" || t == "off") return false;
        throw ConfigError("not a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        return text;
      } else {
        if constexpr (std::is_unsigned_v<T>)
          if (!text.empty() && text.front() == '-') throw ConfigError("negative value");
        return boost::lexical_cast<T>(text);
      }
    } catch (const std::exception&) {
      throw ConfigError("invalid value '" + text + "' for " + section + "." + key);
    }
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

// ---------------------------------------------------------------------------

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    auto line = [](const std::vector<std::string>& cells) {
      std::string s;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (quote) {
          s += '"';
          for (char c : cells[i]) s += c == '"' ? std::string("\"\"") : std::string(1, c);
          s += '"';
        } else {
          s += cells[i];
        }
      }
      return s + "\n";
    };
    std::string out = line(header);
    for (const auto& r : rows) out += line(r);
    return out;
  }
};

struct ExperimentResult {
  std::string kind;
  std::vector<Table> tables;  // first one is the main output
  std::string plot;           // "x y yerr" data, may be empty
  std::map<std::string, std::uint64_t> stage_counts;
  std::uint64_t violations = 0;  // theorem or lemma violations: exit code 2
};

struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::string config_text;
  std::string code_version;
  std::uint64_t seed = 0;
  std::string started, finished;
  std::map<std::string, std::uint64_t> stage_counts;
  std::vector<std::string> outputs;
  std::uint64_t violations = 0;

  nlohmann::json to_json() const {
    return {{"experiment", experiment}, {"config_hash", config_hash}, {"config", config_text},
            {"code_version", code_version}, {"seed", seed}, {"started", started}, {"finished", finished},
            {"stage_counts", stage_counts}, {"outputs", outputs}, {"violations", violations}};
  }
  static RunManifest from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
      m.experiment = j.at("experiment").get<std::string>();
      m.config_hash = j.at("config_hash").get<std::string>();
      m.config_text = j.at("config").get<std::string>();
      m.code_version = j.at("code_version").get<std::string>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.started = j.at("started").get<std::string>();
      m.finished = j.at("finished").get<std::string>();
      m.stage_counts = j.at("stage_counts").get<std::map<std::string, std::uint64_t>>();
      m.outputs = j.at("outputs").get<std::vector<std::string>>();
      m.violations = j.at("violations").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("manifest: ") + e.what());
    }
    return m;
  }
};

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return RunManifest::from_json(j);
}

/// The stored hash must match both the stored config text and, if given, a live config.
inline bool verify_manifest(const RunManifest& m, const Config* live = nullptr) {
  if (hex64(fnv1a64(m.config_text)) != m.config_hash) return false;
  return !live || live->hash() == m.config_hash;
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Writes <kind>.csv, extra tables, <kind>.plot.dat and <kind>.manifest.json.
inline RunManifest write_outputs(const ExperimentResult& res, const Config& cfg, const std::string& dir,
                                 const std::string& started) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  RunManifest m;
  m.experiment = res.kind;
  m.config_text = cfg.canonical();
  m.config_hash = cfg.hash();
  m.code_version = kVersion;
  m.seed = cfg.seed();
  m.started = started;
  m.stage_counts = res.stage_counts;
  m.violations = res.violations;
  auto put = [&](const std::string& name, const std::string& text) {
    const auto path = (fs::path(dir) / name).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    os << text;
    m.outputs.push_back(name);
  };
  for (std::size_t i = 0; i < res.tables.size(); ++i)
    put(i == 0 ? res.kind + ".csv" : res.kind + "." + res.tables[i].name + ".csv", res.tables[i].csv());
  if (!res.plot.empty()) put(res.kind + ".plot.dat", res.plot);
  m.finished = utc_now();
  const auto mpath = (fs::path(dir) / (res.kind + ".manifest.json")).string();
  std::ofstream os(mpath);
  if (!os) throw ConfigError("cannot write '" + mpath + "'");
  os << m.to_json().dump(2) << "\n";
  return m;
}

// ---------------------------------------------------------------------------

enum ExperimentId : std::uint64_t { kTailSweep = 1, kDualTail = 2, kKakeyaTable = 3, kPolymethodSuite = 4 };

inline geom::ConvexBody make_body(const std::string& name, std::size_t n) {
  if (name == "ball") return geom::ConvexBody::ball(n);
  if (name == "cube") return geom::ConvexBody::cube(n);
  if (name == "cross") return geom::ConvexBody::cross_polytope(n);
  throw ConfigError("unknown body '" + name + "' (ball, cube, cross)");
}

template <class F>
std::string guarded(F&& f) {
  try {
    f();
    return "ok";
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return "error: " + msg;
  }
}

// ---------------------------------------------------------------------------

/// Empirical P(Theta_K(L) > M) over haar_sample lattices, per n and M.
inline ExperimentResult run_tail_sweep(const Config& cfg) {
  const std::string S = "tail_sweep";
  const auto seed = cfg.seed();
  const unsigned threads = cfg.threads();
  const auto dims = cfg.get_list<std::size_t>(S, "dims");
  const auto count = cfg.get<std::size_t>(S, "count");
  auto grid = cfg.get_list<double>(S, "m_grid");
  std::sort(grid.begin(), grid.end());
  const auto body = cfg.get<std::string>(S, "body", "ball");
  const auto rel_tol = cfg.get<double>(S, "rel_tol", 1e-2);
  const auto probes = cfg.get<std::size_t>(S, "probes", 1000);
  const auto P = cfg.get<std::uint64_t>(S, "sampler_prime", 10007);
  const auto level = cfg.get<double>(S, "level", 0.99);
  if (count < 1) throw ConfigError("tail_sweep.count must be positive");
  for (auto n : dims)
    if (n < 2 || n > 5) throw ConfigError("tail_sweep.dims must lie in [2, 5]");

  ExperimentResult res;
  res.kind = S;
  Table tail{"tail", {"n", "M", "lattices", "exceed", "tail", "ci_lo", "ci_hi", "seed", "status"}, {}};
  Table per{"lattices", {"n", "index", "seed", "theta", "r_lower", "r_upper", "converged", "status"}, {}};
  std::ostringstream plot;
  for (const auto n : dims) {
    const auto k = make_body(body, n);
    struct Row {
      std::uint64_t seed = 0;
      double theta = 0, lo = 0, hi = 0;
      bool converged = false;
      std::string status;
    };
    std::vector<Row> rows(count);
    parallel_for(count, threads, [&](std::size_t i) {
      auto& r = rows[i];
      r.seed = derive_seed(seed, {kTailSweep, n, i});
      r.status = guarded([&] {
        Rng rng(r.seed);
        const auto l = lat::haar_sample(n, P, 1, rng);
        cover::CoveringOptions opt;
        opt.probes = probes;
        const auto c = cover::covering_density(k, l, rel_tol, rng, opt);
        r.theta = c.theta;
        r.lo = c.r_lower;
        r.hi = c.r_upper;
        r.converged = c.converged;
      });
    });
    std::vector<double> thetas;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& r = rows[i];
      per.rows.push_back({std::to_string(n), std::to_string(i), std::to_string(r.seed), fmt(r.theta), fmt(r.lo),
                          fmt(r.hi), r.converged ? "1" : "0", r.status});
      if (r.status == "ok") {
        thetas.push_back(r.theta);
        ++res.stage_counts[r.converged ? "lattices_ok" : "lattices_unconverged"];
      } else {
        ++res.stage_counts["lattices_failed"];
      }
    }
    plot << "# n=" << n << ": M tail ci_halfwidth\n";
    double prev_hi = 1;
    for (const double M : grid) {
      const auto m = static_cast<std::uint64_t>(thetas.size());
      const auto exceed = static_cast<std::uint64_t>(
          std::count_if(thetas.begin(), thetas.end(), [&](double t) { return t > M; }));
      std::string status = "ok";
      double p = 0;
      stats::Interval ci{0, 1};
      if (m == 0) {
        status = "no_lattices";
      } else {
        p = static_cast<double>(exceed) / static_cast<double>(m);
        ci = stats::clopper_pearson(exceed, m, level);
        if (p > prev_hi) {
          status = "monotonicity_violation";
          ++res.violations;
        }
        prev_hi = ci.hi;
      }
      tail.rows.push_back({std::to_string(n), fmt(M), std::to_string(m), std::to_string(exceed), fmt(p), fmt(ci.lo),
                           fmt(ci.hi), std::to_string(seed), status});
      plot << fmt(M) << " " << fmt(p) << " " << fmt((ci.hi - ci.lo) / 2) << "\n";
    }
    plot << "\n\n";
  }
  res.stage_counts["rows"] = tail.rows.size();
  res.tables = {std::move(tail), std::move(per)};
  res.plot = plot.str();
  return res;
}

// ---------------------------------------------------------------------------

/// Frequency of lambda_1(L*) < t against the Kleinbock-Margulis lower bound, and
/// the slab implication lambda_1(L*) < t  =>  Theta(L) > V_n (1/(2t))^n.
inline ExperimentResult run_appendixB_check(const Config& cfg) {
  const std::string S = "appendixB";
  const auto seed = cfg.seed();
  const unsigned threads = cfg.threads();
  const auto dims = cfg.get_list<std::size_t>(S, "dims");
  const auto count = cfg.get<std::size_t>(S, "count");
  const auto ts = cfg.get_list<double>(S, "t_grid");
  const auto P = cfg.get<std::uint64_t>(S, "sampler_prime", 10007);
  const auto rel_tol = cfg.get<double>(S, "rel_tol", 1e-2);
  const auto probes = cfg.get<std::size_t>(S, "probes", 1000);
  const auto level = cfg.get<double>(S, "level", 0.99);
  const auto tol = cfg.get<double>(S, "tolerance", 1e-6);
  if (count < 1) throw ConfigError("appendixB.count must be positive");
  for (auto n : dims)
    if (n < 3 || n > 5) throw ConfigError("appendixB.dims must lie in [3, 5]");
  for (auto t : ts)
    if (!(t > 0)) throw ConfigError("appendixB.t_grid entries must be positive");

  ExperimentResult res;
  res.kind = S;
  Table out{"compare",
            {"n", "t", "r", "M", "lattices", "small_dual", "freq", "ci_lo", "ci_hi", "km_first", "km_value",
             "km_second_term", "sigma", "freq_ge_km_minus_3sigma", "implication_violations", "duality_violations",
             "seed", "status"},
            {}};
  Table per{"lattices",
            {"n", "index", "seed", "lambda1_dual", "covrad_lb", "witness_distance", "r_star", "theta", "status"},
            {}};
  std::ostringstream plot;
  for (const auto n : dims) {
    const auto ball = geom::ConvexBody::ball(n);
    const double vn = ball.volume();
    struct Row {
      std::uint64_t seed = 0;
      double l1 = 0, lb = 0, wd = 0, r = 0, theta = 0;
      std::string status;
    };
    std::vector<Row> rows(count);
    parallel_for(count, threads, [&](std::size_t i) {
      auto& r = rows[i];
      r.seed = derive_seed(seed, {kDualTail, n, i});
      r.status = guarded([&] {
        Rng rng(r.seed);
        const auto l = lat::haar_sample(n, P, 1, rng);
        const auto g = cover::dual_gap_bound(l);
        r.l1 = g.lambda1_dual;
        r.lb = g.covrad_lb;
        r.wd = g.witness_distance;
        cover::CoveringOptions opt;
        opt.probes = probes;
        const auto c = cover::covering_density(ball, l, rel_tol, rng, opt);
        r.r = c.r_star;
        r.theta = c.theta;
      });
    });
    std::uint64_t duality = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& r = rows[i];
      std::string status = r.status;
      if (status == "ok" && (r.l1 * r.r < 0.5 - tol || r.wd < r.lb - tol)) {
        status = "duality_violation";
        ++duality;
      }
      per.rows.push_back({std::to_string(n), std::to_string(i), std::to_string(r.seed), fmt(r.l1), fmt(r.lb),
                          fmt(r.wd), fmt(r.r), fmt(r.theta), status});
      ++res.stage_counts[r.status == "ok" ? "lattices_ok" : "lattices_failed"];
    }
    res.violations += duality;
    plot << "# n=" << n << ": t freq sigma km_value\n";
    for (const double t : ts) {
      const double rr = 1 / (2 * t), M = vn * std::pow(rr, static_cast<double>(n));
      std::uint64_t m = 0, small = 0, implication = 0;
      for (const auto& r : rows) {
        if (r.status != "ok") continue;
        ++m;
        if (r.l1 < t) {
          ++small;
          // Slab witness: dist >= 1/(2 lambda_1*) > 1/(2t), so Theta > M.
          if (!(r.wd > rr - tol) || !(vn * std::pow(r.wd, static_cast<double>(n)) > M * (1 - 1e-12))) ++implication;
        }
      }
      const auto km = cover::km_lambda1_tail(n, t);
      std::string status = m ? "ok" : "no_lattices";
      double freq = 0, sigma = 0;
      stats::Interval ci{0, 1};
      bool km_ok = false;
      if (m) {
        freq = static_cast<double>(small) / static_cast<double>(m);
        ci = stats::clopper_pearson(small, m, level);
        const double pk = std::clamp(km.value, 0.0, 1.0);
        sigma = std::sqrt(pk * (1 - pk) / static_cast<double>(m));
        km_ok = freq >= km.value - 3 * sigma;
      }
      if (implication) status = "implication_violation";
      res.violations += implication;
      out.rows.push_back({std::to_string(n), fmt(t), fmt(rr), fmt(M), std::to_string(m), std::to_string(small),
                          fmt(freq), fmt(ci.lo), fmt(ci.hi), fmt(km.first_term), fmt(km.value),
                          km.second_term_available ? fmt(km.second_term) : "n/a", fmt(sigma), km_ok ? "1" : "0",
                          std::to_string(implication), std::to_string(duality), std::to_string(seed), status});
      plot << fmt(t) << " " << fmt(freq) << " " << fmt(sigma) << " " << fmt(km.value) << "\n";
    }
    plot << "\n\n";
  }
  res.stage_counts["rows"] = out.rows.size();
  res.tables = {std::move(out), std::move(per)};
  res.plot = plot.str();
  return res;
}

// ---------------------------------------------------------------------------

/// Kakeya lower bounds against the certified search bracket and the union construction.
inline ExperimentResult run_kakeya_table(const Config& cfg) {
  const std::string S = "kakeya_table";
  const auto seed = cfg.seed();
  const unsigned threads = cfg.threads();
  const auto qs = cfg.get_list<std::uint64_t>(S, "q");
  const auto ns = cfg.get_list<std::size_t>(S, "n");
  const auto epss = cfg.get_list<Rational>(S, "eps");
  const auto max_universe = cfg.get<std::uint64_t>(S, "max_universe", 81);
  const auto budget = cfg.get<std::uint64_t>(S, "node_budget", 300'000);
  const bool do_union = cfg.get<bool>(S, "union", false);
  const auto delta = cfg.get<Rational>(S, "union_delta", Rational(9, 10));
  for (auto q : qs)
    if (!ff::is_prime(q)) throw ConfigError("kakeya_table.q entries must be prime");
  for (const auto& e : epss)
    if (e <= 0 || e > 1) throw ConfigError("kakeya_table.eps entries must lie in (0, 1]");

  struct Job {
    std::uint64_t q;
    std::size_t n, r;
    Rational eps;
  };
  std::vector<Job> jobs;
  for (auto q : qs)
    for (auto n : ns)
      for (std::size_t r = 1; r <= n; ++r)
        for (const auto& e : epss) jobs.push_back({q, n, r, e});
  if (cfg.has(S, "r")) {
    const auto rs = cfg.get_list<std::size_t>(S, "r");
    jobs.erase(std::remove_if(jobs.begin(), jobs.end(),
                              [&](const Job& j) { return std::find(rs.begin(), rs.end(), j.r) == rs.end(); }),
               jobs.end());
  }

  std::vector<std::vector<std::string>> rows(jobs.size());
  std::vector<int> viol(jobs.size(), 0), cert(jobs.size(), 0), feas(jobs.size(), 0);
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto& j = jobs[i];
    const std::uint64_t row_seed = derive_seed(seed, {kKakeyaTable, i});
    std::string weak = "", general = "", rank1 = "", size = "", lower = "", exact = "", nodes = "";
    std::string certified = "", violation = "", u_size = "", u_n = "", u_frac = "", u_attempts = "";
    std::string status = guarded([&] {
      const double bw = kakeya::bound_weak_delta(j.q, j.n, j.r, j.eps).value;
      const double bg = kakeya::bound_eps_general(j.q, j.n, j.r, j.eps).value;
      weak = fmt(bw);
      general = fmt(bg);
      double best = std::max(bw, bg);
      if (j.r == 1 && j.eps < 1) {  // rank-1 bound needs eps < 1
        const double b1 = kakeya::bound_eps_rank1(j.q, j.n, to_double(j.eps));
        rank1 = fmt(b1);
        best = std::max(best, b1);
      }
      const auto universe = ff::checked_power(j.q, j.n);
      if (universe > max_universe) throw CapExceeded("infeasible: q^n above max_universe");
      feas[i] = 1;
      kakeya::MinimalSearchOptions opt;
      opt.node_budget = budget;
      const auto s = kakeya::minimal_kakeya_search(j.q, j.n, j.r, j.eps, opt);
      size = std::to_string(s.size);
      lower = std::to_string(s.lower_bound);
      exact = s.exact ? "1" : "0";
      nodes = std::to_string(s.nodes);
      cert[i] = static_cast<double>(s.lower_bound) >= best * (1 - 1e-12);
      viol[i] = static_cast<double>(s.size) < best * (1 - 1e-12);
      certified = cert[i] ? "1" : "0";
      violation = viol[i] ? "1" : "0";
      if (do_union && j.eps < delta) {
        Rng rng(row_seed);
        try {
          const auto u = kakeya::union_construct(s.witness, j.r, j.eps, delta, rng);
          u_size = std::to_string(u.set.size());
          u_n = std::to_string(u.generator_count);
          u_frac = to_string(u.fraction);
          u_attempts = std::to_string(u.attempts);
        } catch (const kakeya::RetryLimitExhausted& e) {
          u_size = "retry_exhausted";
          u_frac = to_string(e.best_fraction);
        }
      }
    });
    if (status.rfind("error: infeasible", 0) == 0) status = "infeasible";
    rows[i] = {std::to_string(j.q), std::to_string(j.n), std::to_string(j.r), to_string(j.eps), weak, general, rank1,
               size, lower, exact, nodes, certified, violation, u_size, u_n, u_frac, u_attempts,
               std::to_string(row_seed), status};
  });
  ExperimentResult res;
  res.kind = S;
  Table t{"table",
          {"q", "n", "r", "eps", "bound_weak", "bound_general", "bound_rank1", "search_size", "search_lower", "exact",
           "nodes", "certified", "violation", "union_size", "union_generators", "union_fraction", "union_attempts",
           "seed", "status"},
          std::move(rows)};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    res.violations += static_cast<std::uint64_t>(viol[i]);
    res.stage_counts["certified"] += static_cast<std::uint64_t>(cert[i]);
    res.stage_counts["feasible"] += static_cast<std::uint64_t>(feas[i]);
  }
  res.stage_counts["rows"] = jobs.size();
  res.tables = {std::move(t)};
  return res;
}

// ---------------------------------------------------------------------------

inline poly::MultiPoly random_poly(const PrimeField& F, std::size_t n, unsigned max_deg, std::size_t terms, Rng& rng) {
  poly::MultiPoly p(F, n);
  for (std::size_t t = 0; t < terms; ++t) {
    const auto d = static_cast<unsigned>(rng.uniform_below(max_deg + 1));
    poly::Exponent e(n, 0);
    for (unsigned s = 0; s < d; ++s) ++e[rng.uniform_below(n)];
    p.add_term(e, rng.uniform_below(F.modulus()));
  }
  return p;
}

inline poly::Point random_point(const PrimeField& F, std::size_t n, Rng& rng) {
  poly::Point a(n);
  for (auto& x : a) x = rng.uniform_below(F.modulus());
  return a;
}

inline poly::MultiPoly random_nonzero_poly(const PrimeField& F, std::size_t n, unsigned max_deg, Rng& rng) {
  for (;;) {
    auto p = random_poly(F, n, max_deg, 1 + rng.uniform_below(6), rng);
    if (!p.is_zero()) return p;
  }
}

/// One randomized instance of a named check; returns ok.
inline bool polymethod_instance(const std::string& check, std::uint64_t q, Rng& rng) {
  const PrimeField F(q);
  if (check == "schwartz_zippel") {
    const std::size_t n = 1 + rng.uniform_below(3);
    const auto p = random_nonzero_poly(F, n, 6, rng);
    std::vector<Elem> S;
    for (Elem x = 0; x < q; ++x)
      if (S.empty() || rng.uniform01() < 0.7) S.push_back(x);
    return poly::schwartz_zippel_check(p, S).ok;
  }
  if (check == "restriction") {
    const std::size_t n = 1 + rng.uniform_below(3), r = 1 + rng.uniform_below(2);
    const auto p = random_nonzero_poly(F, n, 5, rng);
    std::vector<poly::Point> d;
    for (std::size_t j = 0; j < r; ++j) d.push_back(random_point(F, n, rng));
    return poly::restriction_multiplicity_check(p, random_point(F, n, rng), d, random_point(F, r, rng)).ok;
  }
  if (check == "hasse_decrease") {
    const std::size_t n = 1 + rng.uniform_below(3);
    const auto p = random_nonzero_poly(F, n, 6, rng);
    poly::Exponent i(n, 0);
    for (auto& x : i) x = static_cast<unsigned>(rng.uniform_below(3));
    return poly::hasse_mu_decrease_check(p, random_point(F, n, rng), i).ok;
  }
  if (check == "vanishing") {
    const std::size_t n = 1 + rng.uniform_below(3);
    const auto nn = static_cast<unsigned>(n);
    const unsigned m = 1 + static_cast<unsigned>(rng.uniform_below(3));
    std::vector<poly::Point> S;
    const auto universe = ff::checked_power(q, n);
    for (std::uint64_t c = 0; c < universe; ++c)
      if (rng.uniform01() < 0.3) S.push_back(ff::decode(c, n, q));
    if (S.empty()) S.push_back(random_point(F, n, rng));
    // Smallest degree with more monomials than vanishing conditions.
    const BigInt need = binomial(m + nn - 1, nn) * S.size();
    unsigned k = 0;
    while (!(need < binomial(nn + k, nn))) ++k;
    const auto p = poly::construct_vanishing(F, n, S, m, k);
    if (p.is_zero() || *p.degree() > k) return false;
    for (const auto& s : S)
      if (poly::multiplicity(p, s) < poly::Multiplicity(m)) return false;
    return true;
  }
  throw ConfigError("unknown polymethod check '" + check + "'");
}

/// Randomized lemma checks plus the bound-witness counting sweep. Any failure counts as a violation.
inline ExperimentResult run_polymethod_suite(const Config& cfg) {
  const std::string S = "polymethod_suite";
  const auto seed = cfg.seed();
  const unsigned threads = cfg.threads();
  const auto instances = cfg.get<std::size_t>(S, "instances", 500);
  const auto vanishing = cfg.get<std::size_t>(S, "vanishing_instances", 200);
  const auto primes = cfg.get_list<std::uint64_t>(S, "primes", {2, 3, 5});
  const auto wq = cfg.get_list<std::uint64_t>(S, "witness_q", {2, 3, 5});
  const auto wn = cfg.get_list<std::size_t>(S, "witness_n", {2, 3, 4});
  const auto wd = cfg.get_list<Rational>(S, "witness_delta", {Rational(1, 4), Rational(1, 2), Rational(1)});
  const auto wN = cfg.get<std::uint64_t>(S, "witness_max_N", 5);
  for (auto q : primes)
    if (!ff::is_prime(q)) throw ConfigError("polymethod_suite.primes entries must be prime");

  ExperimentResult res;
  res.kind = S;
  Table summary{"summary", {"check", "q", "total", "ok", "failures", "seed", "status"}, {}};
  const std::vector<std::pair<std::string, std::size_t>> checks{
      {"hasse_decrease", instances}, {"restriction", instances}, {"schwartz_zippel", instances},
      {"vanishing", vanishing}};
  for (std::size_t c = 0; c < checks.size(); ++c) {
    const auto& [name, total] = checks[c];
    std::vector<int> ok(total, 0);
    std::vector<std::string> err(total);
    parallel_for(total, threads, [&](std::size_t i) {
      Rng rng(derive_seed(seed, {kPolymethodSuite, c, i}));
      const auto q = primes[i % primes.size()];
      err[i] = guarded([&] { ok[i] = polymethod_instance(name, q, rng); });
    });
    for (const auto q : primes) {
      std::uint64_t t = 0, good = 0, errors = 0;
      for (std::size_t i = 0; i < total; ++i) {
        if (primes[i % primes.size()] != q) continue;
        ++t;
        good += static_cast<std::uint64_t>(ok[i]);
        errors += err[i] != "ok";
      }
      const std::uint64_t bad = t - good;
      res.violations += bad;
      res.stage_counts[name + "_ok"] += good;
      summary.rows.push_back({name, std::to_string(q), std::to_string(t), std::to_string(good), std::to_string(bad),
                              std::to_string(seed),
                              bad == 0 ? "ok" : errors ? "error_or_violation" : "lemma_violation"});
    }
  }
  Table witness{"witness", {"q", "n", "r", "delta", "N", "k", "m", "l", "counting_ok", "bound", "status"}, {}};
  for (auto q : wq)
    for (auto n : wn)
      for (std::size_t r = 1; r < n; ++r)
        for (const auto& d : wd)
          for (std::uint64_t N = 1; N <= wN; ++N) {
            std::vector<std::string> row{std::to_string(q), std::to_string(n), std::to_string(r), to_string(d),
                                         std::to_string(N)};
            std::string k, m, l, okc, bound;
            std::string status = guarded([&] {
              const auto w = poly::kakeya_bound_witness(q, n, r, d, N);
              k = w.k.str();
              m = w.m.str();
              l = w.l.str();
              okc = w.counting_ok ? "1" : "0";
              bound = fmt(w.value);
              if (!w.counting_ok) {
                ++res.violations;
                throw InvariantViolation("counting inequality fails");
              }
            });
            ++res.stage_counts[status == "ok" ? "witness_ok" : "witness_failed"];
            for (auto* s : {&k, &m, &l, &okc, &bound}) row.push_back(*s);
            row.push_back(status);
            witness.rows.push_back(std::move(row));
          }
  res.tables = {std::move(summary), std::move(witness)};
  return res;
}

inline ExperimentResult run_experiment(const std::string& kind, const Config& cfg) {
  if (kind == "tail_sweep") return run_tail_sweep(cfg);
  if (kind == "appendixB") return run_appendixB_check(cfg);
  if (kind == "kakeya_table") return run_kakeya_table(cfg);
  if (kind == "polymethod_suite") return run_polymethod_suite(cfg);
  throw ConfigError("unknown experiment '" + kind + "'");
}

}  // namespace coverlab::exp
