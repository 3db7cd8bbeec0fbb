#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hspec/diameter.hpp"
#include "hspec/errors.hpp"
#include "hspec/io.hpp"
#include "hspec/metric.hpp"
#include "hspec/space_model.hpp"
#include "hspec/spectrum.hpp"
#include "hspec/sweep.hpp"

namespace hspec::cli {

enum class task { spectrum, lambda1, diameter, sweep, audit, collapse };

struct RunConfig {
  task what = task::lambda1;
  std::string space;
  std::vector<int> params;
  std::vector<double> metric;  // q family coordinates or n*n row-major entries
  double cutoff = 20.0;
  long n_max = 400000;
  long n_start = 25000;
  int k_neighbors = 12;
  double tolerance = 0.02;
  std::vector<double> epsilons{1.0, 0.5, 0.25, 0.125};
  std::string penalty;           // diameter: "", "sub" or "singular"
  std::vector<int> subspace;     // 1-based block indices for penalty runs
  int grid_points = 9;
  double range = 4.0;            // log4 half-range of the sweep grid
  std::string pattern = "1";     // "all", or a 1-based permutation like "3,1,2"
  bool lambda_only = false;
  bool verify_cutoff = false;
  bool require_sound = false;
  int n_random = 50;
  bool k_diameter = false;
  bool with_diameter = false;    // collapse only
  std::vector<double> t{1.0, 0.5, 0.25, 0.125, 0.03125};
  std::optional<std::uint64_t> seed;
  int threads = default_threads();
  std::string output;            // empty: stdout
  std::string format = "json";
};

inline const char* task_name(task t) {
  switch (t) {
    case task::spectrum: return "spectrum";
    case task::lambda1: return "lambda1";
    case task::diameter: return "diameter";
    case task::sweep: return "sweep";
    case task::audit: return "audit";
    case task::collapse: return "collapse";
  }
  return "?";
}

inline bool stochastic(const RunConfig& c) {
  switch (c.what) {
    case task::diameter:
    case task::audit:
      return true;
    case task::sweep:
      return !c.lambda_only;
    case task::collapse:
      return c.with_diameter;
    default:
      return false;
  }
}

inline void validate(const RunConfig& c) {
  auto bad = [](const std::string& m) { throw error(errc::invalid_config, m); };
  if (c.space.empty()) bad("--space is required");
  if (!(c.cutoff > 0.0)) bad("cutoff must be positive");
  if (c.n_max < 2 || c.n_start < 2) bad("sample counts must be at least 2");
  if (c.k_neighbors < 1) bad("k must be at least 1");
  if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) bad("tolerance must lie in (0, 1)");
  if (c.grid_points < 1 || c.grid_points > 101) bad("grid points must lie in [1, 101]");
  if (!(c.range >= 0.0 && c.range <= 12.0)) bad("range must lie in [0, 12]");
  if (c.n_random < 1) bad("n-random must be at least 1");
  if (c.threads < 1) bad("threads must be at least 1");
  if (c.format != "json" && c.format != "csv") bad("format must be json or csv");
  if (c.penalty != "" && c.penalty != "sub" && c.penalty != "singular") bad("penalty must be sub or singular");
  if (stochastic(c) && !c.seed) bad(std::string("--seed is mandatory for ") + task_name(c.what));
  for (double v : c.metric)
    if (!std::isfinite(v)) bad("metric entries must be finite");
}

// Metric from --metric: q positive family coordinates or a full n x n matrix.
inline InvariantMetric parse_metric(const HomogeneousSpaceModel& s, const std::vector<double>& v) {
  if (v.empty()) return identity_metric(s);
  if (int(v.size()) == s.q()) {
    RVector x = Eigen::Map<const RVector>(v.data(), Eigen::Index(v.size()));
    for (double e : v)
      if (!(e > 0.0)) throw error(errc::invalid_params, "family coordinates must be positive");
    return family_metric(s, x);
  }
  if (int(v.size()) == s.n() * s.n()) {
    RMatrix phi(s.n(), s.n());
    for (int i = 0; i < s.n(); ++i)
      for (int j = 0; j < s.n(); ++j) phi(i, j) = v[size_t(i * s.n() + j)];
    return diagonal_decomposition(s, phi);
  }
  throw error(errc::dimension_mismatch, "metric needs q = " + std::to_string(s.q()) + " coordinates or n*n = " +
                                            std::to_string(s.n() * s.n()) + " matrix entries, got " +
                                            std::to_string(v.size()));
}

inline std::vector<int> parse_pattern(const std::string& p, int q) {
  std::vector<int> out;
  std::stringstream ss(p);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item) - 1);
  if (int(out.size()) == 1 && out[0] == 0) {
    out.resize(size_t(q));
    for (int i = 0; i < q; ++i) out[size_t(i)] = i;
  }
  std::vector<int> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < int(sorted.size()); ++i)
    if (sorted[size_t(i)] != i) throw error(errc::invalid_config, "pattern must be a permutation of 1..q");
  if (int(out.size()) != q) throw error(errc::invalid_config, "pattern length must equal q");
  return out;
}

inline DiameterOptions diameter_options(const RunConfig& c) {
  DiameterOptions o;
  o.n_max = c.n_max;
  o.n_start = std::min(c.n_start, c.n_max);
  o.k_neighbors = c.k_neighbors;
  o.tolerance = c.tolerance;
  o.seed = c.seed.value_or(1);
  o.threads = c.threads;
  return o;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw error(errc::invalid_config, "cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

inline void emit_json(const RunConfig& c, const io::json& j) {
  Output out(c.output);
  io::dump17(out.stream(), j);
  out.stream() << "\n";
}

inline io::json header(const RunConfig& c) {
  io::json j;
  j["task"] = task_name(c.what);
  j["space"] = c.space;
  j["params"] = c.params;
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

// Executes one task. Returns the process exit code; errors are reported on
// `err` with the failing invariant named.
inline int run(const RunConfig& c, std::ostream& err = std::cerr) {
  try {
    validate(c);
    const auto s = build_space_model(c.space, c.params);
    io::json j = header(c);
    int code = 0;
    auto demand = [&](bool sound) {
      if (c.require_sound && !sound) code = 3;
    };
    switch (c.what) {
      case task::spectrum: {
        const auto g = parse_metric(s, c.metric);
        const auto r = SpectralEngine(s).full_spectrum(g, c.cutoff);
        j.update(io::to_json(r));
        demand(r.certificate.sound);
        emit_json(c, j);
        break;
      }
      case task::lambda1: {
        const auto g = parse_metric(s, c.metric);
        SpectralEngine eng(s);
        const auto r = eng.lambda1(g);
        j.update(io::to_json(r));
        if (c.verify_cutoff) {
          Lambda1Options twice;
          twice.min_cutoff = 2.0 * r.certificate.cutoff;
          const auto r2 = eng.lambda1(g, twice);
          j["doubled_cutoff_lambda1"] = io::num(r2.value);
          j["cutoff_stable"] = r2.value == r.value;
          demand(r2.value == r.value);
        }
        demand(r.certificate.sound);
        emit_json(c, j);
        break;
      }
      case task::diameter: {
        const auto opt = diameter_options(c);
        if (c.penalty.empty()) {
          const auto g = parse_metric(s, c.metric);
          j["diameter"] = io::to_json(estimate_diameter(s, g.phi, opt));
        } else {
          if (c.subspace.empty()) throw error(errc::invalid_config, "penalty runs need --subspace");
          RMatrix basis(s.n(), 0);
          for (int b : c.subspace) {
            if (b < 1 || b > s.q()) throw error(errc::invalid_config, "subspace block index out of range");
            basis = linalg::hcat(basis, s.declared_decomposition[size_t(b - 1)]);
          }
          if (c.penalty == "sub") {
            const RMatrix hb = linalg::column_space(basis);
            j["diameter"] = io::to_json(
                penalty_sub_diameter(s, hb, RMatrix::Identity(hb.cols(), hb.cols()), c.epsilons, opt));
          } else {
            const auto r = penalty_singular_diameter(s, basis, c.epsilons, opt);
            j["diameter"] = io::to_json(r.estimate);
            if (r.quotient_bound) j["quotient_bound"] = io::num(*r.quotient_bound);
          }
        }
        emit_json(c, j);
        break;
      }
      case task::sweep: {
        SweepOptions so;
        so.with_diameter = !c.lambda_only;
        so.diam = diameter_options(c);
        so.diam.threads = 1;
        so.threads = c.threads;
        so.verify_cutoff = c.verify_cutoff;
        FunctionalEvaluator ev(s, so);
        const auto grid = log_grid(c.grid_points, c.range);
        const auto patterns =
            c.pattern == "all" ? all_patterns(s.q()) : std::vector<std::vector<int>>{parse_pattern(c.pattern, s.q())};
        const auto res = ray_sweep(ev, patterns, grid);
        j["grid"] = io::vec(grid);
        j["summary"] = io::to_json(res.summary);
        demand(res.summary.unsound == 0 && res.summary.cutoff_changed == 0);
        if (c.format == "csv") {
          {
            Output out(c.output);
            io::write_sweep_csv(out.stream(), res, s.q());
          }
          // The summary goes next to the CSV (or to stderr when streaming).
          if (c.output.empty()) {
            io::dump17(err, j);
            err << "\n";
          } else {
            RunConfig side = c;
            side.output = c.output + ".summary.json";
            emit_json(side, j);
          }
        } else {
          io::json recs = io::json::array();
          for (const auto& r : res.records) recs.push_back(io::to_json(r));
          j["records"] = recs;
          emit_json(c, j);
        }
        break;
      }
      case task::audit: {
        AuditOptions ao;
        ao.n_random = c.n_random;
        ao.seed = *c.seed;
        ao.diam = diameter_options(c);
        ao.tolerance = std::max(0.03, c.tolerance);
        ao.k_diameter = c.k_diameter;
        ao.penalty_epsilons = c.epsilons;
        const auto r = inequality_audit(s, ao);
        j.update(io::to_json(r));
        emit_json(c, j);
        break;
      }
      case task::collapse: {
        if (s.name != "su2") throw error(errc::invalid_params, "collapse is implemented for su2 against U(1)");
        RMatrix kprime = RMatrix::Zero(3, 1);
        kprime(2, 0) = 1.0;
        const auto r = collapse_limit_check(s, kprime, c.t, std::nullopt, c.with_diameter, diameter_options(c));
        j.update(io::to_json(r));
        demand(r.certificates_sound);
        emit_json(c, j);
        break;
      }
    }
    return code;
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

namespace detail {

// Converts a JSON config file into command-line tokens placed before the
// user's own arguments; with last-value-wins parsing, flags override it.
inline std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::invalid_config, "cannot read config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw error(errc::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw error(errc::invalid_config, "config must be a JSON object");
  std::vector<std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "task") continue;
    std::string key = it.key();
    std::replace(key.begin(), key.end(), '_', '-');
    const auto& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back("--" + key);
      continue;
    }
    std::string val;
    if (v.is_array()) {
      for (size_t i = 0; i < v.size(); ++i) val += (i ? "," : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
    } else {
      val = v.is_string() ? v.get<std::string>() : v.dump();
    }
    out.push_back("--" + key);
    out.push_back(val);
  }
  return out;
}

inline std::optional<std::string> config_task(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(in);
    if (j.is_object() && j.contains("task")) return j["task"].get<std::string>();
  } catch (...) {
  }
  return std::nullopt;
}

}  // namespace detail

// Parses argv (flags > config file > defaults). On failure returns the exit
// code to use; on --help returns 0 with no config.
struct ParseOutcome {
  std::optional<RunConfig> config;
  int exit_code = 0;
};

inline ParseOutcome parse(int argc, const char* const* argv, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const std::vector<std::string> tasks{"spectrum", "lambda1", "diameter", "sweep", "audit", "collapse"};
  try {
    // Locate --config first so its values can be placed ahead of the flags.
    std::string cfg;
    for (size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg = args[i].substr(9);
    }
    std::vector<std::string> merged;
    size_t first = 0;
    if (!args.empty() && std::find(tasks.begin(), tasks.end(), args[0]) != tasks.end()) {
      merged.push_back(args[0]);
      first = 1;
    } else if (!cfg.empty()) {
      if (auto t = detail::config_task(cfg)) merged.push_back(*t);
    }
    if (!cfg.empty())
      for (auto& t : detail::config_tokens(cfg)) merged.push_back(t);
    for (size_t i = first; i < args.size(); ++i) merged.push_back(args[i]);

    RunConfig c;
    CLI::App app{"Spectra and diameters of invariant metrics on compact homogeneous spaces"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string metric_s, params_s, eps_s, t_s, subspace_s, grid_s;
    std::uint64_t seed = 0;
    std::string config_path;
    auto common = [&](CLI::App* sub) {
      sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      sub->add_option("--space", c.space, "catalog name, e.g. su2, torus, su3_mod_t2, su2*torus")->required();
      sub->add_option("--params", params_s, "comma-separated integer parameters (torus rank)");
      sub->add_option("--metric", metric_s, "q family coordinates or n*n matrix entries, comma-separated");
      sub->add_option("--cutoff", c.cutoff, "Casimir cutoff for the spectrum listing");
      sub->add_option("--N", c.n_max, "maximum number of graph samples");
      sub->add_option("--n-start", c.n_start, "initial number of graph samples");
      sub->add_option("--k", c.k_neighbors, "graph neighbours per node");
      sub->add_option("--tolerance", c.tolerance, "relative convergence tolerance for graph diameters");
      sub->add_option("--epsilons", eps_s, "penalty sequence, decreasing, comma-separated");
      sub->add_option("--seed", seed, "random seed (mandatory for stochastic tasks)");
      sub->add_option("--threads", c.threads, "worker threads");
      sub->add_option("--config", config_path, "JSON config file");
      sub->add_option("--output", c.output, "output path (default stdout)");
      sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };
    std::vector<std::pair<CLI::App*, task>> subs;
    auto* sp = app.add_subcommand("spectrum", "Laplace spectrum up to a Casimir cutoff");
    auto* l1 = app.add_subcommand("lambda1", "first positive eigenvalue with truncation certificate");
    auto* di = app.add_subcommand("diameter", "diameter estimate (closed form, graph or penalty limit)");
    auto* sw = app.add_subcommand("sweep", "ordered-ray sweep of lambda1 * diam^2");
    auto* au = app.add_subcommand("audit", "random checks of the comparison inequalities");
    auto* co = app.add_subcommand("collapse", "collapse of SU(2) toward SU(2)/U(1)");
    subs = {{sp, task::spectrum}, {l1, task::lambda1}, {di, task::diameter},
            {sw, task::sweep},    {au, task::audit},   {co, task::collapse}};
    for (auto& [a, t] : subs) common(a);
    for (auto* a : {l1, sw}) a->add_flag("--verify-cutoff", c.verify_cutoff, "re-run lambda1 with doubled cutoff");
    for (auto* a : {sp, l1, sw, co}) a->add_flag("--require-sound", c.require_sound, "exit 3 on unsound certificates");
    di->add_option("--penalty", c.penalty, "sub or singular")->check(CLI::IsMember({"sub", "singular"}));
    di->add_option("--subspace", subspace_s, "1-based declared blocks spanning the distribution");
    sw->add_option("--grid", grid_s, "points per block, e.g. 9x9x9");
    sw->add_option("--range", c.range, "log4 half-range of the grid");
    sw->add_option("--pattern", c.pattern, "'all' or a 1-based block order");
    sw->add_flag("--lambda-only", c.lambda_only, "skip diameters");
    au->add_option("--n-random", c.n_random, "number of random metrics and pairs");
    au->add_flag("--k-diameter", c.k_diameter, "include penalty-limit diameter sandwiches");
    co->add_option("--t", t_s, "decreasing collapse parameters");
    co->add_flag("--with-diameter", c.with_diameter, "also compare diameters");

    std::vector<std::string> rev(merged.rbegin(), merged.rend());
    try {
      app.parse(rev);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e, out, err);
      return {std::nullopt, rc == 0 ? 0 : 2};
    }

    for (auto& [a, t] : subs)
      if (a->parsed()) {
        c.what = t;
        if (a->count("--seed")) c.seed = seed;
      }
    auto doubles = [](const std::string& s) {
      std::vector<double> v;
      for (const auto& tok : hspec::detail::split(s, ','))
        if (!tok.empty()) v.push_back(std::stod(tok));
      return v;
    };
    auto ints = [](const std::string& s) {
      std::vector<int> v;
      for (const auto& tok : hspec::detail::split(s, ','))
        if (!tok.empty()) v.push_back(std::stoi(tok));
      return v;
    };
    try {
      c.params = ints(params_s);
      c.metric = doubles(metric_s);
      if (!eps_s.empty()) c.epsilons = doubles(eps_s);
      if (!t_s.empty()) c.t = doubles(t_s);
      c.subspace = ints(subspace_s);
    } catch (const std::exception&) {
      throw error(errc::invalid_config, "could not parse a numeric list");
    }
    if (!grid_s.empty()) {
      const auto parts = hspec::detail::split(grid_s, 'x');
      int pts = -1;
      for (const auto& p : parts) {
        const int v = std::stoi(p);
        if (pts >= 0 && v != pts) throw error(errc::invalid_config, "grid must use the same point count per block");
        pts = v;
      }
      c.grid_points = pts;
    }
    return {c, 0};
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return {std::nullopt, 2};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return {std::nullopt, 2};
  }
}

}  // namespace hspec::cli
