#include "fusion/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fusion/report_io.hpp"

namespace fusion::cli {

namespace {

using Json = nlohmann::ordered_json;

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number for " + what + ": '" + text + "'");
  }
  return v;
}

int to_count(double v, const std::string& what) {
  if (v != std::floor(v) || v < 1.0 || v > 1e6) {
    throw ConfigError(what + " must be a positive integer");
  }
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Model variables that may be given as comma-separated lists or swept.
const std::vector<std::string> kGridVariables = {"n", "m", "epsilon", "rho", "pmal", "alpha"};

struct Flags {
  std::map<std::string, std::vector<std::string>> lists;
  std::string pmal_fc;
  int iters = 5;
  double tol = 1e-6;
  double delta_iso = kDefaultDeltaIso;
  std::uint64_t seed = 0;
  int workers = 0;
  std::int64_t trials = 100000;
  std::vector<std::string> schemes{"mp"};
  std::string scheme = "mp";
  std::string sweep;
  std::string input;
  std::string output;
  bool json = false;
  bool naive = false;
};

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--n", f.lists["n"], "Number of nodes (comma list allowed)")->delimiter(',');
  cmd->add_option("--m", f.lists["m"], "Observation window length")->delimiter(',');
  cmd->add_option("--epsilon", f.lists["epsilon"], "Local decision error probability")
      ->delimiter(',');
  cmd->add_option("--alpha", f.lists["alpha"], "Prior probability of a Byzantine node")
      ->delimiter(',');
  cmd->add_option("--rho", f.lists["rho"], "State persistence probability")->delimiter(',');
  cmd->add_option("--pmal", f.lists["pmal"], "Byzantine flipping probability")->delimiter(',');
  cmd->add_option("--pmal-fc", f.pmal_fc, "Flipping probability assumed by the fusion center");
  cmd->add_option("--iters", f.iters, "Maximum message passing iterations")->capture_default_str();
  cmd->add_option("--tol", f.tol, "Message convergence tolerance")->capture_default_str();
  cmd->add_option("--delta-iso", f.delta_iso, "Hard isolation mismatch threshold")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
}

double default_value(const std::string& var) {
  const ModelParams d;
  if (var == "n") return d.n;
  if (var == "m") return d.m;
  if (var == "epsilon") return d.epsilon;
  if (var == "rho") return d.rho;
  if (var == "pmal") return d.pmal_true;
  return d.alpha;
}

void assign(ModelParams& p, const std::string& var, double v) {
  if (var == "n") p.n = to_count(v, "n");
  else if (var == "m") p.m = to_count(v, "m");
  else if (var == "epsilon") p.epsilon = v;
  else if (var == "rho") p.rho = v;
  else if (var == "pmal") p.pmal_true = v;
  else if (var == "alpha") p.alpha = v;
  else throw ConfigError("unknown model variable '" + var + "'");
}

std::vector<double> values_of(const Flags& f, const std::string& var) {
  std::vector<double> out;
  if (auto it = f.lists.find(var); it != f.lists.end()) {
    for (const auto& s : it->second) out.push_back(parse_double(s, "--" + var));
  }
  if (out.empty()) out.push_back(default_value(var));
  return out;
}

void finish_params(ModelParams& p, const Flags& f) {
  p.pmal_fc = f.pmal_fc.empty() ? p.pmal_true : parse_double(f.pmal_fc, "--pmal-fc");
  p.validate();
}

// Cartesian product of the model variables; the swept variable varies fastest.
std::vector<ModelParams> build_grid(const Flags& f) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& var : kGridVariables) values[var] = values_of(f, var);
  std::vector<std::string> order = kGridVariables;
  if (!f.sweep.empty()) {
    const SweepSpec spec = SweepSpec::parse(f.sweep);
    values[spec.variable] = spec.values();
    order.erase(std::find(order.begin(), order.end(), spec.variable));
    order.push_back(spec.variable);
  }

  std::vector<ModelParams> grid;
  ModelParams current;
  std::function<void(std::size_t)> expand = [&](std::size_t level) {
    if (level == order.size()) {
      ModelParams p = current;
      finish_params(p, f);
      grid.push_back(p);
      return;
    }
    for (double v : values[order[level]]) {
      assign(current, order[level], v);
      expand(level + 1);
    }
  };
  expand(0);
  return grid;
}

ExperimentConfig base_config(const Flags& f) {
  ExperimentConfig c;
  c.trials = f.trials;
  c.mp.max_iters = f.iters;
  c.mp.tol = f.tol;
  c.delta_iso = f.delta_iso;
  c.master_seed = f.seed;
  return c;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string join_bits(const StateSequence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += static_cast<char>('0' + s[i]);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt(v[i]);
  }
  return out;
}

// Everything a single fusion reports, regardless of scheme.
struct FuseReport {
  StateSequence decisions;
  std::vector<double> state_posteriors;
  std::vector<double> honesty_posteriors;
  int iterations = 0;
  bool converged = true;
  Json extra = Json::object();
};

void print_report(std::ostream& out, const FuseReport& r, bool json) {
  if (json) {
    Json j;
    j["decisions"] = Json::array();
    for (Bit b : r.decisions) j["decisions"].push_back(static_cast<int>(b));
    j["state_posteriors"] = r.state_posteriors;
    j["honesty_posteriors"] = r.honesty_posteriors;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    for (const auto& [key, value] : r.extra.items()) j[key] = value;
    out << j.dump() << '\n';
    return;
  }
  out << "decisions: " << join_bits(r.decisions) << '\n';
  out << "state_posteriors: " << join(r.state_posteriors, format_17) << '\n';
  out << "honesty_posteriors: " << join(r.honesty_posteriors, format_17) << '\n';
  out << "iterations: " << r.iterations << '\n';
  out << "converged: " << (r.converged ? "true" : "false") << '\n';
  for (const auto& [key, value] : r.extra.items()) out << key << ": " << value.dump() << '\n';
}

// Parameters for a single report file: n and m come from the file unless
// given, in which case they must agree with it.
ModelParams single_params(const Flags& f, Scheme scheme, ReportMatrix& r) {
  for (const auto& var : kGridVariables) {
    if (auto it = f.lists.find(var); it != f.lists.end() && it->second.size() > 1) {
      throw ConfigError("--" + var + " takes a single value for this command");
    }
  }
  ModelParams p;
  p.epsilon = values_of(f, "epsilon")[0];
  p.rho = values_of(f, "rho")[0];
  p.pmal_true = values_of(f, "pmal")[0];
  p.alpha = values_of(f, "alpha")[0];
  const bool has_m = f.lists.count("m") && !f.lists.at("m").empty();
  const bool has_n = f.lists.count("n") && !f.lists.at("n").empty();
  if (has_m) p.m = to_count(values_of(f, "m")[0], "m");
  if (has_n) p.n = to_count(values_of(f, "n")[0], "n");
  if (scheme == Scheme::optimal && has_m && p.m > kExactMaxWindow) {
    throw ConfigError("window too large for exact oracle (m = " + std::to_string(p.m) + ", cap " +
                      std::to_string(kExactMaxWindow) + ")");
  }

  r = load_report_matrix(f.input);
  if (has_m && p.m != r.rows()) throw ConfigError("--m does not match the report file");
  if (has_n && p.n != r.cols()) throw ConfigError("--n does not match the report file");
  p.m = r.rows();
  p.n = r.cols();
  finish_params(p, f);
  return p;
}

int cmd_fuse(const Flags& f, Scheme scheme, bool naive, std::ostream& out) {
  ExperimentConfig cfg = base_config(f);
  cfg.scheme = scheme;
  ReportMatrix r;
  cfg.params = single_params(f, scheme, r);
  cfg.trials = 1;
  cfg.validate();
  Rng rng(f.seed);

  FuseReport rep;
  switch (scheme) {
    case Scheme::mp: {
      FusionResult res = fuse_mp(r, cfg.params, cfg.mp, &rng);
      rep.decisions = res.decisions;
      rep.state_posteriors = res.state_posteriors;
      rep.honesty_posteriors = res.honesty_posteriors;
      rep.iterations = res.iterations_used;
      rep.converged = res.converged;
      break;
    }
    case Scheme::optimal: {
      ExactResult res = naive ? exact_joint_enumeration(r, cfg.params, &rng)
                              : exact_bitwise_map(r, cfg.params, &rng);
      rep.decisions = res.decisions;
      rep.state_posteriors = res.state_posteriors;
      rep.honesty_posteriors = res.node_posteriors;
      rep.extra["log_evidence"] = res.log_evidence;
      break;
    }
    case Scheme::majority:
      rep.decisions = majority_fuse(r, rng);
      break;
    case Scheme::hard: {
      IsolationFusion res = hard_isolation_fuse(r, cfg.params, cfg.delta_iso, rng);
      rep.decisions = res.decisions;
      rep.extra["mismatch_counts"] = res.report.mismatch_counts;
      rep.extra["isolated"] = Json::array();
      for (Bit b : res.report.isolated) rep.extra["isolated"].push_back(static_cast<int>(b));
      break;
    }
    case Scheme::soft: {
      IsolationFusion res = soft_isolation_fuse(r, cfg.params, rng);
      rep.decisions = res.decisions;
      rep.extra["mismatch_counts"] = res.report.mismatch_counts;
      rep.extra["weights"] = res.report.weights;
      break;
    }
  }

  Output sink(f.output, out);
  print_report(*sink, rep, f.json);
  return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  std::vector<Scheme> schemes;
  for (const auto& s : f.schemes) schemes.push_back(parse_scheme(s));
  if (schemes.empty()) throw ConfigError("no scheme given");
  const std::vector<ModelParams> grid = build_grid(f);

  std::vector<ExperimentConfig> configs;
  for (Scheme s : schemes) {
    for (const auto& p : grid) {
      ExperimentConfig c = base_config(f);
      c.scheme = s;
      c.params = p;
      configs.push_back(c);
    }
  }
  for (const auto& c : configs) c.validate();

  Output sink(f.output, out);
  write_simulate_csv(*sink, sweep(configs, resolve_workers(f.workers)));
  return kExitOk;
}

int cmd_compare(const Flags& f, std::ostream& out) {
  const std::vector<ModelParams> grid = build_grid(f);
  std::vector<ExperimentConfig> configs;
  for (const auto& p : grid) {
    ExperimentConfig c = base_config(f);
    c.params = p;
    c.scheme = Scheme::optimal;
    c.validate();
    configs.push_back(c);
  }

  std::vector<PairedComparison> results;
  for (const auto& c : configs) results.push_back(compare_mp_optimal(c, resolve_workers(f.workers)));

  Output sink(f.output, out);
  std::ostream& o = *sink;
  o << kCompareHeader << '\n';
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& p = configs[k].params;
    const auto& r = results[k];
    o << p.n << ',' << p.m << ',' << format_roundtrip(p.epsilon) << ','
      << format_roundtrip(p.rho) << ',' << format_roundtrip(p.alpha) << ','
      << format_roundtrip(p.pmal_true) << ',' << format_roundtrip(p.pmal_fc) << ','
      << configs[k].trials << ',' << format_17(r.mp.pe) << ',' << format_17(r.optimal.pe) << ','
      << format_17(r.pe_gap()) << ',' << format_17(r.differ_fraction()) << ','
      << configs[k].master_seed << '\n';
  }
  return kExitOk;
}

}  // namespace

SweepSpec SweepSpec::parse(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep must look like VAR=start:step:stop");
  SweepSpec s;
  s.variable = text.substr(0, eq);
  if (std::find(kGridVariables.begin(), kGridVariables.end(), s.variable) ==
      kGridVariables.end()) {
    throw ConfigError("cannot sweep '" + s.variable + "'");
  }
  const auto parts = split(text.substr(eq + 1), ':');
  if (parts.size() != 3) throw ConfigError("sweep must look like VAR=start:step:stop");
  s.start = parse_double(parts[0], "sweep start");
  s.step = parse_double(parts[1], "sweep step");
  s.stop = parse_double(parts[2], "sweep stop");
  if (!(s.step > 0.0)) throw ConfigError("sweep step must be positive");
  if (s.stop < s.start) throw ConfigError("sweep stop is below its start");
  if ((s.stop - s.start) / s.step > 1e6) throw ConfigError("sweep has too many points");
  return s;
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out;
  const double slack = 1e-9 * step;
  for (long k = 0;; ++k) {
    double v = start + static_cast<double>(k) * step;
    if (v > stop + slack) break;
    // Strip accumulated binary noise such as 0.15000000000000002.
    v = std::round(v * 1e12) / 1e12;
    out.push_back(v);
  }
  return out;
}

std::string format_roundtrip(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_simulate_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSimulateHeader << '\n';
  for (const auto& row : rows) {
    const auto& c = row.config;
    const auto& p = c.params;
    const auto& e = row.estimate;
    out << to_string(c.scheme) << ',' << p.n << ',' << p.m << ',' << format_roundtrip(p.epsilon)
        << ',' << format_roundtrip(p.rho) << ',' << format_roundtrip(p.alpha) << ','
        << format_roundtrip(p.pmal_true) << ',' << format_roundtrip(p.pmal_fc) << ',' << c.trials
        << ',' << format_17(e.pe) << ',' << format_17(e.ci_low) << ',' << format_17(e.ci_high)
        << ',' << format_roundtrip(e.mean_mp_iterations) << ',' << c.master_seed << '\n';
  }
}

std::vector<SimulateRow> read_simulate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSimulateHeader) {
    throw ConfigError("not a simulate CSV: unexpected header");
  }
  std::vector<SimulateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw ConfigError("simulate CSV row has " + std::to_string(f.size()) +
                                          " fields");
    SimulateRow r;
    r.scheme = parse_scheme(f[0]);
    r.params.n = to_count(parse_double(f[1], "n"), "n");
    r.params.m = to_count(parse_double(f[2], "m"), "m");
    r.params.epsilon = parse_double(f[3], "epsilon");
    r.params.rho = parse_double(f[4], "rho");
    r.params.alpha = parse_double(f[5], "alpha");
    r.params.pmal_true = parse_double(f[6], "pmal");
    r.params.pmal_fc = parse_double(f[7], "pmal_fc");
    r.trials = std::stoll(f[8]);
    r.pe = parse_double(f[9], "pe");
    r.ci_low = parse_double(f[10], "ci_low");
    r.ci_high = parse_double(f[11], "ci_high");
    r.mean_iters = parse_double(f[12], "mean_iters");
    r.seed = std::stoull(f[13]);
    rows.push_back(r);
  }
  return rows;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision fusion with Byzantine nodes: message passing, exact MAP and baselines"};
  app.require_subcommand(1);
  Flags f;

  auto* fuse = app.add_subcommand("fuse", "Fuse one report matrix file");
  add_model_flags(fuse, f);
  fuse->add_option("--input,-i", f.input, "Report matrix file")->required();
  fuse->add_option("--scheme", f.scheme, "mp, optimal, majority, hard or soft")
      ->capture_default_str();
  fuse->add_flag("--json", f.json, "Emit one JSON object");
  fuse->add_option("--output,-o", f.output, "Write to this file instead of stdout");

  auto* oracle = app.add_subcommand("oracle", "Exact bitwise MAP for one report matrix file");
  add_model_flags(oracle, f);
  oracle->add_option("--input,-i", f.input, "Report matrix file")->required();
  oracle->add_flag("--naive", f.naive, "Enumerate states and node statuses jointly");
  oracle->add_flag("--json", f.json, "Emit one JSON object");
  oracle->add_option("--output,-o", f.output, "Write to this file instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error probabilities as CSV");
  add_model_flags(simulate, f);
  simulate->add_option("--schemes", f.schemes, "Comma list of schemes")->delimiter(',');
  simulate->add_option("--trials", f.trials, "Trials per grid point")->capture_default_str();
  simulate->add_option("--sweep", f.sweep, "VAR=start:step:stop");
  simulate->add_option("--workers", f.workers, "Worker threads (default FUSION_LAB_WORKERS or 1)");
  simulate->add_option("--output,-o", f.output, "Write CSV to this file instead of stdout");

  auto* compare = app.add_subcommand("compare", "Paired mp vs exact MAP comparison as CSV");
  add_model_flags(compare, f);
  compare->add_option("--trials", f.trials, "Trials per grid point")->capture_default_str();
  compare->add_option("--sweep", f.sweep, "VAR=start:step:stop");
  compare->add_option("--workers", f.workers, "Worker threads (default FUSION_LAB_WORKERS or 1)");
  compare->add_option("--output,-o", f.output, "Write CSV to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (f.iters < 1) throw ConfigError("--iters must be at least 1");
    if (*fuse) return cmd_fuse(f, parse_scheme(f.scheme), false, out);
    if (*oracle) return cmd_fuse(f, Scheme::optimal, f.naive, out);
    if (*simulate) return cmd_simulate(f, out);
    if (*compare) return cmd_compare(f, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace fusion::cli
