#include "fusion/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace fusion {

namespace {

struct Tally {
  std::int64_t errors = 0;
  std::int64_t iterations = 0;
  std::int64_t opt_errors = 0;
  std::int64_t differing = 0;

  Tally& operator+=(const Tally& o) {
    errors += o.errors;
    iterations += o.iterations;
    opt_errors += o.opt_errors;
    differing += o.differing;
    return *this;
  }
};

int count_errors(const StateSequence& truth, const StateSequence& decided) {
  int e = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) e += truth[i] != decided[i];
  return e;
}

// Splits [0, trials) into contiguous blocks, one per worker. Integer tallies
// make the reduction exact and independent of the split.
template <class Body>
Tally run_trials(std::int64_t trials, int workers, Body body) {
  workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(trials, 1)));
  if (workers == 1) {
    Tally t;
    for (std::int64_t k = 0; k < trials; ++k) t += body(static_cast<std::uint64_t>(k));
    return t;
  }

  std::vector<Tally> partial(workers);
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::int64_t begin = trials * w / workers;
      const std::int64_t end = trials * (w + 1) / workers;
      try {
        for (std::int64_t k = begin; k < end; ++k) {
          partial[w] += body(static_cast<std::uint64_t>(k));
        }
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  Tally total;
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::mp: return "mp";
    case Scheme::optimal: return "optimal";
    case Scheme::majority: return "majority";
    case Scheme::hard: return "hard";
    case Scheme::soft: return "soft";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::mp, Scheme::optimal, Scheme::majority, Scheme::hard, Scheme::soft}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  params.validate();
  mp.validate();
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(delta_iso > 0.0 && delta_iso <= 1.0)) throw ConfigError("delta_iso must lie in (0, 1]");
  if (scheme == Scheme::optimal && params.m > exact_max_window) {
    throw ConfigError("window too large for exact oracle (m = " + std::to_string(params.m) +
                      ", cap " + std::to_string(exact_max_window) + ")");
  }
}

std::string_view to_string(ByzantineCount mode) {
  return mode == ByzantineCount::fixed ? "fixed" : "binomial";
}

ByzantineCount parse_byzantine_count(std::string_view name) {
  if (name == "binomial") return ByzantineCount::binomial;
  if (name == "fixed") return ByzantineCount::fixed;
  throw ConfigError("unknown Byzantine count mode '" + std::string(name) + "'");
}

TrialDraw draw_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
  const ModelParams& params = config.params;
  Rng rng = Rng::for_trial(config.master_seed, trial_index);
  StateSequence s = sample_states(params, rng);
  NodeStatusVector h = config.byzantine_count == ByzantineCount::fixed
                           ? sample_node_statuses_fixed(params, rng)
                           : sample_node_statuses(params, rng);
  ReportMatrix r = sample_reports(s, h, params, rng);
  return {std::move(s), std::move(h), std::move(r), rng};
}

SchemeOutput apply_scheme(const ExperimentConfig& config, const ReportMatrix& r, Rng& tie_rng) {
  switch (config.scheme) {
    case Scheme::mp: {
      FusionResult res = fuse_mp(r, config.params, config.mp, &tie_rng);
      return {std::move(res.decisions), res.iterations_used};
    }
    case Scheme::optimal:
      return {exact_bitwise_map(r, config.params, &tie_rng, config.exact_max_window).decisions, 0};
    case Scheme::majority:
      return {majority_fuse(r, tie_rng), 0};
    case Scheme::hard:
      return {hard_isolation_fuse(r, config.params, config.delta_iso, tie_rng).decisions, 0};
    case Scheme::soft:
      return {soft_isolation_fuse(r, config.params, tie_rng).decisions, 0};
  }
  throw ConfigError("unknown scheme");
}

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
  TrialDraw draw = draw_trial(config, trial_index);
  const SchemeOutput out = apply_scheme(config, draw.reports, draw.rng);
  return {count_errors(draw.states, out.decisions), out.mp_iterations};
}

Interval wilson_interval(std::int64_t successes, std::int64_t total, double z) {
  if (total <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Rounding can push the bounds past p at the extremes.
  return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
}

ErrorEstimate ErrorEstimate::from_counts(std::int64_t errors, std::int64_t decided_bits,
                                         std::int64_t iteration_sum, std::int64_t trials) {
  ErrorEstimate e;
  e.errors = errors;
  e.decided_bits = decided_bits;
  e.pe = decided_bits ? static_cast<double>(errors) / static_cast<double>(decided_bits) : 0.0;
  const Interval ci = wilson_interval(errors, decided_bits);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.mean_mp_iterations =
      trials ? static_cast<double>(iteration_sum) / static_cast<double>(trials) : 0.0;
  return e;
}

ErrorEstimate estimate_error_probability(const ExperimentConfig& config, int workers) {
  config.validate();
  const Tally t = run_trials(config.trials, resolve_workers(workers), [&](std::uint64_t k) {
    const TrialResult r = run_trial(config, k);
    return Tally{r.errors, r.mp_iterations, 0, 0};
  });
  return ErrorEstimate::from_counts(t.errors, config.trials * config.params.m, t.iterations,
                                    config.trials);
}

std::vector<SweepRow> sweep(std::span<const ExperimentConfig> grid, int workers) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  for (const auto& c : grid) c.validate();
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto& c : grid) rows.push_back({c, estimate_error_probability(c, workers)});
  return rows;
}

PairedComparison compare_mp_optimal(const ExperimentConfig& config, int workers) {
  ExperimentConfig mp_cfg = config;
  mp_cfg.scheme = Scheme::mp;
  ExperimentConfig opt_cfg = config;
  opt_cfg.scheme = Scheme::optimal;
  mp_cfg.validate();
  opt_cfg.validate();

  const Tally t = run_trials(config.trials, resolve_workers(workers), [&](std::uint64_t k) {
    TrialDraw draw = draw_trial(config, k);
    Rng mp_coins = draw.rng;
    Rng opt_coins = draw.rng;
    const SchemeOutput a = apply_scheme(mp_cfg, draw.reports, mp_coins);
    const SchemeOutput b = apply_scheme(opt_cfg, draw.reports, opt_coins);
    return Tally{count_errors(draw.states, a.decisions), a.mp_iterations,
                 count_errors(draw.states, b.decisions), a.decisions != b.decisions};
  });

  PairedComparison out;
  const std::int64_t bits = config.trials * config.params.m;
  out.mp = ErrorEstimate::from_counts(t.errors, bits, t.iterations, config.trials);
  out.optimal = ErrorEstimate::from_counts(t.opt_errors, bits, 0, config.trials);
  out.trials = config.trials;
  out.differing_trials = t.differing;
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FUSION_LAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return 1;
}

}  // namespace fusion
