#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusion/baselines.hpp"
#include "fusion/exact.hpp"
#include "fusion/model.hpp"
#include "fusion/mp.hpp"

namespace fusion {

enum class Scheme { mp, optimal, majority, hard, soft };

/// How the true node statuses of a trial are drawn. The fusion center always
/// assumes the i.i.d. prior.
enum class ByzantineCount {
  binomial,  ///< each node Byzantine independently with probability alpha
  fixed,     ///< exactly round(alpha * n) Byzantine nodes
};

std::string_view to_string(ByzantineCount mode);
ByzantineCount parse_byzantine_count(std::string_view name);

std::string_view to_string(Scheme scheme);
/// Accepts mp, optimal, majority, hard, soft. Throws ConfigError.
Scheme parse_scheme(std::string_view name);

struct ExperimentConfig {
  ModelParams params;
  Scheme scheme = Scheme::mp;
  std::int64_t trials = 100000;
  MpOptions mp;
  double delta_iso = kDefaultDeltaIso;
  std::uint64_t master_seed = 0;
  ByzantineCount byzantine_count = ByzantineCount::binomial;
  int exact_max_window = kExactMaxWindow;

  void validate() const;
};

/// One draw of the generative model. rng is left positioned after sampling
/// and supplies the tie-breaking coins of whichever scheme runs next.
struct TrialDraw {
  StateSequence states;
  NodeStatusVector statuses;
  ReportMatrix reports;
  Rng rng;
};

TrialDraw draw_trial(const ExperimentConfig& config, std::uint64_t trial_index);

struct SchemeOutput {
  StateSequence decisions;
  int mp_iterations = 0;
};

/// Runs the configured fusion scheme on a report matrix.
SchemeOutput apply_scheme(const ExperimentConfig& config, const ReportMatrix& r, Rng& tie_rng);

struct TrialResult {
  int errors = 0;  ///< number of slots with a wrong decision
  int mp_iterations = 0;
};

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_index);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
Interval wilson_interval(std::int64_t successes, std::int64_t total,
                         double z = 1.959963984540054);

struct ErrorEstimate {
  double pe = 0.0;  ///< bitwise error probability = errors / decided_bits
  std::int64_t decided_bits = 0;
  std::int64_t errors = 0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double mean_mp_iterations = 0.0;  ///< zero for schemes other than mp

  static ErrorEstimate from_counts(std::int64_t errors, std::int64_t decided_bits,
                                   std::int64_t iteration_sum, std::int64_t trials);
};

/// Estimates the bitwise error probability over config.trials independent
/// trials. workers <= 0 defers to resolve_workers. The result does not depend
/// on the number of workers.
ErrorEstimate estimate_error_probability(const ExperimentConfig& config, int workers = 1);

struct SweepRow {
  ExperimentConfig config;
  ErrorEstimate estimate;
};

std::vector<SweepRow> sweep(std::span<const ExperimentConfig> grid, int workers = 1);

/// mp and the exact oracle run on identical generative draws.
struct PairedComparison {
  ErrorEstimate mp;
  ErrorEstimate optimal;
  std::int64_t trials = 0;
  std::int64_t differing_trials = 0;  ///< trials whose decision vectors differ

  double pe_gap() const { return mp.pe - optimal.pe; }
  double differ_fraction() const {
    return trials ? static_cast<double>(differing_trials) / static_cast<double>(trials) : 0.0;
  }
};

/// config.scheme is ignored.
PairedComparison compare_mp_optimal(const ExperimentConfig& config, int workers = 1);

/// Worker count from a flag value, falling back to FUSION_LAB_WORKERS and then 1.
int resolve_workers(int requested);

}  // namespace fusion
