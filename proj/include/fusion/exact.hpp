#pragma once

#include <vector>

#include "fusion/model.hpp"

namespace fusion {

/// Default cap on the window length accepted by exact_bitwise_map.
inline constexpr int kExactMaxWindow = 20;
/// Cap on m + n for the naive joint enumeration.
inline constexpr int kJointEnumerationMaxVars = 22;

struct ExactResult {
  StateSequence decisions;
  std::vector<double> state_posteriors;  ///< p(s_i = 0 | R)
  std::vector<double> node_posteriors;   ///< p(h_j = byzantine | R)
  double log_evidence = 0.0;             ///< log p(R)
};

/// Exact bitwise MAP over all 2^m state sequences, with the node statuses
/// summed out in closed form per node. Throws ConfigError if m > max_window,
/// NumericError if R has zero probability under params.
ExactResult exact_bitwise_map(const ReportMatrix& r, const ModelParams& params,
                              Rng* tie_rng = nullptr, int max_window = kExactMaxWindow);

/// Naive enumeration over all 2^(m+n) joint assignments of states and node
/// statuses. Used to validate exact_bitwise_map.
ExactResult exact_joint_enumeration(const ReportMatrix& r, const ModelParams& params,
                                    Rng* tie_rng = nullptr);

}  // namespace fusion
