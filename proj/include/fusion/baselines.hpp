#pragma once

#include <vector>

#include "fusion/model.hpp"

namespace fusion {

/// Default hard-isolation threshold on the per-node mismatch rate.
inline constexpr double kDefaultDeltaIso = 0.325;

/// Per-node agreement statistics against the first-pass majority decision.
struct IsolationReport {
  std::vector<int> mismatch_counts;
  std::vector<Bit> isolated;   ///< hard scheme only
  std::vector<double> weights; ///< soft scheme only
};

struct IsolationFusion {
  StateSequence decisions;
  IsolationReport report;
};

/// Per-slot majority vote; exact ties are settled by a coin from rng.
StateSequence majority_fuse(const ReportMatrix& r, Rng& rng);

/// Majority vote, then a second vote that excludes every node whose mismatch
/// rate with the first decision exceeds delta_iso. If nobody is excluded the
/// first-pass decision is kept; if everybody is, too.
IsolationFusion hard_isolation_fuse(const ReportMatrix& r, const ModelParams& params,
                                    double delta_iso, Rng& rng);

/// Majority vote, then a weighted vote with w_j = max(0, logit(a_j)) where a_j
/// is the node's agreement rate with the first decision, clamped to
/// [1e-3, 1 - 1e-3]. When every weight is zero the first-pass decision is kept.
IsolationFusion soft_isolation_fuse(const ReportMatrix& r, const ModelParams& params, Rng& rng);

}  // namespace fusion
