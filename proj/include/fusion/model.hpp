#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fusion/error.hpp"
#include "fusion/rng.hpp"

namespace fusion {

using Bit = std::uint8_t;

/// A real value checked to lie in [0, 1].
class Probability {
 public:
  constexpr Probability() = default;
  constexpr explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("probability outside [0, 1]");
  }
  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }

 private:
  double value_ = 0.0;
};

/// Node status, encoded as in the generative model: honest = 1, byzantine = 0.
enum class NodeStatus : std::uint8_t { byzantine = 0, honest = 1 };

/// All scalar parameters of the generative model and of the fusion center.
struct ModelParams {
  int n = 20;             ///< number of nodes
  int m = 10;             ///< observation window length
  double epsilon = 0.15;  ///< local decision error probability
  double alpha = 0.0;     ///< prior probability that a node is Byzantine
  double rho = 0.5;       ///< probability that the state persists between slots
  double pmal_true = 1.0; ///< flipping probability used by the attackers
  double pmal_fc = 1.0;   ///< flipping probability assumed by the fusion center

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
};

/// s[i] is the system state at slot i.
using StateSequence = std::vector<Bit>;
using NodeStatusVector = std::vector<NodeStatus>;

/// m x n binary matrix of reports; row i = state slot, column j = node.
class ReportMatrix {
 public:
  ReportMatrix() = default;
  ReportMatrix(int rows, int cols);
  ReportMatrix(int rows, int cols, std::vector<Bit> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Bit operator()(int i, int j) const { return data_[index(i, j)]; }
  Bit& operator()(int i, int j) { return data_[index(i, j)]; }

  std::span<const Bit> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const Bit> data() const { return data_; }

  /// Bitwise complement of every report.
  ReportMatrix complemented() const;

  /// Throws ConfigError unless the matrix is rows x cols of params.
  void check_dimensions(const ModelParams& params) const;

  friend bool operator==(const ReportMatrix&, const ReportMatrix&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * cols_ + static_cast<std::size_t>(j);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Bit> data_;
};

/// Probability that a Byzantine report disagrees with the true state.
Probability byzantine_flip_prob(Probability epsilon, Probability pmal);

/// p(r | s, h) for a single report.
///
/// With use_fc_pmal the Byzantine branch uses the flipping probability assumed
/// by the fusion center; otherwise it uses the attackers' true value.
Probability report_likelihood(Bit r, Bit s, NodeStatus h, const ModelParams& params,
                              bool use_fc_pmal);

/// p(s_cur | s_prev) under the persistence convention.
Probability transition_prob(Bit s_prev, Bit s_cur, Probability rho);

/// Table of p(r | s, h) indexed [r][s][h] with h as encoded by NodeStatus.
struct ReportKernel {
  std::array<std::array<std::array<double, 2>, 2>, 2> p{};

  static ReportKernel make(const ModelParams& params, bool use_fc_pmal);
  double operator()(Bit r, Bit s, NodeStatus h) const {
    return p[r][s][static_cast<int>(h)];
  }
};

/// Posteriors this close to 1/2 count as ties. Symmetric evidence gives exactly
/// 1/2 in exact arithmetic but lands a few ulps to either side depending on the
/// order of floating-point sums, which would otherwise bypass the tie coin.
inline constexpr double kTieTolerance = 1e-12;

/// Bitwise MAP decision from p(s_i = 0 | R). A tie is settled by a coin from
/// tie_rng, or toward 0 when no stream is supplied.
inline Bit decide_from_posterior(double p_zero, Rng* tie_rng) {
  if (p_zero > 0.5 + kTieTolerance) return 0;
  if (p_zero < 0.5 - kTieTolerance) return 1;
  return tie_rng ? tie_rng->coin() : Bit{0};
}

StateSequence sample_states(const ModelParams& params, Rng& rng);
/// I.i.d. statuses: each node is Byzantine with probability alpha.
NodeStatusVector sample_node_statuses(const ModelParams& params, Rng& rng);
/// Exactly round(alpha * n) Byzantine nodes at uniformly random positions.
NodeStatusVector sample_node_statuses_fixed(const ModelParams& params, Rng& rng);
ReportMatrix sample_reports(const StateSequence& s, const NodeStatusVector& h,
                            const ModelParams& params, Rng& rng);

}  // namespace fusion
