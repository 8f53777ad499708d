#pragma once

#include <vector>

#include "fusion/model.hpp"

namespace fusion {

/// Lower clamp applied to every normalized message probability.
inline constexpr double kMessageClampLo = 1e-12;

/// Largest magnitude of a stored message log-odds; equals
/// log((1 - kMessageClampLo) / kMessageClampLo).
double max_message_log_odds();

/// Logistic function, stable for large |x| and for +-inf.
double logistic(double log_odds);

/// All normalized messages of the state-chain / report / honesty factor graph.
///
/// Every message is binary and is kept as the log-odds of the value 0 of its
/// variable: log p(s = 0) / p(s = 1) for state messages and
/// log p(h = 0) / p(h = 1) (Byzantine over honest) for honesty messages.
/// The normalized probability of 0 is logistic(value). Per-report families
/// are row-major m x n, entry (i, j) at i * n + j.
struct MessageState {
  int m = 0;
  int n = 0;

  std::vector<double> tau_l;     ///< m, state i -> left transition factor
  std::vector<double> tau_r;     ///< m, state i -> right transition factor
  std::vector<double> phi_l;     ///< m - 1, right transition factor -> state i
  std::vector<double> phi_r;     ///< m, left transition factor (prior at i = 0) -> state i
  std::vector<double> nu_u;      ///< m x n, report factor -> state
  std::vector<double> nu_d;      ///< m x n, state -> report factor
  std::vector<double> lambda_u;  ///< m x n, honesty variable -> report factor
  std::vector<double> lambda_d;  ///< m x n, report factor -> honesty variable
  std::vector<double> omega_u;   ///< n, honesty prior factor -> honesty variable
  std::vector<double> omega_d;   ///< n, honesty variable -> prior factor

  std::size_t at(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  }

  /// Largest absolute change of any normalized message probability between
  /// two states of identical shape.
  static double max_abs_change(const MessageState& a, const MessageState& b);

  /// Visits every stored log-odds value.
  template <class F>
  void for_each(F&& f) const {
    for (const auto* family : {&tau_l, &tau_r, &phi_l, &phi_r, &nu_u, &nu_d, &lambda_u,
                               &lambda_d, &omega_u, &omega_d}) {
      for (double v : *family) f(v);
    }
  }
};

struct FusionResult {
  StateSequence decisions;
  std::vector<double> state_posteriors;    ///< p(s_i = 0 | R)
  std::vector<double> honesty_posteriors;  ///< p(h_j = byzantine | R)
  int iterations_used = 0;
  bool converged = false;
};

struct MpOptions {
  int max_iters = 5;
  double tol = 1e-6;

  void validate() const;
};

/// Initial messages: lambda_u and omega_u carry the prior p(h_j = 0) = alpha,
/// phi_r[0] carries p(s_1 = 0) = 1/2, everything else is uninformative.
MessageState init_messages(const ReportMatrix& r, const ModelParams& params);

/// One full schedule round, in place: nu_u, rightward chain sweep, leftward
/// chain sweep, then nu_d, lambda_d, lambda_u and omega_d.
/// Throws NumericError if a message becomes NaN.
void iterate(MessageState& state, const ReportMatrix& r, const ModelParams& params);

/// Approximate p(s_i = 0 | R) from the messages reaching each state variable.
std::vector<double> state_marginals(const MessageState& state);

/// Approximate p(h_j = byzantine | R) from the prior and omega_d.
std::vector<double> honesty_marginals(const MessageState& state, const ModelParams& params);

/// Runs iterate until no message probability moves by tol or more, or
/// max_iters rounds have run. Ties at exactly 1/2 use tie_rng when supplied
/// and are decided as 0 otherwise.
FusionResult fuse_mp(const ReportMatrix& r, const ModelParams& params,
                     const MpOptions& options = {}, Rng* tie_rng = nullptr);

}  // namespace fusion
