#include "fusion/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace fusion {

namespace {

constexpr double kAgreementClamp = 1e-3;

std::vector<int> count_mismatches(const ReportMatrix& r, const StateSequence& reference) {
  std::vector<int> counts(r.cols(), 0);
  for (int i = 0; i < r.rows(); ++i) {
    for (int j = 0; j < r.cols(); ++j) counts[j] += r(i, j) != reference[i];
  }
  return counts;
}

void check(const ReportMatrix& r, const ModelParams& params) {
  params.validate();
  r.check_dimensions(params);
}

}  // namespace

StateSequence majority_fuse(const ReportMatrix& r, Rng& rng) {
  StateSequence out(r.rows());
  for (int i = 0; i < r.rows(); ++i) {
    int ones = 0;
    for (Bit b : r.row(i)) ones += b;
    const int zeros = r.cols() - ones;
    out[i] = ones > zeros ? 1 : ones < zeros ? 0 : rng.coin();
  }
  return out;
}

IsolationFusion hard_isolation_fuse(const ReportMatrix& r, const ModelParams& params,
                                    double delta_iso, Rng& rng) {
  check(r, params);
  if (!(delta_iso > 0.0 && delta_iso <= 1.0)) throw ConfigError("delta_iso must lie in (0, 1]");

  IsolationFusion out;
  out.decisions = majority_fuse(r, rng);
  out.report.mismatch_counts = count_mismatches(r, out.decisions);
  out.report.isolated.assign(r.cols(), 0);

  int kept = 0;
  for (int j = 0; j < r.cols(); ++j) {
    const double rate = static_cast<double>(out.report.mismatch_counts[j]) / r.rows();
    out.report.isolated[j] = rate > delta_iso;
    kept += !out.report.isolated[j];
  }
  if (kept == 0 || kept == r.cols()) return out;

  for (int i = 0; i < r.rows(); ++i) {
    int ones = 0;
    for (int j = 0; j < r.cols(); ++j) {
      if (!out.report.isolated[j]) ones += r(i, j);
    }
    const int zeros = kept - ones;
    out.decisions[i] = ones > zeros ? 1 : ones < zeros ? 0 : rng.coin();
  }
  return out;
}

IsolationFusion soft_isolation_fuse(const ReportMatrix& r, const ModelParams& params, Rng& rng) {
  check(r, params);

  IsolationFusion out;
  const StateSequence reference = majority_fuse(r, rng);
  out.report.mismatch_counts = count_mismatches(r, reference);
  out.report.weights.resize(r.cols());
  for (int j = 0; j < r.cols(); ++j) {
    const double agree = std::clamp(
        1.0 - static_cast<double>(out.report.mismatch_counts[j]) / r.rows(), kAgreementClamp,
        1.0 - kAgreementClamp);
    out.report.weights[j] = std::max(0.0, std::log(agree / (1.0 - agree)));
  }

  if (std::all_of(out.report.weights.begin(), out.report.weights.end(),
                  [](double w) { return w == 0.0; })) {
    out.decisions = reference;
    return out;
  }

  // Votes for each value are accumulated separately so that equal weights on
  // both sides compare equal exactly.
  out.decisions.resize(r.rows());
  for (int i = 0; i < r.rows(); ++i) {
    double for_one = 0.0, for_zero = 0.0;
    for (int j = 0; j < r.cols(); ++j) {
      (r(i, j) ? for_one : for_zero) += out.report.weights[j];
    }
    out.decisions[i] = for_one > for_zero ? 1 : for_one < for_zero ? 0 : rng.coin();
  }
  return out;
}

}  // namespace fusion
