#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fusion/experiment.hpp"

namespace fusion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Column order of `simulate` output.
inline constexpr const char* kSimulateHeader =
    "scheme,n,m,epsilon,rho,alpha,pmal,pmal_fc,trials,pe,ci_low,ci_high,mean_iters,seed";
/// Column order of `compare` output.
inline constexpr const char* kCompareHeader =
    "n,m,epsilon,rho,alpha,pmal,pmal_fc,trials,pe_mp,pe_opt,pe_gap,differ_fraction,seed";

/// Parsed `--sweep VAR=start:step:stop`.
struct SweepSpec {
  std::string variable;  ///< one of n, m, epsilon, alpha, rho, pmal
  double start = 0.0;
  double step = 0.0;
  double stop = 0.0;

  static SweepSpec parse(const std::string& text);
  std::vector<double> values() const;
};

/// One data row of `simulate` output, as read back from CSV.
struct SimulateRow {
  Scheme scheme = Scheme::mp;
  ModelParams params;
  std::int64_t trials = 0;
  double pe = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_iters = 0.0;
  std::uint64_t seed = 0;
};

/// Shortest decimal text that parses back to exactly x.
std::string format_roundtrip(double x);
/// Decimal text with 17 significant digits.
std::string format_17(double x);

void write_simulate_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SimulateRow> read_simulate_csv(std::istream& in);

/// Entry point of the fusion_lab tool. Returns the process exit code:
/// 0 success, 2 configuration or input error, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fusion::cli
