#include "fusion/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace fusion {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// k * log(p), with 0 * log(0) = 0.
double xlogy(int k, double p) { return k == 0 ? 0.0 : k * std::log(p); }

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Log Markov prior of a state sequence given as a bitmask, in terms of the
// number of state changes.
struct ChainPrior {
  double log_stay, log_switch;
  int m;
  std::uint32_t pair_mask;

  explicit ChainPrior(const ModelParams& p)
      : log_stay(std::log(p.rho)),
        log_switch(std::log1p(-p.rho)),
        m(p.m),
        pair_mask(p.m > 1 ? (std::uint32_t{1} << (p.m - 1)) - 1 : 0) {}

  double operator()(std::uint32_t s) const {
    const int switches = std::popcount((s ^ (s >> 1)) & pair_mask);
    return std::log(0.5) + switches * log_switch + (m - 1 - switches) * log_stay;
  }
};

void finish(ExactResult& out, double max_lw, double z, const std::vector<double>& z0,
            const std::vector<double>& byz, Rng* tie_rng) {
  const auto m = z0.size();
  out.log_evidence = max_lw + std::log(z);
  out.state_posteriors.resize(m);
  out.decisions.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.state_posteriors[i] = std::clamp(z0[i] / z, 0.0, 1.0);
    out.decisions[i] = decide_from_posterior(out.state_posteriors[i], tie_rng);
  }
  out.node_posteriors.resize(byz.size());
  for (std::size_t j = 0; j < byz.size(); ++j) {
    out.node_posteriors[j] = std::clamp(byz[j] / z, 0.0, 1.0);
  }
}

double max_of(const std::vector<double>& v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == kNegInf) throw NumericError("report matrix has zero probability under the model");
  return hi;
}

}  // namespace

ExactResult exact_bitwise_map(const ReportMatrix& r, const ModelParams& params, Rng* tie_rng,
                              int max_window) {
  params.validate();
  if (params.m > max_window || params.m > 30) {
    throw ConfigError("window too large for exact oracle (m = " + std::to_string(params.m) +
                      ", cap " + std::to_string(std::min(max_window, 30)) + ")");
  }
  r.check_dimensions(params);
  const int m = params.m, n = params.n;

  std::vector<std::uint32_t> columns(n, 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) columns[j] |= std::uint32_t{r(i, j)} << i;
  }

  // Per-node likelihood with the status summed out depends on s only through
  // the Hamming distance d between the node's column and s.
  const double eta = byzantine_flip_prob(Probability(params.epsilon), Probability(params.pmal_fc));
  const double log_alpha = std::log(params.alpha);
  const double log_honest = std::log1p(-params.alpha);
  std::vector<double> node_term(m + 1), byz_share(m + 1);
  for (int d = 0; d <= m; ++d) {
    const double byz = log_alpha + xlogy(d, eta) + xlogy(m - d, 1.0 - eta);
    const double hon = log_honest + xlogy(d, params.epsilon) + xlogy(m - d, 1.0 - params.epsilon);
    node_term[d] = log_add(byz, hon);
    byz_share[d] = node_term[d] == kNegInf ? 0.0 : std::exp(byz - node_term[d]);
  }

  const ChainPrior prior(params);
  const std::uint32_t count = std::uint32_t{1} << m;
  std::vector<double> lw(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    double w = prior(s);
    for (int j = 0; j < n; ++j) w += node_term[std::popcount(columns[j] ^ s)];
    lw[s] = w;
  }

  const double hi = max_of(lw);
  double z = 0.0;
  std::vector<double> z0(m, 0.0), byz(n, 0.0);
  for (std::uint32_t s = 0; s < count; ++s) {
    const double e = std::exp(lw[s] - hi);
    if (e == 0.0) continue;
    z += e;
    for (int i = 0; i < m; ++i) {
      if (!((s >> i) & 1U)) z0[i] += e;
    }
    for (int j = 0; j < n; ++j) byz[j] += e * byz_share[std::popcount(columns[j] ^ s)];
  }

  ExactResult out;
  finish(out, hi, z, z0, byz, tie_rng);
  return out;
}

ExactResult exact_joint_enumeration(const ReportMatrix& r, const ModelParams& params,
                                    Rng* tie_rng) {
  params.validate();
  if (params.m + params.n > kJointEnumerationMaxVars) {
    throw ConfigError("instance too large for joint enumeration (m + n = " +
                      std::to_string(params.m + params.n) + ")");
  }
  r.check_dimensions(params);
  const int m = params.m, n = params.n;

  const ReportKernel kernel = ReportKernel::make(params, /*use_fc_pmal=*/true);
  double log_kernel[2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) log_kernel[a][b][c] = std::log(kernel.p[a][b][c]);
  const double log_status[2] = {std::log(params.alpha), std::log1p(-params.alpha)};

  const ChainPrior prior(params);
  const std::uint32_t states = std::uint32_t{1} << m;
  const std::uint32_t statuses = std::uint32_t{1} << n;
  std::vector<double> lw(static_cast<std::size_t>(states) * statuses);

  // Bit j of the status mask set means node j is Byzantine.
  auto status_of = [](std::uint32_t h, int j) {
    return static_cast<int>(((h >> j) & 1U) ? NodeStatus::byzantine : NodeStatus::honest);
  };

  for (std::uint32_t s = 0; s < states; ++s) {
    for (std::uint32_t h = 0; h < statuses; ++h) {
      double w = prior(s);
      for (int j = 0; j < n; ++j) {
        const int hj = status_of(h, j);
        w += log_status[hj];
        for (int i = 0; i < m; ++i) w += log_kernel[r(i, j)][(s >> i) & 1U][hj];
      }
      lw[static_cast<std::size_t>(s) * statuses + h] = w;
    }
  }

  const double hi = max_of(lw);
  double z = 0.0;
  std::vector<double> z0(m, 0.0), byz(n, 0.0);
  for (std::uint32_t s = 0; s < states; ++s) {
    for (std::uint32_t h = 0; h < statuses; ++h) {
      const double e = std::exp(lw[static_cast<std::size_t>(s) * statuses + h] - hi);
      z += e;
      for (int i = 0; i < m; ++i) {
        if (!((s >> i) & 1U)) z0[i] += e;
      }
      for (int j = 0; j < n; ++j) {
        if ((h >> j) & 1U) byz[j] += e;
      }
    }
  }

  ExactResult out;
  finish(out, hi, z, z0, byz, tie_rng);
  return out;
}

}  // namespace fusion
