#include "fusion/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fusion {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void ModelParams::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (m < 1) throw ConfigError("m must be at least 1");
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  if (!(alpha >= 0.0 && alpha <= 0.5)) throw ConfigError("alpha must lie in [0, 0.5]");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (!in_unit(pmal_true)) throw ConfigError("pmal must lie in [0, 1]");
  if (!in_unit(pmal_fc)) throw ConfigError("pmal_fc must lie in [0, 1]");
}

ReportMatrix::ReportMatrix(int rows, int cols)
    : ReportMatrix(rows, cols,
                   std::vector<Bit>(static_cast<std::size_t>(rows < 0 ? 0 : rows) *
                                    static_cast<std::size_t>(cols < 0 ? 0 : cols))) {}

ReportMatrix::ReportMatrix(int rows, int cols, std::vector<Bit> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 1 || cols < 1) throw ConfigError("report matrix must be at least 1x1");
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ConfigError("report matrix data does not match its dimensions");
  }
  for (Bit b : data_) {
    if (b > 1) throw ConfigError("report matrix entries must be 0 or 1");
  }
}

ReportMatrix ReportMatrix::complemented() const {
  ReportMatrix out = *this;
  for (Bit& b : out.data_) b ^= 1;
  return out;
}

void ReportMatrix::check_dimensions(const ModelParams& params) const {
  if (rows_ != params.m || cols_ != params.n) {
    throw ConfigError("report matrix is " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                      " but parameters require " + std::to_string(params.m) + "x" +
                      std::to_string(params.n));
  }
}

Probability byzantine_flip_prob(Probability epsilon, Probability pmal) {
  const double e = epsilon, p = pmal;
  return Probability(e * (1.0 - p) + (1.0 - e) * p);
}

Probability report_likelihood(Bit r, Bit s, NodeStatus h, const ModelParams& params,
                              bool use_fc_pmal) {
  const double wrong =
      h == NodeStatus::honest
          ? params.epsilon
          : byzantine_flip_prob(Probability(params.epsilon),
                                Probability(use_fc_pmal ? params.pmal_fc : params.pmal_true))
                .value();
  return Probability(r == s ? 1.0 - wrong : wrong);
}

Probability transition_prob(Bit s_prev, Bit s_cur, Probability rho) {
  return Probability(s_prev == s_cur ? rho.value() : 1.0 - rho.value());
}

ReportKernel ReportKernel::make(const ModelParams& params, bool use_fc_pmal) {
  ReportKernel k;
  for (Bit r = 0; r < 2; ++r) {
    for (Bit s = 0; s < 2; ++s) {
      for (NodeStatus h : {NodeStatus::byzantine, NodeStatus::honest}) {
        k.p[r][s][static_cast<int>(h)] = report_likelihood(r, s, h, params, use_fc_pmal);
      }
    }
  }
  return k;
}

StateSequence sample_states(const ModelParams& params, Rng& rng) {
  StateSequence s(static_cast<std::size_t>(params.m));
  s[0] = rng.coin();
  for (std::size_t i = 1; i < s.size(); ++i) {
    s[i] = rng.bernoulli(params.rho) ? s[i - 1] : static_cast<Bit>(s[i - 1] ^ 1);
  }
  return s;
}

NodeStatusVector sample_node_statuses(const ModelParams& params, Rng& rng) {
  NodeStatusVector h(static_cast<std::size_t>(params.n));
  for (auto& status : h) {
    status = rng.bernoulli(params.alpha) ? NodeStatus::byzantine : NodeStatus::honest;
  }
  return h;
}

NodeStatusVector sample_node_statuses_fixed(const ModelParams& params, Rng& rng) {
  const auto n = static_cast<std::size_t>(params.n);
  const auto count = static_cast<std::size_t>(std::llround(params.alpha * params.n));
  NodeStatusVector h(n, NodeStatus::honest);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` slots form a uniform subset.
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - k));
    std::swap(order[k], order[std::min(pick, n - 1)]);
    h[order[k]] = NodeStatus::byzantine;
  }
  return h;
}

ReportMatrix sample_reports(const StateSequence& s, const NodeStatusVector& h,
                            const ModelParams& params, Rng& rng) {
  if (s.size() != static_cast<std::size_t>(params.m) ||
      h.size() != static_cast<std::size_t>(params.n)) {
    throw ConfigError("state or node-status vector does not match parameters");
  }
  const double eta =
      byzantine_flip_prob(Probability(params.epsilon), Probability(params.pmal_true));
  ReportMatrix r(params.m, params.n);
  for (int i = 0; i < params.m; ++i) {
    for (int j = 0; j < params.n; ++j) {
      const double wrong = h[j] == NodeStatus::honest ? params.epsilon : eta;
      r(i, j) = rng.bernoulli(wrong) ? static_cast<Bit>(s[i] ^ 1) : s[i];
    }
  }
  return r;
}

}  // namespace fusion
