#include "fusion/mp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fusion {

namespace {

const double kMaxLogOdds = std::log1p(-kMessageClampLo) - std::log(kMessageClampLo);

double clamp_message(double x) {
  if (std::isnan(x)) throw NumericError("message passing produced a NaN message");
  return std::clamp(x, -kMaxLogOdds, kMaxLogOdds);
}

double log_odds_of(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log(p) - std::log1p(-p);
}

// Log-odds of a binary message obtained by mixing an incoming message with
// probability of zero p = logistic(x) through a 2x2 table:
//   out(0) = a p + b (1 - p),  out(1) = c p + d (1 - p).
struct Mixer {
  double a, b, c, d;

  double operator()(double x) const {
    if (x >= 0.0) {
      const double e = std::exp(-x);
      return std::log((a + b * e) / (c + d * e));
    }
    const double e = std::exp(x);
    return std::log((a * e + b) / (c * e + d));
  }
};

// Both the report kernel and the chain kernel are symmetric under s -> 1 - s,
// so the report-to-state message for r = 1 is the negation of the one for
// r = 0 and the transition map is odd. Evaluating one side and negating keeps
// complemented inputs producing exactly negated log-odds.
struct Kernels {
  // Report factor -> state for r = 0. Input lambda_u.
  Mixer to_state;
  // Report factor -> honesty variable, indexed by the report value. Input nu_d.
  Mixer to_honesty[2];
  // Transition factor, either direction (the chain kernel is symmetric).
  Mixer transition;
  double honesty_prior;

  explicit Kernels(const ModelParams& params) {
    const ReportKernel k = ReportKernel::make(params, /*use_fc_pmal=*/true);
    constexpr auto byz = NodeStatus::byzantine;
    constexpr auto hon = NodeStatus::honest;
    to_state = {k(0, 0, byz), k(0, 0, hon), k(0, 1, byz), k(0, 1, hon)};
    for (Bit r = 0; r < 2; ++r) {
      to_honesty[r] = {k(r, 0, byz), k(r, 1, byz), k(r, 0, hon), k(r, 1, hon)};
    }
    transition = {params.rho, 1.0 - params.rho, 1.0 - params.rho, params.rho};
    honesty_prior = log_odds_of(params.alpha);
  }

  double report_to_state(Bit r, double lambda_u) const {
    const double v = to_state(lambda_u);
    return r ? -v : v;
  }

  double chain(double tau) const { return tau < 0.0 ? -transition(-tau) : transition(tau); }
};

bool change_below(const MessageState& a, const MessageState& b, double tol) {
  const std::vector<double> MessageState::*families[] = {
      &MessageState::tau_l,    &MessageState::tau_r,    &MessageState::phi_l,
      &MessageState::phi_r,    &MessageState::nu_u,     &MessageState::nu_d,
      &MessageState::lambda_u, &MessageState::lambda_d, &MessageState::omega_u,
      &MessageState::omega_d};
  for (auto family : families) {
    const auto& x = a.*family;
    const auto& y = b.*family;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double dx = std::abs(x[k] - y[k]);
      // The logistic has slope at most 1/4.
      if (dx * 0.25 < tol) continue;
      if (std::abs(logistic(x[k]) - logistic(y[k])) >= tol) return false;
    }
  }
  return true;
}

}  // namespace

double max_message_log_odds() { return kMaxLogOdds; }

double logistic(double log_odds) {
  if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

double MessageState::max_abs_change(const MessageState& a, const MessageState& b) {
  if (a.m != b.m || a.n != b.n) throw ConfigError("message states differ in shape");
  std::vector<double> pa, pb;
  a.for_each([&](double v) { pa.push_back(logistic(v)); });
  b.for_each([&](double v) { pb.push_back(logistic(v)); });
  double worst = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) worst = std::max(worst, std::abs(pa[k] - pb[k]));
  return worst;
}

void MpOptions::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
}

MessageState init_messages(const ReportMatrix& r, const ModelParams& params) {
  params.validate();
  r.check_dimensions(params);
  const int m = params.m, n = params.n;
  const auto cells = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
  const double prior = clamp_message(log_odds_of(params.alpha));

  MessageState st;
  st.m = m;
  st.n = n;
  st.tau_l.assign(m, 0.0);
  st.tau_r.assign(m, 0.0);
  st.phi_l.assign(m - 1, 0.0);
  st.phi_r.assign(m, 0.0);  // phi_r[0] = log-odds of p(s_1 = 0) = 1/2
  st.nu_u.assign(cells, 0.0);
  st.nu_d.assign(cells, 0.0);
  st.lambda_u.assign(cells, prior);
  st.lambda_d.assign(cells, 0.0);
  st.omega_u.assign(n, prior);
  st.omega_d.assign(n, 0.0);
  return st;
}

void iterate(MessageState& st, const ReportMatrix& r, const ModelParams& params) {
  r.check_dimensions(params);
  if (st.m != params.m || st.n != params.n) {
    throw ConfigError("message state does not match the report matrix");
  }
  const Kernels k(params);
  const int m = st.m, n = st.n;

  // Report factors -> states; row sums give the product over all nodes.
  std::vector<double> row_sum(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t c = st.at(i, j);
      st.nu_u[c] = clamp_message(k.report_to_state(r(i, j), st.lambda_u[c]));
      sum += st.nu_u[c];
    }
    row_sum[i] = sum;
  }

  // Rightward sweep along the chain.
  st.phi_r[0] = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i > 0) st.phi_r[i] = clamp_message(k.chain(st.tau_r[i - 1]));
    st.tau_r[i] = clamp_message(st.phi_r[i] + row_sum[i]);
  }

  // Leftward sweep; the last state has no right neighbour.
  for (int i = m - 1; i >= 0; --i) {
    if (i < m - 1) st.phi_l[i] = clamp_message(k.chain(st.tau_l[i + 1]));
    const double from_right = i < m - 1 ? st.phi_l[i] : 0.0;
    st.tau_l[i] = clamp_message(from_right + row_sum[i]);
  }

  // States -> report factors -> honesty variables.
  std::vector<double> col_sum(n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double chain = st.phi_r[i] + (i < m - 1 ? st.phi_l[i] : 0.0);
    for (int j = 0; j < n; ++j) {
      const std::size_t c = st.at(i, j);
      st.nu_d[c] = clamp_message(chain + row_sum[i] - st.nu_u[c]);
      st.lambda_d[c] = clamp_message(k.to_honesty[r(i, j)](st.nu_d[c]));
      col_sum[j] += st.lambda_d[c];
    }
  }

  // Honesty variables -> report factors, leaving out the recipient.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t c = st.at(i, j);
      st.lambda_u[c] = clamp_message(k.honesty_prior + col_sum[j] - st.lambda_d[c]);
    }
  }
  for (int j = 0; j < n; ++j) st.omega_d[j] = clamp_message(col_sum[j]);
}

std::vector<double> state_marginals(const MessageState& st) {
  std::vector<double> out(st.m);
  for (int i = 0; i < st.m; ++i) {
    double x = st.phi_r[i] + (i < st.m - 1 ? st.phi_l[i] : 0.0);
    for (int j = 0; j < st.n; ++j) x += st.nu_u[st.at(i, j)];
    out[i] = logistic(x);
  }
  return out;
}

std::vector<double> honesty_marginals(const MessageState& st, const ModelParams& params) {
  // Unclamped prior, so alpha = 0 pins every node to honest exactly.
  const double prior = log_odds_of(params.alpha);
  std::vector<double> out(st.n);
  for (int j = 0; j < st.n; ++j) out[j] = logistic(prior + st.omega_d[j]);
  return out;
}

FusionResult fuse_mp(const ReportMatrix& r, const ModelParams& params, const MpOptions& options,
                     Rng* tie_rng) {
  options.validate();
  MessageState st = init_messages(r, params);

  FusionResult out;
  MessageState previous;
  for (int it = 0; it < options.max_iters; ++it) {
    previous = st;
    iterate(st, r, params);
    out.iterations_used = it + 1;
    if (change_below(previous, st, options.tol)) {
      out.converged = true;
      break;
    }
  }

  out.state_posteriors = state_marginals(st);
  out.honesty_posteriors = honesty_marginals(st, params);
  out.decisions.resize(st.m);
  for (int i = 0; i < st.m; ++i) {
    out.decisions[i] = decide_from_posterior(out.state_posteriors[i], tie_rng);
  }
  return out;
}

}  // namespace fusion
