#pragma once

#include "fusion/model.hpp"

namespace testing_support {

using fusion::ModelParams;
using fusion::ReportMatrix;
using fusion::Rng;

inline double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline int int_in(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

// Random parameters with strictly positive local error, so every report
// matrix has nonzero probability.
inline ModelParams random_params(Rng& rng, int m, int n) {
  ModelParams p;
  p.m = m;
  p.n = n;
  p.epsilon = uniform_in(rng, 0.01, 0.45);
  p.alpha = rng.uniform() < 0.1 ? 0.0 : uniform_in(rng, 0.0, 0.5);
  p.rho = uniform_in(rng, 0.05, 0.95);
  p.pmal_true = rng.uniform() < 0.3 ? 1.0 : rng.uniform();
  p.pmal_fc = rng.uniform() < 0.5 ? p.pmal_true : rng.uniform();
  return p;
}

inline ReportMatrix random_reports(Rng& rng, int m, int n) {
  ReportMatrix r(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = rng.coin();
  return r;
}

// Report matrix drawn from the generative model itself.
inline ReportMatrix model_reports(Rng& rng, const ModelParams& p) {
  const auto s = fusion::sample_states(p, rng);
  const auto h = fusion::sample_node_statuses(p, rng);
  return fusion::sample_reports(s, h, p, rng);
}

}  // namespace testing_support
