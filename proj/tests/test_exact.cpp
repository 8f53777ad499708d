#include <algorithm>
#include <cmath>
#include <string>

#include "doctest.h"
#include "fusion/exact.hpp"
#include "support.hpp"

using namespace fusion;
using namespace testing_support;

namespace {

double max_posterior_gap(const ExactResult& a, const ExactResult& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.state_posteriors.size(); ++i)
    d = std::max(d, std::abs(a.state_posteriors[i] - b.state_posteriors[i]));
  for (std::size_t j = 0; j < a.node_posteriors.size(); ++j)
    d = std::max(d, std::abs(a.node_posteriors[j] - b.node_posteriors[j]));
  return d;
}

ReportMatrix matrix_from_bits(int m, int n, std::uint32_t bits) {
  ReportMatrix r(m, n);
  for (int k = 0; k < m * n; ++k) r(k / n, k % n) = (bits >> k) & 1u;
  return r;
}

}  // namespace

TEST_CASE("single report, honest prior") {
  ModelParams p;
  p.m = 1;
  p.n = 1;
  p.alpha = 0.0;
  const ReportMatrix r(1, 1, {1});
  for (const ExactResult& ex : {exact_bitwise_map(r, p), exact_joint_enumeration(r, p)}) {
    CHECK(1.0 - ex.state_posteriors[0] == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(ex.decisions[0] == 1);
    CHECK(ex.node_posteriors[0] == 0.0);
  }
}

TEST_CASE("single report, Byzantine prior") {
  ModelParams p;
  p.m = 1;
  p.n = 1;
  p.alpha = 0.45;
  const ReportMatrix r(1, 1, {1});
  const ExactResult ex = exact_bitwise_map(r, p);
  CHECK(1.0 - ex.state_posteriors[0] == doctest::Approx(0.535).epsilon(1e-12));
  CHECK(exact_joint_enumeration(r, p).state_posteriors[0] ==
        doctest::Approx(ex.state_posteriors[0]).epsilon(1e-12));
  CHECK(ex.log_evidence == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("oracles agree exhaustively on small shapes") {
  ModelParams p;
  p.epsilon = 0.15;
  p.alpha = 0.3;
  p.rho = 0.8;
  p.pmal_true = p.pmal_fc = 0.9;
  double worst = 0.0;
  for (int m = 1; m <= 5; ++m) {
    for (int n = 1; n <= 5; ++n) {
      if (m * n > 12) continue;
      p.m = m;
      p.n = n;
      for (std::uint32_t bits = 0; bits < (1u << (m * n)); ++bits) {
        const ReportMatrix r = matrix_from_bits(m, n, bits);
        const ExactResult a = exact_bitwise_map(r, p);
        const ExactResult b = exact_joint_enumeration(r, p);
        worst = std::max(worst, max_posterior_gap(a, b));
        CHECK(a.log_evidence == doctest::Approx(b.log_evidence).epsilon(1e-12));
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("oracles agree on random instances") {
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int m = int_in(rng, 1, 6);
    const int n = int_in(rng, 1, 6);
    const ModelParams p = random_params(rng, m, n);
    const ReportMatrix r = random_reports(rng, m, n);
    worst = std::max(worst, max_posterior_gap(exact_bitwise_map(r, p), exact_joint_enumeration(r, p)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("complemented reports give complemented posteriors") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = int_in(rng, 1, 10);
    const int n = int_in(rng, 1, 20);
    const ModelParams p = random_params(rng, m, n);
    const ReportMatrix r = random_reports(rng, m, n);
    const ExactResult a = exact_bitwise_map(r, p);
    const ExactResult b = exact_bitwise_map(r.complemented(), p);
    for (int i = 0; i < m; ++i) {
      CHECK(a.state_posteriors[i] == doctest::Approx(1.0 - b.state_posteriors[i]).epsilon(1e-12));
    }
    for (int j = 0; j < n; ++j) {
      CHECK(a.node_posteriors[j] == doctest::Approx(b.node_posteriors[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("honest independent states reduce to majority") {
  Rng rng(6);
  ModelParams p;
  p.alpha = 0.0;
  p.rho = 0.5;
  for (int trial = 0; trial < 200; ++trial) {
    p.m = int_in(rng, 1, 8);
    p.n = int_in(rng, 1, 9);
    p.epsilon = uniform_in(rng, 0.01, 0.49);
    const ReportMatrix r = random_reports(rng, p.m, p.n);
    const ExactResult ex = exact_bitwise_map(r, p);
    for (double q : ex.node_posteriors) CHECK(q == 0.0);
    for (int i = 0; i < p.m; ++i) {
      int ones = 0;
      for (Bit b : r.row(i)) ones += b;
      if (2 * ones != p.n) CHECK(ex.decisions[i] == (2 * ones > p.n ? 1 : 0));
    }
  }
}

TEST_CASE("exact posteriors are calibrated") {
  ModelParams p;
  p.m = 6;
  p.n = 5;
  p.alpha = 0.3;
  p.epsilon = 0.25;
  p.rho = 0.7;
  double in_bin = 0, zeros = 0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    Rng rng = Rng::for_trial(123, k);
    const StateSequence s = sample_states(p, rng);
    const NodeStatusVector h = sample_node_statuses(p, rng);
    const ReportMatrix r = sample_reports(s, h, p, rng);
    const ExactResult ex = exact_bitwise_map(r, p);
    for (int i = 0; i < p.m; ++i) {
      const double q = ex.state_posteriors[i];
      if (q >= 0.79 && q <= 0.81) {
        in_bin += 1;
        zeros += s[i] == 0;
      }
    }
  }
  REQUIRE(in_bin > 200);
  const double sd = std::sqrt(in_bin * 0.8 * 0.2);
  CHECK(std::abs(zeros - 0.8 * in_bin) <= 3.0 * sd);
}

TEST_CASE("oracle guards") {
  ModelParams p;
  p.m = 21;
  const ReportMatrix big(21, 20);
  try {
    exact_bitwise_map(big, p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("window too large for exact oracle") != std::string::npos);
  }

  p.m = 3;
  p.n = 20;
  CHECK_THROWS_AS(exact_joint_enumeration(ReportMatrix(3, 20), p), ConfigError);
  CHECK_THROWS_AS(exact_bitwise_map(ReportMatrix(4, 20), p), ConfigError);

  // Contradictory unanimous-honest evidence has zero probability.
  ModelParams q;
  q.m = 1;
  q.n = 2;
  q.epsilon = 0.0;
  q.alpha = 0.0;
  CHECK_THROWS_AS(exact_bitwise_map(ReportMatrix(1, 2, {0, 1}), q), NumericError);
  CHECK_THROWS_AS(exact_joint_enumeration(ReportMatrix(1, 2, {0, 1}), q), NumericError);
}

TEST_CASE("exact oracle handles the full window with twenty nodes") {
  Rng rng(2);
  ModelParams p;
  p.m = 20;
  p.alpha = 0.45;
  const ReportMatrix r = model_reports(rng, p);
  const ExactResult ex = exact_bitwise_map(r, p);
  CHECK(std::isfinite(ex.log_evidence));
  for (double q : ex.state_posteriors) {
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
}
