#include <cmath>
#include <sstream>
#include <array>

#include "doctest.h"
#include "fusion/model.hpp"
#include "fusion/report_io.hpp"

using namespace fusion;

namespace {

ModelParams base() {
  ModelParams p;
  p.epsilon = 0.15;
  return p;
}

// |observed - expected| within k binomial standard deviations.
bool within_sigma(double count, double total, double p, double k = 3.0) {
  const double sd = std::sqrt(total * p * (1.0 - p));
  return std::abs(count - total * p) <= k * sd;
}

}  // namespace

TEST_CASE("report likelihood examples") {
  ModelParams p = base();
  CHECK(report_likelihood(1, 1, NodeStatus::honest, p, false).value() == doctest::Approx(0.85));
  CHECK(report_likelihood(0, 1, NodeStatus::byzantine, p, false).value() == doctest::Approx(0.85));
  p.pmal_true = 0.5;
  CHECK(report_likelihood(0, 1, NodeStatus::byzantine, p, false).value() == doctest::Approx(0.5));
}

TEST_CASE("fusion-center likelihood uses its own pmal") {
  ModelParams p = base();
  p.pmal_true = 1.0;
  p.pmal_fc = 0.5;
  CHECK(report_likelihood(0, 1, NodeStatus::byzantine, p, true).value() == doctest::Approx(0.5));
  CHECK(report_likelihood(0, 1, NodeStatus::byzantine, p, false).value() == doctest::Approx(0.85));
}

TEST_CASE("kernel normalization and flip symmetry") {
  for (double eps : {0.0, 0.1, 0.15, 0.4}) {
    for (double pm : {0.0, 0.3, 0.5, 1.0}) {
      ModelParams p = base();
      p.epsilon = eps;
      p.pmal_true = pm;
      for (Bit s = 0; s < 2; ++s) {
        for (NodeStatus h : {NodeStatus::byzantine, NodeStatus::honest}) {
          CHECK(report_likelihood(0, s, h, p, false) + report_likelihood(1, s, h, p, false) ==
                1.0);
          for (Bit r = 0; r < 2; ++r) {
            CHECK(report_likelihood(r, s, h, p, false).value() ==
                  report_likelihood(1 - r, 1 - s, h, p, false).value());
          }
        }
      }
      CHECK(byzantine_flip_prob(Probability(eps), Probability(0.5)).value() == 0.5);
    }
  }
}

TEST_CASE("kernel table agrees with report_likelihood") {
  ModelParams p = base();
  p.pmal_fc = 0.7;
  const ReportKernel k = ReportKernel::make(p, true);
  for (Bit r = 0; r < 2; ++r)
    for (Bit s = 0; s < 2; ++s)
      for (NodeStatus h : {NodeStatus::byzantine, NodeStatus::honest})
        CHECK(k(r, s, h) == report_likelihood(r, s, h, p, true).value());
}

TEST_CASE("transition probabilities follow persistence") {
  CHECK(transition_prob(0, 0, Probability(0.95)).value() == doctest::Approx(0.95));
  CHECK(transition_prob(0, 1, Probability(0.95)).value() == doctest::Approx(0.05));
  CHECK(transition_prob(0, 1, Probability(0.5)).value() == doctest::Approx(0.5));
  for (double rho : {0.1, 0.5, 0.95}) {
    for (Bit a = 0; a < 2; ++a) {
      CHECK(transition_prob(a, 0, Probability(rho)) + transition_prob(a, 1, Probability(rho)) ==
            1.0);
    }
  }
}

TEST_CASE("probability and parameter validation") {
  CHECK_THROWS_AS(Probability(1.5), ConfigError);
  CHECK_THROWS_AS(Probability(-0.1), ConfigError);
  CHECK_THROWS_AS(Probability(std::nan("")), ConfigError);
  ModelParams p = base();
  CHECK_NOTHROW(p.validate());
  p.alpha = 0.6;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = base();
  p.rho = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = base();
  p.n = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("state sampler is uniform over sequences when rho = 0.5") {
  ModelParams p = base();
  p.m = 3;
  Rng rng(11);
  std::array<double, 8> counts{};
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const StateSequence s = sample_states(p, rng);
    counts[s[0] * 4 + s[1] * 2 + s[2]] += 1;
  }
  double chi2 = 0.0;
  const double expected = draws / 8.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99.9% quantile of chi-square with 7 degrees of freedom
  CHECK(chi2 < 24.32);
}

TEST_CASE("state sampler persistence rate") {
  ModelParams p = base();
  p.m = 101;
  p.rho = 0.95;
  Rng rng(5);
  double same = 0, total = 0;
  for (int k = 0; k < 1000; ++k) {
    const StateSequence s = sample_states(p, rng);
    for (int i = 1; i < p.m; ++i) {
      same += s[i] == s[i - 1];
      total += 1;
    }
  }
  CHECK(total == 100000);
  CHECK(within_sigma(same, total, 0.95));

  p.m = 1;
  double zeros = 0;
  for (int k = 0; k < 10000; ++k) {
    const StateSequence s = sample_states(p, rng);
    REQUIRE(s.size() == 1);
    zeros += s[0] == 0;
  }
  CHECK(within_sigma(zeros, 10000, 0.5));
}

TEST_CASE("node status sampler") {
  ModelParams p = base();
  Rng rng(3);
  p.alpha = 0.0;
  for (int k = 0; k < 100; ++k) {
    for (NodeStatus h : sample_node_statuses(p, rng)) CHECK(h == NodeStatus::honest);
  }

  p.alpha = 0.45;
  double byz = 0;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    for (NodeStatus h : sample_node_statuses(p, rng)) byz += h == NodeStatus::byzantine;
  }
  CHECK(within_sigma(byz, draws * 20.0, 0.45));
  CHECK(byz / draws == doctest::Approx(9.0).epsilon(0.02));

  p.n = 1;
  p.alpha = 0.5;
  double ones = 0;
  for (int k = 0; k < draws; ++k) ones += sample_node_statuses(p, rng)[0] == NodeStatus::byzantine;
  CHECK(within_sigma(ones, draws, 0.5));
}

TEST_CASE("fixed-count node sampler") {
  ModelParams p = base();
  p.alpha = 0.45;
  Rng rng(8);
  std::array<int, 20> hits{};
  for (int k = 0; k < 5000; ++k) {
    const NodeStatusVector h = sample_node_statuses_fixed(p, rng);
    int byz = 0;
    for (int j = 0; j < p.n; ++j) {
      if (h[j] == NodeStatus::byzantine) {
        ++byz;
        ++hits[j];
      }
    }
    CHECK(byz == 9);
  }
  for (int c : hits) CHECK(within_sigma(c, 5000, 0.45, 4.0));
}

TEST_CASE("report sampler") {
  ModelParams p = base();
  p.m = 12;
  p.n = 6;
  Rng rng(21);
  const StateSequence s = sample_states(p, rng);

  p.epsilon = 0.0;
  p.pmal_true = 0.0;
  NodeStatusVector all_byz(p.n, NodeStatus::byzantine);
  ReportMatrix r = sample_reports(s, all_byz, p, rng);
  for (int i = 0; i < p.m; ++i)
    for (int j = 0; j < p.n; ++j) CHECK(r(i, j) == s[i]);

  p.pmal_true = 1.0;
  r = sample_reports(s, all_byz, p, rng);
  for (int i = 0; i < p.m; ++i)
    for (int j = 0; j < p.n; ++j) CHECK(r(i, j) == 1 - s[i]);

  p = base();
  p.m = 1000;
  p.n = 100;
  const StateSequence s2 = sample_states(p, rng);
  const NodeStatusVector honest(p.n, NodeStatus::honest);
  r = sample_reports(s2, honest, p, rng);
  double mismatches = 0;
  for (int i = 0; i < p.m; ++i)
    for (int j = 0; j < p.n; ++j) mismatches += r(i, j) != s2[i];
  CHECK(within_sigma(mismatches, 1e5, 0.15));

  CHECK_THROWS_AS(sample_reports(StateSequence(3), honest, p, rng), ConfigError);
}

TEST_CASE("samplers are deterministic in the seed") {
  ModelParams p = base();
  p.alpha = 0.3;
  Rng a(99), b(99);
  for (int k = 0; k < 20; ++k) {
    const StateSequence sa = sample_states(p, a), sb = sample_states(p, b);
    CHECK(sa == sb);
    const NodeStatusVector ha = sample_node_statuses(p, a), hb = sample_node_statuses(p, b);
    CHECK(ha == hb);
    CHECK(sample_reports(sa, ha, p, a) == sample_reports(sb, hb, p, b));
  }
  CHECK(Rng::for_trial(0, 7)() == Rng::for_trial(0, 7)());
  CHECK(Rng::for_trial(0, 7)() != Rng::for_trial(0, 8)());
  CHECK(Rng::for_trial(1, 7)() != Rng::for_trial(0, 7)());
}

TEST_CASE("tie rule") {
  CHECK(decide_from_posterior(0.7, nullptr) == 0);
  CHECK(decide_from_posterior(0.3, nullptr) == 1);
  CHECK(decide_from_posterior(0.5, nullptr) == 0);
  CHECK(decide_from_posterior(0.5 + 1e-15, nullptr) == 0);
  CHECK(decide_from_posterior(0.5 - 1e-15, nullptr) == 0);
  CHECK(decide_from_posterior(0.5 - 1e-9, nullptr) == 1);
  Rng rng(4);
  int ones = 0;
  for (int k = 0; k < 10000; ++k) ones += decide_from_posterior(0.5, &rng);
  CHECK(within_sigma(ones, 10000, 0.5));
}

TEST_CASE("report matrix text format") {
  std::istringstream in("0 1 1\n\n1 0 0\n");
  const ReportMatrix r = read_report_matrix(in);
  CHECK(r.rows() == 2);
  CHECK(r.cols() == 3);
  CHECK(r(0, 1) == 1);
  CHECK(r(1, 0) == 1);
  CHECK(r(1, 2) == 0);

  std::ostringstream out;
  write_report_matrix(out, r);
  std::istringstream back(out.str());
  CHECK(read_report_matrix(back) == r);

  std::istringstream ragged("0 1\n1\n");
  CHECK_THROWS_AS(read_report_matrix(ragged), ConfigError);
  std::istringstream bad("0 2\n");
  CHECK_THROWS_AS(read_report_matrix(bad), ConfigError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_report_matrix(empty), ConfigError);
  CHECK_THROWS_AS(load_report_matrix("/nonexistent/reports.txt"), ConfigError);

  ModelParams p = base();
  p.m = 2;
  p.n = 3;
  CHECK_NOTHROW(r.check_dimensions(p));
  p.n = 4;
  CHECK_THROWS_AS(r.check_dimensions(p), ConfigError);
  CHECK(r.complemented()(0, 0) == 1);
  CHECK(r.complemented().complemented() == r);
}
