// Copyright 2026 The spinbus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "spinbus/experiments.hpp"

namespace spinbus {
namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig base_config(Geometry g, int n, Attachment at, double lambda) {
  ExperimentConfig c;
  c.model = make_uniform(g, n, at, lambda);
  c.threads = 1;
  return c;
}

TEST(Fit, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x = {0.1, 0.2, 0.4, 0.8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-13);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(loglog_slope({1.0, 2.0}, {1.0, -1.0}), std::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = base_config(Geometry::ring, 6, {1, 4}, 0.05);
  c.positions = {2, 3};
  c.dt = 0.1;
  const ExperimentConfig back = experiment_from_json(to_json(c));
  EXPECT_EQ(back.model, c.model);
  EXPECT_EQ(back.positions, c.positions);
  EXPECT_EQ(back.dt, c.dt);
  EXPECT_EQ(back.seed, c.seed);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  nlohmann::json j = to_json(base_config(Geometry::chain, 5, {1, 5}, 0.1));
  j["lamdba"] = 0.1;
  EXPECT_THROW(experiment_from_json(j), std::invalid_argument);
  j.erase("lamdba");
  j["lambdas"] = {0.5};
  EXPECT_THROW(experiment_from_json(j), std::invalid_argument);
  j["lambdas"] = {0.1};
  j["theta"] = 4.0;
  EXPECT_THROW(experiment_from_json(j), std::invalid_argument);
  j["theta"] = 1.0;
  j["ensemble_size"] = 0;
  EXPECT_THROW(experiment_from_json(j), std::invalid_argument);
  j["ensemble_size"] = "many";
  EXPECT_THROW(experiment_from_json(j), std::invalid_argument);
  EXPECT_THROW(experiment_from_json(nlohmann::json::array()), std::invalid_argument);
  EXPECT_THROW(experiment_from_json(nlohmann::json::object()), std::invalid_argument);
}

TEST(Pst, OddBusUsesTheRawGlobalMaximum) {
  const ModelSolution sol(make_uniform(Geometry::chain, 5, {1, 5}, 0.1));
  const PstResult r = analyze_pst(sol, {kPi / 2, 0.0});
  ASSERT_TRUE(r.optimum.found);
  EXPECT_EQ(r.observable, "raw");
  EXPECT_NEAR(r.optimum.t_opt, 1026.79, 0.05);
  EXPECT_NEAR(r.infidelity, 0.002485, 2e-6);
  EXPECT_NEAR(sol.search_window(), 4.0 * kPi / 0.01, 1e-9);
}

TEST(Pst, EvenBusUsesTheSecularFirstMaximum) {
  const ModelSolution sol(make_uniform(Geometry::chain, 4, {1, 4}, 0.1));
  const PstResult r = analyze_pst(sol, {kPi / 2, 0.0});
  ASSERT_TRUE(r.optimum.found);
  EXPECT_EQ(r.observable, "secular");
  EXPECT_NEAR(r.optimum.t_opt, 667.4, 0.5);
  EXPECT_GT(r.optimum.f_opt, 0.99);
  EXPECT_NEAR(r.raw_fidelity, r.optimum.f_opt, 0.02);
}

TEST(Pst, EvenBusTimeFollowsTheExactPairSplitting) {
  // pi / |J*| is only the lambda -> 0 limit. The exact singlet-triplet
  // splitting of the qubit pair, read off the full spectrum, fixes t0 at
  // finite lambda; the ratio to pi / |J*| converges to 1 like O(lambda).
  double previous_gap = 1.0;
  for (double lambda : {0.1, 0.05, 0.02}) {
    const ModelSolution sol(make_uniform(Geometry::chain, 4, {1, 4}, lambda));
    const auto e = sol.total().all_eigenvalues();
    const double j_exact = e[1] - e[0];  // AFM pair: singlet below the triplet
    ASSERT_NEAR(e[3] - e[1], 0.0, 1e-12);
    const PstResult r = analyze_pst(sol, {kPi / 2, 0.0});
    ASSERT_TRUE(r.optimum.found);
    EXPECT_NEAR(r.optimum.t_opt, kPi / j_exact, 0.01 * r.optimum.t_opt) << lambda;
    const double gap = std::abs(r.optimum.t_opt * std::abs(sol.even()->j_star) / kPi - 1.0);
    EXPECT_LT(gap, previous_gap) << lambda;
    previous_gap = gap;
  }
}

TEST(LambdaScan, SingleLambdaGivesNoSlope) {
  ExperimentConfig c = base_config(Geometry::chain, 4, {1, 4}, 0.1);
  c.lambdas = {0.1};
  const LambdaScan s = run_lambda_scan(c);
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_TRUE(s.rows[0].found);
  EXPECT_FALSE(s.slope.has_value());
  EXPECT_NE(s.csv().find(s.rows[0].fingerprint), std::string::npos);
}

TEST(LambdaScan, EvenBusSlopeNearTwo) {
  ExperimentConfig c = base_config(Geometry::chain, 4, {1, 4}, 0.1);
  c.lambdas = {0.05, 0.1};
  const LambdaScan s = run_lambda_scan(c);
  ASSERT_TRUE(s.slope.has_value());
  EXPECT_NEAR(*s.slope, 2.0, 0.3);
}

TEST(ThetaScan, FullOptimumIsStateIndependent) {
  ExperimentConfig c = base_config(Geometry::chain, 5, {1, 5}, 0.1);
  c.thetas = {0.0, 0.3, 2.8};
  c.phis = {0.0};
  const ThetaScan s = run_theta_scan(c);
  ASSERT_EQ(s.rows.size(), 3u);
  EXPECT_TRUE(s.rows[0].degenerate);
  EXPECT_FALSE(s.rows[1].degenerate);
  EXPECT_NE(s.csv().find("\n0,0,,,,,1,"), std::string::npos);
  EXPECT_LT(s.spread([](const ThetaRow& r) { return r.t0_prime; }), 0.01);
  EXPECT_GT(s.spread([](const ThetaRow& r) { return r.t0; }), 0.05);
}

TEST(ThetaScan, EvenBusEffectiveTimeIsPiOverJ) {
  ExperimentConfig c = base_config(Geometry::chain, 4, {1, 4}, 0.1);
  c.thetas = {kPi / 2};
  const ThetaScan s = run_theta_scan(c);
  const ModelSolution sol(c.model);
  EXPECT_NEAR(s.rows[0].t0, kPi / std::abs(sol.even()->j_star), 1e-9);
  EXPECT_NEAR(s.rows[0].f_t0, 1.0, 1e-12);
}

TEST(PositionScan, ReferenceRowIsOne) {
  ExperimentConfig c = base_config(Geometry::chain, 6, {1, 6}, 0.1);
  const PositionScan s = run_position_scan(c);
  ASSERT_EQ(s.rows.size(), 6u);
  EXPECT_NEAR(s.row(1).t0_scaled, 1.0, 1e-12);
  for (const auto& r : s.rows) {
    EXPECT_NEAR(r.j_star_scaled * 0.01, r.j_star, 1e-15);
    EXPECT_NEAR(r.t0, kPi / std::abs(r.j_star), 1e-9);
  }
  // Alternating sign along an open chain.
  EXPECT_EQ(s.row(2).sign, SignClass::antiferromagnetic);
  EXPECT_EQ(s.row(3).sign, SignClass::ferromagnetic);
  c.model = make_uniform(Geometry::chain, 5, {1, 5}, 0.1);
  EXPECT_THROW(run_position_scan(c), std::invalid_argument);
}

TEST(Disorder, DeterministicAndThreadIndependent) {
  ExperimentConfig c = base_config(Geometry::chain, 4, {1, 4}, 0.1);
  c.ensemble_size = 6;
  c.sigmas = {0.0, 0.02};
  const DisorderScan a = run_disorder_scan(c);
  c.threads = 3;
  const DisorderScan b = run_disorder_scan(c);
  EXPECT_EQ(a.members_csv(), b.members_csv());
  EXPECT_EQ(a.summary_csv(), b.summary_csv());
  // sigma = 0 members are the uniform bus.
  EXPECT_NEAR(a.summary(0.0, true).mean_infidelity, a.uniform_infidelity, 1e-9);
  EXPECT_NEAR(a.summary(0.0, false).mean_infidelity, a.uniform_infidelity, 1e-9);
  EXPECT_EQ(a.summary(0.02, true).members, 6);
  EXPECT_EQ(a.summary(0.02, true).excluded, 0);
  EXPECT_GE(a.summary(0.02, false).mean_infidelity, a.uniform_infidelity);
}

TEST(Disorder, OddBusCalibrationResearches) {
  ExperimentConfig c = base_config(Geometry::chain, 5, {1, 5}, 0.1);
  c.ensemble_size = 3;
  c.sigmas = {0.05};
  const DisorderScan s = run_disorder_scan(c);
  EXPECT_EQ(s.observable, "raw");
  for (const auto& m : s.members) {
    EXPECT_LE(m.infidelity_calibrated, m.infidelity_uncalibrated + 1e-6);
    EXPECT_NE(m.calibrated_time, s.uniform_time);
  }
}

TEST(MixedNode, DegenerateAtZeroCoupling) {
  ExperimentConfig c = base_config(Geometry::chain, 5, {1, 5}, 0.0);
  const MixedNodeReport r = run_mixed_node_check(c);
  EXPECT_TRUE(r.degenerate);
  EXPECT_NEAR(r.control_max, 0.5, 1e-15);
  c.model = make_uniform(Geometry::chain, 4, {1, 4}, 0.1);
  EXPECT_THROW(run_mixed_node_check(c), std::invalid_argument);
}

}  // namespace
}  // namespace spinbus
