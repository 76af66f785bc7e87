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

#include "oracle.hpp"
#include "spinbus/dynamics.hpp"

namespace spinbus {
namespace {

struct Scenario {
  ModelSpec spec;
  BlockSpectrum total;
  GroundStateInfo ground;
  PureState psi0;
};

Scenario make_setup(const ModelSpec& spec, BlochAngles angles) {
  Scenario s{spec, total_spectrum(spec), ground_state(bus_spectrum(spec)), {}};
  s.psi0 = prepare_initial_state(angles, spec, s.ground);
  return s;
}

std::vector<oracle::Link> links_of(const ModelSpec& spec) {
  std::vector<oracle::Link> out;
  for (const auto& b : total_bonds(spec)) out.push_back({b.a, b.b, b.j});
  return out;
}

TEST(Dynamics, InitialStateIsAProduct) {
  const ModelSpec spec = make_uniform(Geometry::chain, 4, {1, 4}, 0.1);
  const BlochAngles angles{1.1, 0.4};
  const Scenario s = make_setup(spec, angles);
  EXPECT_NEAR(s.psi0.norm(), 1.0, 1e-13);
  // Oracle: kron(B up, A, bus) with site 0 least significant.
  const Eigen::VectorXcd g = to_full_basis(s.ground.state).amplitudes;
  Eigen::Vector2cd a_state;
  a_state << angles.b(), angles.a();
  Eigen::Vector2cd b_up(0.0, 1.0);
  const Eigen::VectorXcd ref = Eigen::kroneckerProduct(b_up, Eigen::kroneckerProduct(a_state, g).eval()).eval();
  EXPECT_LT((s.psi0.amplitudes - ref).norm(), 1e-14);
}

TEST(Dynamics, InitialStateRejectsBadAngles) {
  const ModelSpec spec = make_uniform(Geometry::chain, 3, {1, 3}, 0.1);
  const auto g = ground_state(bus_spectrum(spec));
  EXPECT_THROW(prepare_initial_state({-0.1, 0.0}, spec, g), std::invalid_argument);
  EXPECT_THROW(prepare_initial_state({4.0, 0.0}, spec, g), std::invalid_argument);
}

TEST(Dynamics, SpectralMatchesMatrixExponential) {
  const ModelSpec spec = make_uniform(Geometry::chain, 3, {1, 3}, 0.3);
  const Scenario s = make_setup(spec, {0.7, 1.3});
  const oracle::Mat h = oracle::heisenberg(links_of(spec), 5);
  for (double t : {0.0, 0.9, 17.3, 250.0}) {
    const PureState psi = evolve_spectral(s.psi0, s.total, t);
    EXPECT_LT((psi.amplitudes - oracle::propagate(h, s.psi0.amplitudes, t)).norm(), 1e-11) << "t = " << t;
  }
}

TEST(Dynamics, KrylovAgreesWithSpectral) {
  const ModelSpec spec = make_uniform(Geometry::chain, 5, {1, 5}, 0.1);
  const Scenario s = make_setup(spec, {std::numbers::pi / 2, 0.0});
  const SparseOperator h = build_total_hamiltonian(spec, s.psi0.basis);
  for (double t : {0.5, 10.0, 300.0}) {
    const KrylovResult k = evolve_krylov(s.psi0, h, t);
    const PureState ref = evolve_spectral(s.psi0, s.total, t);
    EXPECT_TRUE(k.converged);
    EXPECT_LT((k.state.amplitudes - ref.amplitudes).norm(), 1e-10) << "t = " << t;
    EXPECT_LT(k.norm_drift, 1e-12);
  }
}

TEST(Dynamics, KrylovNegativeTimeAndZero) {
  const ModelSpec spec = make_uniform(Geometry::chain, 3, {1, 3}, 0.1);
  const Scenario s = make_setup(spec, {1.0, 0.0});
  const SparseOperator h = build_total_hamiltonian(spec, s.psi0.basis);
  EXPECT_EQ(evolve_krylov(s.psi0, h, 0.0).state.amplitudes, s.psi0.amplitudes);
  const auto back = evolve_krylov(s.psi0, h, -4.0);
  EXPECT_LT((back.state.amplitudes - evolve_spectral(s.psi0, s.total, -4.0).amplitudes).norm(), 1e-10);
}

TEST(Dynamics, ConservationOverLongTimes) {
  const ModelSpec spec = make_uniform(Geometry::chain, 5, {1, 5}, 0.1);
  const Scenario s = make_setup(spec, {2.0, 0.8});
  const SparseOperator h = build_total_hamiltonian(spec, s.psi0.basis);
  const double e0 = h.expectation(s.psi0.amplitudes);
  auto sz = [&](const Eigen::VectorXcd& v) {
    double m = 0.0;
    for (Eigen::Index c = 0; c < v.size(); ++c) m += std::norm(v[c]) * 0.5 * two_sz_of(static_cast<Config>(c), 7);
    return m;
  };
  const double sz0 = sz(s.psi0.amplitudes);
  const SpectralPropagator prop(s.total, s.psi0);
  for (double t = 0.0; t <= 1e4; t += 625.0) {
    const PureState psi = prop.at(t);
    EXPECT_LT(std::abs(psi.norm() - 1.0), 1e-11);
    EXPECT_LT(std::abs(h.expectation(psi.amplitudes) - e0), 1e-11);
    EXPECT_LT(std::abs(sz(psi.amplitudes) - sz0), 1e-11);
  }
}

TEST(Dynamics, CompositionAndReversal) {
  const ModelSpec spec = make_uniform(Geometry::ring, 4, {1, 3}, 0.1);
  const Scenario s = make_setup(spec, {0.3, 2.0});
  const double t1 = 37.5, t2 = 912.25;
  const PureState a = evolve_spectral(evolve_spectral(s.psi0, s.total, t1), s.total, t2);
  const PureState b = evolve_spectral(s.psi0, s.total, t1 + t2);
  EXPECT_LT((a.amplitudes - b.amplitudes).norm(), 1e-11);
  const PureState back = evolve_spectral(evolve_spectral(s.psi0, s.total, t2), s.total, -t2);
  EXPECT_LT((back.amplitudes - s.psi0.amplitudes).norm(), 1e-11);
}

TEST(Dynamics, TwoSpinSwap) {
  // J S1.S2 from |up, down>: the flip probability is sin^2(J t / 2).
  const double j = 0.8;
  const std::vector<Bond> bonds = {{0, 1, j}};
  const auto basis = build_basis(2);
  const EigenSystem eig = eigendecompose(heisenberg_operator(bonds, basis));
  PureState psi{basis, Eigen::VectorXcd::Zero(4)};
  psi.amplitudes[0b01] = 1.0;
  for (double t : {0.0, 0.4, 1.9, 7.7}) {
    const PureState out = evolve_spectral(psi, eig, t);
    EXPECT_NEAR(std::norm(out.amplitudes[0b10]), std::pow(std::sin(0.5 * j * t), 2), 1e-14);
  }
}

TEST(Dynamics, DecoupledQubitsStayPut) {
  const ModelSpec spec = make_uniform(Geometry::chain, 4, {1, 4}, 0.0);
  const Scenario s = make_setup(spec, {1.2, 0.5});
  const PureState psi = evolve_spectral(s.psi0, s.total, 123.0);
  const Eigen::Matrix2cd ra = single_site_density(s.psi0.amplitudes, 4);
  const Eigen::Matrix2cd rb = single_site_density(psi.amplitudes, 4);
  EXPECT_LT((ra - rb).norm(), 1e-12);
}

TEST(Dynamics, PropagatorRejectsSectorStates) {
  const ModelSpec spec = make_uniform(Geometry::chain, 3, {1, 3}, 0.1);
  const auto total = total_spectrum(spec);
  const auto b = build_basis(5, SzSector{1});
  PureState sector_state{b, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b->dim()))};
  EXPECT_THROW(SpectralPropagator(total, sector_state), std::invalid_argument);
}

}  // namespace
}  // namespace spinbus
