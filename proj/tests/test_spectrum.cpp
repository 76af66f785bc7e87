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
#include "spinbus/spectrum.hpp"

namespace spinbus {
namespace {

TEST(Spectrum, ThreeSiteChainLevels) {
  // Doublet at -1 (x2), doublet at 0 (x2), quartet at 1/2 (x4).
  const auto e = bus_spectrum(make_uniform(Geometry::chain, 3, {1, 3}, 0.0)).all_eigenvalues();
  const std::vector<double> expected = {-1, -1, 0, 0, 0.5, 0.5, 0.5, 0.5};
  ASSERT_EQ(e.size(), expected.size());
  for (std::size_t k = 0; k < e.size(); ++k) EXPECT_NEAR(e[k], expected[k], 1e-13);
}

TEST(Spectrum, TwoSiteSingletTriplet) {
  const auto g = ground_state(bus_spectrum(make_uniform(Geometry::chain, 2, {1, 2}, 0.0)));
  EXPECT_NEAR(g.energy, -0.75, 1e-14);
  EXPECT_EQ(g.degeneracy, 1);
  EXPECT_FALSE(g.anomaly);
}

TEST(Spectrum, BlocksMatchOracleSpectrum) {
  for (auto [geom, n] : {std::pair{Geometry::chain, 5}, std::pair{Geometry::ring, 6}, std::pair{Geometry::chain, 7}}) {
    const ModelSpec spec = make_uniform(geom, n, {1, 2}, 0.0);
    const auto e = bus_spectrum(spec).all_eigenvalues();
    const auto links = geom == Geometry::ring ? oracle::ring_links(n) : oracle::chain_links(n);
    const Eigen::VectorXd ref = oracle::spectrum(oracle::heisenberg(links, n));
    ASSERT_EQ(static_cast<Eigen::Index>(e.size()), ref.size());
    for (std::size_t k = 0; k < e.size(); ++k) EXPECT_NEAR(e[k], ref[static_cast<Eigen::Index>(k)], 1e-12);
  }
}

TEST(Spectrum, KnownGroundEnergies) {
  const std::vector<double> chain = {-0.75, -1.0, -1.6160254037844386, -1.9278862533326};
  for (int n = 2; n <= 5; ++n) {
    const auto spec = make_uniform(Geometry::chain, n, {1, n}, 0.0);
    EXPECT_NEAR(bus_spectrum(spec).min_energy(), chain[static_cast<std::size_t>(n - 2)], 1e-9) << n;
  }
  // Four-site ring: E0 = -2 J0.
  EXPECT_NEAR(bus_spectrum(make_uniform(Geometry::ring, 4, {1, 3}, 0.0)).min_energy(), -2.0, 1e-13);
}

TEST(Spectrum, ResidualAndOrthonormality) {
  const ModelSpec spec = make_uniform(Geometry::chain, 6, {1, 6}, 0.1);
  for (const auto& b : all_sectors(8)) {
    const SparseOperator h = build_total_hamiltonian(spec, b);
    const EigenSystem eig = eigendecompose(h);
    const double hnorm = std::max(1.0, h.dense().norm());
    EXPECT_LT(max_residual(h, eig), 1e-10 * hnorm);
    const Eigen::MatrixXd gram = eig.eigenvectors.transpose() * eig.eigenvectors;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(std::is_sorted(eig.eigenvalues.begin(), eig.eigenvalues.end()));
  }
}

TEST(Spectrum, DegeneracyPatternUniformBuses) {
  for (int n = 2; n <= 10; ++n) {
    const auto g = ground_state(bus_spectrum(make_uniform(Geometry::chain, n, {1, n}, 0.0)));
    EXPECT_EQ(g.degeneracy, n % 2 == 1 ? 2 : 1) << "chain " << n;
    EXPECT_FALSE(g.anomaly) << g.note;
  }
  for (int n : {4, 6, 8, 10}) {
    const auto g = ground_state(bus_spectrum(make_uniform(Geometry::ring, n, {1, n / 2 + 1}, 0.0)));
    EXPECT_EQ(g.degeneracy, 1) << "ring " << n;
  }
}

TEST(Spectrum, OddGroundDoubletMembers) {
  const auto bus = bus_spectrum(make_uniform(Geometry::chain, 5, {1, 5}, 0.0));
  const auto g = ground_state(bus);
  ASSERT_TRUE(g.partner.has_value());
  EXPECT_EQ(g.state.basis->sector()->two_sz, 1);
  EXPECT_EQ(g.partner->basis->sector()->two_sz, -1);
  EXPECT_NEAR(g.partner->norm(), 1.0, 1e-13);
  // The partner is an eigenvector at the same energy.
  const SparseOperator h = heisenberg_operator(bus_bonds(make_uniform(Geometry::chain, 5, {1, 5}, 0.0)),
                                               g.partner->basis);
  EXPECT_LT((h.apply(g.partner->amplitudes) - g.energy * g.partner->amplitudes).norm(), 1e-12);
  // Gauge: the largest amplitude is real and positive.
  Eigen::Index arg = 0;
  g.state.amplitudes.cwiseAbs().maxCoeff(&arg);
  EXPECT_GT(g.state.amplitudes[arg].real(), 0.0);
  EXPECT_EQ(g.state.amplitudes[arg].imag(), 0.0);
}

TEST(Spectrum, NearlyCutBusIsFlagged) {
  // A vanishing end bond leaves a free spin next to a 3-site doublet: four
  // levels inside tol_deg where a unique singlet is expected.
  ModelSpec spec = make_uniform(Geometry::chain, 4, {1, 4}, 0.0);
  spec.bus_couplings = {1e-12, 1.0, 1.0, 1.0};
  const auto g = ground_state(bus_spectrum(spec));
  EXPECT_TRUE(g.anomaly);
  EXPECT_EQ(g.degeneracy, 4);
  EXPECT_THROW(g.require_regular(), std::runtime_error);
}

TEST(Spectrum, ReflectionAndRotationInvariance) {
  ModelSpec chain = make_uniform(Geometry::chain, 6, {1, 6}, 0.0);
  chain.bus_couplings = {1.0, 0.8, 1.3, 0.9, 1.1, 1.0};
  ModelSpec mirrored = chain;
  mirrored.bus_couplings = {1.1, 0.9, 1.3, 0.8, 1.0, 1.0};
  const auto a = bus_spectrum(chain).all_eigenvalues();
  const auto b = bus_spectrum(mirrored).all_eigenvalues();
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);

  ModelSpec ring = make_uniform(Geometry::ring, 6, {1, 4}, 0.0);
  ring.bus_couplings = {1.0, 0.8, 1.3, 0.9, 1.1, 1.2};
  ModelSpec shifted = ring;
  std::rotate(shifted.bus_couplings.begin(), shifted.bus_couplings.begin() + 2, shifted.bus_couplings.end());
  const auto c = bus_spectrum(ring).all_eigenvalues();
  const auto d = bus_spectrum(shifted).all_eigenvalues();
  for (std::size_t k = 0; k < c.size(); ++k) EXPECT_NEAR(c[k], d[k], 1e-12);
}

TEST(Spectrum, LanczosAgreesWithDense) {
  const ModelSpec spec = make_uniform(Geometry::chain, 10, {1, 10}, 0.0);
  const auto basis = build_basis(10, SzSector{0});
  const SparseOperator h = build_bus_hamiltonian(spec, basis);
  EXPECT_NEAR(lanczos_ground_energy(h), eigendecompose(h).eigenvalues[0], 1e-10);
}

TEST(Spectrum, DenseLimitIsEnforced) {
  const ModelSpec spec = make_uniform(Geometry::chain, 15, {1, 15}, 0.0);
  EXPECT_THROW(eigendecompose(build_bus_hamiltonian(spec, build_basis(15))), std::invalid_argument);
}

TEST(Spectrum, CsvHasOneRowPerLevel) {
  const auto csv = spectrum_csv(bus_spectrum(make_uniform(Geometry::chain, 4, {1, 4}, 0.0)));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
  EXPECT_EQ(csv.rfind("sector_Sz,index,energy\n", 0), 0u);
}

}  // namespace
}  // namespace spinbus
