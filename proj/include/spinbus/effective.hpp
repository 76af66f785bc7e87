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

#pragma once

// Low-energy effective models of the spin bus.
//
// Odd bus: the ground doublet acts as a central spin C coupled to each qubit
// with J*_alpha = J_alpha <0_C|sigma_z(site)|0_C> (first order).
//
// Even bus: the singlet ground state mediates a direct qubit exchange
// J* S_A.S_B at second order,
//   J* = (J_A J_B / 2) sum_{n != 0} <0|sigma_i^mu|n><n|sigma_j^mu|0> / (e_0 - e_n)
// for a single component mu. The three components are equal for a singlet;
// the mu-summed value (three times larger) is kept as a diagnostic.

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinbus/dynamics.hpp"
#include "spinbus/model.hpp"
#include "spinbus/observables.hpp"
#include "spinbus/spectrum.hpp"

namespace spinbus {

enum class SignClass { ferromagnetic, antiferromagnetic, zero };

inline SignClass sign_class(double j, double eps = 1e-14) {
  if (j > eps) return SignClass::antiferromagnetic;
  if (j < -eps) return SignClass::ferromagnetic;
  return SignClass::zero;
}

inline std::string to_string(SignClass s) {
  switch (s) {
    case SignClass::ferromagnetic: return "FM";
    case SignClass::antiferromagnetic: return "AFM";
    case SignClass::zero: return "zero";
  }
  return "?";
}

// Odd bus ------------------------------------------------------------------

struct EffectiveCouplingOdd {
  double j_star_a = 0.0;
  double j_star_b = 0.0;
  double moment_i = 0.0;
  double moment_j = 0.0;
  int attach_i = 0;
  int attach_j = 0;
  bool same_parity = true;

  SignClass sign_a() const { return sign_class(j_star_a); }
  SignClass sign_b() const { return sign_class(j_star_b); }
};

inline EffectiveCouplingOdd effective_coupling_odd(const ModelSpec& spec, const GroundStateInfo& bus) {
  spec.validate();
  if (!spec.odd_bus()) throw std::invalid_argument("central-spin model needs an odd bus");
  bus.require_regular();
  EffectiveCouplingOdd c;
  c.attach_i = spec.attach_i;
  c.attach_j = spec.attach_j;
  c.moment_i = local_moment(bus.state, spec.attach_i);
  c.moment_j = local_moment(bus.state, spec.attach_j);
  c.j_star_a = spec.coupling_a * c.moment_i;
  c.j_star_b = spec.coupling_b * c.moment_j;
  c.same_parity = (spec.attach_i % 2) == (spec.attach_j % 2);
  return c;
}

/// A few-spin model with its own register and an initial-state recipe:
/// qubit A in a|0> + b|1>, every other site up.
struct EffectiveModel {
  int qubit_a = 0;
  int qubit_b = 0;
  SparseOperator hamiltonian;
};

/// J*_A S_A.S_C + J*_B S_B.S_C on three sites (A = 0, C = 1, B = 2).
inline EffectiveModel effective_hamiltonian_odd(const EffectiveCouplingOdd& c) {
  const std::vector<Bond> bonds = {{0, 1, c.j_star_a}, {2, 1, c.j_star_b}};
  return {0, 2, heisenberg_operator(bonds, build_basis(3))};
}

/// F_B(t) of the equal-coupling central-spin model, tau = J* t / 4.
inline double analytic_fidelity_odd(double theta, double j_star, double t) {
  const double tau = 0.25 * j_star * t;
  const double f = (5.0 + 4.0 * std::cos(6.0 * tau) + 3.0 * std::cos(4.0 * tau) - 12.0 * std::cos(2.0 * tau)) / 18.0;
  const double g = (7.0 + 2.0 * std::cos(6.0 * tau) - 3.0 * std::cos(4.0 * tau) - 6.0 * std::cos(2.0 * tau)) / 18.0;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  return 0.5 * (1.0 + ct) + 0.25 * st * st * f + 0.25 * (1.0 - ct) * (1.0 - ct) * g;
}

// Even bus -----------------------------------------------------------------

struct EffectiveCouplingEven {
  struct Term {
    int two_sz = 0;
    std::size_t index = 0;
    double energy = 0.0;
    double contribution = 0.0;  // (J_A J_B / 2) sum_mu, this excited state
  };

  double j_star = 0.0;       // exchange constant of S_A.S_B
  double mu_summed = 0.0;    // (J_A J_B / 2) sum_mu S_mu
  double z_shortcut = 0.0;   // (J_A J_B / 2) 3 S_z
  std::array<double, 3> mu_sums{};  // bare spectral sums S_x, S_y, S_z
  double e0 = 0.0;
  int attach_i = 0;
  int attach_j = 0;
  std::vector<Term> breakdown;

  SignClass sign() const { return sign_class(j_star); }
};

namespace detail {

/// sigma^mu(site) applied to a full-basis bus vector; mu = 0, 1, 2 for x, y, z.
inline Eigen::VectorXcd apply_pauli(const Eigen::VectorXcd& v, int site, int mu) {
  const Config bit = Config{1} << site;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Config c = 0; c < static_cast<Config>(v.size()); ++c) {
    const cplx a = v[static_cast<Eigen::Index>(c)];
    if (a == cplx{}) continue;
    const bool up = (c & bit) != 0;
    switch (mu) {
      case 0: out[static_cast<Eigen::Index>(c ^ bit)] += a; break;
      case 1: out[static_cast<Eigen::Index>(c ^ bit)] += up ? cplx(0.0, 1.0) * a : cplx(0.0, -1.0) * a; break;
      default: out[static_cast<Eigen::Index>(c)] += up ? a : -a; break;
    }
  }
  return out;
}

}  // namespace detail

/// Second-order exchange between qubits on bus sites i and j of an even bus.
/// The spectral sum runs over the isolated-bus spectrum of all Sz sectors,
/// excluding levels within tol_deg of e_0.
inline EffectiveCouplingEven effective_coupling_even(const ModelSpec& spec, const BlockSpectrum& bus,
                                                     const GroundStateInfo& ground,
                                                     double tol_deg = kDegeneracyTolerance) {
  spec.validate();
  if (spec.odd_bus()) throw std::invalid_argument("second-order exchange model needs an even bus");
  if (bus.n_sites != spec.n_bus) throw std::invalid_argument("bus spectrum does not match the model");
  ground.require_regular();

  EffectiveCouplingEven out;
  out.e0 = ground.energy;
  out.attach_i = spec.attach_i;
  out.attach_j = spec.attach_j;
  const double prefactor = 0.5 * spec.coupling_a * spec.coupling_b;
  const Eigen::VectorXcd g = to_full_basis(ground.state).amplitudes;

  std::vector<std::vector<double>> per_state(bus.blocks.size());
  for (std::size_t b = 0; b < bus.blocks.size(); ++b) per_state[b].assign(bus.blocks[b].dim(), 0.0);

  for (int mu = 0; mu < 3; ++mu) {
    const Eigen::VectorXcd left = detail::apply_pauli(g, spec.attach_i, mu);
    const Eigen::VectorXcd right = detail::apply_pauli(g, spec.attach_j, mu);
    double sum = 0.0;
    for (std::size_t b = 0; b < bus.blocks.size(); ++b) {
      const EigenSystem& blk = bus.blocks[b];
      Eigen::VectorXcd l(static_cast<Eigen::Index>(blk.dim()));
      Eigen::VectorXcd r(static_cast<Eigen::Index>(blk.dim()));
      for (std::size_t k = 0; k < blk.dim(); ++k) {
        const auto c = static_cast<Eigen::Index>(blk.basis->state(k));
        l[static_cast<Eigen::Index>(k)] = left[c];
        r[static_cast<Eigen::Index>(k)] = right[c];
      }
      if (l.squaredNorm() == 0.0 && r.squaredNorm() == 0.0) continue;
      // <n|sigma|0> for every eigenvector n of this block.
      const Eigen::VectorXcd ln = blk.eigenvectors.transpose().cast<cplx>() * l;
      const Eigen::VectorXcd rn = blk.eigenvectors.transpose().cast<cplx>() * r;
      for (Eigen::Index n = 0; n < ln.size(); ++n) {
        const double en = blk.eigenvalues[n];
        if (std::abs(en - out.e0) <= tol_deg) continue;
        const double term = (std::conj(ln[n]) * rn[n]).real() / (out.e0 - en);
        sum += term;
        per_state[b][static_cast<std::size_t>(n)] += prefactor * term;
      }
    }
    out.mu_sums[static_cast<std::size_t>(mu)] = sum;
  }

  out.mu_summed = prefactor * (out.mu_sums[0] + out.mu_sums[1] + out.mu_sums[2]);
  out.z_shortcut = prefactor * 3.0 * out.mu_sums[2];
  out.j_star = out.mu_summed / 3.0;
  for (std::size_t b = 0; b < bus.blocks.size(); ++b) {
    for (std::size_t n = 0; n < per_state[b].size(); ++n) {
      if (per_state[b][n] != 0.0) {
        out.breakdown.push_back({bus.blocks[b].basis->sector()->two_sz, n,
                                 bus.blocks[b].eigenvalues[static_cast<Eigen::Index>(n)], per_state[b][n]});
      }
    }
  }
  return out;
}

/// J* S_A.S_B on two sites (A = 0, B = 1). The constant e_0 term is a global
/// phase and is left out.
inline EffectiveModel effective_hamiltonian_even(const EffectiveCouplingEven& c) {
  const std::vector<Bond> bonds = {{0, 1, c.j_star}};
  return {0, 1, heisenberg_operator(bonds, build_basis(2))};
}

inline EffectiveModel effective_hamiltonian_even(double j_star) {
  EffectiveCouplingEven c;
  c.j_star = j_star;
  return effective_hamiltonian_even(c);
}

/// 1 - (1/2) sin^2(theta) cos^2(J* t / 2); exact for equatorial initial states.
inline double analytic_fidelity_even(double theta, double j_star, double t) {
  const double s = std::sin(theta);
  const double c = std::cos(0.5 * j_star * t);
  return 1.0 - 0.5 * s * s * c * c;
}

/// Exact F_B(t) of J* S_A.S_B from (a|0> + b|1>)|0> for any theta:
/// p^2 + pq cos^2 + q^2 sin^2 + 2 pq sin^2 with p = |a|^2, q = |b|^2 and
/// angle J* t / 2. Equals analytic_fidelity_even when cos(theta) = 0.
inline double swap_fidelity_even(double theta, double j_star, double t) {
  const double p = std::pow(std::cos(0.5 * theta), 2);
  const double q = 1.0 - p;
  const double c2 = std::pow(std::cos(0.5 * j_star * t), 2);
  const double s2 = 1.0 - c2;
  return p * p + p * q * c2 + q * q * s2 + 2.0 * p * q * s2;
}

/// Propagates the few-spin model exactly and returns qubit B's state.
inline DensityMatrix evolve_effective(const EffectiveModel& model, const BlochAngles& angles, double t) {
  angles.validate();
  const BasisPtr& basis = model.hamiltonian.basis;
  const int n = basis->n_sites();
  const Config all_up = (Config{1} << n) - 1;
  const Config a_bit = Config{1} << model.qubit_a;
  PureState psi{basis, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dim()))};
  psi.amplitudes[static_cast<Eigen::Index>(all_up)] = angles.a();
  psi.amplitudes[static_cast<Eigen::Index>(all_up & ~a_bit)] = angles.b();
  const EigenSystem eig = eigendecompose(model.hamiltonian);
  const PureState out = evolve_spectral(psi, eig, t);
  return partial_trace(out, {model.qubit_b});
}

/// CSV rows "i,j,J_star,sign_class" (1-based sites).
inline std::string coupling_table_csv(const std::vector<EffectiveCouplingEven>& rows) {
  std::ostringstream os;
  os << std::setprecision(17) << "i,j,J_star,sign_class\n";
  for (const auto& r : rows) {
    os << r.attach_i + 1 << ',' << r.attach_j + 1 << ',' << r.j_star << ',' << to_string(r.sign()) << '\n';
  }
  return os.str();
}

}  // namespace spinbus
