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

// Protocol initial state and unitary propagation, exp(-i H t) with hbar = 1.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spinbus/model.hpp"
#include "spinbus/spectrum.hpp"
#include "spinbus/spin_basis.hpp"

namespace spinbus {

/// Qubit A starts in a|0> + b|1> with a = cos(theta/2), b = sin(theta/2) e^{i phi}.
struct BlochAngles {
  double theta = 0.0;
  double phi = 0.0;

  cplx a() const { return {std::cos(0.5 * theta), 0.0}; }
  cplx b() const { return std::polar(std::sin(0.5 * theta), phi); }

  void validate() const {
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw std::invalid_argument("theta must lie in [0, pi]");
    if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
  }
};

/// (a|0_A> + b|1_A>) (x) |0_C> (x) |0_B> on the full (N + 2)-site register.
/// Logical |0> is spin up for the qubits; |0_C> is the bus ground state.
inline PureState prepare_initial_state(const BlochAngles& angles, const ModelSpec& spec, const GroundStateInfo& bus) {
  angles.validate();
  spec.validate();
  const SiteLayout lay = spec.layout();
  if (bus.state.basis->n_sites() != spec.n_bus) throw std::invalid_argument("ground state is not a bus state");
  auto full = build_basis(lay.n_sites());
  PureState psi{full, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(full->dim()))};
  const Config up_a = Config{1} << lay.qubit_a();
  const Config up_b = Config{1} << lay.qubit_b();
  const cplx a = angles.a();
  const cplx b = angles.b();
  const SpinBasis& bb = *bus.state.basis;
  for (std::size_t k = 0; k < bb.dim(); ++k) {
    const cplx g = bus.state.amplitudes[static_cast<Eigen::Index>(k)];
    const Config c = bb.state(k);
    psi.amplitudes[static_cast<Eigen::Index>(c | up_a | up_b)] += a * g;
    psi.amplitudes[static_cast<Eigen::Index>(c | up_b)] += b * g;
  }
  return psi;
}

/// psi(t) = sum_k exp(-i e_k t) v_k <v_k|psi> for a state on the same basis.
inline PureState evolve_spectral(const PureState& state, const EigenSystem& eig, double t) {
  if (!(*state.basis == *eig.basis)) throw std::invalid_argument("state and eigensystem live on different bases");
  const Eigen::VectorXcd c = eig.eigenvectors.transpose().cast<cplx>() * state.amplitudes;
  Eigen::VectorXcd phased(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) phased[k] = c[k] * std::polar(1.0, -eig.eigenvalues[k] * t);
  return PureState{state.basis, eig.eigenvectors.cast<cplx>() * phased};
}

/// Spectral propagator for a full-basis state, evolving each Sz block
/// independently. Sector projections are computed once at construction.
class SpectralPropagator {
 public:
  SpectralPropagator(const BlockSpectrum& spectrum, const PureState& psi0) {
    if (!psi0.basis->is_full() || psi0.basis->n_sites() != spectrum.n_sites) {
      throw std::invalid_argument("propagator needs a full-basis state on the spectrum's register");
    }
    basis_ = psi0.basis;
    for (const auto& blk : spectrum.blocks) {
      Eigen::VectorXcd local(static_cast<Eigen::Index>(blk.dim()));
      for (std::size_t k = 0; k < blk.dim(); ++k) {
        local[static_cast<Eigen::Index>(k)] = psi0.amplitudes[static_cast<Eigen::Index>(blk.basis->state(k))];
      }
      if (local.squaredNorm() == 0.0) continue;
      Part p;
      p.configs.assign(blk.basis->states().begin(), blk.basis->states().end());
      p.energies = blk.eigenvalues;
      p.vectors = blk.eigenvectors;
      p.coeffs = blk.eigenvectors.transpose().cast<cplx>() * local;
      parts_.push_back(std::move(p));
    }
  }

  const BasisPtr& basis() const { return basis_; }

  void amplitudes_at(double t, Eigen::VectorXcd& out) const {
    out.setZero(static_cast<Eigen::Index>(basis_->dim()));
    for (const Part& p : parts_) {
      const auto d = p.coeffs.size();
      Eigen::VectorXd re(d);
      Eigen::VectorXd im(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        const cplx z = p.coeffs[k] * std::polar(1.0, -p.energies[k] * t);
        re[k] = z.real();
        im[k] = z.imag();
      }
      const Eigen::VectorXd vr = p.vectors * re;
      const Eigen::VectorXd vi = p.vectors * im;
      for (std::size_t k = 0; k < p.configs.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out[static_cast<Eigen::Index>(p.configs[k])] = cplx(vr[i], vi[i]);
      }
    }
  }

  PureState at(double t) const {
    PureState s{basis_, {}};
    amplitudes_at(t, s.amplitudes);
    return s;
  }

  /// Spread of the eigen-energies carrying weight above `cutoff`.
  double occupied_energy_range(double cutoff = 1e-14) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Part& p : parts_) {
      for (Eigen::Index k = 0; k < p.coeffs.size(); ++k) {
        if (std::norm(p.coeffs[k]) <= cutoff) continue;
        lo = std::min(lo, p.energies[k]);
        hi = std::max(hi, p.energies[k]);
      }
    }
    return hi > lo ? hi - lo : 0.0;
  }

  /// Eigen-components as (energy, full-register vector, coefficient).
  template <typename Fn>
  void for_each_component(Fn&& fn, double cutoff = 0.0) const {
    for (const Part& p : parts_) {
      for (Eigen::Index k = 0; k < p.coeffs.size(); ++k) {
        if (std::norm(p.coeffs[k]) <= cutoff) continue;
        fn(p.energies[k], p.configs, p.vectors.col(k), p.coeffs[k]);
      }
    }
  }

 private:
  struct Part {
    std::vector<Config> configs;
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
    Eigen::VectorXcd coeffs;
  };
  BasisPtr basis_;
  std::vector<Part> parts_;
};

inline PureState evolve_spectral(const PureState& state, const BlockSpectrum& spectrum, double t) {
  return SpectralPropagator(spectrum, state).at(t);
}

struct KrylovOptions {
  int max_dim = 30;
  double tol = 1e-12;
  /// Smallest admissible substep as a fraction of |t|.
  double min_step_fraction = 1e-8;
};

struct KrylovResult {
  PureState state;
  double error_estimate = 0.0;
  int substeps = 0;
  bool converged = true;
  double norm_drift = 0.0;
};

/// Lanczos approximation of exp(-i H t) psi with adaptive substeps. The
/// per-step error is estimated by beta_m |[exp(-i h T)]_{m,1}|.
inline KrylovResult evolve_krylov(const PureState& state, const SparseOperator& h, double t, KrylovOptions opts = {}) {
  if (!(*state.basis == *h.basis)) throw std::invalid_argument("state and operator live on different bases");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("Krylov tolerance must be positive");
  if (opts.max_dim < 2) throw std::invalid_argument("Krylov dimension must be >= 2");
  KrylovResult res{state, 0.0, 0, true, 0.0};
  if (t == 0.0) return res;

  const auto n = static_cast<Eigen::Index>(h.dim());
  const double total = std::abs(t);
  const double sign = t < 0.0 ? -1.0 : 1.0;
  Eigen::VectorXcd v = state.amplitudes;
  const double norm0 = v.norm();
  double done = 0.0;
  double step = total;

  while (done < total) {
    step = std::min(step, total - done);
    const double beta0 = v.norm();
    const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.max_dim, n));
    std::vector<Eigen::VectorXcd> q;
    q.reserve(static_cast<std::size_t>(m_max) + 1);
    q.push_back(v / beta0);
    std::vector<double> alpha;
    std::vector<double> beta;
    bool breakdown = false;
    for (int j = 0; j < m_max; ++j) {
      Eigen::VectorXcd w = h.matrix * q.back();
      alpha.push_back(q.back().dot(w).real());
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& qi : q) w -= qi.dot(w) * qi;
      }
      const double b = w.norm();
      beta.push_back(b);
      if (b < 1e-13 * std::max(1.0, std::abs(alpha.back()))) {
        breakdown = true;
        break;
      }
      if (j + 1 < m_max) q.push_back(w / b);
    }
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1)) : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& u = tri.eigenvectors();
    const Eigen::VectorXd& theta = tri.eigenvalues();
    const double tail = breakdown ? 0.0 : beta.back();

    for (;;) {
      Eigen::VectorXcd y(m);
      for (Eigen::Index k = 0; k < m; ++k) y[k] = u(0, k) * std::polar(1.0, -sign * step * theta[k]);
      const Eigen::VectorXcd coeff = u.cast<cplx>() * y;
      const double err = beta0 * tail * std::abs(coeff[m - 1]);
      if (err <= opts.tol * step / total || step <= opts.min_step_fraction * total) {
        if (err > opts.tol * step / total) res.converged = false;
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n);
        for (Eigen::Index k = 0; k < m; ++k) next += coeff[k] * q[static_cast<std::size_t>(k)];
        v = beta0 * next;
        res.error_estimate += err;
        ++res.substeps;
        done += step;
        if (err < 0.1 * opts.tol * step / total) step *= 2.0;
        break;
      }
      step *= 0.5;
    }
  }
  res.state.amplitudes = v;
  res.norm_drift = std::abs(v.norm() - norm0);
  return res;
}

}  // namespace spinbus
