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

// Transfer fidelity F_B(t) = <phi_T| rho_B(t) |phi_T>, fidelity traces and
// extraction of optimal transfer times.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include "spinbus/dynamics.hpp"
#include "spinbus/model.hpp"
#include "spinbus/parallel.hpp"
#include "spinbus/spectrum.hpp"

namespace spinbus {

/// Target a|0> + b|1> in the bit basis of one site (index 1 = up = |0>).
inline Eigen::Vector2cd target_vector(const BlochAngles& angles) {
  Eigen::Vector2cd v;
  v[1] = angles.a();
  v[0] = angles.b();
  return v;
}

inline double fidelity_unchecked(const Eigen::Matrix2cd& rho, const BlochAngles& angles) {
  const Eigen::Vector2cd phi = target_vector(angles);
  return phi.dot(rho * phi).real();
}

/// Rejects matrices that are not a single-site density matrix within 1e-8.
inline double fidelity(const DensityMatrix& rho_b, const BlochAngles& angles) {
  if (rho_b.rho.rows() != 2 || rho_b.rho.cols() != 2) throw std::invalid_argument("fidelity needs a one-site density matrix");
  const Eigen::Matrix2cd rho = rho_b.rho;
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > kNormTolerance) throw std::invalid_argument("density matrix trace is not 1");
  if ((rho - rho.adjoint()).norm() > kNormTolerance) throw std::invalid_argument("density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
  if (es.eigenvalues().minCoeff() < -kNormTolerance) throw std::invalid_argument("density matrix is not positive");
  return fidelity_unchecked(rho, angles);
}

/// Everything needed to evaluate F_B(t) for one model and initial state.
class TransferDynamics {
 public:
  TransferDynamics(const ModelSpec& spec, const BlochAngles& angles, const GroundStateInfo& bus_ground,
                   const BlockSpectrum& total)
      : spec_(spec),
        angles_(angles),
        psi0_(prepare_initial_state(angles, spec, bus_ground)),
        propagator_(total, psi0_) {}

  const ModelSpec& spec() const { return spec_; }
  const BlochAngles& angles() const { return angles_; }
  const PureState& initial_state() const { return psi0_; }
  const SpectralPropagator& propagator() const { return propagator_; }

  Eigen::Matrix2cd rho_b(double t) const {
    Eigen::VectorXcd amps;
    propagator_.amplitudes_at(t, amps);
    return single_site_density(amps, spec_.layout().qubit_b());
  }

  double fidelity(double t) const { return fidelity_unchecked(rho_b(t), angles_); }
  double operator()(double t) const { return fidelity(t); }

  /// Nyquist-safe sampling step pi / (8 E_range) of the occupied spectrum.
  double suggested_dt() const {
    const double range = propagator_.occupied_energy_range();
    return range > 0.0 ? std::numbers::pi / (8.0 * range) : 1.0;
  }

 private:
  ModelSpec spec_;
  BlochAngles angles_;
  PureState psi0_;
  SpectralPropagator propagator_;
};

/// Gap between the bus ground level (degenerate members included) and the
/// next level of the isolated bus.
inline double bus_gap(const BlockSpectrum& bus, double tol_deg = kDegeneracyTolerance) {
  const auto all = bus.all_eigenvalues();
  for (double e : all) {
    if (e - all.front() > tol_deg) return e - all.front();
  }
  return 0.0;
}

/// F_B(t) written as sum_kl conj(x_k) M_kl x_l, x_k = c_k exp(-i E_k t), with
/// M_kl = <v_k| 1 (x) |phi_T><phi_T|_B |v_l>. With a finite cutoff only pairs
/// with |E_k - E_l| < cutoff are kept; this drops the fast bus-frequency
/// ripple and leaves the slow qubit-exchange dynamics.
class SecularFidelity {
 public:
  SecularFidelity(const TransferDynamics& dyn, double cutoff) : cutoff_(cutoff) {
    const auto& basis = *dyn.propagator().basis();
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    std::vector<Eigen::VectorXd> vecs;
    std::vector<double> energies;
    std::vector<cplx> coeffs;
    dyn.propagator().for_each_component(
        [&](double e, const std::vector<Config>& configs, const auto& col, cplx c) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
          for (std::size_t k = 0; k < configs.size(); ++k) v[static_cast<Eigen::Index>(configs[k])] = col[static_cast<Eigen::Index>(k)];
          vecs.push_back(std::move(v));
          energies.push_back(e);
          coeffs.push_back(c);
        },
        1e-30);
    const auto kdim = static_cast<Eigen::Index>(vecs.size());
    energies_ = Eigen::Map<Eigen::VectorXd>(energies.data(), kdim);
    coeffs_ = Eigen::Map<Eigen::VectorXcd>(coeffs.data(), kdim);

    const Eigen::Vector2cd phi = target_vector(dyn.angles());
    const Config bit = Config{1} << dyn.spec().layout().qubit_b();
    Eigen::MatrixXd v(dim, kdim);
    for (Eigen::Index k = 0; k < kdim; ++k) v.col(k) = vecs[static_cast<std::size_t>(k)];
    // P v: on each (rest, B) pair, project the B two-vector onto phi.
    Eigen::MatrixXcd pv = Eigen::MatrixXcd::Zero(dim, kdim);
    for (Config c = 0; c < static_cast<Config>(dim); ++c) {
      if (c & bit) continue;
      const auto lo = static_cast<Eigen::Index>(c);
      const auto hi = static_cast<Eigen::Index>(c | bit);
      for (Eigen::Index k = 0; k < kdim; ++k) {
        const cplx s = std::conj(phi[0]) * v(lo, k) + std::conj(phi[1]) * v(hi, k);
        pv(lo, k) = phi[0] * s;
        pv(hi, k) = phi[1] * s;
      }
    }
    full_ = v.transpose().cast<cplx>() * pv;
    masked_ = full_;
    for (Eigen::Index k = 0; k < kdim; ++k) {
      for (Eigen::Index l = 0; l < kdim; ++l) {
        if (std::abs(energies_[k] - energies_[l]) >= cutoff_) masked_(k, l) = 0.0;
      }
    }
  }

  double cutoff() const { return cutoff_; }

  double operator()(double t) const { return evaluate(masked_, t); }
  /// Same expansion without the cutoff; equals the raw F_B(t).
  double unfiltered(double t) const { return evaluate(full_, t); }

  /// Sampling step resolving the kept frequencies.
  double suggested_dt() const { return std::numbers::pi / (8.0 * cutoff_); }

 private:
  double evaluate(const Eigen::MatrixXcd& m, double t) const {
    Eigen::VectorXcd x(coeffs_.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = coeffs_[k] * std::polar(1.0, -energies_[k] * t);
    return x.dot(m * x).real();
  }

  double cutoff_;
  Eigen::VectorXd energies_;
  Eigen::VectorXcd coeffs_;
  Eigen::MatrixXcd full_;
  Eigen::MatrixXcd masked_;
};

struct TimeGrid {
  double t_begin = 0.0;
  double t_end = 0.0;
  double dt = 0.1;

  /// t_begin, t_begin + dt, ... with t_end appended if not hit exactly.
  std::vector<double> times() const {
    if (!(dt > 0.0) || !(t_end >= t_begin)) throw std::invalid_argument("invalid time grid");
    const auto n = static_cast<std::size_t>(std::floor((t_end - t_begin) / dt + 1e-9));
    std::vector<double> out;
    out.reserve(n + 2);
    for (std::size_t k = 0; k <= n; ++k) out.push_back(t_begin + static_cast<double>(k) * dt);
    if (t_end - out.back() > 1e-9 * dt) out.push_back(t_end);
    return out;
  }
};

struct FidelityTrace {
  std::vector<double> times;
  std::vector<double> fidelities;
  nlohmann::json meta;

  std::size_t size() const { return times.size(); }
};

template <typename Eval>
FidelityTrace fidelity_trace(const Eval& eval, const TimeGrid& grid, int threads = 0) {
  FidelityTrace tr;
  tr.times = grid.times();
  tr.fidelities.resize(tr.times.size());
  constexpr std::size_t chunk = 1024;
  const std::size_t n_chunks = (tr.times.size() + chunk - 1) / chunk;
  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        const std::size_t end = std::min(tr.times.size(), (c + 1) * chunk);
        for (std::size_t k = c * chunk; k < end; ++k) tr.fidelities[k] = eval(tr.times[k]);
      },
      threads);
  tr.meta["t_begin"] = grid.t_begin;
  tr.meta["t_end"] = grid.t_end;
  tr.meta["dt"] = grid.dt;
  return tr;
}

enum class OptimumKind { first_maximum, global_in_window };

inline std::string to_string(OptimumKind k) { return k == OptimumKind::first_maximum ? "first-maximum" : "global-in-window"; }

struct TransferOptimum {
  bool found = false;
  double t_opt = 0.0;
  double f_opt = 0.0;
  OptimumKind kind = OptimumKind::first_maximum;
  double window_begin = 0.0;
  double window_end = 0.0;
};

namespace detail {

/// Maximise eval on [lo, hi] (relative time tolerance ~1e-9); never returns
/// less than the seed sample.
template <typename Eval>
std::pair<double, double> refine_maximum(const Eval& eval, double lo, double hi, double t_seed, double f_seed) {
  auto neg = [&](double t) { return -eval(t); };
  const auto [t, negf] = boost::math::tools::brent_find_minima(neg, lo, hi, 30);
  if (-negf >= f_seed) return {t, -negf};
  return {t_seed, f_seed};
}

inline std::pair<double, double> parabolic_peak(const FidelityTrace& tr, std::size_t k) {
  const double t0 = tr.times[k - 1], t1 = tr.times[k], t2 = tr.times[k + 1];
  const double f0 = tr.fidelities[k - 1], f1 = tr.fidelities[k], f2 = tr.fidelities[k + 1];
  const double denom = (t1 - t0) * (f1 - f2) - (t1 - t2) * (f1 - f0);
  if (denom == 0.0) return {t1, f1};
  const double num = (t1 - t0) * (t1 - t0) * (f1 - f2) - (t1 - t2) * (t1 - t2) * (f1 - f0);
  const double t = std::clamp(t1 - 0.5 * num / denom, t0, t2);
  return {t, f1};
}

inline TransferOptimum empty_optimum(const FidelityTrace& tr, OptimumKind kind) {
  TransferOptimum o;
  o.kind = kind;
  if (!tr.times.empty()) {
    o.window_begin = tr.times.front();
    o.window_end = tr.times.back();
  }
  return o;
}

}  // namespace detail

/// First interior sample with F[k-1] < F[k] >= F[k+1], refined by Brent on
/// the bracketing samples. A monotone or constant trace yields found = false.
template <typename Eval>
TransferOptimum find_first_maximum(const FidelityTrace& tr, const Eval& eval) {
  if (tr.size() < 3) throw std::invalid_argument("trace needs at least 3 samples");
  TransferOptimum o = detail::empty_optimum(tr, OptimumKind::first_maximum);
  for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
    if (tr.fidelities[k - 1] < tr.fidelities[k] && tr.fidelities[k] >= tr.fidelities[k + 1]) {
      const auto [t, f] = detail::refine_maximum(eval, tr.times[k - 1], tr.times[k + 1], tr.times[k], tr.fidelities[k]);
      o.found = true;
      o.t_opt = t;
      o.f_opt = f;
      return o;
    }
  }
  return o;
}

/// Sample-only variant: parabolic interpolation of the time, sampled value.
inline TransferOptimum find_first_maximum(const FidelityTrace& tr) {
  if (tr.size() < 3) throw std::invalid_argument("trace needs at least 3 samples");
  TransferOptimum o = detail::empty_optimum(tr, OptimumKind::first_maximum);
  for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
    if (tr.fidelities[k - 1] < tr.fidelities[k] && tr.fidelities[k] >= tr.fidelities[k + 1]) {
      std::tie(o.t_opt, o.f_opt) = detail::parabolic_peak(tr, k);
      o.found = true;
      return o;
    }
  }
  return o;
}

/// Global maximum over the sampled window, refined like the first maximum.
/// A maximum on the window edge or a flat trace yields found = false.
template <typename Eval>
TransferOptimum find_pst_optimum(const FidelityTrace& tr, const Eval& eval) {
  if (tr.size() < 3) throw std::invalid_argument("trace needs at least 3 samples");
  TransferOptimum o = detail::empty_optimum(tr, OptimumKind::global_in_window);
  const auto [lo_it, hi_it] = std::minmax_element(tr.fidelities.begin(), tr.fidelities.end());
  if (*hi_it - *lo_it <= 1e-14) return o;
  const auto k = static_cast<std::size_t>(hi_it - tr.fidelities.begin());
  if (k == 0 || k + 1 == tr.size()) return o;
  const auto [t, f] = detail::refine_maximum(eval, tr.times[k - 1], tr.times[k + 1], tr.times[k], tr.fidelities[k]);
  o.found = true;
  o.t_opt = t;
  o.f_opt = f;
  return o;
}

/// <0_C| sigma_z(site) |0_C> for a bus state given in any Sz basis.
inline double local_moment(const PureState& bus_ground, int site) {
  if (site < 0 || site >= bus_ground.basis->n_sites()) throw std::invalid_argument("site outside the bus");
  double m = 0.0;
  for (std::size_t k = 0; k < bus_ground.basis->dim(); ++k) {
    const double w = std::norm(bus_ground.amplitudes[static_cast<Eigen::Index>(k)]);
    m += ((bus_ground.basis->state(k) >> site) & 1u) ? w : -w;
  }
  return m;
}

inline std::string trace_csv(const FidelityTrace& tr) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,F_B\n";
  for (std::size_t k = 0; k < tr.size(); ++k) os << tr.times[k] << ',' << tr.fidelities[k] << '\n';
  return os.str();
}

inline nlohmann::json optimum_json(const TransferOptimum& o, const std::string& model_fingerprint) {
  nlohmann::json j;
  j["found"] = o.found;
  j["t_opt"] = o.t_opt;
  j["F_opt"] = o.f_opt;
  j["kind"] = to_string(o.kind);
  j["window"] = {o.window_begin, o.window_end};
  j["model_fingerprint"] = model_fingerprint;
  return j;
}

}  // namespace spinbus
