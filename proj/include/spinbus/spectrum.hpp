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

// Dense eigendecomposition per Sz block, degeneracy grouping and ground-state
// selection for buses and full registers.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinbus/model.hpp"
#include "spinbus/parallel.hpp"
#include "spinbus/spin_basis.hpp"

namespace spinbus {

/// Absolute energy window (units of J0) inside which levels count as degenerate.
inline constexpr double kDegeneracyTolerance = 1e-9;
inline constexpr std::size_t kMaxDenseDim = 16384;

struct EigenSystem {
  BasisPtr basis;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  std::vector<std::vector<std::size_t>> degeneracy_groups;

  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

inline std::vector<std::vector<std::size_t>> group_degenerate(const Eigen::VectorXd& sorted, double tol) {
  std::vector<std::vector<std::size_t>> groups;
  for (Eigen::Index k = 0; k < sorted.size(); ++k) {
    if (groups.empty() || sorted[k] - sorted[static_cast<Eigen::Index>(groups.back().front())] > tol) {
      groups.emplace_back();
    }
    groups.back().push_back(static_cast<std::size_t>(k));
  }
  return groups;
}

inline EigenSystem eigendecompose(const SparseOperator& h, double tol_deg = kDegeneracyTolerance) {
  if (h.dim() > kMaxDenseDim) {
    throw std::invalid_argument("block dimension " + std::to_string(h.dim()) + " exceeds the dense limit of " +
                                std::to_string(kMaxDenseDim) + "; split the problem into Sz sectors first");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.dense());
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
  EigenSystem out{h.basis, solver.eigenvalues(), solver.eigenvectors(), {}};
  out.degeneracy_groups = group_degenerate(out.eigenvalues, tol_deg);
  return out;
}

/// max_k ||H v_k - e_k v_k||.
inline double max_residual(const SparseOperator& h, const EigenSystem& eig) {
  const Eigen::MatrixXd r = h.matrix * eig.eigenvectors - eig.eigenvectors * eig.eigenvalues.asDiagonal();
  return r.colwise().norm().maxCoeff();
}

/// Eigensystems of every Sz sector of one register.
struct BlockSpectrum {
  int n_sites = 0;
  std::vector<EigenSystem> blocks;  // ascending Sz

  const EigenSystem& block(SzSector sz) const {
    for (const auto& b : blocks) {
      if (b.basis->sector() == sz) return b;
    }
    throw std::out_of_range("no block with 2Sz = " + std::to_string(sz.two_sz));
  }
  double min_energy() const {
    double e = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) e = std::min(e, b.eigenvalues[0]);
    return e;
  }
  double max_energy() const {
    double e = -std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) e = std::max(e, b.eigenvalues[b.eigenvalues.size() - 1]);
    return e;
  }
  std::size_t total_dim() const {
    std::size_t d = 0;
    for (const auto& b : blocks) d += b.dim();
    return d;
  }
  /// Concatenated and sorted spectrum.
  std::vector<double> all_eigenvalues() const {
    std::vector<double> out;
    for (const auto& b : blocks) out.insert(out.end(), b.eigenvalues.begin(), b.eigenvalues.end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline BlockSpectrum diagonalize_sectors(std::span<const Bond> bonds, int n_sites, int threads = 0) {
  const auto bases = all_sectors(n_sites);
  BlockSpectrum out{n_sites, std::vector<EigenSystem>(bases.size())};
  parallel_for(
      bases.size(), [&](std::size_t k) { out.blocks[k] = eigendecompose(heisenberg_operator(bonds, bases[k])); },
      threads);
  return out;
}

/// Isolated bus (lambda = 0) on N sites.
inline BlockSpectrum bus_spectrum(const ModelSpec& spec, int threads = 0) {
  spec.validate();
  const auto bonds = bus_bonds(spec);
  return diagonalize_sectors(bonds, spec.n_bus, threads);
}

/// Bus plus qubits on N + 2 sites.
inline BlockSpectrum total_spectrum(const ModelSpec& spec, int threads = 0) {
  spec.validate();
  const auto bonds = total_bonds(spec);
  return diagonalize_sectors(bonds, spec.n_bus + 2, threads);
}

struct GroundStateInfo {
  double energy = 0.0;
  int degeneracy = 0;
  int expected_degeneracy = 0;
  std::vector<SzSector> sectors;   // one entry per degenerate level, with repeats
  PureState state;                 // |0_C>, in its Sz sector basis
  std::optional<PureState> partner;  // |1_C> = S^- |0_C> / norm for doublets
  bool anomaly = false;
  std::string note;

  void require_regular() const {
    if (anomaly) throw std::runtime_error("ground-state anomaly: " + note);
  }
};

namespace detail {

/// Largest-magnitude amplitude made real positive.
inline void fix_gauge(Eigen::VectorXcd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const cplx phase = v[arg] / std::abs(v[arg]);
  v /= phase;
}

inline PureState lower_total_spin(const PureState& s) {
  const SpinBasis& from = *s.basis;
  const int n = from.n_sites();
  auto to = build_basis(n, SzSector{from.sector()->two_sz - 2});
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(to->dim()));
  for (std::size_t k = 0; k < from.dim(); ++k) {
    const Config c = from.state(k);
    for (int site = 0; site < n; ++site) {
      const Config m = Config{1} << site;
      if (c & m) out[static_cast<Eigen::Index>(*to->index(c ^ m))] += s.amplitudes[static_cast<Eigen::Index>(k)];
    }
  }
  out.normalize();
  return PureState{to, out};
}

}  // namespace detail

/// Even buses: the unique Sz = 0 singlet. Odd buses: the doublet, with |0_C>
/// the Sz = +1/2 member. Degeneracy is counted across all sectors.
inline GroundStateInfo ground_state(const BlockSpectrum& spec, double tol_deg = kDegeneracyTolerance) {
  GroundStateInfo g;
  g.energy = spec.min_energy();
  for (const auto& b : spec.blocks) {
    for (Eigen::Index k = 0; k < b.eigenvalues.size() && b.eigenvalues[k] - g.energy <= tol_deg; ++k) {
      ++g.degeneracy;
      g.sectors.push_back(*b.basis->sector());
    }
  }
  const bool odd = spec.n_sites % 2 == 1;
  g.expected_degeneracy = odd ? 2 : 1;
  const SzSector home{odd ? 1 : 0};
  const EigenSystem& blk = spec.block(home);
  if (std::abs(blk.eigenvalues[0] - g.energy) > tol_deg) {
    g.anomaly = true;
    g.note = "lowest level is not in the 2Sz = " + std::to_string(home.two_sz) + " sector";
  }
  if (g.degeneracy != g.expected_degeneracy) {
    g.anomaly = true;
    if (!g.note.empty()) g.note += "; ";
    g.note += "degeneracy " + std::to_string(g.degeneracy) + ", expected " + std::to_string(g.expected_degeneracy);
  }
  Eigen::VectorXcd v = blk.eigenvectors.col(0).cast<cplx>();
  detail::fix_gauge(v);
  g.state = PureState{blk.basis, v};
  if (odd) g.partner = detail::lower_total_spin(g.state);
  return g;
}

inline std::string spectrum_csv(const BlockSpectrum& spec) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "sector_Sz,index,energy\n";
  for (const auto& b : spec.blocks) {
    for (Eigen::Index k = 0; k < b.eigenvalues.size(); ++k) {
      os << b.basis->sector()->value() << ',' << k << ',' << b.eigenvalues[k] << '\n';
    }
  }
  return os.str();
}

/// Lowest eigenvalue by Lanczos with full reorthogonalisation. Intended for
/// blocks too large for the dense path.
inline double lanczos_ground_energy(const SparseOperator& h, int max_iter = 200, double tol = 1e-12,
                                    std::uint64_t seed = 1) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  if (n == 1) return h.matrix.coeff(0, 0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();
  std::vector<Eigen::VectorXd> q{v};
  std::vector<double> alpha;
  std::vector<double> beta;
  double previous = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::min<Eigen::Index>(max_iter, n));
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd w = h.matrix * q.back();
    alpha.push_back(q.back().dot(w));
    for (const auto& qi : q) w -= qi.dot(w) * qi;
    for (const auto& qi : q) w -= qi.dot(w) * qi;
    const double b = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1)) : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const double e = tri.eigenvalues()[0];
    if (std::abs(e - previous) < tol || b < 1e-14) return e;
    previous = e;
    beta.push_back(b);
    q.push_back(w / b);
  }
  return previous;
}

}  // namespace spinbus
