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

// Spin-1/2 product bases, optionally restricted to a total-Sz sector, plus
// pure states over them and reduced density matrices.
//
// Bit convention used throughout the library: bit k of a configuration is 1
// when site k is up (Sz = +1/2). Up is the logical qubit state |0>.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinbus {

using Config = std::uint32_t;
using cplx = std::complex<double>;

inline constexpr int kMaxSites = 24;

/// Total Sz stored as twice its value so half-integers stay exact.
struct SzSector {
  int two_sz = 0;

  static SzSector from_value(double sz) {
    const double twice = 2.0 * sz;
    const double r = std::round(twice);
    if (std::abs(twice - r) > 1e-12) {
      throw std::invalid_argument("Sz must be an integer or half-integer, got " + std::to_string(sz));
    }
    return SzSector{static_cast<int>(r)};
  }
  double value() const { return 0.5 * two_sz; }
  friend bool operator==(SzSector, SzSector) = default;
};

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

class SpinBasis {
 public:
  /// Full 2^n basis when `sector` is empty, otherwise the fixed-Sz block.
  SpinBasis(int n_sites, std::optional<SzSector> sector) : n_sites_(n_sites), sector_(sector) {
    if (n_sites < 1 || n_sites > kMaxSites) {
      throw std::invalid_argument("n_sites must lie in [1, " + std::to_string(kMaxSites) + "], got " +
                                  std::to_string(n_sites));
    }
    const Config total = Config{1} << n_sites;
    if (!sector) {
      states_.resize(total);
      for (Config c = 0; c < total; ++c) states_[c] = c;
      return;
    }
    // n_up = n/2 + Sz  <=>  2 n_up = n + 2Sz
    const int twice_up = n_sites + sector->two_sz;
    if (twice_up < 0 || twice_up % 2 != 0 || twice_up / 2 > n_sites) {
      throw std::invalid_argument("Sz = " + std::to_string(sector->value()) + " is not reachable with " +
                                  std::to_string(n_sites) + " spins");
    }
    n_up_ = twice_up / 2;
    states_.reserve(binomial(n_sites, n_up_));
    if (n_up_ == 0) {
      states_.push_back(0);
      return;
    }
    // Gosper's hack enumerates fixed-popcount words in increasing order.
    Config c = (Config{1} << n_up_) - 1;
    while (c < total) {
      states_.push_back(c);
      const Config lowest = c & (~c + 1);
      const Config ripple = c + lowest;
      c = (((ripple ^ c) >> 2) / lowest) | ripple;
    }
  }

  int n_sites() const { return n_sites_; }
  const std::optional<SzSector>& sector() const { return sector_; }
  bool is_full() const { return !sector_.has_value(); }
  std::size_t dim() const { return states_.size(); }
  Config state(std::size_t k) const { return states_[k]; }
  std::span<const Config> states() const { return states_; }

  std::optional<std::size_t> index(Config c) const {
    if (is_full()) {
      if (c < states_.size()) return c;
      return std::nullopt;
    }
    auto it = std::lower_bound(states_.begin(), states_.end(), c);
    if (it == states_.end() || *it != c) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
  }

  friend bool operator==(const SpinBasis& a, const SpinBasis& b) {
    return a.n_sites_ == b.n_sites_ && a.sector_ == b.sector_;
  }

 private:
  int n_sites_;
  std::optional<SzSector> sector_;
  int n_up_ = -1;
  std::vector<Config> states_;
};

using BasisPtr = std::shared_ptr<const SpinBasis>;

inline BasisPtr build_basis(int n_sites, std::optional<SzSector> sector = std::nullopt) {
  return std::make_shared<const SpinBasis>(n_sites, sector);
}

/// Every reachable Sz sector of an n-site register, from Sz = -n/2 upwards.
inline std::vector<BasisPtr> all_sectors(int n_sites) {
  std::vector<BasisPtr> out;
  for (int two_sz = -n_sites; two_sz <= n_sites; two_sz += 2) out.push_back(build_basis(n_sites, SzSector{two_sz}));
  return out;
}

/// Twice the total Sz of a configuration.
inline int two_sz_of(Config c, int n_sites) { return 2 * std::popcount(c) - n_sites; }

/// Bus sites occupy register indices 0..N-1; qubit A sits at N and qubit B at
/// N+1. Attachment indices are 0-based bus sites.
struct SiteLayout {
  int n_bus = 0;
  int attach_i = 0;
  int attach_j = 0;

  int qubit_a() const { return n_bus; }
  int qubit_b() const { return n_bus + 1; }
  int n_sites() const { return n_bus + 2; }

  void validate() const {
    if (n_bus < 1) throw std::invalid_argument("bus needs at least one site");
    if (attach_i < 0 || attach_i >= n_bus || attach_j < 0 || attach_j >= n_bus) {
      throw std::invalid_argument("attachment sites must lie on the bus (1.." + std::to_string(n_bus) + ")");
    }
  }
};

struct PureState {
  BasisPtr basis;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

/// Reduced density matrix over `sites`. Row/column index bit m corresponds to
/// sites[m] being up.
struct DensityMatrix {
  std::vector<int> sites;
  Eigen::MatrixXcd rho;
};

inline constexpr double kNormTolerance = 1e-8;

namespace detail {

inline void check_normalized(const PureState& state) {
  if (!state.basis) throw std::invalid_argument("state has no basis");
  if (static_cast<std::size_t>(state.amplitudes.size()) != state.basis->dim()) {
    throw std::invalid_argument("amplitude count does not match basis dimension");
  }
  const double n = state.norm();
  if (std::abs(n - 1.0) > kNormTolerance) {
    throw std::invalid_argument("state is not normalized (norm = " + std::to_string(n) + ")");
  }
}

inline void check_keep(std::span<const int> keep, int n_sites) {
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("keep set has duplicate sites");
  }
  if (sorted.front() < 0 || sorted.back() >= n_sites) throw std::invalid_argument("keep site outside register");
}

inline std::size_t gather_bits(Config c, std::span<const int> sites) {
  std::size_t k = 0;
  for (std::size_t m = 0; m < sites.size(); ++m) k |= static_cast<std::size_t>((c >> sites[m]) & 1u) << m;
  return k;
}

}  // namespace detail

/// One-site reduction of a full-basis state in O(2^n): pairs each
/// configuration with its partner differing only at `site`.
inline Eigen::Matrix2cd single_site_density(const Eigen::VectorXcd& amps, int site) {
  const Config bit = Config{1} << site;
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  const auto dim = static_cast<Config>(amps.size());
  double p_up = 0.0;
  double p_down = 0.0;
  cplx coh{0.0, 0.0};
  for (Config c = 0; c < dim; ++c) {
    if (c & bit) continue;
    const cplx down = amps[c];
    const cplx up = amps[c | bit];
    p_down += std::norm(down);
    p_up += std::norm(up);
    coh += up * std::conj(down);
  }
  rho(0, 0) = p_down;
  rho(1, 1) = p_up;
  rho(1, 0) = coh;
  rho(0, 1) = std::conj(coh);
  return rho;
}

/// Trace out every site not in `keep`.
inline DensityMatrix partial_trace(const PureState& state, std::span<const int> keep) {
  detail::check_normalized(state);
  const SpinBasis& basis = *state.basis;
  detail::check_keep(keep, basis.n_sites());
  DensityMatrix out{std::vector<int>(keep.begin(), keep.end()), {}};

  if (keep.size() == 1 && basis.is_full()) {
    out.rho = single_site_density(state.amplitudes, keep[0]);
    return out;
  }

  Config keep_mask = 0;
  for (int s : keep) keep_mask |= Config{1} << s;
  struct Entry {
    Config rest;
    std::size_t kept;
    cplx amp;
  };
  std::vector<Entry> entries;
  entries.reserve(basis.dim());
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const cplx a = state.amplitudes[static_cast<Eigen::Index>(k)];
    if (a == cplx{}) continue;
    const Config c = basis.state(k);
    entries.push_back({c & ~keep_mask, detail::gather_bits(c, keep), a});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.rest < y.rest; });

  const auto d = static_cast<Eigen::Index>(std::size_t{1} << keep.size());
  out.rho = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].rest == entries[lo].rest) ++hi;
    for (std::size_t p = lo; p < hi; ++p) {
      for (std::size_t q = lo; q < hi; ++q) {
        out.rho(static_cast<Eigen::Index>(entries[p].kept), static_cast<Eigen::Index>(entries[q].kept)) +=
            entries[p].amp * std::conj(entries[q].amp);
      }
    }
    lo = hi;
  }
  return out;
}

inline DensityMatrix partial_trace(const PureState& state, std::initializer_list<int> keep) {
  return partial_trace(state, std::span<const int>(keep.begin(), keep.size()));
}

/// Further reduce a density matrix to a subset of its own sites.
inline DensityMatrix partial_trace(const DensityMatrix& in, std::span<const int> keep) {
  std::vector<int> pos;
  for (int s : keep) {
    auto it = std::find(in.sites.begin(), in.sites.end(), s);
    if (it == in.sites.end()) throw std::invalid_argument("site " + std::to_string(s) + " not in density matrix");
    pos.push_back(static_cast<int>(it - in.sites.begin()));
  }
  detail::check_keep(pos, static_cast<int>(in.sites.size()));
  Config keep_mask = 0;
  for (int p : pos) keep_mask |= Config{1} << p;

  const auto d = static_cast<Eigen::Index>(std::size_t{1} << pos.size());
  DensityMatrix out{std::vector<int>(keep.begin(), keep.end()), Eigen::MatrixXcd::Zero(d, d)};
  const auto big = static_cast<Config>(in.rho.rows());
  for (Config r = 0; r < big; ++r) {
    for (Config c = 0; c < big; ++c) {
      if ((r & ~keep_mask) != (c & ~keep_mask)) continue;
      out.rho(static_cast<Eigen::Index>(detail::gather_bits(r, pos)),
              static_cast<Eigen::Index>(detail::gather_bits(c, pos))) += in.rho(r, c);
    }
  }
  return out;
}

/// Embed a sector-basis state into the full basis of the same register.
inline PureState to_full_basis(const PureState& state) {
  if (state.basis->is_full()) return state;
  auto full = build_basis(state.basis->n_sites());
  PureState out{full, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(full->dim()))};
  for (std::size_t k = 0; k < state.basis->dim(); ++k) {
    out.amplitudes[static_cast<Eigen::Index>(state.basis->state(k))] = state.amplitudes[static_cast<Eigen::Index>(k)];
  }
  return out;
}

}  // namespace spinbus
