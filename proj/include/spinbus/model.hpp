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

// Heisenberg spin bus (open chain or even ring) with two weakly attached
// qubits. Spin operators are s = sigma/2 and energies are in units of the
// uniform bus exchange J0 = 1 (hbar = 1).

#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <json.hpp>

#include "spinbus/spin_basis.hpp"

namespace spinbus {

enum class Geometry { chain, ring };

inline std::string to_string(Geometry g) { return g == Geometry::chain ? "chain" : "ring"; }

inline Geometry geometry_from_string(const std::string& s) {
  if (s == "chain") return Geometry::chain;
  if (s == "ring") return Geometry::ring;
  throw std::invalid_argument("geometry must be \"chain\" or \"ring\", got \"" + s + "\"");
}

/// Qubit attachment in user-facing 1-based bus site numbers.
struct Attachment {
  int i = 1;
  int j = 1;
};

struct ModelSpec {
  Geometry geometry = Geometry::chain;
  int n_bus = 2;
  /// J_1..J_N; J_N closes the ring and is ignored for an open chain.
  std::vector<double> bus_couplings;
  int attach_i = 0;  // 0-based
  int attach_j = 0;  // 0-based
  double coupling_a = 0.0;
  double coupling_b = 0.0;

  SiteLayout layout() const { return {n_bus, attach_i, attach_j}; }
  double lambda_a() const { return coupling_a; }
  double lambda_b() const { return coupling_b; }
  bool odd_bus() const { return n_bus % 2 == 1; }

  void validate() const {
    if (n_bus < 2) throw std::invalid_argument("bus size N must be >= 2");
    if (n_bus + 2 > kMaxSites) throw std::invalid_argument("bus too large for the register");
    if (geometry == Geometry::ring && (n_bus % 2 != 0 || n_bus < 4)) {
      throw std::invalid_argument("rings must have even size N >= 4, got N = " + std::to_string(n_bus));
    }
    if (static_cast<int>(bus_couplings.size()) != n_bus) {
      throw std::invalid_argument("expected " + std::to_string(n_bus) + " bus couplings, got " +
                                  std::to_string(bus_couplings.size()));
    }
    const int active = geometry == Geometry::ring ? n_bus : n_bus - 1;
    for (int k = 0; k < active; ++k) {
      if (!(bus_couplings[static_cast<std::size_t>(k)] > 0.0)) {
        throw std::invalid_argument("bus coupling J_" + std::to_string(k + 1) + " must be > 0 (antiferromagnetic)");
      }
    }
    layout().validate();
    if (coupling_a < 0.0 || coupling_b < 0.0) throw std::invalid_argument("qubit couplings must be >= 0");
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline ModelSpec make_uniform(Geometry geometry, int n_bus, Attachment at, double lambda) {
  ModelSpec s;
  s.geometry = geometry;
  s.n_bus = n_bus;
  s.bus_couplings.assign(static_cast<std::size_t>(n_bus), 1.0);
  s.attach_i = at.i - 1;
  s.attach_j = at.j - 1;
  s.coupling_a = lambda;
  s.coupling_b = lambda;
  s.validate();
  return s;
}

struct Bond {
  int a = 0;
  int b = 0;
  double j = 0.0;
};

inline std::vector<Bond> bus_bonds(const ModelSpec& spec) {
  std::vector<Bond> bonds;
  for (int k = 0; k + 1 < spec.n_bus; ++k) bonds.push_back({k, k + 1, spec.bus_couplings[static_cast<std::size_t>(k)]});
  if (spec.geometry == Geometry::ring) bonds.push_back({spec.n_bus - 1, 0, spec.bus_couplings.back()});
  return bonds;
}

inline std::vector<Bond> total_bonds(const ModelSpec& spec) {
  auto bonds = bus_bonds(spec);
  const SiteLayout lay = spec.layout();
  if (spec.coupling_a != 0.0) bonds.push_back({lay.qubit_a(), spec.attach_i, spec.coupling_a});
  if (spec.coupling_b != 0.0) bonds.push_back({lay.qubit_b(), spec.attach_j, spec.coupling_b});
  return bonds;
}

/// Real symmetric operator on one basis. Every nonzero connects states of the
/// same Sz, so a sector basis is closed under it.
struct SparseOperator {
  BasisPtr basis;
  Eigen::SparseMatrix<double> matrix;

  std::size_t dim() const { return basis->dim(); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }
  double expectation(const Eigen::VectorXcd& v) const { return v.dot(matrix * v).real(); }
};

/// sum_b J_b s_a . s_b with s = sigma/2 on the given basis.
inline SparseOperator heisenberg_operator(std::span<const Bond> bonds, const BasisPtr& basis) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(basis->dim() * (bonds.size() + 1));
  for (const Bond& bond : bonds) {
    if (bond.a < 0 || bond.b < 0 || bond.a >= basis->n_sites() || bond.b >= basis->n_sites() || bond.a == bond.b) {
      throw std::invalid_argument("bond outside the register");
    }
  }
  for (std::size_t k = 0; k < basis->dim(); ++k) {
    const Config c = basis->state(k);
    double diag = 0.0;
    for (const Bond& bond : bonds) {
      const Config ma = Config{1} << bond.a;
      const Config mb = Config{1} << bond.b;
      const bool ua = (c & ma) != 0;
      const bool ub = (c & mb) != 0;
      if (ua == ub) {
        diag += 0.25 * bond.j;
      } else {
        diag -= 0.25 * bond.j;
        const auto target = basis->index(c ^ ma ^ mb);
        if (!target) throw std::logic_error("spin flip left the basis");
        trips.emplace_back(static_cast<int>(*target), static_cast<int>(k), 0.5 * bond.j);
      }
    }
    if (diag != 0.0) trips.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
  }
  const auto n = static_cast<Eigen::Index>(basis->dim());
  SparseOperator op{basis, Eigen::SparseMatrix<double>(n, n)};
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  return op;
}

/// H_C on either the isolated bus (N sites) or the full register (N + 2).
inline SparseOperator build_bus_hamiltonian(const ModelSpec& spec, const BasisPtr& basis) {
  spec.validate();
  if (basis->n_sites() != spec.n_bus && basis->n_sites() != spec.n_bus + 2) {
    throw std::invalid_argument("basis must cover the bus (N sites) or bus plus qubits (N + 2)");
  }
  const auto bonds = bus_bonds(spec);
  return heisenberg_operator(bonds, basis);
}

inline SparseOperator build_total_hamiltonian(const ModelSpec& spec, const BasisPtr& basis) {
  spec.validate();
  if (basis->n_sites() != spec.n_bus + 2) throw std::invalid_argument("total Hamiltonian needs N + 2 sites");
  const auto bonds = total_bonds(spec);
  return heisenberg_operator(bonds, basis);
}

// Disorder sampling ---------------------------------------------------------

/// SplitMix64 finaliser; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for ensemble member `index` of a run with `master_seed`; independent
/// of scheduling order.
inline std::uint64_t member_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

struct DisorderOptions {
  bool disorder_qubits = false;
};

/// Draws each bus coupling from Gaussian(base J_k, sigma_J^2), redrawing any
/// non-positive value. A given seed produces the same standard-normal draws at
/// every sigma_J.
inline ModelSpec sample_disordered_spec(const ModelSpec& base, double sigma_j, std::uint64_t seed,
                                        DisorderOptions opts = {}) {
  if (!(sigma_j >= 0.0)) throw std::invalid_argument("sigma_J must be >= 0");
  ModelSpec out = base;
  if (sigma_j == 0.0) return out;
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](double mean) {
    for (;;) {
      const double v = mean + sigma_j * normal(rng);
      if (v > 0.0) return v;
    }
  };
  for (double& j : out.bus_couplings) j = draw(j);
  if (opts.disorder_qubits) {
    out.coupling_a = draw(out.coupling_a);
    out.coupling_b = draw(out.coupling_b);
  }
  return out;
}

// Config serialisation -------------------------------------------------------

inline nlohmann::json to_json(const ModelSpec& s) {
  nlohmann::json j;
  j["geometry"] = to_string(s.geometry);
  j["N"] = s.n_bus;
  j["couplings"] = s.bus_couplings;
  j["attach"] = {s.attach_i + 1, s.attach_j + 1};
  j["lambda"] = {s.coupling_a, s.coupling_b};
  return j;
}

/// Keys: geometry, N, attach [i, j] (1-based), lambda (number or [A, B]),
/// couplings (optional, defaults to uniform J0 = 1). Unknown keys are rejected.
inline ModelSpec model_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"geometry", "N", "couplings", "attach", "lambda"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("model: unknown key \"" + key + "\"");
    }
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw std::invalid_argument(std::string("model: missing key \"") + key + "\"");
    return j.at(key);
  };
  ModelSpec s;
  try {
    s.geometry = geometry_from_string(need("geometry").get<std::string>());
    s.n_bus = need("N").get<int>();
    if (s.n_bus < 2 || s.n_bus + 2 > kMaxSites) throw std::invalid_argument("model: N out of range");
    const auto& at = need("attach");
    if (!at.is_array() || at.size() != 2) throw std::invalid_argument("model: attach must be [i, j]");
    s.attach_i = at[0].get<int>() - 1;
    s.attach_j = at[1].get<int>() - 1;
    const auto& lam = need("lambda");
    if (lam.is_number()) {
      s.coupling_a = s.coupling_b = lam.get<double>();
    } else if (lam.is_array() && lam.size() == 2) {
      s.coupling_a = lam[0].get<double>();
      s.coupling_b = lam[1].get<double>();
    } else {
      throw std::invalid_argument("model: lambda must be a number or [lambda_A, lambda_B]");
    }
    if (j.contains("couplings")) {
      s.bus_couplings = j.at("couplings").get<std::vector<double>>();
    } else {
      s.bus_couplings.assign(static_cast<std::size_t>(s.n_bus), 1.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model: ") + e.what());
  }
  s.validate();
  return s;
}

/// FNV-1a over a canonical serialisation; stable across runs and platforms.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fingerprint(const ModelSpec& s) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(to_json(s).dump());
  return os.str();
}

}  // namespace spinbus
