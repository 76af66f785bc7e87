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

// Brute-force reference implementations for the tests. Operators are built
// from Kronecker products of Pauli matrices and propagated with a Pade matrix
// exponential; nothing here shares code with the library.

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Single-site basis order is (down, up): index 1 means the site is up.
inline Mat pauli(int mu) {
  Mat m = Mat::Zero(2, 2);
  const cplx i(0.0, 1.0);
  switch (mu) {
    case 0:
      m(0, 1) = m(1, 0) = 1.0;
      break;
    case 1:
      m(0, 1) = i;  // <down|sigma_y|up>
      m(1, 0) = -i;
      break;
    default:
      m(0, 0) = -1.0;
      m(1, 1) = 1.0;
  }
  return m;
}

/// op on `site` of an n-site register; site 0 is the least significant bit.
inline Mat site_op(const Mat& op, int site, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int s = n - 1; s >= 0; --s) {
    const Mat factor = s == site ? op : Mat::Identity(2, 2);
    Mat next = Eigen::kroneckerProduct(out, factor).eval();
    out = std::move(next);
  }
  return out;
}

struct Link {
  int a;
  int b;
  double j;
};

/// sum J/4 sigma_a . sigma_b
inline Mat heisenberg(const std::vector<Link>& links, int n) {
  const auto dim = Eigen::Index{1} << n;
  Mat h = Mat::Zero(dim, dim);
  for (const auto& l : links) {
    for (int mu = 0; mu < 3; ++mu) h += 0.25 * l.j * site_op(pauli(mu), l.a, n) * site_op(pauli(mu), l.b, n);
  }
  return h;
}

inline std::vector<Link> chain_links(int n, double j = 1.0) {
  std::vector<Link> out;
  for (int k = 0; k + 1 < n; ++k) out.push_back({k, k + 1, j});
  return out;
}

inline std::vector<Link> ring_links(int n, double j = 1.0) {
  auto out = chain_links(n, j);
  out.push_back({n - 1, 0, j});
  return out;
}

inline Mat total_sz(int n) {
  const auto dim = Eigen::Index{1} << n;
  Mat m = Mat::Zero(dim, dim);
  for (int s = 0; s < n; ++s) m += 0.5 * site_op(pauli(2), s, n);
  return m;
}

inline Vec propagate(const Mat& h, const Vec& psi, double t) {
  const Mat u = (cplx(0.0, -t) * h).exp();
  return u * psi;
}

/// Reduced density matrix of `site` from a full register vector, index 1 = up.
inline Eigen::Matrix2cd reduce_to_site(const Vec& psi, int site) {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  const auto dim = psi.size();
  for (Eigen::Index x = 0; x < dim; ++x) {
    for (Eigen::Index y = 0; y < dim; ++y) {
      if (((x ^ y) & ~(Eigen::Index{1} << site)) != 0) continue;
      rho((x >> site) & 1, (y >> site) & 1) += psi[x] * std::conj(psi[y]);
    }
  }
  return rho;
}

/// Reduced density matrix of `keep` (bit m of the index is keep[m]).
inline Mat reduce(const Vec& psi, const std::vector<int>& keep) {
  const auto k = static_cast<int>(keep.size());
  Mat rho = Mat::Zero(Eigen::Index{1} << k, Eigen::Index{1} << k);
  Eigen::Index kept_mask = 0;
  for (int s : keep) kept_mask |= Eigen::Index{1} << s;
  auto local = [&](Eigen::Index x) {
    Eigen::Index r = 0;
    for (int m = 0; m < k; ++m) r |= ((x >> keep[static_cast<std::size_t>(m)]) & 1) << m;
    return r;
  };
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    for (Eigen::Index y = 0; y < psi.size(); ++y) {
      if (((x ^ y) & ~kept_mask) != 0) continue;
      rho(local(x), local(y)) += psi[x] * std::conj(psi[y]);
    }
  }
  return rho;
}

/// Sorted spectrum of a Hermitian matrix.
inline Eigen::VectorXd spectrum(const Mat& h) { return Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues(); }

}  // namespace oracle
