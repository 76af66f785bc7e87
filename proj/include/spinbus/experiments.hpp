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

// Seeded pipelines: lambda scans, theta scans, position scans, disorder
// ensembles and the mixed-node check. Every pipeline is deterministic for a
// given config, independent of the worker count.
//
// Transfer-time rules:
//  * odd bus  -> t0' = global maximum of the raw F_B(t) on [0, 4 pi / lambda^2]
//  * even bus -> t0  = first maximum of the secular F_B(t) on [0, 4 pi / |J*|]
// The secular trace drops eigen-pair terms oscillating faster than half the
// isolated-bus gap; on the raw even-bus trace O(lambda^2) ripples create
// spurious local maxima long before the exchange peak.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinbus/dynamics.hpp"
#include "spinbus/effective.hpp"
#include "spinbus/model.hpp"
#include "spinbus/observables.hpp"
#include "spinbus/parallel.hpp"
#include "spinbus/spectrum.hpp"

namespace spinbus {

/// Spectra, ground state and effective couplings of one model.
class ModelSolution {
 public:
  explicit ModelSolution(const ModelSpec& spec, int threads = 1)
      : spec_(spec), bus_(bus_spectrum(spec, threads)), ground_(ground_state(bus_)), total_(total_spectrum(spec, threads)) {
    if (ground_.anomaly) return;
    if (spec.odd_bus()) {
      odd_ = effective_coupling_odd(spec, ground_);
    } else {
      even_ = effective_coupling_even(spec, bus_, ground_);
    }
  }

  const ModelSpec& spec() const { return spec_; }
  const BlockSpectrum& bus() const { return bus_; }
  const BlockSpectrum& total() const { return total_; }
  const GroundStateInfo& ground() const { return ground_; }
  const std::optional<EffectiveCouplingOdd>& odd() const { return odd_; }
  const std::optional<EffectiveCouplingEven>& even() const { return even_; }
  bool regular() const { return !ground_.anomaly; }

  /// lambda_A lambda_B for an odd bus, |J*| for an even bus.
  double second_order_scale() const {
    if (spec_.odd_bus()) return spec_.coupling_a * spec_.coupling_b;
    if (!even_) throw std::runtime_error("no effective coupling: " + ground_.note);
    return std::abs(even_->j_star);
  }

  double search_window(double periods = 4.0) const {
    const double s = second_order_scale();
    if (!(s > 0.0)) throw std::invalid_argument("second-order scale vanishes; no transfer window");
    return periods * std::numbers::pi / s;
  }

  double secular_cutoff() const { return 0.5 * bus_gap(bus_); }

  TransferDynamics dynamics(const BlochAngles& angles) const {
    ground_.require_regular();
    return TransferDynamics(spec_, angles, ground_, total_);
  }

 private:
  ModelSpec spec_;
  BlockSpectrum bus_;
  GroundStateInfo ground_;
  BlockSpectrum total_;
  std::optional<EffectiveCouplingOdd> odd_;
  std::optional<EffectiveCouplingEven> even_;
};

struct PstOptions {
  double window_periods = 4.0;
  std::optional<double> dt;  // cap on the sampling step
  int threads = 1;
};

struct PstResult {
  TransferOptimum optimum;
  double infidelity = 1.0;
  double raw_fidelity = 0.0;  // raw F_B at t_opt
  std::string observable;     // "raw" or "secular"
};

inline double pick_dt(double suggested, const std::optional<double>& cap) { return cap ? std::min(*cap, suggested) : suggested; }

/// Transfer optimum with the parity-appropriate rule (see file comment).
inline PstResult analyze_pst(const ModelSolution& sol, const BlochAngles& angles, const PstOptions& opts = {}) {
  const TransferDynamics dyn = sol.dynamics(angles);
  const double window = sol.search_window(opts.window_periods);
  PstResult r;
  if (sol.spec().odd_bus()) {
    const TimeGrid grid{0.0, window, pick_dt(dyn.suggested_dt(), opts.dt)};
    const FidelityTrace tr = fidelity_trace(dyn, grid, opts.threads);
    r.optimum = find_pst_optimum(tr, dyn);
    r.observable = "raw";
    r.raw_fidelity = r.optimum.f_opt;
  } else {
    const SecularFidelity sec(dyn, sol.secular_cutoff());
    const TimeGrid grid{0.0, window, pick_dt(std::min(sec.suggested_dt(), window / 400.0), opts.dt)};
    const FidelityTrace tr = fidelity_trace(sec, grid, opts.threads);
    r.optimum = find_first_maximum(tr, sec);
    r.observable = "secular";
    r.raw_fidelity = r.optimum.found ? dyn.fidelity(r.optimum.t_opt) : 0.0;
  }
  r.infidelity = r.optimum.found ? 1.0 - r.optimum.f_opt : 1.0;
  return r;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw std::invalid_argument("log-log fit needs positive data");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Config ---------------------------------------------------------------------

struct ExperimentConfig {
  std::string id = "experiment";
  ModelSpec model = make_uniform(Geometry::chain, 5, {1, 5}, 0.1);
  std::vector<double> lambdas = {0.02, 0.04, 0.06, 0.08, 0.1};
  std::vector<double> thetas = {0.3, std::numbers::pi / 2, 2.8};
  std::vector<double> phis = {0.0};
  std::vector<int> positions;  // 1-based; empty means 1..N
  std::vector<double> sigmas = {0.005, 0.01, 0.02, 0.05};
  double theta = std::numbers::pi / 2;
  double phi = 0.0;
  int ensemble_size = 100;
  std::uint64_t seed = 2011;
  double window_periods = 4.0;
  std::optional<double> dt;
  std::optional<double> t_end;  // explicit trace window for `trace`
  Attachment control_attach{1, 5};
  Attachment mixed_attach{1, 2};
  int threads = 0;

  void validate() const {
    model.validate();
    auto nonempty = [](const auto& v, const char* name) {
      if (v.empty()) throw std::invalid_argument(std::string(name) + " must be nonempty");
    };
    nonempty(lambdas, "lambdas");
    nonempty(thetas, "thetas");
    nonempty(phis, "phis");
    nonempty(sigmas, "sigmas");
    for (double l : lambdas) {
      if (!(l > 0.0 && l <= 0.2)) throw std::invalid_argument("lambda values must lie in (0, 0.2]");
    }
    for (double th : thetas) BlochAngles{th, 0.0}.validate();
    BlochAngles{theta, phi}.validate();
    for (double s : sigmas) {
      if (!(s >= 0.0)) throw std::invalid_argument("sigma_J values must be >= 0");
    }
    for (int j : positions) {
      if (j < 1 || j > model.n_bus) throw std::invalid_argument("position outside the bus");
    }
    if (ensemble_size < 1) throw std::invalid_argument("ensemble_size must be >= 1");
    if (!(window_periods > 0.0)) throw std::invalid_argument("window_periods must be > 0");
    if (dt && !(*dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (t_end && !(*t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["id"] = c.id;
  j["model"] = to_json(c.model);
  j["lambdas"] = c.lambdas;
  j["thetas"] = c.thetas;
  j["phis"] = c.phis;
  j["positions"] = c.positions;
  j["sigmas"] = c.sigmas;
  j["theta"] = c.theta;
  j["phi"] = c.phi;
  j["ensemble_size"] = c.ensemble_size;
  j["seed"] = c.seed;
  j["window_periods"] = c.window_periods;
  if (c.dt) j["dt"] = *c.dt;
  if (c.t_end) j["t_end"] = *c.t_end;
  j["control_attach"] = {c.control_attach.i, c.control_attach.j};
  j["mixed_attach"] = {c.mixed_attach.i, c.mixed_attach.j};
  return j;
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"id",     "model",        "lambdas",      "thetas",  "phis",
                                                 "positions", "sigmas",    "theta",        "phi",     "ensemble_size",
                                                 "seed",   "window_periods", "dt",         "t_end",   "control_attach",
                                                 "mixed_attach"};
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown config key \"" + key + "\"");
    }
  }
  ExperimentConfig c;
  auto field = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("field \"") + key + "\": " + e.what());
    }
  };
  auto attach = [&](const char* key, Attachment& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw std::invalid_argument(std::string("field \"") + key + "\" must be [i, j]");
    out = {a[0].get<int>(), a[1].get<int>()};
  };
  if (!j.contains("model")) throw std::invalid_argument("missing key \"model\"");
  c.model = model_from_json(j.at("model"));
  field("id", c.id);
  field("lambdas", c.lambdas);
  field("thetas", c.thetas);
  field("phis", c.phis);
  field("positions", c.positions);
  field("sigmas", c.sigmas);
  field("theta", c.theta);
  field("phi", c.phi);
  field("ensemble_size", c.ensemble_size);
  field("seed", c.seed);
  field("window_periods", c.window_periods);
  if (j.contains("dt")) c.dt = j.at("dt").get<double>();
  if (j.contains("t_end")) c.t_end = j.at("t_end").get<double>();
  attach("control_attach", c.control_attach);
  attach("mixed_attach", c.mixed_attach);
  c.validate();
  return c;
}

namespace detail {

inline ModelSpec with_lambda(ModelSpec s, double lambda) {
  s.coupling_a = lambda;
  s.coupling_b = lambda;
  return s;
}

inline ModelSpec with_attachment(ModelSpec s, Attachment at) {
  s.attach_i = at.i - 1;
  s.attach_j = at.j - 1;
  s.validate();
  return s;
}

inline std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

}  // namespace detail

// Lambda scan ----------------------------------------------------------------

struct LambdaRow {
  double lambda = 0.0;
  bool found = false;
  double t_opt = 0.0;
  double infidelity = 1.0;
  std::string observable;
  std::string fingerprint;
};

struct LambdaScan {
  std::vector<LambdaRow> rows;
  std::optional<double> slope;

  std::string csv() const {
    auto os = detail::csv_stream();
    os << "lambda,t_opt,infidelity,found,observable,model_fingerprint\n";
    for (const auto& r : rows) {
      os << r.lambda << ',' << r.t_opt << ',' << r.infidelity << ',' << (r.found ? 1 : 0) << ',' << r.observable << ','
         << r.fingerprint << '\n';
    }
    return os.str();
  }
};

inline LambdaScan run_lambda_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const BlochAngles angles{cfg.theta, cfg.phi};
  LambdaScan out;
  out.rows.resize(cfg.lambdas.size());
  parallel_for(
      cfg.lambdas.size(),
      [&](std::size_t k) {
        const ModelSpec spec = detail::with_lambda(cfg.model, cfg.lambdas[k]);
        LambdaRow& row = out.rows[k];
        row.lambda = cfg.lambdas[k];
        row.fingerprint = fingerprint(spec);
        const ModelSolution sol(spec);
        if (!sol.regular()) return;
        const PstResult r = analyze_pst(sol, angles, {cfg.window_periods, cfg.dt, 1});
        row.found = r.optimum.found;
        row.t_opt = r.optimum.t_opt;
        row.infidelity = r.infidelity;
        row.observable = r.observable;
      },
      cfg.threads);
  std::vector<double> xs, ys;
  for (const auto& r : out.rows) {
    if (r.found && r.infidelity > 0.0) {
      xs.push_back(r.lambda);
      ys.push_back(r.infidelity);
    }
  }
  if (xs.size() >= 2) out.slope = loglog_slope(xs, ys);
  return out;
}

// Theta scan -----------------------------------------------------------------

struct ThetaRow {
  double theta = 0.0;
  double phi = 0.0;
  bool found_first = false;
  double t0 = 0.0;        // effective (lowest-order) model
  double f_t0 = 0.0;
  bool found_pst = false;
  double t0_prime = 0.0;  // full dynamics
  double f_t0_prime = 0.0;
  bool degenerate = false;
  std::string fingerprint;
};

struct ThetaScan {
  std::vector<ThetaRow> rows;

  std::string csv() const {
    auto os = detail::csv_stream();
    // Columns of an optimum that was not found are left empty.
    os << "theta,phi,t0,F_t0,t0_prime,F_t0_prime,degenerate,model_fingerprint\n";
    for (const auto& r : rows) {
      os << r.theta << ',' << r.phi << ',';
      if (r.found_first) os << r.t0 << ',' << r.f_t0 << ',';
      else os << ",,";
      if (r.found_pst) os << r.t0_prime << ',' << r.f_t0_prime << ',';
      else os << ",,";
      os << (r.degenerate ? 1 : 0) << ',' << r.fingerprint << '\n';
    }
    return os.str();
  }

  /// (max - min) / mean over non-degenerate rows.
  static double relative_spread(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    return (*hi - *lo) / std::abs(mean);
  }
  template <typename Get>
  double spread(Get get) const {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (!r.degenerate) v.push_back(get(r));
    }
    return relative_spread(v);
  }
};

/// Lowest-order transfer optimum: first maximum of the closed-form fidelity
/// (odd: central-spin model, even: pi / |J*|).
inline TransferOptimum effective_first_maximum(const ModelSolution& sol, double theta) {
  TransferOptimum o;
  if (sol.spec().odd_bus()) {
    const double j_star = sol.odd()->j_star_a;
    if (j_star == 0.0) return o;
    auto f = [&](double t) { return analytic_fidelity_odd(theta, j_star, t); };
    const double period = 4.0 * std::numbers::pi / std::abs(j_star);
    const FidelityTrace tr = fidelity_trace(f, TimeGrid{0.0, period, period / 4000.0}, 1);
    return find_first_maximum(tr, f);
  }
  const double j_star = sol.even()->j_star;
  o.found = j_star != 0.0;
  o.t_opt = std::numbers::pi / std::abs(j_star);
  o.f_opt = analytic_fidelity_even(theta, j_star, o.t_opt);
  o.window_end = 2.0 * o.t_opt;
  return o;
}

inline ThetaScan run_theta_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const ModelSolution sol(cfg.model, 1);
  sol.ground().require_regular();
  std::vector<BlochAngles> points;
  for (double th : cfg.thetas) {
    for (double ph : cfg.phis) points.push_back({th, ph});
  }
  ThetaScan out;
  out.rows.resize(points.size());
  const std::string fp = fingerprint(cfg.model);
  parallel_for(
      points.size(),
      [&](std::size_t k) {
        ThetaRow& row = out.rows[k];
        row.theta = points[k].theta;
        row.phi = points[k].phi;
        row.fingerprint = fp;
        row.degenerate = std::abs(std::sin(0.5 * row.theta)) < 1e-12;
        const TransferOptimum eff = effective_first_maximum(sol, row.theta);
        row.found_first = eff.found;
        row.t0 = eff.t_opt;
        row.f_t0 = eff.f_opt;
        const PstResult full = analyze_pst(sol, points[k], {cfg.window_periods, cfg.dt, 1});
        row.found_pst = full.optimum.found;
        row.t0_prime = full.optimum.t_opt;
        row.f_t0_prime = full.optimum.f_opt;
      },
      cfg.threads);
  return out;
}

// Position scan --------------------------------------------------------------

struct PositionRow {
  int j = 0;  // 1-based
  double j_star = 0.0;
  double j_star_scaled = 0.0;  // J* / (J_A J_B)
  double t0 = 0.0;             // pi / |J*|
  double t0_scaled = 0.0;      // t0 / (pi / |J*_{1,1}|)
  SignClass sign = SignClass::zero;
  std::string fingerprint;
};

struct PositionScan {
  Geometry geometry = Geometry::chain;
  int n_bus = 0;
  std::vector<PositionRow> rows;

  std::string csv() const {
    auto os = detail::csv_stream();
    os << "j,J_star,J_star_scaled,t0,t0_scaled,sign_class,model_fingerprint\n";
    for (const auto& r : rows) {
      os << r.j << ',' << r.j_star << ',' << r.j_star_scaled << ',' << r.t0 << ',' << r.t0_scaled << ','
         << to_string(r.sign) << ',' << r.fingerprint << '\n';
    }
    return os.str();
  }

  /// Some farther site is reached faster: t0(j+1) < t0(j).
  bool non_monotone() const {
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      if (rows[k + 1].j == rows[k].j + 1 && rows[k + 1].t0 < rows[k].t0) return true;
    }
    return false;
  }
  /// 1-based site with the longest transfer time (first on ties).
  int argmax_t0() const {
    const auto it = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.t0 < b.t0; });
    return it->j;
  }
  int antipode() const { return n_bus / 2 + 1; }
  const PositionRow& row(int j) const {
    for (const auto& r : rows) {
      if (r.j == j) return r;
    }
    throw std::out_of_range("position not scanned");
  }
};

inline PositionScan run_position_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.model.odd_bus()) throw std::invalid_argument("position scan needs an even bus");
  ModelSpec base = cfg.model;
  base.attach_i = 0;
  const BlockSpectrum bus = bus_spectrum(base, 1);
  const GroundStateInfo ground = ground_state(bus);
  ground.require_regular();

  std::vector<int> js = cfg.positions;
  if (js.empty()) {
    for (int j = 1; j <= base.n_bus; ++j) js.push_back(j);
  }
  PositionScan out{base.geometry, base.n_bus, std::vector<PositionRow>(js.size())};
  auto coupling_at = [&](int j) {
    ModelSpec s = base;
    s.attach_j = j - 1;
    return std::pair{effective_coupling_even(s, bus, ground), s};
  };
  const double ref = std::abs(coupling_at(1).first.j_star);
  parallel_for(
      js.size(),
      [&](std::size_t k) {
        const auto [c, s] = coupling_at(js[k]);
        PositionRow& r = out.rows[k];
        r.j = js[k];
        r.j_star = c.j_star;
        r.j_star_scaled = c.j_star / (s.coupling_a * s.coupling_b);
        r.t0 = std::numbers::pi / std::abs(c.j_star);
        r.t0_scaled = r.t0 * ref / std::numbers::pi;
        r.sign = c.sign();
        r.fingerprint = fingerprint(s);
      },
      cfg.threads);
  return out;
}

// Disorder ensembles ---------------------------------------------------------

struct DisorderMember {
  double sigma = 0.0;
  int member = 0;
  bool excluded = false;
  double calibrated_time = 0.0;
  double infidelity_calibrated = 0.0;
  double infidelity_uncalibrated = 0.0;
  std::string fingerprint;
};

struct EnsembleSummary {
  double sigma = 0.0;
  bool calibrated = false;
  double mean_infidelity = 0.0;
  double std_error = 0.0;
  int members = 0;
  int excluded = 0;
};

struct DisorderScan {
  double uniform_time = 0.0;  // tau0 (even) or tau0' (odd)
  double uniform_infidelity = 0.0;
  std::string observable;
  std::vector<EnsembleSummary> summaries;  // per sigma: calibrated then uncalibrated
  std::vector<DisorderMember> members;
  std::optional<double> uncalibrated_slope;  // added infidelity vs sigma_J, sigma_J > 0

  const EnsembleSummary& summary(double sigma, bool calibrated) const {
    for (const auto& s : summaries) {
      if (s.sigma == sigma && s.calibrated == calibrated) return s;
    }
    throw std::out_of_range("sigma not in scan");
  }

  std::string summary_csv() const {
    auto os = detail::csv_stream();
    os << "sigma_J,calibrated,mean_infidelity,std_error,members,excluded\n";
    for (const auto& s : summaries) {
      os << s.sigma << ',' << (s.calibrated ? 1 : 0) << ',' << s.mean_infidelity << ',' << s.std_error << ','
         << s.members << ',' << s.excluded << '\n';
    }
    return os.str();
  }
  std::string members_csv() const {
    auto os = detail::csv_stream();
    os << "sigma_J,member,excluded,calibrated_time,infidelity_calibrated,infidelity_uncalibrated,model_fingerprint\n";
    for (const auto& m : members) {
      os << m.sigma << ',' << m.member << ',' << (m.excluded ? 1 : 0) << ',' << m.calibrated_time << ','
         << m.infidelity_calibrated << ',' << m.infidelity_uncalibrated << ',' << m.fingerprint << '\n';
    }
    return os.str();
  }
};

namespace detail {

inline EnsembleSummary summarize(double sigma, bool calibrated, const std::vector<DisorderMember>& ms) {
  EnsembleSummary s{sigma, calibrated, 0.0, 0.0, 0, 0};
  std::vector<double> v;
  for (const auto& m : ms) {
    if (m.excluded) {
      ++s.excluded;
      continue;
    }
    v.push_back(calibrated ? m.infidelity_calibrated : m.infidelity_uncalibrated);
  }
  s.members = static_cast<int>(v.size());
  if (v.empty()) return s;
  s.mean_infidelity = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean_infidelity) * (x - s.mean_infidelity);
    s.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

}  // namespace detail

/// Bus couplings of member m are drawn from the stream member_seed(seed, m),
/// so the same standard-normal draws are reused at every sigma_J.
///
/// Calibrated: odd bus re-searches t0' per member; even bus rescales the
/// uniform time by |J*_uniform / J*_member|. Uncalibrated: the uniform time.
inline DisorderScan run_disorder_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const BlochAngles angles{cfg.theta, cfg.phi};
  const ModelSolution uniform(cfg.model, 1);
  uniform.ground().require_regular();
  const PstOptions opts{cfg.window_periods, cfg.dt, 1};
  const PstResult base = analyze_pst(uniform, angles, opts);
  if (!base.optimum.found) throw std::runtime_error("no transfer optimum for the uniform bus");
  const bool odd = cfg.model.odd_bus();
  const double window = uniform.search_window(cfg.window_periods);
  const double j_uniform = odd ? 0.0 : uniform.even()->j_star;

  DisorderScan out;
  out.uniform_time = base.optimum.t_opt;
  out.uniform_infidelity = base.infidelity;
  out.observable = base.observable;

  const auto m_count = static_cast<std::size_t>(cfg.ensemble_size);
  for (double sigma : cfg.sigmas) {
    std::vector<DisorderMember> ms(m_count);
    parallel_for(
        m_count,
        [&](std::size_t m) {
          DisorderMember& rec = ms[m];
          rec.sigma = sigma;
          rec.member = static_cast<int>(m);
          const ModelSpec spec = sample_disordered_spec(cfg.model, sigma, member_seed(cfg.seed, m));
          rec.fingerprint = fingerprint(spec);
          const ModelSolution sol(spec, 1);
          if (!sol.regular()) {
            rec.excluded = true;
            return;
          }
          const TransferDynamics dyn = sol.dynamics(angles);
          if (odd) {
            rec.infidelity_uncalibrated = 1.0 - dyn.fidelity(out.uniform_time);
            const TimeGrid grid{0.0, window, pick_dt(dyn.suggested_dt(), cfg.dt)};
            const TransferOptimum o = find_pst_optimum(fidelity_trace(dyn, grid, 1), dyn);
            rec.calibrated_time = o.t_opt;
            rec.infidelity_calibrated = o.found ? 1.0 - o.f_opt : 1.0;
          } else {
            const SecularFidelity sec(dyn, sol.secular_cutoff());
            rec.infidelity_uncalibrated = 1.0 - sec(out.uniform_time);
            rec.calibrated_time = out.uniform_time * std::abs(j_uniform / sol.even()->j_star);
            rec.infidelity_calibrated = 1.0 - sec(rec.calibrated_time);
          }
        },
        cfg.threads);
    out.summaries.push_back(detail::summarize(sigma, true, ms));
    out.summaries.push_back(detail::summarize(sigma, false, ms));
    out.members.insert(out.members.end(), ms.begin(), ms.end());
  }

  std::vector<double> xs, ys;
  for (const auto& s : out.summaries) {
    if (s.calibrated || s.sigma <= 0.0) continue;
    const double added = s.mean_infidelity - out.uniform_infidelity;
    if (added > 0.0) {
      xs.push_back(s.sigma);
      ys.push_back(added);
    }
  }
  if (xs.size() >= 2) out.uncalibrated_slope = loglog_slope(xs, ys);
  return out;
}

// Mixed-node check -----------------------------------------------------------

struct MixedNodeReport {
  double lambda = 0.0;
  double window = 0.0;
  double control_max = 0.0;
  double control_time = 0.0;
  double mixed_max = 0.0;
  double mixed_time = 0.0;
  bool degenerate = false;
  std::string control_fingerprint;
  std::string mixed_fingerprint;

  static constexpr double kControlThreshold = 0.99;
  static constexpr double kMixedThreshold = 0.95;
  bool control_pass() const { return control_max >= kControlThreshold; }
  bool mixed_pass() const { return mixed_max <= kMixedThreshold; }

  nlohmann::json json() const {
    return {{"lambda", lambda},
            {"window", window},
            {"control_max_F", control_max},
            {"control_t", control_time},
            {"mixed_max_F", mixed_max},
            {"mixed_t", mixed_time},
            {"degenerate", degenerate},
            {"control_pass", control_pass()},
            {"mixed_pass", mixed_pass()},
            {"control_fingerprint", control_fingerprint},
            {"mixed_fingerprint", mixed_fingerprint}};
  }
};

/// Odd bus with qubits on same-parity (control) and opposite-parity (mixed)
/// nodes; reports the largest F_B over [0, periods * pi / lambda^2].
inline MixedNodeReport run_mixed_node_check(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.model.odd_bus()) throw std::invalid_argument("mixed-node check needs an odd bus");
  MixedNodeReport rep;
  rep.lambda = cfg.model.coupling_a;
  const BlochAngles angles{cfg.theta, cfg.phi};
  auto max_f = [&](Attachment at, double& f, double& t, std::string& fp) {
    const ModelSpec spec = detail::with_attachment(cfg.model, at);
    fp = fingerprint(spec);
    const ModelSolution sol(spec, 1);
    sol.ground().require_regular();
    const TransferDynamics dyn = sol.dynamics(angles);
    const TimeGrid grid{0.0, rep.window, pick_dt(dyn.suggested_dt(), cfg.dt)};
    const FidelityTrace tr = fidelity_trace(dyn, grid, cfg.threads);
    const TransferOptimum o = find_pst_optimum(tr, dyn);
    if (o.found) {
      f = o.f_opt;
      t = o.t_opt;
    } else {
      const auto it = std::max_element(tr.fidelities.begin(), tr.fidelities.end());
      f = *it;
      t = tr.times[static_cast<std::size_t>(it - tr.fidelities.begin())];
    }
  };
  if (cfg.model.coupling_a * cfg.model.coupling_b == 0.0) {
    // Decoupled qubits: F_B stays at its initial value.
    rep.degenerate = true;
    rep.window = 0.0;
    rep.control_max = rep.mixed_max = std::pow(std::cos(0.5 * cfg.theta), 2);
    return rep;
  }
  rep.window = cfg.window_periods * std::numbers::pi / (cfg.model.coupling_a * cfg.model.coupling_b);
  max_f(cfg.control_attach, rep.control_max, rep.control_time, rep.control_fingerprint);
  max_f(cfg.mixed_attach, rep.mixed_max, rep.mixed_time, rep.mixed_fingerprint);
  return rep;
}

}  // namespace spinbus
