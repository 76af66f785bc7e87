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

// Subcommand dispatch. Artifacts are rendered in memory first and only then
// written (temp file + rename), so a failed run leaves nothing behind.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "spinbus/experiments.hpp"

#ifndef SPINBUS_VERSION
#define SPINBUS_VERSION "0.0.0"
#endif

namespace spinbus::cli {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"spectrum",      "trace",         "optimum",
                                                 "effective",     "scan-lambda",   "scan-theta",
                                                 "scan-position", "scan-disorder", "check-mixed"};
  return names;
}

struct Invocation {
  std::string subcommand;
  std::filesystem::path config;
  std::vector<std::string> overrides;  // key=value, dotted keys into the config
  std::filesystem::path out_dir = "out";
  int verbosity = 0;
  std::optional<int> threads;
};

/// Configuration and validation failures (exit 2); everything else exits 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// JSON with every floating-point number at 17 significant digits.
inline void dump17(const nlohmann::json& j, std::ostream& os, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::json(k).dump() << ": ";
        dump17(v, os, indent + 2);
      }
      os << '\n' << close << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        dump17(j[k], os, indent + 2);
      }
      os << '\n' << close << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

inline std::string render_json(const nlohmann::json& j) {
  std::ostringstream os;
  dump17(j, os);
  os << '\n';
  return os.str();
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// "a.b=value"; value is parsed as JSON, falling back to a plain string.
inline void apply_override(nlohmann::json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override \"" + kv + "\" is not key=value");
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  std::string pointer;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    pointer += "/" + key.substr(start, dot - start);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  cfg[nlohmann::json::json_pointer(pointer)] = value;
}

inline nlohmann::json load_config_json(const Invocation& inv) {
  nlohmann::json j = nlohmann::json::object();
  if (!inv.config.empty()) {
    std::ifstream in(inv.config);
    if (!in) throw ConfigError("cannot read config " + inv.config.string());
    try {
      j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(inv.config.string() + ": " + e.what());
    }
  }
  for (const auto& kv : inv.overrides) apply_override(j, kv);
  return j;
}

/// Subcommand-specific preconditions, checked before any computation.
inline void validate_for(const std::string& sub, const ExperimentConfig& cfg) {
  if (sub == "scan-position" && cfg.model.odd_bus()) throw ConfigError("scan-position needs an even bus");
  if (sub == "check-mixed" && !cfg.model.odd_bus()) throw ConfigError("check-mixed needs an odd bus");
  if (sub == "check-mixed") {
    detail::with_attachment(cfg.model, cfg.control_attach);
    detail::with_attachment(cfg.model, cfg.mixed_attach);
  }
}

using Artifacts = std::map<std::string, std::string>;

inline Artifacts compute(const std::string& sub, const ExperimentConfig& cfg, std::ostream& log, int verbosity) {
  auto say = [&](const std::string& m) {
    if (verbosity > 0) log << "[spinbus] " << m << '\n';
  };
  Artifacts out;
  const std::string fp = fingerprint(cfg.model);
  const BlochAngles angles{cfg.theta, cfg.phi};
  const PstOptions opts{cfg.window_periods, cfg.dt, cfg.threads};

  if (sub == "spectrum") {
    say("diagonalizing the isolated bus");
    out["spectrum.csv"] = spectrum_csv(bus_spectrum(cfg.model, cfg.threads));
  } else if (sub == "trace" || sub == "optimum") {
    say("diagonalizing bus and register");
    const ModelSolution sol(cfg.model, cfg.threads);
    sol.ground().require_regular();
    if (sub == "trace") {
      const TransferDynamics dyn = sol.dynamics(angles);
      const double t_end = cfg.t_end ? *cfg.t_end : sol.search_window(cfg.window_periods);
      const TimeGrid grid{0.0, t_end, pick_dt(dyn.suggested_dt(), cfg.dt)};
      say("sampling " + std::to_string(grid.times().size()) + " points");
      out["trace.csv"] = trace_csv(fidelity_trace(dyn, grid, cfg.threads));
      if (!cfg.model.odd_bus()) {
        const SecularFidelity sec(dyn, sol.secular_cutoff());
        out["trace_secular.csv"] = trace_csv(fidelity_trace(sec, grid, cfg.threads));
      }
    }
    say("locating the transfer optimum");
    const PstResult r = analyze_pst(sol, angles, opts);
    nlohmann::json j = optimum_json(r.optimum, fp);
    j["observable"] = r.observable;
    j["infidelity"] = r.infidelity;
    j["raw_F_at_t_opt"] = r.raw_fidelity;
    j["theta"] = cfg.theta;
    j["phi"] = cfg.phi;
    out["optimum.json"] = render_json(j);
  } else if (sub == "effective") {
    const BlockSpectrum bus = bus_spectrum(cfg.model, cfg.threads);
    const GroundStateInfo g = ground_state(bus);
    g.require_regular();
    nlohmann::json j;
    j["model_fingerprint"] = fp;
    j["ground_energy"] = g.energy;
    j["ground_degeneracy"] = g.degeneracy;
    if (cfg.model.odd_bus()) {
      const auto c = effective_coupling_odd(cfg.model, g);
      j["kind"] = "central-spin";
      j["J_star_A"] = c.j_star_a;
      j["J_star_B"] = c.j_star_b;
      j["moment_i"] = c.moment_i;
      j["moment_j"] = c.moment_j;
      j["same_parity"] = c.same_parity;
    } else {
      const auto c = effective_coupling_even(cfg.model, bus, g);
      j["kind"] = "exchange";
      j["J_star"] = c.j_star;
      j["J_star_mu_summed"] = c.mu_summed;
      j["mu_sums"] = {c.mu_sums[0], c.mu_sums[1], c.mu_sums[2]};
      j["sign_class"] = to_string(c.sign());
      j["t0"] = std::numbers::pi / std::abs(c.j_star);
    }
    out["effective.json"] = render_json(j);
  } else if (sub == "scan-lambda") {
    const LambdaScan s = run_lambda_scan(cfg);
    out["lambda_scan.csv"] = s.csv();
    nlohmann::json j{{"model_fingerprint", fp}, {"points", s.rows.size()}};
    j["slope"] = s.slope ? nlohmann::json(*s.slope) : nlohmann::json(nullptr);
    out["summary.json"] = render_json(j);
  } else if (sub == "scan-theta") {
    const ThetaScan s = run_theta_scan(cfg);
    out["theta_scan.csv"] = s.csv();
    out["summary.json"] = render_json({{"model_fingerprint", fp},
                                       {"t0_spread", s.spread([](const ThetaRow& r) { return r.t0; })},
                                       {"t0_prime_spread", s.spread([](const ThetaRow& r) { return r.t0_prime; })},
                                       {"F_t0_prime_spread", s.spread([](const ThetaRow& r) { return r.f_t0_prime; })}});
  } else if (sub == "scan-position") {
    const PositionScan s = run_position_scan(cfg);
    out["position_scan.csv"] = s.csv();
    nlohmann::json j{{"model_fingerprint", fp},
                     {"non_monotone", s.non_monotone()},
                     {"argmax_t0", s.argmax_t0()}};
    if (cfg.model.geometry == Geometry::ring) j["antipode"] = s.antipode();
    out["summary.json"] = render_json(j);
  } else if (sub == "scan-disorder") {
    const DisorderScan s = run_disorder_scan(cfg);
    out["disorder_summary.csv"] = s.summary_csv();
    out["disorder_members.csv"] = s.members_csv();
    nlohmann::json j{{"model_fingerprint", fp},
                     {"uniform_time", s.uniform_time},
                     {"uniform_infidelity", s.uniform_infidelity},
                     {"observable", s.observable}};
    j["uncalibrated_slope"] = s.uncalibrated_slope ? nlohmann::json(*s.uncalibrated_slope) : nlohmann::json(nullptr);
    out["summary.json"] = render_json(j);
  } else if (sub == "check-mixed") {
    out["mixed_node.json"] = render_json(run_mixed_node_check(cfg).json());
  }
  return out;
}

/// Writes every artifact via temp + rename; on failure removes what was written.
inline void write_artifacts(const std::filesystem::path& dir, const Artifacts& files) {
  namespace fs = std::filesystem;
  const bool existed = fs::exists(dir);
  fs::create_directories(dir);
  std::vector<fs::path> written;
  try {
    for (const auto& [name, body] : files) {
      const fs::path final_path = dir / name;
      const fs::path tmp = dir / ("." + name + ".tmp");
      {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        os << body;
        os.flush();
        if (!os) throw std::runtime_error("failed writing " + tmp.string());
      }
      fs::rename(tmp, final_path);
      written.push_back(final_path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    for (const auto& [name, _] : files) fs::remove(dir / ("." + name + ".tmp"), ec);
    if (!existed) fs::remove(dir, ec);
    throw;
  }
}

inline int dispatch(const Invocation& inv, std::ostream& log = std::cerr) {
  const auto t_start = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  try {
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), inv.subcommand) == subs.end()) {
      throw ConfigError("unknown subcommand \"" + inv.subcommand + "\"");
    }
    cfg = experiment_from_json(load_config_json(inv));
    validate_for(inv.subcommand, cfg);
  } catch (const std::exception& e) {
    log << "spinbus: invalid configuration: " << e.what() << '\n';
    return 2;
  }
  cfg.threads = inv.threads ? *inv.threads : default_thread_count();

  try {
    Artifacts files = compute(inv.subcommand, cfg, log, inv.verbosity);
    const std::string config_text = to_json(cfg).dump();
    nlohmann::json manifest;
    manifest["subcommand"] = inv.subcommand;
    manifest["config"] = to_json(cfg);
    manifest["config_hash"] = hex64(fnv1a(config_text));
    manifest["seed"] = cfg.seed;
    manifest["model_fingerprint"] = fingerprint(cfg.model);
    manifest["versions"] = {{"spinbus", SPINBUS_VERSION},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"boost", BOOST_LIB_VERSION},
                            {"compiler", __VERSION__}};
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [name, body] : files) hashes[name] = hex64(fnv1a(body));
    manifest["artifacts"] = hashes;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    files["manifest.json"] = render_json(manifest);
    write_artifacts(inv.out_dir, files);
    if (inv.verbosity > 0) log << "[spinbus] wrote " << files.size() << " files to " << inv.out_dir.string() << '\n';
  } catch (const std::exception& e) {
    log << "spinbus: " << inv.subcommand << " failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace spinbus::cli
