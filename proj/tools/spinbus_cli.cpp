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

#include <CLI11.hpp>

#include "spinbus/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spinbus: state transfer through a Heisenberg spin bus"};
  app.set_version_flag("--version", SPINBUS_VERSION);

  spinbus::cli::Invocation inv;
  std::string config;
  std::string out = "out";
  int threads = 0;
  app.add_option("subcommand", inv.subcommand, "spectrum | trace | optimum | effective | scan-lambda | scan-theta | "
                                               "scan-position | scan-disorder | check-mixed")
      ->required();
  app.add_option("-c,--config", config, "JSON config file");
  app.add_option("--set", inv.overrides, "config override key=value (dotted keys, repeatable)");
  app.add_option("-o,--out", out, "output directory");
  app.add_option("-j,--threads", threads, "worker threads (default: SPINBUS_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", inv.verbosity, "more progress output");
  CLI11_PARSE(app, argc, argv);

  inv.config = config;
  inv.out_dir = out;
  if (threads > 0) inv.threads = threads;
  return spinbus::cli::dispatch(inv);
}
