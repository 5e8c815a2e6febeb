// Copyright 2026 The SDFL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sdfl/config.hpp"
#include "sdfl/reporting.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_trace_line(const sdfl::MetricsTrace& t) {
  if (t.rows.empty()) return;
  const auto& r = t.last();
  fmt::print("{:<12} status={:<10} objective={:.6f} iterations={} comm_rounds={} dtv_bytes={}\n", t.algorithm,
             sdfl::to_string(t.status), r.objective, r.tick, r.comm_round, r.dtv_bits_ideal / 8);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse decentralized federated learning simulator"};
  std::string config_path;
  std::string out_dir = "out";
  std::string algo;
  std::string sweep_spec;
  std::uint64_t seed = 0;
  std::uint64_t max_rounds = 0;
  bool perfect = false;
  bool no_dp = false;
  bool allow_diverge = false;

  app.add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--algo", algo, "Algorithm tag(s), comma separated: ceps, dpsgd, dpsgd-dn, dpsgd-pc, dfedavgm");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--sweep", sweep_spec, "AXIS=v1,v2,... with AXIS in {m, epsilon, r}");
  app.add_option("--max-rounds", max_rounds, "Maximum iterations per run");
  app.add_flag("--perfect-comm", perfect, "Exchange exact models instead of one-bit messages");
  app.add_flag("--no-dp", no_dp, "Disable gradient perturbation");
  app.add_flag("--allow-diverge", allow_diverge, "Exit 0 even when a run does not converge");
  CLI11_PARSE(app, argc, argv);

  try {
    sdfl::ParsedConfig parsed = sdfl::parse_config(config_path);
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    sdfl::ExperimentConfig cfg = parsed.config;
    if (*seed_opt) cfg.seed = seed;
    if (max_rounds > 0) cfg.termination.max_ticks = max_rounds;
    if (perfect) cfg.codec.perfect = true;
    if (no_dp) cfg.privacy.params.enabled = false;
    cfg.validate();

    sdfl::RunManifest manifest = sdfl::make_manifest(config_path, cfg, out_dir);
    manifest.allow_divergence = allow_diverge;
    if (!algo.empty()) manifest.algorithms = split(algo, ',');

    if (!sweep_spec.empty()) {
      const auto eq = sweep_spec.find('=');
      if (eq == std::string::npos) throw sdfl::ConfigError("--sweep expects AXIS=v1,v2,...");
      const sdfl::SweepAxis axis = sdfl::parse_sweep_axis(sweep_spec.substr(0, eq));
      std::vector<double> values;
      for (const auto& v : split(sweep_spec.substr(eq + 1), ',')) values.push_back(std::stod(v));
      if (values.empty()) throw sdfl::ConfigError("--sweep needs at least one value");
      const sdfl::SweepTable table = sdfl::sweep(manifest, axis, values);
      sdfl::write_sweep_csv(table, std::cout);
      int code = 0;
      for (const auto& c : table.cells) {
        if (c.status == "error") code = 2;
        else if (c.status != "converged" && !allow_diverge && code == 0) code = 1;
      }
      return code;
    }

    const sdfl::RunOutcome outcome = sdfl::run_experiment(manifest);
    for (const auto& t : outcome.traces) print_trace_line(t);
    for (const auto& e : outcome.errors) std::cerr << "error: " << e << "\n";
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
