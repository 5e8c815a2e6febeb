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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"

#include "doctest.h"
#include "sdfl/config.hpp"
#include "sdfl/reporting.hpp"

using namespace sdfl;
namespace fs = std::filesystem;

namespace {

constexpr const char* kDesk = R"(seed = 4
algorithm = ceps
[problem]
m = 5
n = 30
s = 3
samples_min = 40
samples_max = 60
[topology]
edge_prob = 0.7
rate = 0.5
[termination]
max_ticks = 200
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sdfl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const ParsedConfig p = parse_config_text("[problem]\nm = 32\nn = 1000\n");
    const ExperimentConfig& c = p.config;
    CHECK(p.warnings.empty());
    CHECK(c.algorithm == "ceps");
    CHECK(c.ceps.gamma == 5.0);
    CHECK(c.ceps.mu == 0.1);
    CHECK(c.ceps.kappa_min == 10);
    CHECK(c.ceps.kappa_max == 15);
    CHECK(c.privacy.params.delta == 0.5);
    CHECK(c.privacy.params.sensitivity == 0.1);
    CHECK(c.privacy.params.epsilon == 0.5);
    CHECK(c.topology.rate == 0.2);
    CHECK(c.encoding_rows() == 500);
    CHECK(c.termination.max_ticks == 10000u);
  }

  TEST_CASE("values and comments") {
    const ParsedConfig p = parse_config_text(R"(# run
algorithm = dpsgd-pc
seed = 99
[problem]
m = 8   # nodes
n = 50
s = 4
[privacy]
enabled = false
clip = clip
[codec]
perfect = true
d = 20
)");
    CHECK(p.config.algorithm == "dpsgd-pc");
    CHECK(p.config.seed == 99u);
    CHECK(p.config.problem.m == 8);
    CHECK_FALSE(p.config.privacy.params.enabled);
    CHECK(p.config.privacy.clip == ClipMode::kClip);
    CHECK(p.config.codec.perfect);
    CHECK(p.config.codec.d == 20);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_config_text("[problem]\nm = 4\nn = 10\n[privacy]\nepsilon = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[problem]\nn = 10\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[problem]\nm = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[problem]\nm = four\nn = 10\n"), ConfigError);
    try {
      parse_config_text("[problem]\nm = 4\nn = 10\nbogus = 1\n[ceps]\nnope = 2\n");
      FAIL("expected unknown-key error");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("problem.bogus") != std::string::npos);
      CHECK(msg.find("ceps.nope") != std::string::npos);
    }
    try {
      parse_config_text("[problem]\nm = 4\nn = 10\n[ceps]\nmu = abc\n");
      FAIL("expected type error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("ceps.mu") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("/nonexistent/sdfl.ini"), ConfigError);
  }

  TEST_CASE("duplicate keys keep the last value") {
    const ParsedConfig p = parse_config_text("[problem]\nm = 4\nn = 10\nm = 6\n");
    CHECK(p.config.problem.m == 6);
    REQUIRE(p.warnings.size() == 1u);
    CHECK(p.warnings[0].find("problem.m") != std::string::npos);
  }

  TEST_CASE("relative paths resolve against the config directory") {
    const ParsedConfig p = parse_config_text("[problem]\nm = 4\nkind = logistic_regression\ndata = data/a.svm\n", "/etc/runs");
    CHECK(fs::path(p.config.problem.data_path) == fs::path("/etc/runs/data/a.svm"));
  }

  TEST_CASE("hash is stable under reordering") {
    const ParsedConfig a = parse_config_text("seed = 3\n[problem]\nm = 4\nn = 10\n[ceps]\nmu = 0.2\n");
    const ParsedConfig c = parse_config_text("seed = 3\n[ceps]\nmu = 0.2\n[problem]\nn = 10\nm = 4\n");
    CHECK(config_hash(a.config) == config_hash(c.config));
    CHECK(canonical_config(a.config) == canonical_config(c.config));
    ExperimentConfig d = a.config;
    d.ceps.mu = 0.3;
    CHECK(config_hash(d) != config_hash(a.config));
    CHECK(hash_hex(0xabcULL).size() == 16u);
  }

  TEST_CASE("canonical text parses back to the same config") {
    ExperimentConfig cfg = parse_config_text(kDesk).config;
    cfg.privacy.clip = ClipMode::kOff;
    cfg.codec.decoder.step_scale = 1.5;
    std::string text;
    std::string section;
    std::istringstream lines(canonical_config(cfg));
    for (std::string line; std::getline(lines, line);) {
      const auto dot = line.find('.');
      const auto eq = line.find(" = ");
      if (dot != std::string::npos && dot < eq) {
        const std::string sec = line.substr(0, dot);
        if (sec != section) {
          text += "[" + sec + "]\n";
          section = sec;
        }
        text += line.substr(dot + 1) + "\n";
      } else {
        text = line + "\n" + text;
      }
    }
    CHECK(config_hash(parse_config_text(text).config) == config_hash(cfg));
  }

  TEST_CASE("set_config_value") {
    ExperimentConfig cfg;
    set_config_value(cfg, "topology.rate", "0.8");
    CHECK(cfg.topology.rate == 0.8);
    CHECK_THROWS_AS(set_config_value(cfg, "topology.nope", "1"), ConfigError);
    CHECK(config_keys().size() > 30u);
  }
}

TEST_SUITE("reporting") {
  TEST_CASE("identical manifests give identical files") {
    const ExperimentConfig cfg = parse_config_text(kDesk).config;
    const fs::path a = fresh_dir("repro_a");
    const fs::path b = fresh_dir("repro_b");
    RunManifest ma = make_manifest("desk.ini", cfg, a.string());
    ma.algorithms = {"ceps", "dpsgd"};
    ma.allow_divergence = true;
    RunManifest mb = ma;
    mb.out_dir = b.string();
    const RunOutcome ra = run_experiment(ma);
    const RunOutcome rb = run_experiment(mb);
    CHECK(ra.errors.empty());
    CHECK(ra.exit_code == 0);
    REQUIRE(ra.traces.size() == 2u);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("timing_", 0) == 0 || name == "manifest.json") continue;
      CAPTURE(name);
      CHECK(slurp(entry.path()) == slurp(b / name));
      ++compared;
    }
    CHECK(compared >= 5);
    CHECK(fs::exists(a / "trace_dp-1bcs.csv"));
    CHECK(fs::exists(a / "summary_d-psgd.json"));
  }

  TEST_CASE("trace csv and summary") {
    ExperimentConfig cfg = parse_config_text(kDesk).config;
    cfg.privacy.params.enabled = false;
    const ExperimentData data = build_experiment_data(cfg);
    const MetricsTrace tr = run_ceps(cfg, data);
    std::ostringstream csv;
    write_trace_csv(tr, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("algorithm,tick,comm_round", 0) == 0);
    CHECK(text.find("wall_ms") == std::string::npos);
    CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == tr.rows.size() + 1);

    const RunManifest man = make_manifest("desk.ini", cfg, "");
    const auto j = nlohmann::json::parse(summary_json(tr, diagnostics(tr, data, 20), man));
    CHECK(j["algorithm"] == "NoDP-1BCS");
    CHECK(j["status"] == to_string(tr.status));
    CHECK(j["eps_total"].is_null());
    CHECK(j.contains("diagnostics"));
    CHECK(j.contains("config"));

    const auto mj = nlohmann::json::parse(manifest_json(man));
    CHECK(mj["config_hash"] == hash_hex(config_hash(cfg)));
    CHECK(mj["seed"] == 4);
  }

  TEST_CASE("exit codes") {
    ExperimentConfig cfg = parse_config_text(kDesk).config;
    cfg.termination.max_ticks = 3;
    RunManifest man = make_manifest("desk.ini", cfg, "");
    CHECK(run_experiment(man).exit_code == 1);
    man.allow_divergence = true;
    CHECK(run_experiment(man).exit_code == 0);
    man.config.problem.n = 2;
    CHECK(run_experiment(man).exit_code == 2);
  }

  TEST_CASE("sweep records failing cells and continues") {
    ExperimentConfig cfg = parse_config_text(kDesk).config;
    const fs::path dir = fresh_dir("sweep");
    RunManifest man = make_manifest("desk.ini", cfg, dir.string());
    man.allow_divergence = true;
    const SweepTable t = sweep(man, SweepAxis::kEpsilon, {0.5, -1.0, 2.0});
    REQUIRE(t.cells.size() == 3u);
    CHECK(t.cells[1].status == "error");
    CHECK_FALSE(t.cells[1].error.empty());
    CHECK(t.cells[0].status != "error");
    CHECK(t.cells[2].status != "error");
    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK(fs::exists(dir / "dtv_vs_epsilon.csv"));
    CHECK(fs::exists(dir / "objective_vs_round.csv"));

    std::ostringstream os;
    write_sweep_csv(t, os);
    CHECK(os.str().find("time") == std::string::npos);

    CHECK(parse_sweep_axis("r") == SweepAxis::kRate);
    CHECK_THROWS_AS(parse_sweep_axis("mu"), ConfigError);
    CHECK(apply_sweep_value(cfg, SweepAxis::kM, 9).problem.m == 9);
    CHECK_THROWS_AS(apply_sweep_value(cfg, SweepAxis::kM, 2.5), ConfigError);
  }

  TEST_CASE("long-format plot rows") {
    MetricsTrace a;
    a.algorithm = "A";
    a.rows.resize(3);
    MetricsTrace b;
    b.algorithm = "B";
    b.rows.resize(2);
    std::ostringstream os;
    write_objective_vs_round({a, b}, os);
    const std::string text = os.str();
    CHECK(text.rfind("algorithm,x_metric,x,y_metric,y\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    CHECK(text.find("\nA,") != std::string::npos);
    CHECK(text.find("\nB,") != std::string::npos);
  }
}
