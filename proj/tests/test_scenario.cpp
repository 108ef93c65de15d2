// Copyright 2026 The loqs Authors
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

#include <catch2/catch.hpp>

#include "loqs/scenario.hpp"
#include "oracles.hpp"

using namespace loqs;

namespace {

Scenario make_scenario(ScenarioKind kind, ScenarioParams params) {
  Scenario s;
  s.name = "test-" + scenario_kind_to_string(kind);
  s.kind = kind;
  s.seed = 777;
  s.params = std::move(params);
  return s;
}

}  // namespace

TEST_CASE("scenario serialization round trip") {
  KernelCrosscheckParams with_circuit{10, 4, 3, 8,
                                      OpticalCircuit{FockSpace(3, 2),
                                                     {BeamSplitter{0.3, 0.1, 0, 2},
                                                      PhaseShift{1.1, 1}}}};
  std::vector<Scenario> scenarios = {
      make_scenario(ScenarioKind::kNsDemo, NsDemoParams{250}),
      make_scenario(ScenarioKind::kCsignDemo, CsignDemoParams{{4, 1}, {0, 3}}),
      make_scenario(ScenarioKind::kCnotDemo, CnotDemoParams{{2, 0}, {1, 5}}),
      make_scenario(ScenarioKind::kHomScan, HomScanParams{33, 0.0, 1.5}),
      make_scenario(ScenarioKind::kTeleportScan, TeleportScanParams{{1, 2}}),
      make_scenario(ScenarioKind::kMemoryScan, MemoryScanParams{4, 0.1, 500}),
      make_scenario(ScenarioKind::kKernelCrosscheck, KernelCrosscheckParams{10, 4, 3, 8, std::nullopt}),
      make_scenario(ScenarioKind::kKernelCrosscheck, with_circuit),
  };
  for (const Scenario& scenario : scenarios) {
    Scenario parsed = parse_scenario(scenario_to_json(scenario));
    CHECK(parsed == scenario);
  }
}

TEST_CASE("gate demos honor mode bindings") {
  Scenario custom = make_scenario(ScenarioKind::kCsignDemo, CsignDemoParams{{4, 1}, {0, 3}});
  Report report = run_scenario(custom);
  CHECK(report.all_checks_passed());

  Scenario cnot = make_scenario(ScenarioKind::kCnotDemo, CnotDemoParams{{2, 0}, {1, 5}});
  Report cnot_report = run_scenario(cnot);
  CHECK(cnot_report.all_checks_passed());
}

TEST_CASE("config schema is strict") {
  Json valid = {
      {"version", 1}, {"name", "x"}, {"kind", "ns_demo"}, {"seed", 1}, {"params", Json::object()}};
  CHECK_NOTHROW(parse_scenario(valid));

  Json unknown_top = valid;
  unknown_top["extra"] = 1;
  CHECK_THROWS_AS(parse_scenario(unknown_top), SchemaError);

  Json unknown_param = valid;
  unknown_param["params"]["bogus"] = 3;
  CHECK_THROWS_AS(parse_scenario(unknown_param), SchemaError);

  Json bad_kind = valid;
  bad_kind["kind"] = "warp_drive";
  CHECK_THROWS_AS(parse_scenario(bad_kind), SchemaError);

  Json missing_seed = valid;
  missing_seed.erase("seed");
  CHECK_THROWS_AS(parse_scenario(missing_seed), SchemaError);

  Json wrong_version = valid;
  wrong_version["version"] = 2;
  CHECK_THROWS_AS(parse_scenario(wrong_version), SchemaError);

  Json negative_trials = valid;
  negative_trials["params"]["trials"] = -3;
  CHECK_THROWS_AS(parse_scenario(negative_trials), SchemaError);

  Json bad_loss = {{"version", 1},
                   {"name", "m"},
                   {"kind", "memory_scan"},
                   {"seed", 1},
                   {"params", {{"loss", 1.5}}}};
  CHECK_THROWS_AS(parse_scenario(bad_loss), SchemaError);

  Json bad_rails = {{"version", 1},
                    {"name", "c"},
                    {"kind", "csign_demo"},
                    {"seed", 1},
                    {"params", {{"qubit_a", {2, 2}}}}};
  CHECK_THROWS_AS(parse_scenario(bad_rails), SchemaError);

  Json bad_circuit = {{"version", 1},
                      {"name", "k"},
                      {"kind", "kernel_crosscheck"},
                      {"seed", 1},
                      {"params", {{"circuit", {{"modes", 2}}}}}};
  CHECK_THROWS_AS(parse_scenario(bad_circuit), SchemaError);

  // Names become output filename stems.
  Json bad_name = valid;
  bad_name["name"] = "../escape";
  CHECK_THROWS_AS(parse_scenario(bad_name), SchemaError);
}

TEST_CASE("ns demo scenario passes its checks") {
  Scenario scenario = make_scenario(ScenarioKind::kNsDemo, NsDemoParams{50});
  Report report = run_scenario(scenario);
  CHECK(report.all_checks_passed());
  CHECK(report.scalars.at("success_probability") == Approx(0.25).margin(1e-9));
}

TEST_CASE("hom scan scenario hits the closed form") {
  Scenario scenario = make_scenario(ScenarioKind::kHomScan, HomScanParams{});
  Report report = run_scenario(scenario);
  CHECK(report.all_checks_passed());
  CHECK(report.scalars.at("coincidence_at_quarter_pi") == Approx(0.0).margin(1e-12));
  const Series& series = report.series.at("hom_scan");
  REQUIRE(series.columns == std::vector<std::string>{"theta", "coincidence_probability"});
  for (const auto& row : series.rows) {
    CHECK(row[1] == Approx(oracles::hom_coincidence_closed_form(row[0])).margin(1e-12));
  }
}

TEST_CASE("teleport scan scenario reports the exact series") {
  Scenario scenario = make_scenario(ScenarioKind::kTeleportScan, TeleportScanParams{{1, 2, 3}});
  Report report = run_scenario(scenario);
  CHECK(report.all_checks_passed());
  const Series& series = report.series.at("teleport_scan");
  REQUIRE(series.rows.size() == 3);
  CHECK(series.rows[0][1] == Approx(0.5).margin(1e-9));
  CHECK(series.rows[1][1] == Approx(2.0 / 3.0).margin(1e-9));
  CHECK(series.rows[2][1] == Approx(0.75).margin(1e-9));
}

TEST_CASE("reports are deterministic for a fixed scenario and seed") {
  Scenario ns = make_scenario(ScenarioKind::kNsDemo, NsDemoParams{25});
  std::string first = report_to_json(run_scenario(ns), false).dump();
  std::string second = report_to_json(run_scenario(ns), false).dump();
  CHECK(first == second);

  Scenario memory = make_scenario(ScenarioKind::kMemoryScan, MemoryScanParams{3, 0.08, 200});
  Report mem_report = run_scenario(memory);
  std::string mem_first = report_to_json(mem_report, false).dump();
  std::string mem_second = report_to_json(run_scenario(memory), false).dump();
  CHECK(mem_first == mem_second);
  CHECK(mem_report.series.at("memory_scan").columns ==
        std::vector<std::string>{"cycle", "mean_fidelity", "survival_fraction"});
}

TEST_CASE("figure data emission") {
  Scenario scenario = make_scenario(ScenarioKind::kHomScan, HomScanParams{5, 0.0, 1.0});
  Report report = run_scenario(scenario);
  std::string csv = emit_figure_data(report, "hom_scan");
  CHECK(csv.rfind("theta,coincidence_probability\n", 0) == 0);
  CHECK(csv == emit_figure_data(report, "hom_scan"));
  CHECK_THROWS_WITH(emit_figure_data(report, "nope"), Catch::Contains("hom_scan"));
}

TEST_CASE("state and circuit serialization round trip") {
  Rng rng(55);
  PureState state = oracles::random_state(FockSpace(3, 2), rng);
  PureState back = state_from_json(state_to_json(state));
  REQUIRE(back.space() == state.space());
  for (const auto& [occ, amp] : state.amplitudes()) {
    CHECK(back.amplitude(occ) == amp);
  }

  OpticalCircuit circuit{FockSpace(3, 2),
                         {BeamSplitter{0.4, 1.2, 0, 2}, PhaseShift{2.5, 1},
                          BeamSplitter{1.0, 0.0, 1, 2}}};
  OpticalCircuit round = circuit_from_json(circuit_to_json(circuit));
  REQUIRE(round.elements.size() == circuit.elements.size());
  CHECK(round.space == circuit.space);
  CHECK(std::get<BeamSplitter>(round.elements[0]).theta == 0.4);
  CHECK(std::get<PhaseShift>(round.elements[1]).phi == 2.5);

  Json bad = circuit_to_json(circuit);
  bad["elements"][0]["kind"] = "wormhole";
  CHECK_THROWS_AS(circuit_from_json(bad), std::invalid_argument);
}
