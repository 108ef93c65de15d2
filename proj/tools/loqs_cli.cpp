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

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "loqs/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitContractViolation = 2;

loqs::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw loqs::SchemaError("cannot open config file '" + path + "'");
  loqs::Json j;
  try {
    j = loqs::Json::parse(in);
  } catch (const loqs::Json::parse_error& error) {
    throw loqs::SchemaError(path + ": " + error.what());
  }
  return loqs::parse_scenario(j);
}

std::string default_output_dir() {
  if (const char* env = std::getenv("LOQS_OUT_DIR")) return env;
  return ".";
}

int run_command(const std::string& config_path, std::string out_dir,
                const std::vector<std::string>& csv_series) {
  loqs::Scenario scenario = load_scenario(config_path);
  loqs::Report report = loqs::run_scenario(scenario);

  std::filesystem::create_directories(out_dir);
  std::filesystem::path report_path =
      std::filesystem::path(out_dir) / (scenario.name + ".report.json");
  {
    std::ofstream out(report_path);
    out << loqs::report_to_json(report).dump(2) << '\n';
  }
  std::cout << "report: " << report_path.string() << '\n';

  for (const std::string& series : csv_series) {
    std::string csv = loqs::emit_figure_data(report, series);
    std::filesystem::path csv_path =
        std::filesystem::path(out_dir) / (scenario.name + "." + series + ".csv");
    std::ofstream out(csv_path);
    out << csv;
    std::cout << "series: " << csv_path.string() << '\n';
  }

  for (const loqs::CheckEntry& check : report.checks) {
    std::cout << (check.passed ? "[ok]   " : "[FAIL] ") << check.name << " value=" << check.value
              << " expected=" << check.expected << " tolerance=" << check.tolerance << '\n';
  }
  if (!report.all_checks_passed()) {
    std::cerr << "numerical contract violated; see failed checks above" << '\n';
    return kExitContractViolation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loqs: exact Fock-space simulator of measurement-heralded linear-optical gates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_output_dir();
  std::vector<std::string> csv_series;

  CLI::App* run = app.add_subcommand("run", "execute a scenario config and write its report");
  run->add_option("config", config_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory (default: $LOQS_OUT_DIR or .)");
  run->add_option("--csv", csv_series, "also emit the named series as CSV");

  CLI::App* validate = app.add_subcommand("validate", "check a scenario config against the schema");
  validate->add_option("config", config_path, "scenario JSON file")->required();

  CLI::App* list = app.add_subcommand("list-scenarios", "print the known scenario kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    int code = app.exit(error);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, csv_series);
    if (validate->parsed()) {
      loqs::Scenario scenario = load_scenario(config_path);
      std::cout << "valid: " << scenario.name << " ("
                << loqs::scenario_kind_to_string(scenario.kind) << ", seed " << scenario.seed
                << ")\n";
      return kExitOk;
    }
    if (list->parsed()) {
      for (const auto& [kind, name] : loqs::scenario_kind_names()) std::cout << name << '\n';
      return kExitOk;
    }
  } catch (const loqs::SchemaError& error) {
    std::cerr << "config error: " << error.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
