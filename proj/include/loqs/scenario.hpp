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

#pragma once

#include <cctype>
#include <chrono>
#include <cstdio>

#include "loqs/io.hpp"
#include "loqs/teleport_ec.hpp"

namespace loqs {

inline constexpr int kScenarioVersion = 1;

/// Config-file violation; carries the offending field path.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

enum class ScenarioKind {
  kNsDemo,
  kCsignDemo,
  kCnotDemo,
  kHomScan,
  kTeleportScan,
  kMemoryScan,
  kKernelCrosscheck,
};

inline const std::vector<std::pair<ScenarioKind, std::string>>& scenario_kind_names() {
  static const std::vector<std::pair<ScenarioKind, std::string>> names = {
      {ScenarioKind::kNsDemo, "ns_demo"},
      {ScenarioKind::kCsignDemo, "csign_demo"},
      {ScenarioKind::kCnotDemo, "cnot_demo"},
      {ScenarioKind::kHomScan, "hom_scan"},
      {ScenarioKind::kTeleportScan, "teleport_scan"},
      {ScenarioKind::kMemoryScan, "memory_scan"},
      {ScenarioKind::kKernelCrosscheck, "kernel_crosscheck"},
  };
  return names;
}

inline std::string scenario_kind_to_string(ScenarioKind kind) {
  for (const auto& [k, name] : scenario_kind_names()) {
    if (k == kind) return name;
  }
  throw std::logic_error("unknown scenario kind");
}

inline ScenarioKind scenario_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : scenario_kind_names()) {
    if (n == name) return k;
  }
  std::string known;
  for (const auto& [k, n] : scenario_kind_names()) known += (known.empty() ? "" : ", ") + n;
  throw SchemaError("$.kind: unknown scenario kind '" + name + "' (known: " + known + ")");
}

struct NsDemoParams {
  int trials = 1000;
  friend bool operator==(const NsDemoParams&, const NsDemoParams&) = default;
};
struct CsignDemoParams {
  std::array<int, 2> qubit_a{0, 1};  // dual-rail mode bindings
  std::array<int, 2> qubit_b{2, 3};
  friend bool operator==(const CsignDemoParams&, const CsignDemoParams&) = default;
};
struct CnotDemoParams {
  std::array<int, 2> control{0, 1};  // polarization rail bindings (H, V)
  std::array<int, 2> target{2, 3};
  friend bool operator==(const CnotDemoParams&, const CnotDemoParams&) = default;
};
struct HomScanParams {
  int theta_points = 65;
  double theta_min = 0.0;
  double theta_max = std::numbers::pi / 2.0;
  friend bool operator==(const HomScanParams&, const HomScanParams&) = default;
};
struct TeleportScanParams {
  std::vector<int> n_values = {1, 2, 3};
  friend bool operator==(const TeleportScanParams&, const TeleportScanParams&) = default;
};
struct MemoryScanParams {
  int cycles = 10;
  double loss = 0.05;
  int trajectories = 10000;
  friend bool operator==(const MemoryScanParams&, const MemoryScanParams&) = default;
};
struct KernelCrosscheckParams {
  int circuits = 100;
  int max_modes = 5;
  int max_photons = 4;
  int elements_per_circuit = 12;
  /// Optional explicit circuit to cross-check in addition to the random ones.
  std::optional<OpticalCircuit> circuit;
  friend bool operator==(const KernelCrosscheckParams&, const KernelCrosscheckParams&) = default;
};

using ScenarioParams = std::variant<NsDemoParams, CsignDemoParams, CnotDemoParams, HomScanParams,
                                    TeleportScanParams, MemoryScanParams, KernelCrosscheckParams>;

/// A fully specified, reproducible experiment: serialized form plus seed
/// determine every number in the report.
struct Scenario {
  int version = kScenarioVersion;
  std::string name;
  ScenarioKind kind = ScenarioKind::kNsDemo;
  std::uint64_t seed = 0;
  ScenarioParams params;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct CheckEntry {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
};

struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  Scenario scenario;
  std::map<std::string, double> scalars;
  std::map<std::string, Series> series;
  std::vector<CheckEntry> checks;
  double elapsed_seconds = 0.0;

  bool all_checks_passed() const {
    for (const CheckEntry& check : checks) {
      if (!check.passed) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Config parsing (strict: unknown fields are errors, not warnings).

namespace detail {

inline void require_only_keys(const Json& j, const std::vector<std::string>& keys,
                              const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw SchemaError(where + ": unknown field '" + key + "'");
    }
  }
}

inline const Json& require_field(const Json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

inline int get_positive_int(const Json& j, const std::string& key, int fallback,
                            const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() <= 0) {
    throw SchemaError(where + "." + key + ": expected a positive integer");
  }
  return static_cast<int>(it->get<long long>());
}

inline double get_unit_double(const Json& j, const std::string& key, double fallback,
                              const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw SchemaError(where + "." + key + ": expected a number");
  double value = it->get<double>();
  if (value < 0.0 || value > 1.0) throw SchemaError(where + "." + key + ": expected value in [0, 1]");
  return value;
}

inline double get_double(const Json& j, const std::string& key, double fallback,
                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw SchemaError(where + "." + key + ": expected a number");
  return it->get<double>();
}

inline std::array<int, 2> get_rail_pair(const Json& j, const std::string& key,
                                        std::array<int, 2> fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
      !(*it)[1].is_number_integer()) {
    throw SchemaError(where + "." + key + ": expected an array of two mode indices");
  }
  std::array<int, 2> rails{(*it)[0].get<int>(), (*it)[1].get<int>()};
  if (rails[0] < 0 || rails[1] < 0 || rails[0] == rails[1]) {
    throw SchemaError(where + "." + key + ": rails must be distinct and non-negative");
  }
  return rails;
}

}  // namespace detail

inline ScenarioParams parse_scenario_params(ScenarioKind kind, const Json& params) {
  const std::string where = "$.params";
  if (!params.is_object()) throw SchemaError(where + ": expected an object");
  switch (kind) {
    case ScenarioKind::kNsDemo: {
      detail::require_only_keys(params, {"trials"}, where);
      NsDemoParams p;
      p.trials = detail::get_positive_int(params, "trials", p.trials, where);
      return p;
    }
    case ScenarioKind::kCsignDemo: {
      detail::require_only_keys(params, {"qubit_a", "qubit_b"}, where);
      CsignDemoParams p;
      p.qubit_a = detail::get_rail_pair(params, "qubit_a", p.qubit_a, where);
      p.qubit_b = detail::get_rail_pair(params, "qubit_b", p.qubit_b, where);
      return p;
    }
    case ScenarioKind::kCnotDemo: {
      detail::require_only_keys(params, {"control", "target"}, where);
      CnotDemoParams p;
      p.control = detail::get_rail_pair(params, "control", p.control, where);
      p.target = detail::get_rail_pair(params, "target", p.target, where);
      return p;
    }
    case ScenarioKind::kHomScan: {
      detail::require_only_keys(params, {"theta_points", "theta_min", "theta_max"}, where);
      HomScanParams p;
      p.theta_points = detail::get_positive_int(params, "theta_points", p.theta_points, where);
      if (p.theta_points < 2) throw SchemaError(where + ".theta_points: need at least 2 points");
      p.theta_min = detail::get_double(params, "theta_min", p.theta_min, where);
      p.theta_max = detail::get_double(params, "theta_max", p.theta_max, where);
      if (p.theta_max <= p.theta_min) {
        throw SchemaError(where + ".theta_max: must exceed theta_min");
      }
      return p;
    }
    case ScenarioKind::kTeleportScan: {
      detail::require_only_keys(params, {"n_values"}, where);
      TeleportScanParams p;
      auto it = params.find("n_values");
      if (it != params.end()) {
        if (!it->is_array() || it->empty()) {
          throw SchemaError(where + ".n_values: expected a non-empty array");
        }
        p.n_values.clear();
        for (const Json& entry : *it) {
          if (!entry.is_number_integer() || entry.get<int>() < 1 || entry.get<int>() > 3) {
            throw SchemaError(where + ".n_values: entries must be integers in 1..3");
          }
          p.n_values.push_back(entry.get<int>());
        }
      }
      return p;
    }
    case ScenarioKind::kMemoryScan: {
      detail::require_only_keys(params, {"cycles", "loss", "trajectories"}, where);
      MemoryScanParams p;
      p.cycles = detail::get_positive_int(params, "cycles", p.cycles, where);
      p.loss = detail::get_unit_double(params, "loss", p.loss, where);
      p.trajectories = detail::get_positive_int(params, "trajectories", p.trajectories, where);
      return p;
    }
    case ScenarioKind::kKernelCrosscheck: {
      detail::require_only_keys(
          params, {"circuits", "max_modes", "max_photons", "elements_per_circuit", "circuit"},
          where);
      KernelCrosscheckParams p;
      p.circuits = detail::get_positive_int(params, "circuits", p.circuits, where);
      p.max_modes = detail::get_positive_int(params, "max_modes", p.max_modes, where);
      p.max_photons = detail::get_positive_int(params, "max_photons", p.max_photons, where);
      p.elements_per_circuit =
          detail::get_positive_int(params, "elements_per_circuit", p.elements_per_circuit, where);
      if (p.max_modes < 2 || p.max_modes > 6) {
        throw SchemaError(where + ".max_modes: expected 2..6");
      }
      if (p.max_photons > 5) throw SchemaError(where + ".max_photons: expected at most 5");
      if (auto it = params.find("circuit"); it != params.end()) {
        try {
          p.circuit = circuit_from_json(*it);
        } catch (const std::exception& error) {
          throw SchemaError(where + ".circuit: " + error.what());
        }
      }
      return p;
    }
  }
  throw std::logic_error("unreachable scenario kind");
}

inline Scenario parse_scenario(const Json& j) {
  if (!j.is_object()) throw SchemaError("$: expected an object");
  detail::require_only_keys(j, {"version", "name", "kind", "seed", "params"}, "$");
  Scenario scenario;
  const Json& version = detail::require_field(j, "version", "$");
  if (!version.is_number_integer() || version.get<int>() != kScenarioVersion) {
    throw SchemaError("$.version: expected " + std::to_string(kScenarioVersion));
  }
  scenario.version = version.get<int>();
  const Json& name = detail::require_field(j, "name", "$");
  if (!name.is_string() || name.get<std::string>().empty()) {
    throw SchemaError("$.name: expected a non-empty string");
  }
  scenario.name = name.get<std::string>();
  // The name becomes an output filename stem.
  for (char c : scenario.name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') {
      throw SchemaError("$.name: only letters, digits, '-', '_', '.' are allowed");
    }
  }
  const Json& kind = detail::require_field(j, "kind", "$");
  if (!kind.is_string()) throw SchemaError("$.kind: expected a string");
  scenario.kind = scenario_kind_from_string(kind.get<std::string>());
  const Json& seed = detail::require_field(j, "seed", "$");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw SchemaError("$.seed: expected an unsigned integer");
  }
  if (seed.is_number_integer() && seed.get<long long>() < 0) {
    throw SchemaError("$.seed: expected an unsigned integer");
  }
  scenario.seed = seed.get<std::uint64_t>();
  scenario.params = parse_scenario_params(scenario.kind, detail::require_field(j, "params", "$"));
  return scenario;
}

inline Json scenario_to_json(const Scenario& s) {
  Json params = Json::object();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NsDemoParams>) {
          params["trials"] = p.trials;
        } else if constexpr (std::is_same_v<T, CsignDemoParams>) {
          params["qubit_a"] = p.qubit_a;
          params["qubit_b"] = p.qubit_b;
        } else if constexpr (std::is_same_v<T, CnotDemoParams>) {
          params["control"] = p.control;
          params["target"] = p.target;
        } else if constexpr (std::is_same_v<T, HomScanParams>) {
          params["theta_points"] = p.theta_points;
          params["theta_min"] = p.theta_min;
          params["theta_max"] = p.theta_max;
        } else if constexpr (std::is_same_v<T, TeleportScanParams>) {
          params["n_values"] = p.n_values;
        } else if constexpr (std::is_same_v<T, MemoryScanParams>) {
          params["cycles"] = p.cycles;
          params["loss"] = p.loss;
          params["trajectories"] = p.trajectories;
        } else if constexpr (std::is_same_v<T, KernelCrosscheckParams>) {
          params["circuits"] = p.circuits;
          params["max_modes"] = p.max_modes;
          params["max_photons"] = p.max_photons;
          params["elements_per_circuit"] = p.elements_per_circuit;
          if (p.circuit) params["circuit"] = circuit_to_json(*p.circuit);
        }
      },
      s.params);
  return Json{{"version", s.version},
              {"name", s.name},
              {"kind", scenario_kind_to_string(s.kind)},
              {"seed", s.seed},
              {"params", params}};
}

// ---------------------------------------------------------------------------
// Scenario execution.

namespace detail {

inline Complex random_complex(Rng& rng) {
  return Complex(rng.next_unit() * 2.0 - 1.0, rng.next_unit() * 2.0 - 1.0);
}

inline PureState random_dual_rail_qubit(Rng& rng) {
  PureState s{FockSpace(2, 1)};
  Complex a0 = random_complex(rng);
  Complex a1 = random_complex(rng);
  double norm = std::sqrt(std::norm(a0) + std::norm(a1));
  s.set_amplitude({1, 0}, a0 / norm);
  s.set_amplitude({0, 1}, a1 / norm);
  return s;
}

/// Random sparse normalized state in the space's top photon sector.
inline PureState random_state_in(const FockSpace& space, Rng& rng) {
  PureState s(space);
  int modes = space.mode_count();
  int photons = space.photon_cutoff();
  int terms = 1 + static_cast<int>(rng.next_u64() % 3);
  for (int term = 0; term < terms; ++term) {
    OccupationVector occ(static_cast<std::size_t>(modes), 0);
    int remaining = photons;
    for (int mode = 0; mode + 1 < modes; ++mode) {
      int count = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(remaining + 1));
      occ[static_cast<std::size_t>(mode)] = count;
      remaining -= count;
    }
    occ[static_cast<std::size_t>(modes - 1)] = remaining;
    s.add_amplitude(occ, random_complex(rng));
  }
  return normalize(s).state;
}

inline void add_check(Report& report, const std::string& name, double value, double expected,
                      double tolerance) {
  report.checks.push_back(
      {name, std::abs(value - expected) <= tolerance, value, expected, tolerance});
}

inline void run_ns_demo(Report& report, const NsDemoParams& params, Rng& rng) {
  NsParameters solved = solve_ns_parameters();
  auto herald = ns_herald_amplitudes(solved);
  double solver_residual = std::max({std::abs(herald[0] - 0.5), std::abs(herald[1] - herald[0]),
                                     std::abs(herald[2] + herald[0])});

  FockSpace space(1, 2);
  double worst_probability = 0.25;
  double min_fidelity = 1.0;
  for (int trial = 0; trial < params.trials; ++trial) {
    PureState input(space);
    Complex a0 = random_complex(rng);
    Complex a1 = random_complex(rng);
    Complex a2 = random_complex(rng);
    double norm = std::sqrt(std::norm(a0) + std::norm(a1) + std::norm(a2));
    input.set_amplitude({0}, a0 / norm);
    input.set_amplitude({1}, a1 / norm);
    input.set_amplitude({2}, a2 / norm);

    HeraldedGateResult result = ns_gate(input, 0, solved);
    if (std::abs(result.success_probability - 0.25) > std::abs(worst_probability - 0.25)) {
      worst_probability = result.success_probability;
    }
    PureState expected = input;
    expected.set_amplitude({2}, -expected.amplitude({2}));
    min_fidelity = std::min(min_fidelity, fidelity(result.output_state, expected));
  }

  report.scalars["success_probability"] = worst_probability;
  report.scalars["min_output_fidelity"] = min_fidelity;
  report.scalars["solver_residual"] = solver_residual;
  add_check(report, "ns_success_probability", worst_probability, 0.25, 1e-9);
  add_check(report, "ns_output_fidelity", min_fidelity, 1.0, 1e-9);
  add_check(report, "ns_solver_residual", solver_residual, 0.0, 1e-9);
}

/// Basis state of two mode-pair qubits bound to arbitrary rails; bit 0 of
/// the pair selects the second rail.
inline PureState bound_two_qubit_basis(const std::array<int, 2>& first,
                                       const std::array<int, 2>& second, int index,
                                       int mode_count) {
  OccupationVector occ(static_cast<std::size_t>(mode_count), 0);
  occ[static_cast<std::size_t>(first[(index & 2) ? 1 : 0])] = 1;
  occ[static_cast<std::size_t>(second[(index & 1) ? 1 : 0])] = 1;
  return make_basis_state(FockSpace(mode_count, 2), occ);
}

inline void run_csign_demo(Report& report, const CsignDemoParams& p, Rng& rng) {
  NsParameters params = solve_ns_parameters();
  DualRailQubit qa{p.qubit_a[0], p.qubit_a[1]};
  DualRailQubit qb{p.qubit_b[0], p.qubit_b[1]};
  int mode_count = std::max({qa.mode_a, qa.mode_b, qb.mode_a, qb.mode_b}) + 1;

  double matrix_deviation = 0.0;
  double worst_probability = 0.0;
  Complex reference(0.0, 0.0);
  for (int input = 0; input < 4; ++input) {
    PureState basis = bound_two_qubit_basis(p.qubit_a, p.qubit_b, input, mode_count);
    HeraldedGateResult result = csign(basis, qa, qb, params);
    worst_probability = std::max(worst_probability, std::abs(result.success_probability - 0.0625));
    if (input == 0) {
      reference = inner_product(bound_two_qubit_basis(p.qubit_a, p.qubit_b, 0, mode_count),
                                result.output_state);
    }
    for (int output = 0; output < 4; ++output) {
      Complex amp = inner_product(bound_two_qubit_basis(p.qubit_a, p.qubit_b, output, mode_count),
                                  result.output_state) /
                    reference;
      Complex expected(0.0, 0.0);
      if (output == input) expected = (input == 3) ? Complex(-1.0, 0.0) : Complex(1.0, 0.0);
      matrix_deviation = std::max(matrix_deviation, std::abs(amp - expected));
    }
  }

  // Random two-qubit product state on the bound rails.
  PureState superposition(FockSpace(mode_count, 2));
  std::array<Complex, 2> a{random_complex(rng), random_complex(rng)};
  std::array<Complex, 2> b{random_complex(rng), random_complex(rng)};
  double norm = std::sqrt((std::norm(a[0]) + std::norm(a[1])) * (std::norm(b[0]) + std::norm(b[1])));
  for (int index = 0; index < 4; ++index) {
    PureState basis = bound_two_qubit_basis(p.qubit_a, p.qubit_b, index, mode_count);
    Complex value = a[(index >> 1) & 1] * b[index & 1] / norm;
    superposition = add(superposition, basis.scale(value));
  }
  HeraldedGateResult result = csign(superposition, qa, qb, params);
  PureState ideal = superposition;
  {
    OccupationVector both(static_cast<std::size_t>(mode_count), 0);
    both[static_cast<std::size_t>(qa.mode_b)] = 1;
    both[static_cast<std::size_t>(qb.mode_b)] = 1;
    ideal.set_amplitude(both, -ideal.amplitude(both));
  }
  double superposition_fidelity = fidelity(result.output_state, ideal);

  report.scalars["success_probability"] = result.success_probability;
  report.scalars["logical_matrix_deviation"] = matrix_deviation;
  report.scalars["superposition_fidelity"] = superposition_fidelity;
  add_check(report, "csign_logical_matrix", matrix_deviation, 0.0, 1e-9);
  add_check(report, "csign_superposition_fidelity", superposition_fidelity, 1.0, 1e-9);
  // Herald rate of the implemented two-NS network: both heralds at 1/4.
  add_check(report, "csign_success_probability", result.success_probability, 0.0625, 1e-9);
  add_check(report, "csign_probability_input_independent", worst_probability, 0.0, 1e-9);
}

inline void run_cnot_demo(Report& report, const CnotDemoParams& p, Rng& rng) {
  PolarizationQubit control{p.control[0], p.control[1]};
  PolarizationQubit target{p.target[0], p.target[1]};
  int mode_count = std::max({control.rail_h, control.rail_v, target.rail_h, target.rail_v}) + 1;
  double min_fidelity = 1.0;
  double worst_probability = 0.0;

  auto check_input = [&](const PureState& input, const PureState& expected) {
    auto branches = cnot_polarization_branches(input, control, target);
    double aggregate = branches.front().success_probability;
    worst_probability = std::max(worst_probability, std::abs(aggregate - 0.25));
    for (const HeraldedGateResult& branch : branches) {
      if (!branch.success) continue;
      min_fidelity = std::min(min_fidelity, fidelity(branch.output_state, expected));
    }
  };

  for (int input = 0; input < 4; ++input) {
    int flipped = ((input & 2) != 0) ? (input ^ 1) : input;  // CNOT truth table
    check_input(bound_two_qubit_basis(p.control, p.target, input, mode_count),
                bound_two_qubit_basis(p.control, p.target, flipped, mode_count));
  }

  // Entangling test: (|H> + |V>) control on an |H> target lands on a Bell
  // state.
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  PureState plus_h =
      add(bound_two_qubit_basis(p.control, p.target, 0, mode_count).scale(inv_sqrt2),
          bound_two_qubit_basis(p.control, p.target, 2, mode_count).scale(inv_sqrt2));
  PureState bell = add(bound_two_qubit_basis(p.control, p.target, 0, mode_count).scale(inv_sqrt2),
                       bound_two_qubit_basis(p.control, p.target, 3, mode_count).scale(inv_sqrt2));
  check_input(plus_h, bell);

  // One random product input keeps the herald rate honest away from basis
  // states.
  PureState random_input(FockSpace(mode_count, 2));
  std::array<Complex, 2> a{random_complex(rng), random_complex(rng)};
  std::array<Complex, 2> b{random_complex(rng), random_complex(rng)};
  double norm = std::sqrt((std::norm(a[0]) + std::norm(a[1])) * (std::norm(b[0]) + std::norm(b[1])));
  for (int index = 0; index < 4; ++index) {
    random_input = add(random_input, bound_two_qubit_basis(p.control, p.target, index, mode_count)
                                         .scale(a[(index >> 1) & 1] * b[index & 1] / norm));
  }
  {
    auto branches = cnot_polarization_branches(random_input, control, target);
    worst_probability =
        std::max(worst_probability, std::abs(branches.front().success_probability - 0.25));
  }

  report.scalars["success_probability"] = 0.25 + worst_probability;
  report.scalars["min_output_fidelity"] = min_fidelity;
  add_check(report, "cnot_truth_table_fidelity", min_fidelity, 1.0, 1e-9);
  add_check(report, "cnot_success_probability", 0.25 + worst_probability, 0.25, 1e-9);
}

inline void run_hom_scan(Report& report, const HomScanParams& params) {
  FockSpace space(2, 2);
  PureState input = make_basis_state(space, {1, 1});
  Series series;
  series.columns = {"theta", "coincidence_probability"};
  double worst_vs_closed_form = 0.0;
  double at_quarter_pi = -1.0;
  for (int point = 0; point < params.theta_points; ++point) {
    double theta = params.theta_min + (params.theta_max - params.theta_min) *
                                          static_cast<double>(point) /
                                          static_cast<double>(params.theta_points - 1);
    PureState out = apply_element(input, BeamSplitter{theta, 0.0, 0, 1});
    double coincidence = std::norm(out.amplitude({1, 1}));
    // Two-mode expansion gives coincidence amplitude cos(2 theta).
    double closed_form = std::cos(2.0 * theta) * std::cos(2.0 * theta);
    worst_vs_closed_form = std::max(worst_vs_closed_form, std::abs(coincidence - closed_form));
    series.rows.push_back({theta, coincidence});
  }
  {
    PureState out = apply_element(input, BeamSplitter{std::numbers::pi / 4.0, 0.0, 0, 1});
    at_quarter_pi = std::norm(out.amplitude({1, 1}));
  }
  report.series["hom_scan"] = std::move(series);
  report.scalars["coincidence_at_quarter_pi"] = at_quarter_pi;
  report.scalars["max_deviation_from_closed_form"] = worst_vs_closed_form;
  add_check(report, "hom_coincidence_at_quarter_pi", at_quarter_pi, 0.0, 1e-12);
  add_check(report, "hom_matches_closed_form", worst_vs_closed_form, 0.0, 1e-12);
}

inline void run_teleport_scan(Report& report, const TeleportScanParams& params, Rng& rng) {
  PureState qubit = random_dual_rail_qubit(rng);
  Series series;
  series.columns = {"n", "success_probability", "failure_probability"};
  double worst = 0.0;
  bool failures_report_values = true;
  double min_fidelity = 1.0;
  for (int n : params.n_values) {
    auto branches = teleport_branches(qubit, DualRailQubit{0, 1}, make_resource(n));
    double success = teleport_success_probability(branches);
    for (const TeleportBranch& branch : branches) {
      if (branch.success) {
        min_fidelity = std::min(min_fidelity, fidelity(branch.post_state, qubit));
      } else if (!branch.measured_logical.has_value()) {
        failures_report_values = false;
      }
    }
    double expected = static_cast<double>(n) / static_cast<double>(n + 1);
    worst = std::max(worst, std::abs(success - expected));
    series.rows.push_back({static_cast<double>(n), success, 1.0 - success});
  }
  report.series["teleport_scan"] = std::move(series);
  report.scalars["max_probability_deviation"] = worst;
  report.scalars["min_success_fidelity"] = min_fidelity;
  add_check(report, "teleport_success_probability", worst, 0.0, 1e-9);
  add_check(report, "teleport_success_fidelity", min_fidelity, 1.0, 1e-9);
  add_check(report, "teleport_failures_heralded", failures_report_values ? 1.0 : 0.0, 1.0, 0.0);
}

inline void run_memory_scan(Report& report, const MemoryScanParams& params, Rng& rng) {
  PureState logical = random_dual_rail_qubit(rng);
  MemoryReport memory = memory_cycle(logical, params.cycles, params.loss, params.trajectories, rng);

  Series series;
  series.columns = {"cycle", "mean_fidelity", "survival_fraction"};
  Series analytic;
  analytic.columns = {"cycle", "survival"};
  double min_fidelity = 1.0;
  double worst_sigma = 0.0;
  for (const MemoryCycleStats& stats : memory.per_cycle) {
    series.rows.push_back({static_cast<double>(stats.cycle), stats.mean_fidelity,
                           stats.survival_fraction});
    analytic.rows.push_back({static_cast<double>(stats.cycle), stats.analytic_survival});
    if (stats.survival_fraction > 0.0) min_fidelity = std::min(min_fidelity, stats.mean_fidelity);
    double p = stats.analytic_survival;
    double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-30) / static_cast<double>(params.trajectories));
    worst_sigma = std::max(worst_sigma,
                           std::abs(stats.survival_fraction - p) / std::max(sigma, 1e-15));
  }
  report.series["memory_scan"] = std::move(series);
  report.series["analytic_survival"] = std::move(analytic);
  report.scalars["min_surviving_fidelity"] = min_fidelity;
  report.scalars["max_survival_sigma_deviation"] = worst_sigma;
  report.scalars["loss_below_gate_threshold"] =
      params.loss < kMaxTolerableLossPerGate ? 1.0 : 0.0;
  report.scalars["gate_loss_threshold"] = kMaxTolerableLossPerGate;
  report.scalars["gate_error_threshold"] = kMaxTolerableGateErrorProbability;
  add_check(report, "memory_surviving_fidelity", min_fidelity, 1.0, 1e-9);
  add_check(report, "memory_survival_within_3_sigma", worst_sigma, 0.0, 3.0);
}

inline void run_kernel_crosscheck(Report& report, const KernelCrosscheckParams& params, Rng& rng) {
  double worst = 0.0;

  auto crosscheck = [&](const OpticalCircuit& circuit, const PureState& input) {
    PureState sequential = apply_circuit(input, circuit);
    PureState via_permanent = apply_mode_unitary(input, circuit_mode_matrix(circuit));
    for (const auto& [occ, amp] : sequential.amplitudes()) {
      worst = std::max(worst, std::abs(amp - via_permanent.amplitude(occ)));
    }
    for (const auto& [occ, amp] : via_permanent.amplitudes()) {
      worst = std::max(worst, std::abs(amp - sequential.amplitude(occ)));
    }
  };

  if (params.circuit) {
    crosscheck(*params.circuit, random_state_in(params.circuit->space, rng));
  }
  for (int trial = 0; trial < params.circuits; ++trial) {
    int modes = 2 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(params.max_modes - 1));
    int photons = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(params.max_photons));
    FockSpace space(modes, photons);

    OpticalCircuit circuit{space, {}};
    for (int element = 0; element < params.elements_per_circuit; ++element) {
      if (rng.next_unit() < 0.75 || modes < 2) {
        int mode_i = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(modes));
        int mode_j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(modes - 1));
        if (mode_j >= mode_i) ++mode_j;
        circuit.elements.push_back(BeamSplitter{rng.next_unit() * 2.0 * std::numbers::pi,
                                                rng.next_unit() * 2.0 * std::numbers::pi, mode_i,
                                                mode_j});
      } else {
        circuit.elements.push_back(PhaseShift{rng.next_unit() * 2.0 * std::numbers::pi,
                                              static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(modes))});
      }
    }

    crosscheck(circuit, random_state_in(space, rng));
  }
  report.scalars["max_amplitude_deviation"] = worst;
  add_check(report, "kernel_paths_agree", worst, 0.0, 1e-10);
}

}  // namespace detail

/// Executes a scenario.  Identical scenario plus seed reproduces the numeric
/// payload bit for bit; only the runtime metadata varies.
inline Report run_scenario(const Scenario& scenario) {
  Report report;
  report.scenario = scenario;
  Rng rng(scenario.seed);
  auto started = std::chrono::steady_clock::now();
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, NsDemoParams>) {
          detail::run_ns_demo(report, params, rng);
        } else if constexpr (std::is_same_v<T, CsignDemoParams>) {
          detail::run_csign_demo(report, params, rng);
        } else if constexpr (std::is_same_v<T, CnotDemoParams>) {
          detail::run_cnot_demo(report, params, rng);
        } else if constexpr (std::is_same_v<T, HomScanParams>) {
          detail::run_hom_scan(report, params);
        } else if constexpr (std::is_same_v<T, TeleportScanParams>) {
          detail::run_teleport_scan(report, params, rng);
        } else if constexpr (std::is_same_v<T, MemoryScanParams>) {
          detail::run_memory_scan(report, params, rng);
        } else if constexpr (std::is_same_v<T, KernelCrosscheckParams>) {
          detail::run_kernel_crosscheck(report, params, rng);
        }
      },
      scenario.params);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

/// Serializes a report.  The numeric payload (everything except "runtime") is
/// deterministic for a fixed scenario and seed.
inline Json report_to_json(const Report& report, bool include_runtime = true) {
  Json checks = Json::array();
  for (const CheckEntry& check : report.checks) {
    checks.push_back(Json{{"name", check.name},
                          {"passed", check.passed},
                          {"value", check.value},
                          {"expected", check.expected},
                          {"tolerance", check.tolerance}});
  }
  Json series = Json::object();
  for (const auto& [name, data] : report.series) {
    series[name] = Json{{"columns", data.columns}, {"rows", data.rows}};
  }
  Json j{{"scenario", scenario_to_json(report.scenario)},
         {"results", report.scalars},
         {"checks", checks},
         {"series", series}};
  if (include_runtime) {
    j["runtime"] = Json{{"elapsed_seconds", report.elapsed_seconds}};
  }
  return j;
}

/// Plot-ready CSV for one series: header plus rows, full double precision.
inline std::string emit_figure_data(const Report& report, const std::string& series_name) {
  auto it = report.series.find(series_name);
  if (it == report.series.end()) {
    std::string available;
    for (const auto& [name, data] : report.series) {
      available += (available.empty() ? "" : ", ") + name;
    }
    throw std::invalid_argument("unknown series '" + series_name + "' (available: " +
                                (available.empty() ? "none" : available) + ")");
  }
  std::string out;
  const Series& series = it->second;
  for (std::size_t column = 0; column < series.columns.size(); ++column) {
    if (column) out += ',';
    out += series.columns[column];
  }
  out += '\n';
  char buffer[64];
  for (const auto& row : series.rows) {
    for (std::size_t column = 0; column < row.size(); ++column) {
      if (column) out += ',';
      std::snprintf(buffer, sizeof(buffer), "%.17g", row[column]);
      out += buffer;
    }
    out += '\n';
  }
  return out;
}

}  // namespace loqs
