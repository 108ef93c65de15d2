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

#include <json.hpp>

#include "loqs/interferometer.hpp"
#include "loqs/measurement.hpp"

namespace loqs {

using Json = nlohmann::json;

/// States serialize as the space plus a list of [occupation, re, im] triples.
inline Json state_to_json(const PureState& s) {
  Json amplitudes = Json::array();
  for (const auto& [occ, amp] : s.amplitudes()) {
    amplitudes.push_back(Json::array({occ, amp.real(), amp.imag()}));
  }
  return Json{{"modes", s.space().mode_count()},
              {"cutoff", s.space().photon_cutoff()},
              {"amplitudes", amplitudes}};
}

inline PureState state_from_json(const Json& j) {
  FockSpace space(j.at("modes").get<int>(), j.at("cutoff").get<int>());
  PureState state(space);
  for (const Json& entry : j.at("amplitudes")) {
    OccupationVector occ = entry.at(0).get<OccupationVector>();
    state.set_amplitude(occ, Complex(entry.at(1).get<double>(), entry.at(2).get<double>()));
  }
  return state;
}

/// Circuits serialize as an ordered element list with kind, modes, and
/// angles in radians.
inline Json circuit_to_json(const OpticalCircuit& circuit) {
  Json elements = Json::array();
  for (const Element& element : circuit.elements) {
    if (std::holds_alternative<BeamSplitter>(element)) {
      const auto& bs = std::get<BeamSplitter>(element);
      elements.push_back(Json{{"kind", "beamsplitter"},
                              {"theta", bs.theta},
                              {"phi", bs.phi},
                              {"mode_i", bs.mode_i},
                              {"mode_j", bs.mode_j}});
    } else {
      const auto& ps = std::get<PhaseShift>(element);
      elements.push_back(Json{{"kind", "phaseshift"}, {"phi", ps.phi}, {"mode", ps.mode}});
    }
  }
  return Json{{"modes", circuit.space.mode_count()},
              {"cutoff", circuit.space.photon_cutoff()},
              {"elements", elements}};
}

inline OpticalCircuit circuit_from_json(const Json& j) {
  OpticalCircuit circuit{FockSpace(j.at("modes").get<int>(), j.at("cutoff").get<int>()), {}};
  for (const Json& entry : j.at("elements")) {
    std::string kind = entry.at("kind").get<std::string>();
    if (kind == "beamsplitter") {
      circuit.elements.push_back(BeamSplitter{entry.at("theta").get<double>(),
                                              entry.at("phi").get<double>(),
                                              entry.at("mode_i").get<int>(),
                                              entry.at("mode_j").get<int>()});
    } else if (kind == "phaseshift") {
      circuit.elements.push_back(
          PhaseShift{entry.at("phi").get<double>(), entry.at("mode").get<int>()});
    } else {
      throw std::invalid_argument("circuit_from_json: unknown element kind '" + kind + "'");
    }
  }
  return circuit;
}

inline Json pattern_to_json(const DetectionPattern& pattern) {
  return Json{{"modes", pattern.measured_modes}, {"counts", pattern.counts}};
}

inline DetectionPattern pattern_from_json(const Json& j) {
  return DetectionPattern{j.at("modes").get<std::vector<int>>(),
                          j.at("counts").get<std::vector<int>>()};
}

inline Json measurement_result_to_json(const MeasurementResult& result) {
  return Json{{"pattern", pattern_to_json(result.pattern)},
              {"probability", result.probability},
              {"post_state", state_to_json(result.post_state)}};
}

}  // namespace loqs
