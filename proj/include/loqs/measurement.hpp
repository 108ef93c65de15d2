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

#include <algorithm>
#include <optional>

#include "loqs/fock.hpp"
#include "loqs/rng.hpp"

namespace loqs {

/// Photon counts observed on an ordered subset of modes.
struct DetectionPattern {
  std::vector<int> measured_modes;
  std::vector<int> counts;

  friend bool operator==(const DetectionPattern&, const DetectionPattern&) = default;
};

/// Outcome of a destructive photon-counting measurement: the measured modes
/// are removed from the post-measurement state.
struct MeasurementResult {
  DetectionPattern pattern;
  double probability = 0.0;
  PureState post_state;
};

/// Number-resolving detector with sub-unit efficiency and count saturation.
struct DetectorModel {
  double efficiency = 1.0;
  int max_resolved_count = std::numeric_limits<int>::max();
};

/// Requested herald pattern has zero probability.  Distinct from
/// std::invalid_argument so callers can tell "impossible" from "malformed".
class HeraldImpossibleError : public std::runtime_error {
 public:
  explicit HeraldImpossibleError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require_measured_modes(const PureState& s, const std::vector<int>& modes) {
  int m = s.space().mode_count();
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  if (modes.empty()) throw std::invalid_argument("measurement: empty mode list");
  for (int mode : modes) {
    if (mode < 0 || mode >= m) throw std::invalid_argument("measurement: mode out of range");
    if (seen[static_cast<std::size_t>(mode)]) throw std::invalid_argument("measurement: duplicate mode");
    seen[static_cast<std::size_t>(mode)] = true;
  }
}

inline std::vector<int> counts_on_modes(const OccupationVector& occ, const std::vector<int>& modes) {
  std::vector<int> counts(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) counts[i] = occ[static_cast<std::size_t>(modes[i])];
  return counts;
}

}  // namespace detail

/// Born distribution of photon-count patterns on a mode subset.  The returned
/// probabilities sum to the squared norm of the input, so heralded branches
/// keep their weights.  Zero-probability patterns are omitted.
inline std::vector<std::pair<DetectionPattern, double>> outcome_distribution(
    const PureState& s, const std::vector<int>& modes) {
  if (s.is_zero()) throw std::invalid_argument("outcome_distribution: empty state");
  detail::require_measured_modes(s, modes);
  std::map<std::vector<int>, double> grouped;
  for (const auto& [occ, amp] : s.amplitudes()) {
    grouped[detail::counts_on_modes(occ, modes)] += std::norm(amp);
  }
  std::vector<std::pair<DetectionPattern, double>> result;
  result.reserve(grouped.size());
  for (const auto& [counts, probability] : grouped) {
    if (probability > 0.0) result.push_back({DetectionPattern{modes, counts}, probability});
  }
  return result;
}

/// Projects onto one detection pattern, removes the measured modes, and
/// normalizes the conditional state.  The returned probability is the Born
/// probability of the pattern.
inline MeasurementResult postselect(const PureState& s, const DetectionPattern& pattern) {
  detail::require_measured_modes(s, pattern.measured_modes);
  if (pattern.counts.size() != pattern.measured_modes.size()) {
    throw std::invalid_argument("postselect: counts/modes length mismatch");
  }
  for (int count : pattern.counts) {
    if (count < 0) throw std::invalid_argument("postselect: negative count");
  }

  int m = s.space().mode_count();
  std::vector<bool> measured(static_cast<std::size_t>(m), false);
  for (int mode : pattern.measured_modes) measured[static_cast<std::size_t>(mode)] = true;

  int detected_photons = total_photons(pattern.counts);
  int remaining_modes = m - static_cast<int>(pattern.measured_modes.size());
  int remaining_cutoff = std::max(0, s.space().photon_cutoff() - detected_photons);
  PureState conditional{FockSpace(remaining_modes, remaining_cutoff)};

  double probability = 0.0;
  for (const auto& [occ, amp] : s.amplitudes()) {
    if (detail::counts_on_modes(occ, pattern.measured_modes) != pattern.counts) continue;
    probability += std::norm(amp);
    OccupationVector kept;
    kept.reserve(static_cast<std::size_t>(remaining_modes));
    for (int mode = 0; mode < m; ++mode) {
      if (!measured[static_cast<std::size_t>(mode)]) kept.push_back(occ[static_cast<std::size_t>(mode)]);
    }
    conditional.add_amplitude(kept, amp);
  }
  if (probability <= 1e-26) {
    throw HeraldImpossibleError("herald impossible: pattern has zero probability");
  }
  conditional.scale(Complex(1.0 / std::sqrt(probability), 0.0));
  return {pattern, probability, std::move(conditional)};
}

/// Samples one detection pattern with Born probabilities and collapses.
inline MeasurementResult sample_outcome(const PureState& s, const std::vector<int>& modes, Rng& rng) {
  auto distribution = outcome_distribution(s, modes);
  double total = 0.0;
  for (const auto& [pattern, probability] : distribution) total += probability;
  double u = rng.next_unit() * total;
  double cumulative = 0.0;
  for (const auto& [pattern, probability] : distribution) {
    cumulative += probability;
    if (u < cumulative) return postselect(s, pattern);
  }
  return postselect(s, distribution.back().first);
}

inline MeasurementResult sample_outcome(const PureState& s, const std::vector<int>& modes,
                                        std::uint64_t seed) {
  Rng rng(seed);
  return sample_outcome(s, modes, rng);
}

/// Photon counting through an imperfect detector.  Every photon arriving at a
/// measured mode is absorbed; each is *registered* independently with
/// probability `efficiency`, and registered counts saturate at
/// `max_resolved_count`.  The post-state and the reported probability belong
/// to the true (pre-thinning) outcome; only the reported counts degrade.
///
/// An unregistered photon is the same Bernoulli process as the photon-loss
/// channel, located at the detector instead of in the channel; the two are
/// statistically interchangeable but are modeled at their own locations.
inline MeasurementResult detect_with_model(const PureState& s, const std::vector<int>& modes,
                                           const DetectorModel& model, Rng& rng) {
  if (model.efficiency < 0.0 || model.efficiency > 1.0) {
    throw std::invalid_argument("detector efficiency must lie in [0, 1]");
  }
  if (model.max_resolved_count < 0) throw std::invalid_argument("negative detector resolution");
  MeasurementResult true_outcome = sample_outcome(s, modes, rng);
  std::vector<int> reported(true_outcome.pattern.counts.size(), 0);
  for (std::size_t i = 0; i < reported.size(); ++i) {
    int arrived = true_outcome.pattern.counts[i];
    int registered = arrived;
    if (model.efficiency < 1.0) {
      registered = 0;
      for (int photon = 0; photon < arrived; ++photon) {
        if (rng.bernoulli(model.efficiency)) ++registered;
      }
    }
    reported[i] = std::min(registered, model.max_resolved_count);
  }
  true_outcome.pattern.counts = std::move(reported);
  return true_outcome;
}

inline MeasurementResult detect_with_model(const PureState& s, const std::vector<int>& modes,
                                           const DetectorModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return detect_with_model(s, modes, model, rng);
}

enum class PhotonPresence { kAbsent, kPresent };

struct QndBranch {
  PhotonPresence label = PhotonPresence::kAbsent;
  double probability = 0.0;
  PureState post_state;
};

/// Ideal quantum nondemolition presence check on a rail pair: projects onto
/// "zero photons across the pair" vs "at least one", without removing modes
/// or photons.  Branch probabilities sum to the squared norm of the input.
inline std::vector<QndBranch> qnd_photon_presence(const PureState& s, int rail_a, int rail_b) {
  if (s.is_zero()) throw std::invalid_argument("qnd_photon_presence: empty state");
  int m = s.space().mode_count();
  if (rail_a < 0 || rail_a >= m || rail_b < 0 || rail_b >= m || rail_a == rail_b) {
    throw std::invalid_argument("qnd_photon_presence: invalid rail pair");
  }
  PureState absent(s.space());
  PureState present(s.space());
  for (const auto& [occ, amp] : s.amplitudes()) {
    int photons = occ[static_cast<std::size_t>(rail_a)] + occ[static_cast<std::size_t>(rail_b)];
    (photons == 0 ? absent : present).add_amplitude(occ, amp);
  }
  std::vector<QndBranch> branches;
  double p_absent = absent.norm_squared();
  double p_present = present.norm_squared();
  if (p_absent > 0.0) {
    absent.scale(Complex(1.0 / std::sqrt(p_absent), 0.0));
    branches.push_back({PhotonPresence::kAbsent, p_absent, std::move(absent)});
  }
  if (p_present > 0.0) {
    present.scale(Complex(1.0 / std::sqrt(p_present), 0.0));
    branches.push_back({PhotonPresence::kPresent, p_present, std::move(present)});
  }
  return branches;
}

}  // namespace loqs
