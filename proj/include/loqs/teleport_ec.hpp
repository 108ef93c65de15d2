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

#include <mutex>

#include "loqs/gates.hpp"

namespace loqs {

// Scalability thresholds quoted in reports; no fault-tolerance analysis is
// attempted here.
inline constexpr double kMaxTolerableGateErrorProbability = 0.5;
inline constexpr double kMaxTolerableLossPerGate = 0.01;

/// The n-photon, 2n-mode entangled teleportation resource
///   |t_n> = sum_j |1>^j |0>^(n-j) (x) |0>^j |1>^(n-j) / sqrt(n+1).
/// Modes 0..n-1 are the measurement half (r_1..r_n), modes n..2n-1 the
/// output half (o_1..o_n).
struct ResourceState {
  int n = 1;
  PureState state;
};

inline ResourceState make_resource(int n) {
  if (n < 1 || n > 3) {
    throw std::invalid_argument("make_resource: n must lie in 1..3 at desk scale");
  }
  FockSpace space(2 * n, n);
  PureState state(space);
  double amplitude = 1.0 / std::sqrt(static_cast<double>(n + 1));
  for (int j = 0; j <= n; ++j) {
    OccupationVector occ(static_cast<std::size_t>(2 * n), 0);
    for (int i = 0; i < j; ++i) occ[static_cast<std::size_t>(i)] = 1;           // r_1..r_j
    for (int i = j; i < n; ++i) occ[static_cast<std::size_t>(n + i)] = 1;       // o_(j+1)..o_n
    state.set_amplitude(occ, Complex(amplitude, 0.0));
  }
  return {n, std::move(state)};
}

/// (n+1)-mode discrete Fourier transform; for n = 1 this is a 50:50 beam
/// splitter up to phase convention.
inline ModeUnitary dft_unitary(int dim) {
  ComplexMatrix m(dim, dim);
  double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int j = 0; j < dim; ++j) {
    for (int l = 0; l < dim; ++l) {
      m(j, l) = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>(j) *
                                      static_cast<double>(l) / static_cast<double>(dim));
    }
  }
  return ModeUnitary(std::move(m));
}

namespace detail {

/// Index map after removing a sorted-unique set of modes.
inline int shifted_index(int mode, const std::vector<int>& removed) {
  int shift = 0;
  for (int r : removed) {
    if (r < mode) ++shift;
  }
  return mode - shift;
}

/// Amplitude of detector pattern `counts` when the (n+1)-mode Fourier
/// transform acts on a basis state with `rail_photons` in the first mode and
/// the first `resource_photons` of the remaining modes occupied.  These are
/// the per-pattern teleportation coefficients; they do not depend on the
/// teleported state.
inline Complex teleport_pattern_amplitude(int n, const std::vector<int>& counts, int rail_photons,
                                          int resource_photons) {
  FockSpace space(n + 1, n + 1);
  OccupationVector occ(static_cast<std::size_t>(n + 1), 0);
  occ[0] = rail_photons;
  for (int i = 0; i < resource_photons; ++i) occ[static_cast<std::size_t>(1 + i)] = 1;
  PureState reference = make_basis_state(space, occ);
  PureState transformed = apply_mode_unitary(reference, dft_unitary(n + 1));
  return transformed.amplitude(counts);
}

struct TeleportSideOutcome {
  int total_count = 0;                 // photons seen by the F measurement
  bool success = false;
  int measured_logical = 0;            // defined on failure
  Complex correction_phase{1.0, 0.0};  // multiplies the |1> component on success
};

inline TeleportSideOutcome classify_teleport_pattern(int n, const std::vector<int>& counts) {
  TeleportSideOutcome outcome;
  outcome.total_count = total_photons(counts);
  int k = outcome.total_count;
  if (k == 0 || k == n + 1) {
    outcome.success = false;
    // k = 0: the teleported rail was empty (logical 0); k = n + 1: occupied.
    outcome.measured_logical = (k == 0) ? 0 : 1;
    return outcome;
  }
  outcome.success = true;
  Complex a = teleport_pattern_amplitude(n, counts, 0, k);      // empty-rail branch
  Complex b = teleport_pattern_amplitude(n, counts, 1, k - 1);  // occupied-rail branch
  if (std::abs(std::abs(a) - std::abs(b)) > 1e-10 || std::abs(a) < 1e-12) {
    throw std::logic_error("teleport: Fourier measurement lost the balance property");
  }
  outcome.correction_phase = a / b;
  return outcome;
}

}  // namespace detail

struct TeleportBranch {
  DetectionPattern pattern;
  double probability = 0.0;  // relative to the squared norm of the input
  bool success = false;
  PureState post_state;
  std::vector<std::string> corrections;
  std::optional<int> measured_logical;
};

/// Exact enumeration of every detector branch of a single-qubit
/// teleportation through |t_n>.  The occupied rail of the qubit is teleported
/// through the Fourier measurement; on success the output rail is relocated
/// so the qubit keeps its mode indices.  Failure branches (0 or n+1 photons
/// counted) are measurements of the incoming qubit and report the measured
/// logical value.
inline std::vector<TeleportBranch> teleport_branches(const PureState& s, const DualRailQubit& q,
                                                     const ResourceState& resource) {
  detail::require_logical(s, q.mode_a, q.mode_b, "teleport_qubit");
  double input_norm2 = s.norm_squared();
  int m = s.space().mode_count();
  int n = resource.n;

  PureState work = tensor(s, resource.state);
  // Resource mode layout inside the workspace.
  auto r_mode = [&](int i) { return m + i; };          // i in 0..n-1
  auto o_mode = [&](int i) { return m + n + i; };      // i in 0..n-1

  std::vector<int> measured;
  measured.push_back(q.mode_b);
  for (int i = 0; i < n; ++i) measured.push_back(r_mode(i));
  work = apply_mode_unitary_on_modes(work, dft_unitary(n + 1), measured);

  std::vector<TeleportBranch> branches;
  for (const auto& [pattern, probability] : outcome_distribution(work, measured)) {
    detail::TeleportSideOutcome outcome = detail::classify_teleport_pattern(n, pattern.counts);
    int k = outcome.total_count;

    // The output half of the resource is deterministic given k: modes below
    // the output rail are empty, modes above it hold one photon each.  On
    // failure (k = 0 or n + 1) every output mode is deterministic.
    DetectionPattern full = pattern;
    for (int i = 0; i < n; ++i) {
      bool is_output_rail = outcome.success && (i == k - 1);
      if (is_output_rail) continue;
      full.measured_modes.push_back(o_mode(i));
      full.counts.push_back(i >= k ? 1 : 0);
    }
    MeasurementResult collapsed = postselect(work, full);

    TeleportBranch branch;
    branch.pattern = pattern;
    branch.probability = collapsed.probability / input_norm2;
    branch.success = outcome.success;
    if (!outcome.success) {
      branch.post_state = std::move(collapsed.post_state);
      branch.measured_logical = outcome.measured_logical;
      branches.push_back(std::move(branch));
      continue;
    }

    // Phase feed-forward on the fresh rail, then relocate it back to the
    // qubit's rail position.
    std::vector<int> removed = full.measured_modes;
    std::sort(removed.begin(), removed.end());
    int new_rail = detail::shifted_index(o_mode(k - 1), removed);
    PureState corrected = collapsed.post_state;
    double phase = std::arg(outcome.correction_phase);
    if (std::abs(phase) > 1e-15) {
      corrected = apply_element(corrected, PhaseShift{phase, new_rail});
      branch.corrections.push_back("phase " + std::to_string(phase) + " on output rail");
    }
    // Remaining modes are the original ones (minus the measured rail) in
    // order, then the fresh rail last; insert the fresh rail at the old
    // rail's position.
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(m));
    for (int target = 0; target < m; ++target) {
      if (target == q.mode_b) {
        order.push_back(m - 1);
      } else {
        int without_rail = target < q.mode_b ? target : target - 1;
        order.push_back(without_rail);
      }
    }
    branch.post_state = reorder_modes(corrected, order);
    branch.corrections.push_back("relocated output rail to mode " + std::to_string(q.mode_b));
    branches.push_back(std::move(branch));
  }
  return branches;
}

/// Success probability of teleportation through |t_n>: n / (n + 1).
inline double teleport_success_probability(const std::vector<TeleportBranch>& branches) {
  double total = 0.0;
  for (const TeleportBranch& branch : branches) {
    if (branch.success) total += branch.probability;
  }
  return total;
}

/// Samples one teleportation branch.
inline HeraldedGateResult teleport_qubit(const PureState& s, const DualRailQubit& q,
                                         const ResourceState& resource, Rng& rng) {
  std::vector<TeleportBranch> branches = teleport_branches(s, q, resource);
  double aggregate = teleport_success_probability(branches);
  double total = 0.0;
  for (const TeleportBranch& branch : branches) total += branch.probability;
  double u = rng.next_unit() * total;
  double cumulative = 0.0;
  const TeleportBranch* chosen = &branches.back();
  for (const TeleportBranch& branch : branches) {
    cumulative += branch.probability;
    if (u < cumulative) {
      chosen = &branch;
      break;
    }
  }
  return {chosen->success,         chosen->pattern, aggregate, chosen->post_state,
          chosen->corrections,     chosen->measured_logical};
}

inline HeraldedGateResult teleport_qubit(const PureState& s, const DualRailQubit& q,
                                         const ResourceState& resource, std::uint64_t seed) {
  Rng rng(seed);
  return teleport_qubit(s, q, resource, rng);
}

namespace detail {

/// Offline-prepared resource for the teleported controlled-sign gate: two
/// copies of |t_n> with the phase (-1)^(j_A j_B) imprinted across the output
/// halves.  The phase factorizes into mode-level controlled-signs between
/// every output-mode pair plus local pi phases when n is odd; the
/// controlled-signs run through the heralded NS construction and are
/// postselected on success, which is the offline retry loop in exact form.
inline PureState build_cz_resource(int n, const NsParameters& params) {
  PureState base = tensor(make_resource(n).state, make_resource(n).state);
  auto oa_mode = [&](int i) { return n + i; };
  auto ob_mode = [&](int i) { return 3 * n + i; };
  if (n % 2 == 1) {
    for (int i = 0; i < n; ++i) {
      base = apply_element(base, PhaseShift{std::numbers::pi, oa_mode(i)});
      base = apply_element(base, PhaseShift{std::numbers::pi, ob_mode(i)});
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      base = heralded_mode_cz(base, oa_mode(i), ob_mode(l), params).output_state;
    }
  }
  return normalize(base).state;
}

inline const PureState& cz_resource(int n, const NsParameters& params) {
  static std::mutex mutex;
  static std::map<int, PureState> cache;
  std::scoped_lock lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_cz_resource(n, params)).first;
  return it->second;
}

}  // namespace detail

/// One branch of the teleported controlled-sign gate.
struct TeleportedCsignBranch {
  DetectionPattern pattern;
  double probability = 0.0;
  bool success = false;
  PureState post_state;
  std::vector<std::string> corrections;
  std::optional<int> measured_logical;
};

/// Exact enumeration of the online phase of the teleported controlled-sign:
/// both occupied rails are teleported through a controlled-sign-processed
/// resource.  Online success requires both Fourier measurements to succeed,
/// probability (n/(n+1))^2; the offline resource preparation retries do not
/// count.  On success the gate equals diag(1, 1, 1, -1) after the recorded
/// phase feed-forwards.
inline std::vector<TeleportedCsignBranch> teleported_csign_branches(const PureState& s,
                                                                    const DualRailQubit& qa,
                                                                    const DualRailQubit& qb, int n,
                                                                    const NsParameters& params) {
  detail::require_logical(s, qa.mode_a, qa.mode_b, "teleported_csign");
  detail::require_logical(s, qb.mode_a, qb.mode_b, "teleported_csign");
  detail::require_distinct_modes({qa.mode_a, qa.mode_b, qb.mode_a, qb.mode_b},
                                 s.space().mode_count(), "teleported_csign");
  if (n < 1 || n > 3) throw std::invalid_argument("teleported_csign: n must lie in 1..3");
  double input_norm2 = s.norm_squared();
  int m = s.space().mode_count();

  PureState work = tensor(s, detail::cz_resource(n, params));
  auto ra_mode = [&](int i) { return m + i; };
  auto oa_mode = [&](int i) { return m + n + i; };
  auto rb_mode = [&](int i) { return m + 2 * n + i; };
  auto ob_mode = [&](int i) { return m + 3 * n + i; };

  std::vector<int> measured_a{qa.mode_b};
  for (int i = 0; i < n; ++i) measured_a.push_back(ra_mode(i));
  std::vector<int> measured_b{qb.mode_b};
  for (int i = 0; i < n; ++i) measured_b.push_back(rb_mode(i));
  ModeUnitary fourier = dft_unitary(n + 1);
  work = apply_mode_unitary_on_modes(work, fourier, measured_a);
  work = apply_mode_unitary_on_modes(work, fourier, measured_b);

  std::vector<int> measured = measured_a;
  measured.insert(measured.end(), measured_b.begin(), measured_b.end());

  std::vector<TeleportedCsignBranch> branches;
  for (const auto& [pattern, probability] : outcome_distribution(work, measured)) {
    std::vector<int> counts_a(pattern.counts.begin(), pattern.counts.begin() + n + 1);
    std::vector<int> counts_b(pattern.counts.begin() + n + 1, pattern.counts.end());
    detail::TeleportSideOutcome side_a = detail::classify_teleport_pattern(n, counts_a);
    detail::TeleportSideOutcome side_b = detail::classify_teleport_pattern(n, counts_b);

    // Output halves are deterministic given each side's photon count.
    DetectionPattern full = pattern;
    auto add_output_constraints = [&](const detail::TeleportSideOutcome& side, auto mode_of) {
      int k = side.total_count;
      for (int i = 0; i < n; ++i) {
        if (side.success && i == k - 1) continue;
        full.measured_modes.push_back(mode_of(i));
        full.counts.push_back(i >= k ? 1 : 0);
      }
    };
    add_output_constraints(side_a, oa_mode);
    add_output_constraints(side_b, ob_mode);
    MeasurementResult collapsed = postselect(work, full);

    TeleportedCsignBranch branch;
    branch.pattern = pattern;
    branch.probability = collapsed.probability / input_norm2;
    branch.success = side_a.success && side_b.success;
    if (!branch.success) {
      branch.post_state = std::move(collapsed.post_state);
      if (!side_a.success) {
        branch.measured_logical = side_a.measured_logical;
        branch.corrections.push_back("failure measured qubit a = " +
                                     std::to_string(side_a.measured_logical));
      }
      if (!side_b.success) {
        if (!branch.measured_logical) branch.measured_logical = side_b.measured_logical;
        branch.corrections.push_back("failure measured qubit b = " +
                                     std::to_string(side_b.measured_logical));
      }
      branches.push_back(std::move(branch));
      continue;
    }

    std::vector<int> removed = full.measured_modes;
    std::sort(removed.begin(), removed.end());
    int k_a = side_a.total_count;
    int k_b = side_b.total_count;
    int new_rail_a = detail::shifted_index(oa_mode(k_a - 1), removed);
    int new_rail_b = detail::shifted_index(ob_mode(k_b - 1), removed);

    PureState corrected = collapsed.post_state;
    double phase_a = std::arg(side_a.correction_phase);
    double phase_b = std::arg(side_b.correction_phase);
    // Controlled-sign feed-forward from the resource derivation: qubit a
    // needs a pi phase when the other side counted an odd total, and vice
    // versa.
    if (k_b % 2 == 1) phase_a += std::numbers::pi;
    if (k_a % 2 == 1) phase_b += std::numbers::pi;
    if (std::abs(phase_a) > 1e-15) {
      corrected = apply_element(corrected, PhaseShift{phase_a, new_rail_a});
      branch.corrections.push_back("phase " + std::to_string(phase_a) + " on qubit a rail");
    }
    if (std::abs(phase_b) > 1e-15) {
      corrected = apply_element(corrected, PhaseShift{phase_b, new_rail_b});
      branch.corrections.push_back("phase " + std::to_string(phase_b) + " on qubit b rail");
    }

    // Relocate both fresh rails to the original positions.  After removal the
    // surviving original modes come first (in order), then oa_k, then ob_k.
    int survivors = m - 2;
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(m));
    for (int target = 0; target < m; ++target) {
      if (target == qa.mode_b) {
        order.push_back(survivors);
      } else if (target == qb.mode_b) {
        order.push_back(survivors + 1);
      } else {
        int without = target;
        if (target > qa.mode_b) --without;
        if (target > qb.mode_b) --without;
        order.push_back(without);
      }
    }
    branch.post_state = reorder_modes(corrected, order);
    branch.corrections.push_back("relocated output rails");
    branches.push_back(std::move(branch));
  }
  return branches;
}

inline double teleported_csign_online_success(const std::vector<TeleportedCsignBranch>& branches) {
  double total = 0.0;
  for (const TeleportedCsignBranch& branch : branches) {
    if (branch.success) total += branch.probability;
  }
  return total;
}

inline HeraldedGateResult teleported_csign(const PureState& s, const DualRailQubit& qa,
                                           const DualRailQubit& qb, int n,
                                           const NsParameters& params, Rng& rng) {
  std::vector<TeleportedCsignBranch> branches = teleported_csign_branches(s, qa, qb, n, params);
  double aggregate = teleported_csign_online_success(branches);
  double total = 0.0;
  for (const TeleportedCsignBranch& branch : branches) total += branch.probability;
  double u = rng.next_unit() * total;
  double cumulative = 0.0;
  const TeleportedCsignBranch* chosen = &branches.back();
  for (const TeleportedCsignBranch& branch : branches) {
    cumulative += branch.probability;
    if (u < cumulative) {
      chosen = &branch;
      break;
    }
  }
  return {chosen->success,     chosen->pattern, aggregate, chosen->post_state,
          chosen->corrections, chosen->measured_logical};
}

inline HeraldedGateResult teleported_csign(const PureState& s, const DualRailQubit& qa,
                                           const DualRailQubit& qb, int n,
                                           const NsParameters& params, std::uint64_t seed) {
  Rng rng(seed);
  return teleported_csign(s, qa, qb, n, params, rng);
}

/// Photon loss as a Bernoulli trajectory channel.
struct LossChannel {
  double per_pass_loss = 0.0;
  std::vector<int> affected_modes;
};

struct LossOutcome {
  PureState state;                // renormalized survivor
  std::vector<int> lost_modes;    // where deletions occurred; for test oracles only
};

/// Couples each affected mode to a fresh environment mode through a beam
/// splitter of transmissivity 1 - loss, measures the environment, and
/// discards it.  Each photon is deleted independently with the stated
/// probability; the no-loss outcome reweights amplitudes exactly as a
/// quantum trajectory should.
inline LossOutcome apply_loss(const PureState& s, const LossChannel& channel, Rng& rng) {
  if (channel.per_pass_loss < 0.0 || channel.per_pass_loss > 1.0) {
    throw std::invalid_argument("apply_loss: loss probability must lie in [0, 1]");
  }
  LossOutcome outcome{s, {}};
  if (channel.per_pass_loss == 0.0 || channel.affected_modes.empty()) return outcome;

  std::vector<int> modes = channel.affected_modes;
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  double theta = std::asin(std::sqrt(channel.per_pass_loss));
  for (int mode : modes) {
    if (mode < 0 || mode >= outcome.state.space().mode_count()) {
      throw std::invalid_argument("apply_loss: mode out of range");
    }
    bool occupied = false;
    for (const auto& [occ, amp] : outcome.state.amplitudes()) {
      if (occ[static_cast<std::size_t>(mode)] > 0) {
        occupied = true;
        break;
      }
    }
    if (!occupied) continue;
    int env = outcome.state.space().mode_count();
    PureState work = tensor(outcome.state, make_vacuum(FockSpace(1, 0)));
    work = apply_element(work, BeamSplitter{theta, 0.0, mode, env});
    MeasurementResult result = sample_outcome(work, {env}, rng);
    if (result.pattern.counts[0] > 0) outcome.lost_modes.push_back(mode);
    outcome.state = std::move(result.post_state);
  }
  return outcome;
}

inline LossOutcome apply_loss(const PureState& s, const LossChannel& channel, std::uint64_t seed) {
  Rng rng(seed);
  return apply_loss(s, channel, rng);
}

struct EncodeProvenance {
  int data_photons = 2;
  int ancilla_photons = 2;
  std::array<int, 3> cz_herald_attempts{1, 1, 1};
};

/// One logical qubit spread over four dual-rail qubits (eight modes, four
/// photons): alpha |0>_L + beta |1>_L maps to
///   alpha (|00>+|11>)(|00>+|11>)/2 + beta (|01>+|10>)(|01>+|10>)/2,
/// two Bell-pair blocks whose pair parity carries the logical value.
struct EncodedBlock {
  PureState state;
  std::array<DualRailQubit, 4> qubits{DualRailQubit{0, 1}, DualRailQubit{2, 3},
                                      DualRailQubit{4, 5}, DualRailQubit{6, 7}};
  EncodeProvenance provenance;
};

namespace detail {

/// Builds the encoding isometry once by running the heralded circuit on both
/// logical basis states: a controlled-sign-based CNOT copies the data qubit,
/// then one |+> ancilla per block fans out the pair parity.  All heralds are
/// taken on their success branch (offline retries in exact form); the
/// heralded map is proportional to an isometry, so encoding arbitrary inputs
/// is the cached linear combination.
struct EncodeMap {
  PureState encoded_zero;
  PureState encoded_one;
};

inline PureState heralded_cnot_dual_rail(const PureState& s, const DualRailQubit& control,
                                         const DualRailQubit& target, const NsParameters& params) {
  PureState work = dual_rail_hadamard(s, target);
  work = heralded_mode_cz(work, control.mode_b, target.mode_b, params).output_state;
  return dual_rail_hadamard(work, target);
}

inline const EncodeMap& encode_map() {
  static std::once_flag once;
  static EncodeMap map{PureState(FockSpace(8, 4)), PureState(FockSpace(8, 4))};
  std::call_once(once, [] {
    NsParameters params = ns_frozen_parameters();
    DualRailQubit q1{0, 1}, q2{2, 3}, q3{4, 5}, q4{6, 7};
    FockSpace pair_space(2, 1);
    PureState plus(pair_space);
    plus.set_amplitude({1, 0}, Complex(1.0 / std::numbers::sqrt2, 0.0));
    plus.set_amplitude({0, 1}, Complex(1.0 / std::numbers::sqrt2, 0.0));
    PureState zero = make_basis_state(pair_space, {1, 0});

    for (int logical = 0; logical < 2; ++logical) {
      PureState data = make_basis_state(pair_space, logical == 0 ? OccupationVector{1, 0}
                                                                 : OccupationVector{0, 1});
      PureState state = tensor(tensor(tensor(plus, data), plus), zero);
      state = heralded_cnot_dual_rail(state, q2, q4, params);
      state = heralded_cnot_dual_rail(state, q1, q2, params);
      state = heralded_cnot_dual_rail(state, q3, q4, params);
      (logical == 0 ? map.encoded_zero : map.encoded_one) = normalize(state).state;
    }
  });
  return map;
}

}  // namespace detail

/// Encodes a normalized dual-rail logical qubit (a two-mode state on rails
/// 0, 1) into the four-qubit loss code.  The heralded preparation gates run
/// offline; the seed drives only the recorded retry bookkeeping.
inline EncodedBlock encode_block(const PureState& logical, Rng& rng) {
  if (logical.space().mode_count() != 2) {
    throw std::invalid_argument("encode_block: input must be a two-mode dual-rail state");
  }
  detail::require_logical(logical, 0, 1, "encode_block");
  double norm2 = logical.norm_squared();
  if (std::abs(norm2 - 1.0) > 1e-9) {
    throw std::invalid_argument("encode_block: input must be normalized");
  }

  const detail::EncodeMap& map = detail::encode_map();
  Complex alpha = logical.amplitude({1, 0});
  Complex beta = logical.amplitude({0, 1});
  PureState zero_part = map.encoded_zero;
  PureState one_part = map.encoded_one;
  PureState state = add(zero_part.scale(alpha), one_part.scale(beta));

  EncodedBlock block;
  block.state = std::move(state);
  // Offline herald retries for the three controlled-sign gates, each a
  // geometric draw at the 1/16 herald rate.
  for (std::size_t gate = 0; gate < block.provenance.cz_herald_attempts.size(); ++gate) {
    int attempts = 1;
    while (!rng.bernoulli(1.0 / 16.0)) ++attempts;
    block.provenance.cz_herald_attempts[gate] = attempts;
  }
  return block;
}

inline EncodedBlock encode_block(const PureState& logical, std::uint64_t seed) {
  Rng rng(seed);
  return encode_block(logical, rng);
}

struct RecoveryResult {
  bool correctable = false;
  std::optional<int> loss_location;  // block qubit index 0..3, if one pair lost
  std::optional<PureState> logical;  // recovered dual-rail state on modes (0, 1)
  std::vector<std::string> corrections;
};

namespace detail {

struct TrackedQubit {
  int mode_a;
  int mode_b;
};

inline void shift_after_removal(std::array<TrackedQubit, 4>& qubits,
                                const std::vector<int>& removed) {
  for (TrackedQubit& q : qubits) {
    q.mode_a = shifted_index(q.mode_a, removed);
    q.mode_b = shifted_index(q.mode_b, removed);
  }
}

/// Measures a dual-rail qubit in the computational basis; removes its modes.
inline std::pair<int, PureState> z_measure(PureState state, std::array<TrackedQubit, 4>& qubits,
                                           int which, Rng& rng) {
  TrackedQubit q = qubits[static_cast<std::size_t>(which)];
  MeasurementResult result = sample_outcome(state, {q.mode_a, q.mode_b}, rng);
  int outcome = result.pattern.counts[1] == 1 ? 1 : 0;
  shift_after_removal(qubits, {q.mode_a, q.mode_b});
  return {outcome, std::move(result.post_state)};
}

/// Measures in the diagonal basis (Hadamard then count); 0 means "plus".
inline std::pair<int, PureState> x_measure(PureState state, std::array<TrackedQubit, 4>& qubits,
                                           int which, Rng& rng) {
  TrackedQubit q = qubits[static_cast<std::size_t>(which)];
  state = dual_rail_hadamard(state, DualRailQubit{q.mode_a, q.mode_b});
  return z_measure(std::move(state), qubits, which, rng);
}

}  // namespace detail

/// Locates photon loss with a nondemolition presence check on every rail
/// pair, then recovers the logical qubit.  At most one lost pair is
/// correctable; two or more yield an explicit uncorrectable result.  With no
/// loss this is the decoder.
inline RecoveryResult detect_and_recover(const EncodedBlock& block, Rng& rng) {
  PureState state = block.state;
  std::array<detail::TrackedQubit, 4> qubits;
  for (std::size_t i = 0; i < 4; ++i) {
    qubits[i] = {block.qubits[i].mode_a, block.qubits[i].mode_b};
  }

  // QND presence sweep.
  std::vector<int> lost;
  for (int i = 0; i < 4; ++i) {
    auto branches = qnd_photon_presence(state, qubits[static_cast<std::size_t>(i)].mode_a,
                                        qubits[static_cast<std::size_t>(i)].mode_b);
    double u = rng.next_unit();
    double total = 0.0;
    for (auto& branch : branches) total += branch.probability;
    u *= total;
    double cumulative = 0.0;
    const QndBranch* chosen = &branches.back();
    for (const auto& branch : branches) {
      cumulative += branch.probability;
      if (u < cumulative) {
        chosen = &branch;
        break;
      }
    }
    if (chosen->label == PhotonPresence::kAbsent) lost.push_back(i);
    state = chosen->post_state;
  }

  RecoveryResult result;
  if (lost.size() >= 2) {
    result.correctable = false;
    result.corrections.push_back("uncorrectable: " + std::to_string(lost.size()) + " pairs lost");
    return result;
  }

  // After the measurements below, the only surviving pair is the output
  // qubit: Q2 when block two is consumed, Q4 when block one is.
  int z_target;  // qubit of the data-carrying block measured in Z
  int parity_sign = 0;
  if (lost.empty()) {
    // Plain decode: consume the second block, read out the first.
    auto [s4, after_x4] = detail::x_measure(std::move(state), qubits, 3, rng);
    auto [s3, after_x3] = detail::x_measure(std::move(after_x4), qubits, 2, rng);
    parity_sign = s4;
    state = std::move(after_x3);
    z_target = 0;
  } else {
    int loss_at = lost.front();
    result.loss_location = loss_at;
    // Drop the emptied pair (deterministic vacuum), then consume its partner
    // in the diagonal basis.
    detail::TrackedQubit lost_pair = qubits[static_cast<std::size_t>(loss_at)];
    MeasurementResult drop =
        postselect(state, DetectionPattern{{lost_pair.mode_a, lost_pair.mode_b}, {0, 0}});
    detail::shift_after_removal(qubits, {lost_pair.mode_a, lost_pair.mode_b});
    state = std::move(drop.post_state);
    bool lost_in_first_block = loss_at < 2;
    z_target = lost_in_first_block ? 2 : 0;
    auto [s, after_x] = detail::x_measure(std::move(state), qubits, loss_at ^ 1, rng);
    parity_sign = s;
    state = std::move(after_x);
  }

  auto [r, after_z] = detail::z_measure(std::move(state), qubits, z_target, rng);
  state = std::move(after_z);

  DualRailQubit survivor{0, 1};  // only two modes remain
  if (r == 1) {
    state = dual_rail_pauli_x(state, survivor);
    result.corrections.push_back("X");
  }
  if (parity_sign == 1) {
    state = dual_rail_pauli_z(state, survivor);
    result.corrections.push_back("Z");
  }

  // Re-embed on the canonical dual-rail space.
  PureState logical{FockSpace(2, 1)};
  for (const auto& [occ, amp] : state.amplitudes()) logical.add_amplitude(occ, amp);
  result.correctable = true;
  result.logical = std::move(logical);
  return result;
}

inline RecoveryResult detect_and_recover(const EncodedBlock& block, std::uint64_t seed) {
  Rng rng(seed);
  return detect_and_recover(block, rng);
}

struct MemoryCycleStats {
  int cycle = 0;
  double mean_fidelity = 0.0;       // over trajectories still alive this cycle
  double survival_fraction = 0.0;   // fraction of trajectories still correctable
  double analytic_survival = 0.0;   // Bernoulli model: ((1-p)^4 + 4p(1-p)^3)^cycle
};

struct MemoryReport {
  double per_cycle_loss = 0.0;
  int trajectories = 0;
  std::vector<MemoryCycleStats> per_cycle;
};

/// Single-loss-per-cycle survival probability of the Bernoulli model: every
/// pair keeps its photon with probability 1 - p, and one lost pair is
/// recoverable.
inline double memory_cycle_survival_rate(double loss) {
  double keep = 1.0 - loss;
  return keep * keep * keep * keep + 4.0 * loss * keep * keep * keep;
}

/// Cyclic quantum memory: every cycle applies loss to all eight rails, runs
/// detection and recovery, and re-encodes the survivor with fresh photons.
inline MemoryReport memory_cycle(const PureState& logical, int cycles, double per_cycle_loss,
                                 int trajectories, Rng& rng) {
  if (cycles < 1) throw std::invalid_argument("memory_cycle: cycles must be positive");
  if (trajectories < 1) throw std::invalid_argument("memory_cycle: trajectories must be positive");
  MemoryReport report;
  report.per_cycle_loss = per_cycle_loss;
  report.trajectories = trajectories;
  report.per_cycle.resize(static_cast<std::size_t>(cycles));

  std::vector<int> all_rails(8);
  for (int i = 0; i < 8; ++i) all_rails[static_cast<std::size_t>(i)] = i;
  LossChannel channel{per_cycle_loss, all_rails};

  std::vector<std::uint64_t> alive_counts(static_cast<std::size_t>(cycles), 0);
  std::vector<double> fidelity_sums(static_cast<std::size_t>(cycles), 0.0);

  for (int trajectory = 0; trajectory < trajectories; ++trajectory) {
    Rng local = rng.split(static_cast<std::uint64_t>(trajectory));
    EncodedBlock block = encode_block(logical, local);
    for (int cycle = 0; cycle < cycles; ++cycle) {
      LossOutcome lossy = apply_loss(block.state, channel, local);
      block.state = std::move(lossy.state);
      RecoveryResult recovered = detect_and_recover(block, local);
      if (!recovered.correctable) break;
      alive_counts[static_cast<std::size_t>(cycle)] += 1;
      fidelity_sums[static_cast<std::size_t>(cycle)] += fidelity(*recovered.logical, logical);
      block = encode_block(*recovered.logical, local);
    }
  }

  double survival_model = memory_cycle_survival_rate(per_cycle_loss);
  for (int cycle = 0; cycle < cycles; ++cycle) {
    auto& stats = report.per_cycle[static_cast<std::size_t>(cycle)];
    stats.cycle = cycle + 1;
    std::uint64_t alive = alive_counts[static_cast<std::size_t>(cycle)];
    stats.survival_fraction = static_cast<double>(alive) / static_cast<double>(trajectories);
    stats.mean_fidelity = alive == 0 ? 0.0 : fidelity_sums[static_cast<std::size_t>(cycle)] / static_cast<double>(alive);
    stats.analytic_survival = std::pow(survival_model, cycle + 1);
  }
  return report;
}

inline MemoryReport memory_cycle(const PureState& logical, int cycles, double per_cycle_loss,
                                 int trajectories, std::uint64_t seed) {
  Rng rng(seed);
  return memory_cycle(logical, cycles, per_cycle_loss, trajectories, rng);
}

}  // namespace loqs
