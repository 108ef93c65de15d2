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

#include "loqs/interferometer.hpp"
#include "oracles.hpp"

using namespace loqs;

namespace {

OpticalCircuit random_circuit(Rng& rng, int modes, int cutoff, int element_count) {
  OpticalCircuit circuit{FockSpace(modes, cutoff), {}};
  for (int element = 0; element < element_count; ++element) {
    if (rng.next_unit() < 0.75) {
      int mode_i = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(modes));
      int mode_j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(modes - 1));
      if (mode_j >= mode_i) ++mode_j;
      circuit.elements.push_back(BeamSplitter{rng.next_unit() * 2.0 * std::numbers::pi,
                                              rng.next_unit() * 2.0 * std::numbers::pi, mode_i,
                                              mode_j});
    } else {
      circuit.elements.push_back(
          PhaseShift{rng.next_unit() * 2.0 * std::numbers::pi,
                     static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(modes))});
    }
  }
  return circuit;
}

double max_amplitude_difference(const PureState& a, const PureState& b) {
  double worst = 0.0;
  for (const auto& [occ, amp] : a.amplitudes()) worst = std::max(worst, std::abs(amp - b.amplitude(occ)));
  for (const auto& [occ, amp] : b.amplitudes()) worst = std::max(worst, std::abs(amp - a.amplitude(occ)));
  return worst;
}

}  // namespace

TEST_CASE("mode unitary validation") {
  ComplexMatrix lopsided(2, 2);
  lopsided(0, 0) = Complex(1.0, 0.0);
  lopsided(0, 1) = Complex(0.5, 0.0);
  lopsided(1, 1) = Complex(1.0, 0.0);
  CHECK_THROWS_AS(ModeUnitary(lopsided), std::invalid_argument);
  CHECK_THROWS_AS(ModeUnitary(ComplexMatrix(2, 3)), std::invalid_argument);
}

TEST_CASE("beamsplitter unitary basics") {
  ModeUnitary identity_like = beamsplitter_unitary(0.0, 1.3);
  CHECK(identity_like.entries().max_abs_deviation_from_identity() < 1e-15);

  ModeUnitary balanced = beamsplitter_unitary(std::numbers::pi / 4.0, 0.0);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(balanced.entries()(i, j)) == Approx(1.0 / std::sqrt(2.0)));
    }
  }

  // theta and -theta compose to the identity.
  PureState s = make_basis_state(FockSpace(2, 2), {1, 1});
  PureState round = apply_element(apply_element(s, BeamSplitter{0.9, 0.0, 0, 1}),
                                  BeamSplitter{-0.9, 0.0, 0, 1});
  CHECK(std::abs(round.amplitude({1, 1}) - Complex(1.0, 0.0)) < 1e-12);
  CHECK(round.norm_squared() == Approx(1.0).margin(1e-12));
}

TEST_CASE("two-mode Fock action") {
  FockSpace space(2, 2);

  // Hand expansion of the 50:50 splitter on |1,1>: the coincidence term
  // cancels and the bunched terms carry opposite signs.
  PureState hom = apply_element(make_basis_state(space, {1, 1}),
                                BeamSplitter{std::numbers::pi / 4.0, 0.0, 0, 1});
  CHECK(std::abs(hom.amplitude({1, 1})) < 1e-12);
  CHECK(hom.amplitude({2, 0}).real() == Approx(-1.0 / std::sqrt(2.0)));
  CHECK(hom.amplitude({0, 2}).real() == Approx(1.0 / std::sqrt(2.0)));

  PureState vac = apply_element(make_vacuum(space), BeamSplitter{1.1, 0.4, 0, 1});
  CHECK(vac.amplitude({0, 0}) == Complex(1.0, 0.0));
  CHECK(vac.support_size() == 1);

  PureState two = apply_element(make_basis_state(FockSpace(1, 3), {3}), PhaseShift{0.7, 0});
  CHECK(std::abs(two.amplitude({3}) - std::polar(1.0, 3 * 0.7)) < 1e-14);

  CHECK_THROWS_AS(apply_element(vac, BeamSplitter{0.2, 0.0, 0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(apply_element(vac, BeamSplitter{0.2, 0.0, 1, 1}), std::invalid_argument);
}

TEST_CASE("elements preserve norm and photon sectors") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    PureState s = oracles::random_state(FockSpace(3, 3), rng);
    BeamSplitter bs{rng.next_unit() * 2.0 * std::numbers::pi,
                    rng.next_unit() * 2.0 * std::numbers::pi, 0, 2};
    PureState out = apply_element(s, bs);
    CHECK(out.norm_squared() == Approx(s.norm_squared()).margin(1e-12));

    // Sector occupancy before and after.
    std::map<int, double> before, after;
    for (const auto& [occ, amp] : s.amplitudes()) before[total_photons(occ)] += std::norm(amp);
    for (const auto& [occ, amp] : out.amplitudes()) after[total_photons(occ)] += std::norm(amp);
    for (const auto& [sector, weight] : before) {
      CHECK(after[sector] == Approx(weight).margin(1e-12));
    }
  }
}

TEST_CASE("circuit mode matrix") {
  OpticalCircuit empty{FockSpace(3, 2), {}};
  CHECK(circuit_mode_matrix(empty).entries().max_abs_deviation_from_identity() == 0.0);

  OpticalCircuit single{FockSpace(3, 2), {BeamSplitter{0.6, 0.2, 0, 2}}};
  ModeUnitary u = circuit_mode_matrix(single);
  ModeUnitary two = beamsplitter_unitary(0.6, 0.2);
  CHECK(u.entries()(0, 0) == two.entries()(0, 0));
  CHECK(u.entries()(0, 2) == two.entries()(0, 1));
  CHECK(u.entries()(2, 0) == two.entries()(1, 0));
  CHECK(u.entries()(2, 2) == two.entries()(1, 1));
  CHECK(u.entries()(1, 1) == Complex(1.0, 0.0));

  // A circuit followed by its reversed element-wise inverse is the identity.
  Rng rng(13);
  OpticalCircuit circuit = random_circuit(rng, 4, 3, 8);
  OpticalCircuit doubled = circuit;
  for (auto it = circuit.elements.rbegin(); it != circuit.elements.rend(); ++it) {
    if (std::holds_alternative<BeamSplitter>(*it)) {
      BeamSplitter bs = std::get<BeamSplitter>(*it);
      bs.theta = -bs.theta;
      doubled.elements.push_back(bs);
    } else {
      PhaseShift ps = std::get<PhaseShift>(*it);
      ps.phi = -ps.phi;
      doubled.elements.push_back(ps);
    }
  }
  CHECK(circuit_mode_matrix(doubled).entries().max_abs_deviation_from_identity() < 1e-10);
}

TEST_CASE("permanent") {
  for (int n = 0; n <= 6; ++n) {
    CHECK(std::abs(permanent(ComplexMatrix::identity(n)) - Complex(1.0, 0.0)) < 1e-12);
  }

  ComplexMatrix m(2, 2);
  m(0, 0) = Complex(1.0, 2.0);
  m(0, 1) = Complex(-0.5, 0.25);
  m(1, 0) = Complex(0.75, -1.0);
  m(1, 1) = Complex(2.0, 0.125);
  Complex expected = m(0, 0) * m(1, 1) + m(0, 1) * m(1, 0);
  CHECK(std::abs(permanent(m) - expected) < 1e-13);

  Rng rng(17);
  for (int n = 2; n <= 6; ++n) {
    ComplexMatrix random(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) random(i, j) = oracles::random_complex(rng);
    }
    Complex fast = permanent(random);
    Complex slow = oracles::permanent_by_permutation_sum(random);
    CHECK(std::abs(fast - slow) / std::abs(slow) < 1e-10);
  }

  CHECK_THROWS_AS(permanent(ComplexMatrix(2, 3)), std::invalid_argument);
}

TEST_CASE("mode unitary application") {
  FockSpace space(3, 2);
  Rng rng(23);
  PureState s = oracles::random_state(space, rng);
  PureState same = apply_mode_unitary(s, ModeUnitary::identity(3));
  CHECK(max_amplitude_difference(s, same) < 1e-14);

  // Cross-path oracle: 50:50 splitter through the permanent kernel matches
  // the sequential two-mode action.
  PureState hom_in = make_basis_state(FockSpace(2, 2), {1, 1});
  BeamSplitter balanced{std::numbers::pi / 4.0, 0.0, 0, 1};
  PureState sequential = apply_element(hom_in, balanced);
  PureState via_permanent =
      apply_mode_unitary(hom_in, circuit_mode_matrix({FockSpace(2, 2), {balanced}}));
  CHECK(max_amplitude_difference(sequential, via_permanent) < 1e-12);

  CHECK_THROWS_AS(apply_mode_unitary(s, ModeUnitary::identity(2)), std::invalid_argument);
}

TEST_CASE("kernel equivalence on random circuits") {
  Rng rng(29);
  for (int trial = 0; trial < 25; ++trial) {
    int modes = 2 + static_cast<int>(rng.next_u64() % 4ull);   // 2..5
    int photons = 1 + static_cast<int>(rng.next_u64() % 4ull); // 1..4
    OpticalCircuit circuit = random_circuit(rng, modes, photons, 10);
    PureState input = oracles::random_state(circuit.space, rng, 3);
    PureState sequential = apply_circuit(input, circuit);
    PureState via_permanent = apply_mode_unitary(input, circuit_mode_matrix(circuit));
    CHECK(max_amplitude_difference(sequential, via_permanent) < 1e-10);
    CHECK(sequential.norm_squared() == Approx(input.norm_squared()).margin(1e-10));
  }
}

TEST_CASE("subset mode unitary matches full embedding") {
  Rng rng(31);
  PureState s = oracles::random_state(FockSpace(4, 3), rng);
  ModeUnitary two = beamsplitter_unitary(0.8, 1.1);
  PureState on_subset = apply_mode_unitary_on_modes(s, two, {1, 3});
  PureState sequential = apply_element(s, BeamSplitter{0.8, 1.1, 1, 3});
  CHECK(max_amplitude_difference(on_subset, sequential) < 1e-12);
}
