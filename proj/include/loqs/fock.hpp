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

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace loqs {

using Complex = std::complex<double>;

/// Photon count per mode, labelling one Fock basis vector |n_1, ..., n_m>.
using OccupationVector = std::vector<int>;

/// Amplitudes below this magnitude are dropped when states are pruned.
inline constexpr double kDefaultPruneThreshold = 1e-14;

inline int total_photons(const OccupationVector& occ) {
  return std::accumulate(occ.begin(), occ.end(), 0);
}

inline std::string occupation_to_string(const OccupationVector& occ) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (i) out << ',';
    out << occ[i];
  }
  out << ')';
  return out.str();
}

namespace detail {

/// C(n, k) as an exact unsigned integer; throws on overflow.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    std::uint64_t numerator = static_cast<std::uint64_t>(n - k + i);
    if (result > UINT64_MAX / numerator) {
      throw std::overflow_error("binomial coefficient overflows 64 bits");
    }
    result = result * numerator / static_cast<std::uint64_t>(i);
  }
  return result;
}

/// Number of occupation vectors of `modes` modes with total <= cutoff.
inline std::uint64_t basis_count(int modes, int cutoff) {
  if (cutoff < 0) return 0;
  return binomial(modes + cutoff, modes);
}

inline double factorial(int n) {
  static const auto table = [] {
    std::vector<double> t(171, 1.0);
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

}  // namespace detail

/// A truncated bosonic Fock space: a fixed number of modes and a cap on the
/// total photon number.  The basis is every occupation vector whose photon
/// total does not exceed the cutoff, enumerated in lexicographic order, so
/// index <-> occupation is a fixed bijection.
///
/// A zero-mode space (the scalar space whose only basis vector is the empty
/// occupation) is allowed; it is what remains after measuring every mode.
class FockSpace {
 public:
  FockSpace(int mode_count, int photon_cutoff)
      : mode_count_(mode_count), photon_cutoff_(photon_cutoff) {
    if (mode_count < 0) throw std::invalid_argument("FockSpace: negative mode count");
    if (photon_cutoff < 0) throw std::invalid_argument("FockSpace: negative photon cutoff");
  }

  int mode_count() const { return mode_count_; }
  int photon_cutoff() const { return photon_cutoff_; }

  std::uint64_t dimension() const { return detail::basis_count(mode_count_, photon_cutoff_); }

  bool contains(const OccupationVector& occ) const {
    if (static_cast<int>(occ.size()) != mode_count_) return false;
    int total = 0;
    for (int n : occ) {
      if (n < 0) return false;
      total += n;
    }
    return total <= photon_cutoff_;
  }

  void require(const OccupationVector& occ) const {
    if (static_cast<int>(occ.size()) != mode_count_) {
      throw std::invalid_argument("occupation has " + std::to_string(occ.size()) +
                                  " modes, space has " + std::to_string(mode_count_));
    }
    for (int n : occ) {
      if (n < 0) throw std::invalid_argument("negative photon count in occupation");
    }
    if (total_photons(occ) > photon_cutoff_) {
      throw std::invalid_argument("occupation " + occupation_to_string(occ) +
                                  " exceeds photon cutoff " + std::to_string(photon_cutoff_));
    }
  }

  std::uint64_t index_of(const OccupationVector& occ) const {
    require(occ);
    std::uint64_t index = 0;
    int remaining_cutoff = photon_cutoff_;
    for (int mode = 0; mode < mode_count_; ++mode) {
      int tail_modes = mode_count_ - mode - 1;
      for (int k = 0; k < occ[mode]; ++k) {
        index += detail::basis_count(tail_modes, remaining_cutoff - k);
      }
      remaining_cutoff -= occ[mode];
    }
    return index;
  }

  OccupationVector occupation_of(std::uint64_t index) const {
    if (index >= dimension()) throw std::out_of_range("basis index out of range");
    OccupationVector occ(static_cast<std::size_t>(mode_count_), 0);
    int remaining_cutoff = photon_cutoff_;
    for (int mode = 0; mode < mode_count_; ++mode) {
      int tail_modes = mode_count_ - mode - 1;
      int k = 0;
      for (;; ++k) {
        std::uint64_t block = detail::basis_count(tail_modes, remaining_cutoff - k);
        if (index < block) break;
        index -= block;
      }
      occ[static_cast<std::size_t>(mode)] = k;
      remaining_cutoff -= k;
    }
    return occ;
  }

  friend bool operator==(const FockSpace& a, const FockSpace& b) = default;

 private:
  int mode_count_;
  int photon_cutoff_;
};

/// Sparse pure state: a map from occupation vectors to complex amplitudes.
///
/// States may be subnormalized; the squared norm of a heralded branch is the
/// probability of that branch, so branch algebra composes without carrying a
/// separate weight.
class PureState {
 public:
  /// Zero state on the scalar (zero-mode) space.
  PureState() : space_(0, 0) {}
  explicit PureState(FockSpace space) : space_(space) {}

  const FockSpace& space() const { return space_; }

  Complex amplitude(const OccupationVector& occ) const {
    auto it = amplitudes_.find(occ);
    return it == amplitudes_.end() ? Complex(0.0, 0.0) : it->second;
  }

  void set_amplitude(const OccupationVector& occ, Complex value) {
    space_.require(occ);
    if (value == Complex(0.0, 0.0)) {
      amplitudes_.erase(occ);
    } else {
      amplitudes_[occ] = value;
    }
  }

  void add_amplitude(const OccupationVector& occ, Complex value) {
    space_.require(occ);
    amplitudes_[occ] += value;
  }

  const std::map<OccupationVector, Complex>& amplitudes() const { return amplitudes_; }

  std::size_t support_size() const { return amplitudes_.size(); }
  bool is_zero() const { return amplitudes_.empty(); }

  double norm_squared() const {
    double total = 0.0;
    for (const auto& [occ, amp] : amplitudes_) total += std::norm(amp);
    return total;
  }

  PureState& scale(Complex factor) {
    for (auto& [occ, amp] : amplitudes_) amp *= factor;
    return *this;
  }

  PureState& prune(double threshold = kDefaultPruneThreshold) {
    for (auto it = amplitudes_.begin(); it != amplitudes_.end();) {
      if (std::abs(it->second) < threshold) {
        it = amplitudes_.erase(it);
      } else {
        ++it;
      }
    }
    return *this;
  }

  /// Largest photon total present in the support (0 for the zero state).
  int max_photons() const {
    int best = 0;
    for (const auto& [occ, amp] : amplitudes_) best = std::max(best, total_photons(occ));
    return best;
  }

 private:
  FockSpace space_;
  std::map<OccupationVector, Complex> amplitudes_;
};

inline PureState make_basis_state(const FockSpace& space, const OccupationVector& occ) {
  PureState state(space);
  state.set_amplitude(occ, Complex(1.0, 0.0));
  return state;
}

/// Vacuum of an m-mode space.
inline PureState make_vacuum(const FockSpace& space) {
  return make_basis_state(space, OccupationVector(static_cast<std::size_t>(space.mode_count()), 0));
}

/// Tensor product onto a caller-chosen photon cutoff.  Rejects any combined
/// occupation that the requested cutoff cannot hold.
inline PureState tensor(const PureState& a, const PureState& b, int result_cutoff) {
  FockSpace result_space(a.space().mode_count() + b.space().mode_count(), result_cutoff);
  PureState result(result_space);
  for (const auto& [occ_a, amp_a] : a.amplitudes()) {
    for (const auto& [occ_b, amp_b] : b.amplitudes()) {
      if (total_photons(occ_a) + total_photons(occ_b) > result_cutoff) {
        throw std::invalid_argument("tensor: combined occupation " + occupation_to_string(occ_a) +
                                    " x " + occupation_to_string(occ_b) +
                                    " exceeds result cutoff " + std::to_string(result_cutoff));
      }
      OccupationVector occ = occ_a;
      occ.insert(occ.end(), occ_b.begin(), occ_b.end());
      result.add_amplitude(occ, amp_a * amp_b);
    }
  }
  return result;
}

/// Tensor product; the result cutoff is the sum of the operand cutoffs, which
/// always suffices.
inline PureState tensor(const PureState& a, const PureState& b) {
  return tensor(a, b, a.space().photon_cutoff() + b.space().photon_cutoff());
}

inline Complex inner_product(const PureState& a, const PureState& b) {
  if (!(a.space() == b.space())) {
    throw std::invalid_argument("inner_product: states live in different spaces");
  }
  Complex total(0.0, 0.0);
  const PureState& small = a.support_size() <= b.support_size() ? a : b;
  const PureState& large = a.support_size() <= b.support_size() ? b : a;
  const bool small_is_a = &small == &a;
  for (const auto& [occ, amp] : small.amplitudes()) {
    Complex other = large.amplitude(occ);
    total += small_is_a ? std::conj(amp) * other : std::conj(other) * amp;
  }
  return total;
}

struct NormalizedState {
  PureState state;
  double probability;  // squared norm of the input
};

inline NormalizedState normalize(const PureState& s) {
  double n2 = s.norm_squared();
  if (n2 <= 0.0) throw std::invalid_argument("normalize: zero state");
  PureState out = s;
  out.scale(Complex(1.0 / std::sqrt(n2), 0.0));
  return {std::move(out), n2};
}

/// |<a|b>|^2 after normalizing both arguments.
inline double fidelity(const PureState& a, const PureState& b) {
  double na = a.norm_squared();
  double nb = b.norm_squared();
  if (na <= 0.0 || nb <= 0.0) throw std::invalid_argument("fidelity: zero state");
  double f = std::norm(inner_product(a, b)) / (na * nb);
  return std::min(f, 1.0);
}

/// Sum of two states on the same space.
inline PureState add(const PureState& a, const PureState& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("add: space mismatch");
  PureState result = a;
  for (const auto& [occ, amp] : b.amplitudes()) result.add_amplitude(occ, amp);
  result.prune();
  return result;
}

/// Rearranges modes: result mode k holds what source mode order[k] held.
/// `order` must be a permutation of 0..m-1.
inline PureState reorder_modes(const PureState& s, const std::vector<int>& order) {
  int m = s.space().mode_count();
  if (static_cast<int>(order.size()) != m) {
    throw std::invalid_argument("reorder_modes: order length mismatch");
  }
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (int o : order) {
    if (o < 0 || o >= m || seen[static_cast<std::size_t>(o)]) {
      throw std::invalid_argument("reorder_modes: order is not a permutation");
    }
    seen[static_cast<std::size_t>(o)] = true;
  }
  PureState result(s.space());
  for (const auto& [occ, amp] : s.amplitudes()) {
    OccupationVector moved(occ.size());
    for (int k = 0; k < m; ++k) moved[static_cast<std::size_t>(k)] = occ[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    result.add_amplitude(moved, amp);
  }
  return result;
}

/// Swaps the contents of two modes.
inline PureState swap_modes(const PureState& s, int mode_x, int mode_y) {
  int m = s.space().mode_count();
  if (mode_x < 0 || mode_x >= m || mode_y < 0 || mode_y >= m) {
    throw std::invalid_argument("swap_modes: mode out of range");
  }
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) order[static_cast<std::size_t>(k)] = k;
  std::swap(order[static_cast<std::size_t>(mode_x)], order[static_cast<std::size_t>(mode_y)]);
  return reorder_modes(s, order);
}

}  // namespace loqs
