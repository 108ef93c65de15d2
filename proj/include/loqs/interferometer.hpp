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

#include <bit>
#include <cstring>
#include <variant>

#include "loqs/fock.hpp"

namespace loqs {

// Beam splitter convention used throughout, acting on creation operators of
// its two modes (i first, j second):
//
//   a+_i -> cos(theta) a+_i + e^{+i phi} sin(theta) a+_j
//   a+_j -> -e^{-i phi} sin(theta) a+_i + cos(theta) a+_j
//
// theta = 0 is the identity; theta = pi/4, phi = 0 is the 50:50 splitter.
struct BeamSplitter {
  double theta = 0.0;
  double phi = 0.0;
  int mode_i = 0;
  int mode_j = 1;

  friend bool operator==(const BeamSplitter&, const BeamSplitter&) = default;
};

/// a+_k -> e^{i phi} a+_k, so |n> picks up e^{i n phi}.
struct PhaseShift {
  double phi = 0.0;
  int mode = 0;

  friend bool operator==(const PhaseShift&, const PhaseShift&) = default;
};

using Element = std::variant<BeamSplitter, PhaseShift>;

/// Small dense complex matrix, row major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("ComplexMatrix: negative dimension");
  }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = Complex(1.0, 0.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Complex& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j)]; }
  const Complex& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j)]; }

  ComplexMatrix operator*(const ComplexMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("matrix product: dimension mismatch");
    ComplexMatrix out(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i) {
      for (int k = 0; k < cols_; ++k) {
        Complex aik = (*this)(i, k);
        if (aik == Complex(0.0, 0.0)) continue;
        for (int j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
      }
    }
    return out;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    }
    return out;
  }

  double max_abs_deviation_from_identity() const {
    double worst = 0.0;
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        Complex expected = (i == j) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
        worst = std::max(worst, std::abs((*this)(i, j) - expected));
      }
    }
    return worst;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

/// An m x m mode transformation, validated unitary on construction.  Acts on
/// creation operators column-wise: a+_k -> sum_l U(l, k) a+_l, so applying
/// element A then element B composes as U = B * A.
class ModeUnitary {
 public:
  static constexpr double kUnitarityTolerance = 1e-10;

  explicit ModeUnitary(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (!entries_.is_square()) throw std::invalid_argument("ModeUnitary: matrix is not square");
    ComplexMatrix product = entries_ * entries_.adjoint();
    double deviation = product.max_abs_deviation_from_identity();
    if (deviation > kUnitarityTolerance) {
      throw std::invalid_argument("ModeUnitary: matrix is not unitary (deviation " +
                                  std::to_string(deviation) + ")");
    }
  }

  static ModeUnitary identity(int n) { return ModeUnitary(ComplexMatrix::identity(n)); }

  int dimension() const { return entries_.rows(); }
  const ComplexMatrix& entries() const { return entries_; }

 private:
  ComplexMatrix entries_;
};

struct OpticalCircuit {
  FockSpace space;
  std::vector<Element> elements;

  friend bool operator==(const OpticalCircuit&, const OpticalCircuit&) = default;
};

inline ModeUnitary beamsplitter_unitary(double theta, double phi) {
  double c = std::cos(theta);
  double s = std::sin(theta);
  ComplexMatrix m(2, 2);
  m(0, 0) = Complex(c, 0.0);
  m(0, 1) = -std::polar(s, -phi);
  m(1, 0) = std::polar(s, phi);
  m(1, 1) = Complex(c, 0.0);
  return ModeUnitary(std::move(m));
}

namespace detail {

inline void require_beamsplitter_modes(const BeamSplitter& bs, int mode_count) {
  if (bs.mode_i < 0 || bs.mode_i >= mode_count || bs.mode_j < 0 || bs.mode_j >= mode_count) {
    throw std::invalid_argument("beam splitter mode out of range");
  }
  if (bs.mode_i == bs.mode_j) throw std::invalid_argument("beam splitter modes must be distinct");
}

inline void require_phase_mode(const PhaseShift& ps, int mode_count) {
  if (ps.mode < 0 || ps.mode >= mode_count) throw std::invalid_argument("phase shift mode out of range");
}

struct BsSectorKey {
  std::uint64_t theta_bits;
  std::uint64_t phi_bits;
  int sector;
  friend auto operator<=>(const BsSectorKey&, const BsSectorKey&) = default;
};

/// Fock-sector matrix of a beam splitter: K(m1, n1) is the amplitude to go
/// from n1 photons in mode i (sector - n1 in mode j) to m1 photons in mode i.
/// Computed from the binomial expansion of the transformed creation operators
/// and cached per (theta, phi, sector); the same elements recur across Monte
/// Carlo sweeps.
inline const std::vector<Complex>& bs_fock_kernel(double theta, double phi, int sector) {
  thread_local std::map<BsSectorKey, std::vector<Complex>> cache;
  BsSectorKey key{std::bit_cast<std::uint64_t>(theta), std::bit_cast<std::uint64_t>(phi), sector};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  int dim = sector + 1;
  std::vector<Complex> kernel(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
  double c = std::cos(theta);
  double s = std::sin(theta);
  for (int n1 = 0; n1 <= sector; ++n1) {
    int n2 = sector - n1;
    for (int m1 = 0; m1 <= sector; ++m1) {
      int m2 = sector - m1;
      Complex sum(0.0, 0.0);
      for (int k = std::max(0, m1 - n2); k <= std::min(n1, m1); ++k) {
        int l = m1 - k;
        double magnitude = static_cast<double>(binomial(n1, k)) * static_cast<double>(binomial(n2, l)) *
                           std::pow(c, k + n2 - l) * std::pow(s, n1 - k + l);
        Complex phase = std::polar(1.0, phi * static_cast<double>(n1 - k - l));
        if (l % 2 != 0) magnitude = -magnitude;
        sum += magnitude * phase;
      }
      sum *= std::sqrt(factorial(m1) * factorial(m2) / (factorial(n1) * factorial(n2)));
      kernel[static_cast<std::size_t>(m1) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(n1)] = sum;
    }
  }
  return cache.emplace(key, std::move(kernel)).first->second;
}

}  // namespace detail

/// Applies a single linear-optical element exactly.  Photon number is
/// conserved, so each total-photon sector is an invariant subspace and the
/// cutoff can never overflow.
inline PureState apply_element(const PureState& s, const Element& element,
                               double prune_threshold = kDefaultPruneThreshold) {
  int m = s.space().mode_count();
  PureState result(s.space());
  if (std::holds_alternative<PhaseShift>(element)) {
    const auto& ps = std::get<PhaseShift>(element);
    detail::require_phase_mode(ps, m);
    for (const auto& [occ, amp] : s.amplitudes()) {
      int n = occ[static_cast<std::size_t>(ps.mode)];
      result.add_amplitude(occ, amp * std::polar(1.0, ps.phi * static_cast<double>(n)));
    }
    return result;
  }

  const auto& bs = std::get<BeamSplitter>(element);
  detail::require_beamsplitter_modes(bs, m);
  for (const auto& [occ, amp] : s.amplitudes()) {
    int n1 = occ[static_cast<std::size_t>(bs.mode_i)];
    int n2 = occ[static_cast<std::size_t>(bs.mode_j)];
    int sector = n1 + n2;
    const auto& kernel = detail::bs_fock_kernel(bs.theta, bs.phi, sector);
    int dim = sector + 1;
    OccupationVector out = occ;
    for (int m1 = 0; m1 <= sector; ++m1) {
      Complex k = kernel[static_cast<std::size_t>(m1) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(n1)];
      if (k == Complex(0.0, 0.0)) continue;
      out[static_cast<std::size_t>(bs.mode_i)] = m1;
      out[static_cast<std::size_t>(bs.mode_j)] = sector - m1;
      result.add_amplitude(out, amp * k);
    }
  }
  result.prune(prune_threshold);
  return result;
}

inline PureState apply_circuit(const PureState& s, const OpticalCircuit& circuit,
                               double prune_threshold = kDefaultPruneThreshold) {
  if (circuit.space.mode_count() != s.space().mode_count()) {
    throw std::invalid_argument("apply_circuit: mode count mismatch");
  }
  PureState state = s;
  for (const Element& element : circuit.elements) {
    state = apply_element(state, element, prune_threshold);
  }
  return state;
}

/// The element's m x m mode matrix, embedded in the full space.
inline ComplexMatrix element_matrix(const Element& element, int mode_count) {
  ComplexMatrix m = ComplexMatrix::identity(mode_count);
  if (std::holds_alternative<PhaseShift>(element)) {
    const auto& ps = std::get<PhaseShift>(element);
    detail::require_phase_mode(ps, mode_count);
    m(ps.mode, ps.mode) = std::polar(1.0, ps.phi);
  } else {
    const auto& bs = std::get<BeamSplitter>(element);
    detail::require_beamsplitter_modes(bs, mode_count);
    const ComplexMatrix two = beamsplitter_unitary(bs.theta, bs.phi).entries();
    m(bs.mode_i, bs.mode_i) = two(0, 0);
    m(bs.mode_i, bs.mode_j) = two(0, 1);
    m(bs.mode_j, bs.mode_i) = two(1, 0);
    m(bs.mode_j, bs.mode_j) = two(1, 1);
  }
  return m;
}

/// Folds the circuit into one mode matrix, in application order.
inline ModeUnitary circuit_mode_matrix(const OpticalCircuit& circuit) {
  int m = circuit.space.mode_count();
  ComplexMatrix total = ComplexMatrix::identity(m);
  for (const Element& element : circuit.elements) {
    total = element_matrix(element, m) * total;
  }
  return ModeUnitary(std::move(total));
}

/// Exact permanent by Ryser's formula with Gray-code subset updates,
/// O(2^n * n).  The 0 x 0 permanent is 1.
inline Complex permanent(const ComplexMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("permanent: matrix is not square");
  int n = m.rows();
  if (n == 0) return Complex(1.0, 0.0);
  if (n > 30) throw std::invalid_argument("permanent: dimension too large");

  std::vector<Complex> row_sums(static_cast<std::size_t>(n), Complex(0.0, 0.0));
  Complex total(0.0, 0.0);
  std::uint64_t previous_gray = 0;
  const std::uint64_t subset_count = std::uint64_t{1} << n;
  for (std::uint64_t iter = 1; iter < subset_count; ++iter) {
    std::uint64_t gray = iter ^ (iter >> 1);
    std::uint64_t changed = gray ^ previous_gray;
    int column = std::countr_zero(changed);
    bool added = (gray & changed) != 0;
    for (int i = 0; i < n; ++i) {
      if (added) {
        row_sums[static_cast<std::size_t>(i)] += m(i, column);
      } else {
        row_sums[static_cast<std::size_t>(i)] -= m(i, column);
      }
    }
    Complex product(1.0, 0.0);
    for (int i = 0; i < n; ++i) product *= row_sums[static_cast<std::size_t>(i)];
    int sign = ((n - std::popcount(gray)) % 2 == 0) ? 1 : -1;
    total += static_cast<double>(sign) * product;
    previous_gray = gray;
  }
  return total;
}

namespace detail {

/// Enumerates all occupations of `modes` modes with exactly `photons` total,
/// in lexicographic order, invoking fn on each.
template <typename Fn>
void for_each_composition(int modes, int photons, Fn&& fn) {
  if (modes == 0) {
    if (photons == 0) {
      OccupationVector empty;
      fn(empty);
    }
    return;
  }
  OccupationVector occ(static_cast<std::size_t>(modes), 0);
  occ[0] = 0;
  // Recursive lambda over remaining photons.
  auto recurse = [&](auto&& self, int mode, int remaining) -> void {
    if (mode == modes - 1) {
      occ[static_cast<std::size_t>(mode)] = remaining;
      fn(occ);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      occ[static_cast<std::size_t>(mode)] = k;
      self(self, mode + 1, remaining - k);
    }
  };
  recurse(recurse, 0, photons);
}

/// <m|U|n> = per(U[m|n]) / sqrt(prod m_i! prod n_j!) with rows repeated per
/// output occupation and columns per input occupation.
inline Complex fock_transition_amplitude(const ComplexMatrix& u, const OccupationVector& out,
                                         const OccupationVector& in) {
  int photons = total_photons(in);
  ComplexMatrix sub(photons, photons);
  int row = 0;
  for (std::size_t mode = 0; mode < out.size(); ++mode) {
    for (int repeat = 0; repeat < out[mode]; ++repeat, ++row) {
      int col = 0;
      for (std::size_t inner = 0; inner < in.size(); ++inner) {
        for (int r2 = 0; r2 < in[inner]; ++r2, ++col) {
          sub(row, col) = u(static_cast<int>(mode), static_cast<int>(inner));
        }
      }
    }
  }
  double denom = 1.0;
  for (int n : out) denom *= factorial(n);
  for (int n : in) denom *= factorial(n);
  return permanent(sub) / std::sqrt(denom);
}

}  // namespace detail

/// Applies an m x m mode unitary through the permanent kernel.  This is the
/// second, independent evaluation path next to sequential apply_element; the
/// two must agree amplitude-by-amplitude.
inline PureState apply_mode_unitary(const PureState& s, const ModeUnitary& u,
                                    double prune_threshold = kDefaultPruneThreshold) {
  if (u.dimension() != s.space().mode_count()) {
    throw std::invalid_argument("apply_mode_unitary: dimension mismatch");
  }
  PureState result(s.space());
  const ComplexMatrix& matrix = u.entries();
  for (const auto& [occ, amp] : s.amplitudes()) {
    int photons = total_photons(occ);
    detail::for_each_composition(s.space().mode_count(), photons, [&](const OccupationVector& out) {
      Complex transition = detail::fock_transition_amplitude(matrix, out, occ);
      if (transition != Complex(0.0, 0.0)) result.add_amplitude(out, amp * transition);
    });
  }
  result.prune(prune_threshold);
  return result;
}

/// Applies a unitary on a subset of modes (identity elsewhere).  Support is
/// grouped by the untouched modes so the permanent kernel only runs on the
/// subset.
inline PureState apply_mode_unitary_on_modes(const PureState& s, const ModeUnitary& u,
                                             const std::vector<int>& modes,
                                             double prune_threshold = kDefaultPruneThreshold) {
  int m = s.space().mode_count();
  if (u.dimension() != static_cast<int>(modes.size())) {
    throw std::invalid_argument("apply_mode_unitary_on_modes: dimension mismatch");
  }
  std::vector<bool> selected(static_cast<std::size_t>(m), false);
  for (int mode : modes) {
    if (mode < 0 || mode >= m) throw std::invalid_argument("apply_mode_unitary_on_modes: mode out of range");
    if (selected[static_cast<std::size_t>(mode)]) {
      throw std::invalid_argument("apply_mode_unitary_on_modes: duplicate mode");
    }
    selected[static_cast<std::size_t>(mode)] = true;
  }

  PureState result(s.space());
  const ComplexMatrix& matrix = u.entries();
  int k = static_cast<int>(modes.size());
  for (const auto& [occ, amp] : s.amplitudes()) {
    OccupationVector inside(static_cast<std::size_t>(k));
    for (int idx = 0; idx < k; ++idx) inside[static_cast<std::size_t>(idx)] = occ[static_cast<std::size_t>(modes[static_cast<std::size_t>(idx)])];
    int photons = total_photons(inside);
    OccupationVector out_full = occ;
    detail::for_each_composition(k, photons, [&](const OccupationVector& out_inside) {
      Complex transition = detail::fock_transition_amplitude(matrix, out_inside, inside);
      if (transition == Complex(0.0, 0.0)) return;
      for (int idx = 0; idx < k; ++idx) out_full[static_cast<std::size_t>(modes[static_cast<std::size_t>(idx)])] = out_inside[static_cast<std::size_t>(idx)];
      result.add_amplitude(out_full, amp * transition);
    });
  }
  result.prune(prune_threshold);
  return result;
}

}  // namespace loqs
