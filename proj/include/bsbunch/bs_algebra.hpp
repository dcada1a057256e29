#pragma once

// Exact 2x2 complex algebra for a lossless 50/50 beam splitter in its two
// phase bases. Amplitudes are normalized so a single photon has |E0| = 1 and
// intensities come out in units of the single-photon intensity I0.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace bsbunch {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kUnitarityTolerance = 1e-12;

/// Relative phase of the reflected field: Plus is +pi/2, Minus is -pi/2.
enum class PhaseBasis { Plus, Minus };

/// Sign carried into the symmetric or antisymmetric sum of the two basis matrices.
enum class Combination { Symmetric, Antisymmetric };

struct PortAmplitudes {
  Complex e1{};
  Complex e2{};
};

struct IntensityPair {
  double i1 = 0.0;
  double i2 = 0.0;
};

class BeamSplitterMatrix {
 public:
  using Entries = std::array<std::array<Complex, 2>, 2>;

  constexpr BeamSplitterMatrix() = default;
  constexpr explicit BeamSplitterMatrix(const Entries& entries) : m_(entries) {}

  constexpr const Complex& operator()(int row, int col) const { return m_[row][col]; }
  constexpr Complex& operator()(int row, int col) { return m_[row][col]; }

  [[nodiscard]] BeamSplitterMatrix adjoint() const {
    return BeamSplitterMatrix({{{std::conj(m_[0][0]), std::conj(m_[1][0])},
                                {std::conj(m_[0][1]), std::conj(m_[1][1])}}});
  }

  [[nodiscard]] BeamSplitterMatrix swapped_rows() const {
    return BeamSplitterMatrix(Entries{m_[1], m_[0]});
  }

  friend BeamSplitterMatrix operator*(const BeamSplitterMatrix& a, const BeamSplitterMatrix& b) {
    BeamSplitterMatrix r;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        r.m_[i][j] = a.m_[i][0] * b.m_[0][j] + a.m_[i][1] * b.m_[1][j];
      }
    }
    return r;
  }

  friend BeamSplitterMatrix operator*(Complex s, const BeamSplitterMatrix& a) {
    BeamSplitterMatrix r = a;
    for (auto& row : r.m_) {
      for (auto& v : row) v *= s;
    }
    return r;
  }

  friend BeamSplitterMatrix operator+(const BeamSplitterMatrix& a, const BeamSplitterMatrix& b) {
    BeamSplitterMatrix r = a;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) r.m_[i][j] += b.m_[i][j];
    }
    return r;
  }

  friend BeamSplitterMatrix operator-(const BeamSplitterMatrix& a, const BeamSplitterMatrix& b) {
    return a + Complex(-1.0) * b;
  }

  /// Largest entrywise modulus of the difference.
  [[nodiscard]] double max_abs_diff(const BeamSplitterMatrix& other) const {
    double d = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(m_[i][j] - other.m_[i][j]));
    }
    return d;
  }

  /// Frobenius norm.
  [[nodiscard]] double norm() const {
    double s = 0.0;
    for (const auto& row : m_) {
      for (const auto& v : row) s += std::norm(v);
    }
    return std::sqrt(s);
  }

 private:
  Entries m_{};
};

inline BeamSplitterMatrix identity_matrix() {
  return BeamSplitterMatrix({{{Complex(1.0), Complex(0.0)}, {Complex(0.0), Complex(1.0)}}});
}

inline bool is_unitary(const BeamSplitterMatrix& m, double tol = kUnitarityTolerance) {
  return (m.adjoint() * m).max_abs_diff(identity_matrix()) <= tol;
}

/// (1/sqrt2) [[1, +-i], [+-i, 1]].
inline BeamSplitterMatrix bs_matrix(PhaseBasis basis) {
  const double s = 1.0 / std::numbers::sqrt2;
  const Complex off = (basis == PhaseBasis::Plus ? kI : -kI) * s;
  return BeamSplitterMatrix({{{Complex(s), off}, {off, Complex(s)}}});
}

inline PortAmplitudes apply(const BeamSplitterMatrix& m, const PortAmplitudes& in) {
  if (!is_unitary(m)) {
    throw std::invalid_argument("apply: beam splitter matrix is not unitary");
  }
  return {m(0, 0) * in.e1 + m(0, 1) * in.e2, m(1, 0) * in.e1 + m(1, 1) * in.e2};
}

inline IntensityPair intensity(const PortAmplitudes& a) { return {std::norm(a.e1), std::norm(a.e2)}; }

inline double total_intensity(const PortAmplitudes& a) { return std::norm(a.e1) + std::norm(a.e2); }

/// Two photons sharing an input port see opposite bases. The two basis
/// matrices add (symmetric) or subtract (antisymmetric), which sends all of
/// the amplitude to one output port.
inline PortAmplitudes superpose_opposite(const PortAmplitudes& input, Combination combination) {
  if (input.e2 != Complex(0.0)) {
    throw std::invalid_argument("superpose_opposite: input must occupy port 1 only");
  }
  const PortAmplitudes plus = apply(bs_matrix(PhaseBasis::Plus), input);
  const PortAmplitudes minus = apply(bs_matrix(PhaseBasis::Minus), input);
  if (combination == Combination::Symmetric) {
    return {plus.e1 + minus.e1, plus.e2 + minus.e2};
  }
  return {plus.e1 - minus.e1, plus.e2 - minus.e2};
}

/// Both photons see the same basis: the column (amp, 0) goes through one
/// matrix and splits evenly.
inline PortAmplitudes apply_same_basis(Complex two_photon_amplitude, PhaseBasis basis) {
  return apply(bs_matrix(basis), {two_photon_amplitude, Complex(0.0)});
}

/// True iff m1 = exp(i theta) m2 for some real theta, within tol. Checked via
/// m1 m2^dagger being a unit-modulus multiple of the identity.
inline bool global_phase_equivalent(const BeamSplitterMatrix& m1, const BeamSplitterMatrix& m2,
                                    double tol = kUnitarityTolerance) {
  if (!is_unitary(m1, std::max(tol, kUnitarityTolerance)) ||
      !is_unitary(m2, std::max(tol, kUnitarityTolerance))) {
    throw std::invalid_argument("global_phase_equivalent: matrices must be unitary");
  }
  const BeamSplitterMatrix p = m1 * m2.adjoint();
  return std::abs(p(0, 1)) <= tol && std::abs(p(1, 0)) <= tol &&
         std::abs(p(0, 0) - p(1, 1)) <= tol && std::abs(std::abs(p(0, 0)) - 1.0) <= tol;
}

}  // namespace bsbunch
