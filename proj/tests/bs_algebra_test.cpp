#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bsbunch/bs_algebra.hpp"

namespace bsbunch {
namespace {

constexpr double kTol = 1e-12;
const double kSqrt2 = std::sqrt(2.0);

void expect_complex_near(Complex actual, Complex expected) {
  EXPECT_NEAR(actual.real(), expected.real(), kTol);
  EXPECT_NEAR(actual.imag(), expected.imag(), kTol);
}

BeamSplitterMatrix random_unitary(std::mt19937_64& gen) {
  // U(2) = e^{i delta} [[a, -conj(b)], [b, conj(a)]] with |a|^2 + |b|^2 = 1.
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> v(0.0, 1.0);
  const double theta = std::acos(std::sqrt(v(gen)));
  const Complex a = std::polar(std::cos(theta), u(gen));
  const Complex b = std::polar(std::sin(theta), u(gen));
  const Complex phase = std::polar(1.0, u(gen));
  return phase * BeamSplitterMatrix({{{a, -std::conj(b)}, {b, std::conj(a)}}});
}

TEST(BsMatrix, PlusBasisEntries) {
  const auto m = bs_matrix(PhaseBasis::Plus);
  const double s = 1.0 / kSqrt2;
  expect_complex_near(m(0, 0), s);
  expect_complex_near(m(0, 1), Complex(0, s));
  expect_complex_near(m(1, 0), Complex(0, s));
  expect_complex_near(m(1, 1), s);
}

TEST(BsMatrix, MinusBasisEntries) {
  const auto m = bs_matrix(PhaseBasis::Minus);
  const double s = 1.0 / kSqrt2;
  expect_complex_near(m(0, 1), Complex(0, -s));
  expect_complex_near(m(1, 0), Complex(0, -s));
}

TEST(BsMatrix, BothBasesUnitary) {
  for (auto b : {PhaseBasis::Plus, PhaseBasis::Minus}) {
    const auto m = bs_matrix(b);
    EXPECT_LE((m.adjoint() * m).max_abs_diff(identity_matrix()), kTol);
    for (int row = 0; row < 2; ++row) {
      EXPECT_NEAR(std::norm(m(row, 0)) + std::norm(m(row, 1)), 1.0, kTol);
    }
  }
}

TEST(Apply, SinglePhotonPlus) {
  const auto out = apply(bs_matrix(PhaseBasis::Plus), {1.0, 0.0});
  expect_complex_near(out.e1, 1.0 / kSqrt2);
  expect_complex_near(out.e2, Complex(0, 1.0 / kSqrt2));
}

TEST(Apply, SinglePhotonMinus) {
  const auto out = apply(bs_matrix(PhaseBasis::Minus), {1.0, 0.0});
  expect_complex_near(out.e1, 1.0 / kSqrt2);
  expect_complex_near(out.e2, Complex(0, -1.0 / kSqrt2));
}

TEST(Apply, VacuumStaysVacuum) {
  std::mt19937_64 gen(3);
  const auto out = apply(random_unitary(gen), {0.0, 0.0});
  EXPECT_EQ(out.e1, Complex(0.0));
  EXPECT_EQ(out.e2, Complex(0.0));
}

TEST(Apply, RejectsNonUnitary) {
  const BeamSplitterMatrix lossy({{{Complex(0.5), Complex(0.0)}, {Complex(0.0), Complex(0.5)}}});
  EXPECT_THROW(apply(lossy, {1.0, 0.0}), std::invalid_argument);
}

TEST(Apply, ConservesIntensityForRandomUnitaries) {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_unitary(gen);
    const PortAmplitudes in{{g(gen), g(gen)}, {g(gen), g(gen)}};
    const auto out = apply(m, in);
    EXPECT_NEAR(total_intensity(out), total_intensity(in), kTol * std::max(1.0, total_intensity(in)));
  }
}

TEST(SuperposeOpposite, SymmetricBunchesIntoPortOne) {
  const auto out = superpose_opposite({1.0, 0.0}, Combination::Symmetric);
  expect_complex_near(out.e1, kSqrt2);
  expect_complex_near(out.e2, 0.0);
}

TEST(SuperposeOpposite, AntisymmetricBunchesIntoPortTwo) {
  const auto out = superpose_opposite({1.0, 0.0}, Combination::Antisymmetric);
  expect_complex_near(out.e1, 0.0);
  expect_complex_near(out.e2, Complex(0.0, kSqrt2));
}

TEST(SuperposeOpposite, CarriesTwoPhotonsOfIntensityInOnePort) {
  for (auto c : {Combination::Symmetric, Combination::Antisymmetric}) {
    const auto out = superpose_opposite({1.0, 0.0}, c);
    EXPECT_NEAR(total_intensity(out), 2.0, kTol);
    const auto i = intensity(out);
    EXPECT_TRUE(std::abs(i.i1) < kTol || std::abs(i.i2) < kTol);
  }
}

TEST(SuperposeOpposite, AnyInputPhaseStillBunches) {
  for (double phi = 0.0; phi < 2 * std::numbers::pi; phi += 0.37) {
    for (auto c : {Combination::Symmetric, Combination::Antisymmetric}) {
      const auto out = superpose_opposite({std::polar(1.0, phi), 0.0}, c);
      EXPECT_TRUE(std::abs(out.e1) < kTol || std::abs(out.e2) < kTol);
    }
  }
}

TEST(SuperposeOpposite, RequiresSinglePortInput) {
  EXPECT_THROW(superpose_opposite({1.0, 1.0}, Combination::Symmetric), std::invalid_argument);
}

TEST(ApplySameBasis, SplitsEvenly) {
  const auto plus = apply_same_basis(kSqrt2, PhaseBasis::Plus);
  expect_complex_near(plus.e1, 1.0);
  expect_complex_near(plus.e2, Complex(0, 1));
  const auto minus = apply_same_basis(kSqrt2, PhaseBasis::Minus);
  expect_complex_near(minus.e1, 1.0);
  expect_complex_near(minus.e2, Complex(0, -1));
  for (const auto& out : {plus, minus}) {
    const auto i = intensity(out);
    EXPECT_NEAR(i.i1, 1.0, kTol);
    EXPECT_NEAR(i.i2, 1.0, kTol);
    EXPECT_NEAR(std::abs(out.e1), std::abs(out.e2), kTol);
  }
}

TEST(Intensity, ModulusSquared) {
  auto i = intensity({kSqrt2, 0.0});
  EXPECT_NEAR(i.i1, 2.0, kTol);
  EXPECT_EQ(i.i2, 0.0);
  i = intensity({1.0, Complex(0, 1)});
  EXPECT_NEAR(i.i1, 1.0, kTol);
  EXPECT_NEAR(i.i2, 1.0, kTol);
  i = intensity({0.0, 0.0});
  EXPECT_EQ(i.i1, 0.0);
  EXPECT_EQ(i.i2, 0.0);
}

TEST(GlobalPhase, MinusBasisEqualsRephasedSwappedForm) {
  const double s = 1.0 / kSqrt2;
  const BeamSplitterMatrix alt = std::polar(1.0, -std::numbers::pi / 2) *
                                 BeamSplitterMatrix({{{Complex(0, s), Complex(s)}, {Complex(s), Complex(0, s)}}});
  EXPECT_TRUE(global_phase_equivalent(bs_matrix(PhaseBasis::Minus), alt, 1e-12));
}

TEST(GlobalPhase, SelfEquivalent) {
  EXPECT_TRUE(global_phase_equivalent(bs_matrix(PhaseBasis::Plus), bs_matrix(PhaseBasis::Plus), 1e-12));
}

TEST(GlobalPhase, PlusAndMinusAreDistinct) {
  const auto p = bs_matrix(PhaseBasis::Plus);
  const auto m = bs_matrix(PhaseBasis::Minus);
  EXPECT_FALSE(global_phase_equivalent(p, m, 1e-12));

  // Brute-force oracle: min over theta of ||p - e^{i theta} m||.
  double best = 1e9;
  for (int k = 0; k < 100000; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / 100000.0;
    best = std::min(best, (p - std::polar(1.0, theta) * m).norm());
  }
  EXPECT_GT(best, 0.5);
}

TEST(GlobalPhase, ReflectedReferenceFormMatchesSwappedRows) {
  const double s = 1.0 / kSqrt2;
  for (auto b : {PhaseBasis::Plus, PhaseBasis::Minus}) {
    const Complex diag = b == PhaseBasis::Plus ? Complex(0, s) : Complex(0, -s);
    const BeamSplitterMatrix reflected =
        std::polar(1.0, -std::numbers::pi / 2) * BeamSplitterMatrix({{{diag, Complex(s)}, {Complex(s), diag}}});
    EXPECT_TRUE(global_phase_equivalent(reflected, bs_matrix(b).swapped_rows(), 1e-12));
  }
}

TEST(GlobalPhase, RandomPhasesRecovered) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const auto m = random_unitary(gen);
    EXPECT_TRUE(global_phase_equivalent(std::polar(1.0, u(gen)) * m, m, 1e-10));
  }
}

}  // namespace
}  // namespace bsbunch
