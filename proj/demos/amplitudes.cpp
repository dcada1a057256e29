// Prints output-port amplitudes for a single-port input under both phase
// bases and their superpositions.

#include <cstdio>
#include <numbers>

#include "bsbunch/bs_algebra.hpp"

using namespace bsbunch;

static void show(const char* label, const PortAmplitudes& a) {
  const auto i = intensity(a);
  std::printf("%-22s E1 = (%+.4f, %+.4f)  E2 = (%+.4f, %+.4f)  I1 = %.3f  I2 = %.3f\n", label, a.e1.real(),
              a.e1.imag(), a.e2.real(), a.e2.imag(), i.i1, i.i2);
}

int main() {
  const PortAmplitudes in{1.0, 0.0};
  show("[BS]+ E0", apply(bs_matrix(PhaseBasis::Plus), in));
  show("[BS]- E0", apply(bs_matrix(PhaseBasis::Minus), in));
  show("symmetric (+,-)", superpose_opposite(in, Combination::Symmetric));
  show("antisymmetric (-,+)", superpose_opposite(in, Combination::Antisymmetric));
  show("same basis (+,+)", apply_same_basis(std::numbers::sqrt2, PhaseBasis::Plus));
  show("same basis (-,-)", apply_same_basis(std::numbers::sqrt2, PhaseBasis::Minus));
}
