// Prints how the two resonant frequencies of a pair of identical bubbles
// move as the bubbles approach each other.
#include <cmath>
#include <cstdio>

#include "twosphere/twosphere.hpp"

int main() {
  using namespace twosphere;
  const Material water_air{1.0, 1e-3, 1.0, 1e-3};
  std::printf("%10s %14s %14s %14s %14s\n", "epsilon", "omega1", "omega2", "omega1_asym",
              "omega2_asym");
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8}) {
    const ResonatorPair pair{1.0, 1.0, eps};
    const BisphericalFrame frame = frame_from_pair(pair);
    const SpectralPair sp = eigen(rescale(capacitance_exact(frame, {1e-12, 100'000'000}), pair));
    const ResonantFrequencies exact = resonant_frequencies(sp, water_air);
    const ResonantFrequencies asym = resonance_asymptotic(pair, water_air).value;
    std::printf("%10.1e %14.8f %14.8f %14.8f %14.8f\n", eps, exact.omega1, exact.omega2,
                asym.omega1, asym.omega2);
  }
  return 0;
}
