#pragma once

#include <cmath>

#include "twosphere/capacitance.hpp"
#include "twosphere/errors.hpp"
#include "twosphere/geometry.hpp"

namespace twosphere {

/// Background (rho, kappa) and resonator (rho_b, kappa_b) material parameters.
struct Material {
  double rho = 1.0;
  double rho_b = 1e-3;
  double kappa = 1.0;
  double kappa_b = 1e-3;

  double v() const { return std::sqrt(kappa / rho); }
  double v_b() const { return std::sqrt(kappa_b / rho_b); }
  double delta() const { return rho_b / rho; }
  double tau() const { return v_b() / v(); }
};

inline std::vector<std::string> validate(const Material& m) {
  detail::require(m.rho > 0.0 && m.rho_b > 0.0 && m.kappa > 0.0 && m.kappa_b > 0.0,
                  "material densities and bulk moduli must be positive");
  std::vector<std::string> warnings;
  if (m.delta() >= 1.0) warnings.push_back("contrast delta >= 1; high-contrast asymptotics do not apply");
  return warnings;
}

/// Eigenvalues lambda1 <= lambda2 of the rescaled capacitance matrix with
/// eigenvector ratios d_n = (lambda_n - ct22) / ct21 (second component 1).
struct SpectralPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  double lambda(int n) const { return n == 1 ? lambda1 : lambda2; }
  double ratio(int n) const { return n == 1 ? d1 : d2; }
};

struct ResonantFrequencies {
  double omega1 = 0.0;
  double omega2 = 0.0;

  double omega(int n) const { return n == 1 ? omega1 : omega2; }
};

/// Closed-form 2x2 eigen-decomposition.
///
/// lambda2 comes from the quadratic formula; lambda1 = det / lambda2 with the
/// determinant written through the row sums, ct11 rs2 + ct22 rs1 - rs1 rs2,
/// which has no |log eps|-sized cancellation.
inline SpectralPair eigen(const RescaledCapacitance& ct) {
  if (!(ct.ct12 * ct.ct21 > 0.0)) {
    throw NumericalFailure("rescaled capacitance off-diagonal entries have inconsistent signs");
  }
  const double diff = ct.ct11 - ct.ct22;
  const double disc = diff * diff + 4.0 * ct.ct12 * ct.ct21;
  if (!(disc >= 0.0) || !std::isfinite(disc)) {
    throw NumericalFailure("negative discriminant in capacitance eigenproblem");
  }
  SpectralPair sp;
  sp.lambda2 = 0.5 * (ct.ct11 + ct.ct22 + std::sqrt(disc));
  const double det = ct.ct11 * ct.rs2 + ct.ct22 * ct.rs1 - ct.rs1 * ct.rs2;
  sp.lambda1 = det / sp.lambda2;
  sp.d1 = (sp.lambda1 - ct.ct22) / ct.ct21;
  sp.d2 = (sp.lambda2 - ct.ct22) / ct.ct21;
  return sp;
}

/// omega_n = sqrt(delta v_b^2 lambda_n), real leading-order part.
inline ResonantFrequencies resonant_frequencies(const SpectralPair& sp, const Material& m) {
  validate(m);
  if (!(sp.lambda1 > 0.0) || !(sp.lambda2 > 0.0)) {
    throw InvalidArgument("resonant frequencies need positive eigenvalues");
  }
  const double scale = m.delta() * m.v_b() * m.v_b();
  return {std::sqrt(scale * sp.lambda1), std::sqrt(scale * sp.lambda2)};
}

/// lambda1 = (r1^3 sigma1 + r2^3 sigma2) / (r1^3 + r2^3).
inline double lambda1_asymptotic(const ResonatorPair& pair, const SigmaTerms& sigma) {
  const double w1 = pair.r1 * pair.r1 * pair.r1;
  const double w2 = pair.r2 * pair.r2 * pair.r2;
  return (w1 * sigma.sigma1 + w2 * sigma.sigma2) / (w1 + w2);
}

/// Pure-logarithm leading term for omega2:
/// sqrt(delta 3 v_b^2 / 2 (1/r1^3 + 1/r2^3) r1 r2/(r1+r2) log(2 r1 r2 / ((r1+r2) eps))).
inline double omega2_leading_log(const ResonatorPair& pair, const Material& m) {
  validate(pair);
  const double r1 = pair.r1;
  const double r2 = pair.r2;
  const double reduced = r1 * r2 / (r1 + r2);
  const double log_arg = static_cast<double>(std::log(2.0L * reduced) - std::log(pair.epsilon));
  detail::require(log_arg > 0.0, "separation too large for the logarithmic omega2 formula");
  const double vb = m.v_b();
  return std::sqrt(m.delta() * 1.5 * vb * vb * (1.0 / (r1 * r1 * r1) + 1.0 / (r2 * r2 * r2)) *
                   reduced * log_arg);
}

/// Asymptotic resonant frequencies.
///
/// omega1 uses lambda1 from the sigma terms. omega2 uses lambda2 = trace - lambda1
/// of the digamma-asymptotic matrix; for identical spheres this is exactly
/// sqrt(delta 3 v_b^2 / (2 r^2) (log(r/eps) + 2 gamma + 2 log 2)) up to O(eps),
/// and for any radii it agrees with omega2_leading_log at leading order.
inline Checked<ResonantFrequencies> resonance_asymptotic(const ResonatorPair& pair,
                                                         const Material& m) {
  Checked<ResonantFrequencies> out;
  out.warnings = validate(m);
  const auto ct = capacitance_asymptotic_rescaled(pair);
  out.warnings.insert(out.warnings.end(), ct.warnings.begin(), ct.warnings.end());
  const SigmaTerms sigma{ct.value.rs1, ct.value.rs2};
  const double lambda1 = lambda1_asymptotic(pair, sigma);
  const double lambda2 = ct.value.ct11 + ct.value.ct22 - lambda1;
  const double reduced = pair.r1 * pair.r2 / (pair.r1 + pair.r2);
  if (std::log(2.0L * reduced) - std::log(pair.epsilon) <= 1.0L) {
    out.warnings.push_back("log(2 r1 r2 / ((r1 + r2) eps)) <= 1; omega2 asymptotics invalid");
  }
  if (!(lambda2 > lambda1) || !(lambda1 > 0.0)) {
    throw NumericalFailure("asymptotic eigenvalues are not ordered; separation too large");
  }
  const double scale = m.delta() * m.v_b() * m.v_b();
  out.value = {std::sqrt(scale * lambda1), std::sqrt(scale * lambda2)};
  return out;
}

}  // namespace twosphere
