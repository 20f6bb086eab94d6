#pragma once

#include <cmath>
#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include "twosphere/capacitance.hpp"
#include "twosphere/errors.hpp"
#include "twosphere/fields.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/spectra.hpp"

namespace twosphere {

using Complex = std::complex<double>;

/// Plane wave amplitude * exp(i k direction . x) in the background medium.
struct IncidentWave {
  double omega = 0.0;
  CartesianPoint direction{0.0, 0.0, 1.0};
  Complex amplitude{1.0, 0.0};
  double k = 0.0;    // omega / v
  double k_b = 0.0;  // omega / v_b

  Complex value(const CartesianPoint& x) const {
    const double phase =
        k * (direction.x1 * x.x1 + direction.x2 * x.x2 + direction.x3 * x.x3);
    return amplitude * std::exp(Complex(0.0, phase));
  }
  Complex value_at_origin() const { return amplitude; }
};

inline Checked<IncidentWave> make_incident_wave(double omega, CartesianPoint direction,
                                                Complex amplitude, const Material& m,
                                                double max_radius = 1.0) {
  detail::require(omega > 0.0, "incident frequency must be positive");
  const double len = direction.norm();
  detail::require(len > 0.0, "incident direction must be non-zero");
  detail::require(std::abs(len - 1.0) < 1e-12, "incident direction must be a unit vector");
  Checked<IncidentWave> out;
  out.value = {omega, direction, amplitude, omega / m.v(), omega / m.v_b()};
  if (omega * max_radius >= 0.1) {
    out.warnings.push_back("incident frequency is not small compared to 1 / radius");
  }
  return out;
}

/// Modal weights a, b of u = u_in - S[S^-1 u_in] + a u_1 + b u_2.
struct ModalCoefficients {
  Complex a{};
  Complex b{};
  double denom1 = 0.0;  // omega^2 - omega1^2
  double denom2 = 0.0;  // omega^2 - omega2^2
  double omega1 = 0.0;
  double omega2 = 0.0;
  Complex flux_total{};       // int_{dD} S^-1[u_in]
  Complex flux_difference{};  // int_{dD1} - |D1|/|D2| int_{dD2}
};

struct PoleGuard {
  // reject |omega^2 - omega_n^2| < relative * omega_n^2
  double relative = 1e-10;
};

/// Leading order in the incident field: u_in ~ u_in(0) on D, hence
/// int_{dD_i} S^-1[u_in] = -u_in(0) (C_i1 + C_i2).
inline ModalCoefficients modal_coefficients(const CapacitanceMatrix& c, const ResonatorPair& pair,
                                            const Material& m, const IncidentWave& w,
                                            const PoleGuard& guard = {}) {
  const SpectralPair sp = eigen(rescale(c, pair));
  const ResonantFrequencies freq = resonant_frequencies(sp, m);
  ModalCoefficients mc;
  mc.omega1 = freq.omega1;
  mc.omega2 = freq.omega2;
  const double w2 = w.omega * w.omega;
  mc.denom1 = w2 - freq.omega1 * freq.omega1;
  mc.denom2 = w2 - freq.omega2 * freq.omega2;
  for (int n : {1, 2}) {
    const double om = freq.omega(n);
    if (std::abs(n == 1 ? mc.denom1 : mc.denom2) < guard.relative * om * om) {
      throw NumericalFailure("incident frequency is within the pole guard of omega" +
                             std::to_string(n));
    }
  }
  const Complex u0 = w.value_at_origin();
  const Complex flux1 = -u0 * c.row_sum1;
  const Complex flux2 = -u0 * c.row_sum2;
  mc.flux_total = flux1 + flux2;
  mc.flux_difference = flux1 - (pair.volume1() / pair.volume2()) * flux2;
  const double scale = m.delta() * m.v_b() * m.v_b() / pair.volume();
  mc.a = scale * mc.flux_total / mc.denom1;
  mc.b = -scale * mc.flux_difference / mc.denom2;
  return mc;
}

/// Leading-order total field u_in(x) - u_in(0)(V1 + V2)(x) + a u_1(x) + b u_2(x);
/// the O(omega) remainder is not computed.
inline Complex eval_scattered(const ModalCoefficients& mc, const PotentialSeries& ps,
                              const SpectralPair& sp, const IncidentWave& w,
                              const CartesianPoint& x) {
  const Region region = classify(ps.frame(), x);
  if (region == Region::inside_d1 || region == Region::inside_d2) {
    throw InvalidArgument("scattered field requested inside a resonator");
  }
  BisphericalPoint p = to_bispherical(ps.frame(), x);
  // boundary points can land a rounding error outside the strip
  p.xi = std::clamp(p.xi, -ps.frame().xi1, ps.frame().xi2);
  const PotentialSample s = ps.sample(p, false);
  const double v1 = s.value[0];
  const double v2 = s.value[1];
  const double u1 = sp.d1 * v1 + v2;
  const double u2 = sp.d2 * v1 + v2;
  return w.value(x) - w.value_at_origin() * (v1 + v2) + mc.a * u1 + mc.b * u2;
}

struct ResponseRow {
  double omega = 0.0;
  double abs_a = 0.0;
  double abs_b = 0.0;
};

/// |a|, |b| over a frequency grid, skipping points inside the pole guard.
inline std::vector<ResponseRow> response_curve(const CapacitanceMatrix& c,
                                               const ResonatorPair& pair, const Material& m,
                                               const std::vector<double>& omega_grid,
                                               CartesianPoint direction,
                                               Complex amplitude = {1.0, 0.0},
                                               const PoleGuard& guard = {}) {
  std::vector<ResponseRow> rows;
  rows.reserve(omega_grid.size());
  for (double omega : omega_grid) {
    const IncidentWave w = make_incident_wave(omega, direction, amplitude, m).value;
    try {
      const ModalCoefficients mc = modal_coefficients(c, pair, m, w, guard);
      rows.push_back({omega, std::abs(mc.a), std::abs(mc.b)});
    } catch (const NumericalFailure&) {
      // inside the guard band
    }
  }
  return rows;
}

}  // namespace twosphere
