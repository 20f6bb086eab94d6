#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "twosphere/errors.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/specfun.hpp"
#include "twosphere/summation.hpp"

namespace twosphere {

/// Capacitance coefficients C_ij = -int_{dD_i} psi_j, isolated sphere -> 4 pi r.
///
/// row_sum1 = c11 + c12 and row_sum2 = c22 + c21 are summed as their own
/// series. Near touching they are O(1) while the entries grow like |log eps|,
/// so forming them by subtraction would lose most of their digits.
struct CapacitanceMatrix {
  double c11 = 0.0;
  double c12 = 0.0;
  double c21 = 0.0;
  double c22 = 0.0;
  double row_sum1 = 0.0;
  double row_sum2 = 0.0;
  std::int64_t n_terms = 0;
  double tail_bound = 0.0;
};

/// C_ij / |D_i| with |D_i| = 4 pi r_i^3 / 3.
struct RescaledCapacitance {
  double ct11 = 0.0;
  double ct12 = 0.0;
  double ct21 = 0.0;
  double ct22 = 0.0;
  double rs1 = 0.0;  // ct11 + ct12
  double rs2 = 0.0;  // ct22 + ct21

  static RescaledCapacitance from_entries(double ct11, double ct12, double ct21, double ct22) {
    return {ct11, ct12, ct21, ct22, ct11 + ct12, ct22 + ct21};
  }
};

/// sigma_i in ct12 = -ct11 + sigma1, ct21 = -ct22 + sigma2.
struct SigmaTerms {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

struct SeriesControl {
  double tol = 1e-13;
  std::int64_t max_terms = 100'000'000;
};

namespace detail {

inline CapacitanceMatrix sum_capacitance_series(const BisphericalFrame& frame,
                                                const SeriesControl& control) {
  require(control.tol > 0.0, "series tolerance must be positive");
  const double x1 = frame.xi1;
  const double x2 = frame.xi2;
  const double s = frame.xi_sum();
  const double scale = 8.0 * std::numbers::pi * frame.alpha;
  // geometric ratio bounds for consecutive terms, and q / (1 - q)
  const auto tail_factor = [](double x) {
    const double q = std::exp(-2.0 * x);
    return q / -std::expm1(-2.0 * x);
  };
  const double tail11 = tail_factor(x1);
  const double tail22 = tail_factor(x2);
  const double tail12 = tail_factor(s);

  CompensatedSum<double> c11, c22, c12, rs1, rs2;
  CapacitanceMatrix out;
  std::int64_t n = 0;
  for (;; ++n) {
    if (n >= control.max_terms) {
      throw NumericalFailure("capacitance series hit the truncation cap of " +
                             std::to_string(control.max_terms) + " terms");
    }
    const double m = 2.0 * static_cast<double>(n) + 1.0;
    const double denom = -std::expm1(-m * s);
    const double e1 = std::exp(-m * x1);
    const double e2 = std::exp(-m * x2);
    const double t11 = e1 / denom;
    const double t22 = e2 / denom;
    const double t12 = std::exp(-m * s) / denom;
    c11 += t11;
    c22 += t22;
    c12 += t12;
    rs1 += e1 * -std::expm1(-m * x2) / denom;
    rs2 += e2 * -std::expm1(-m * x1) / denom;

    // rs_i terms are bounded by the matching diagonal terms
    const double bound = scale * std::max({t11 * tail11, t22 * tail22, t12 * tail12});
    const double current = scale * std::max({t11, t22, t12});
    if (current < control.tol && bound < control.tol) {
      out.tail_bound = bound;
      break;
    }
  }
  out.n_terms = n + 1;
  out.c11 = scale * c11.value();
  out.c22 = scale * c22.value();
  out.c12 = -scale * c12.value();
  out.c21 = out.c12;
  out.row_sum1 = scale * rs1.value();
  out.row_sum2 = scale * rs2.value();
  return out;
}

}  // namespace detail

/// Bispherical series for the capacitance coefficients, summed until both
/// the current term and the geometric tail bound are below tol (absolute).
inline CapacitanceMatrix capacitance_exact(const BisphericalFrame& frame,
                                           const SeriesControl& control = {}) {
  detail::require(frame.alpha > 0.0 && frame.xi1 > 0.0 && frame.xi2 > 0.0,
                  "bispherical frame is degenerate");
  return detail::sum_capacitance_series(frame, control);
}

/// Rough number of terms capacitance_exact needs at tolerance tol, from the
/// geometric tail bound of the slowest diagonal series. Callers use it to skip
/// hopeless evaluations before starting them.
inline double capacitance_terms_estimate(const BisphericalFrame& frame, double tol) {
  const double x = std::min(frame.xi1, frame.xi2);
  const double one_minus_q = -std::expm1(-2.0 * x);
  const double scale = 8.0 * std::numbers::pi * frame.alpha;
  return std::max(0.0, std::log(scale / (tol * one_minus_q * one_minus_q)) / (2.0 * x));
}

/// Identical spheres of radius r, using alpha = sqrt(eps (r + eps/4)).
inline CapacitanceMatrix capacitance_symmetric(double r, long double epsilon,
                                               const SeriesControl& control = {}) {
  return detail::sum_capacitance_series(frame_symmetric(r, epsilon), control);
}

inline RescaledCapacitance rescale(const CapacitanceMatrix& c, const ResonatorPair& pair) {
  const double v1 = pair.volume1();
  const double v2 = pair.volume2();
  return {c.c11 / v1, c.c12 / v1, c.c21 / v2, c.c22 / v2, c.row_sum1 / v1, c.row_sum2 / v2};
}

/// Row sums of the rescaled matrix, i.e. the sigma terms without the
/// asymptotic approximation.
inline SigmaTerms exact_sigma(const RescaledCapacitance& ct) { return {ct.rs1, ct.rs2}; }

/// sigma_i = 3 alpha / (r_i^3 (xi1 + xi2)) sum_n z_i / (n (n - z_i)),
/// z_i = 1 - xi_i / (xi1 + xi2).
inline SigmaTerms sigma_terms(const BisphericalFrame& frame, const ResonatorPair& pair) {
  const double s = frame.xi_sum();
  const double z1 = frame.xi2 / s;
  const double z2 = frame.xi1 / s;
  const double k1 = 3.0 * frame.alpha / (pair.r1 * pair.r1 * pair.r1 * s);
  const double k2 = 3.0 * frame.alpha / (pair.r2 * pair.r2 * pair.r2 * s);
  return {k1 * digamma_series_tail(z1), k2 * digamma_series_tail(z2)};
}

/// Leading-order rescaled coefficients from the digamma asymptotics; the
/// remainder is O(sqrt(eps)).
inline Checked<RescaledCapacitance> capacitance_asymptotic_rescaled(const ResonatorPair& pair) {
  const BisphericalFrame frame = frame_from_pair(pair);
  const double s = frame.xi_sum();
  const double log_term = std::log(2.0 / s);
  const double k1 = 3.0 * frame.alpha / (pair.r1 * pair.r1 * pair.r1 * s);
  const double k2 = 3.0 * frame.alpha / (pair.r2 * pair.r2 * pair.r2 * s);
  const SigmaTerms sigma = sigma_terms(frame, pair);

  Checked<RescaledCapacitance> out;
  out.value.ct11 = k1 * (log_term - digamma(frame.xi1 / s));
  out.value.ct22 = k2 * (log_term - digamma(frame.xi2 / s));
  out.value.ct12 = -k1 * (log_term + euler_gamma);
  out.value.ct21 = -k2 * (log_term + euler_gamma);
  out.value.rs1 = sigma.sigma1;
  out.value.rs2 = sigma.sigma2;
  if (s >= 2.0 || pair.epsilon > 1e-2L * std::min(pair.r1, pair.r2)) {
    out.warnings.push_back("separation is not small compared to the radii; "
                           "close-to-touching asymptotics are unreliable");
  }
  return out;
}

}  // namespace twosphere
