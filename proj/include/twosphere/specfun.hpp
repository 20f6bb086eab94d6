#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "twosphere/errors.hpp"
#include "twosphere/summation.hpp"

namespace twosphere {

inline constexpr double euler_gamma = std::numbers::egamma;

/// Forward three-term recurrence for P_n(x) and P_n'(x) in lock step.
///
/// The derivative uses P'_{n+1} = P'_{n-1} + (2n+1) P_n, which stays exact at
/// the endpoints x = +-1 where the closed-form derivative is 0/0.
class LegendreRecurrence {
 public:
  explicit LegendreRecurrence(double x) : x_(x) {}

  int degree() const { return n_; }
  double value() const { return p_; }
  double derivative() const { return dp_; }

  void advance() {
    const double n = n_;
    const double p_next = ((2.0 * n + 1.0) * x_ * p_ - n * p_prev_) / (n + 1.0);
    const double dp_next = dp_prev_ + (2.0 * n + 1.0) * p_;
    p_prev_ = p_;
    p_ = p_next;
    dp_prev_ = dp_;
    dp_ = dp_next;
    ++n_;
  }

 private:
  double x_;
  int n_ = 0;
  double p_ = 1.0;
  double p_prev_ = 0.0;
  double dp_ = 0.0;
  double dp_prev_ = 0.0;
};

inline double legendre_p(int n, double x) {
  detail::require(n >= 0, "Legendre degree must be non-negative");
  detail::require(std::abs(x) <= 1.0, "Legendre argument must lie in [-1, 1]");
  LegendreRecurrence rec(x);
  while (rec.degree() < n) rec.advance();
  return rec.value();
}

inline double legendre_p_deriv(int n, double x) {
  detail::require(n >= 0, "Legendre degree must be non-negative");
  detail::require(std::abs(x) <= 1.0, "Legendre argument must lie in [-1, 1]");
  LegendreRecurrence rec(x);
  while (rec.degree() < n) rec.advance();
  return rec.derivative();
}

/// psi(z) = d/dz log Gamma(z) for real z > 0.
///
/// Upward recurrence psi(z) = psi(z + 1) - 1/z until z >= 10, then the
/// asymptotic series in 1/z^2 through the z^-14 term (remainder < 5e-17).
inline double digamma(double z) {
  detail::require(std::isfinite(z) && z > 0.0, "digamma requires z > 0");
  CompensatedSum<double> shift;
  while (z < 10.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  // B_{2k} / (2k) for k = 1..7
  static constexpr std::array<double, 7> coeffs = {
      1.0 / 12.0,        -1.0 / 120.0, 1.0 / 252.0,  -1.0 / 240.0,
      1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0};
  const double inv2 = 1.0 / (z * z);
  double series = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) series = (series + *it) * inv2;
  shift += std::log(z);
  shift -= 0.5 / z;
  shift -= series;
  return shift.value();
}

/// sum_{n>=1} z / (n (n - z)) for 0 < z < 1, so that -gamma - result equals
/// psi(1 - z).
///
/// The first 64 terms are summed directly; the remainder is the
/// Euler-Maclaurin expansion of f(x) = 1/(x - z) - 1/x from x = 64 through
/// the B_8 correction, whose truncation error is below 1e-20.
inline double digamma_series_tail(double z) {
  detail::require(z > 0.0 && z < 1.0, "series argument z must lie in (0, 1)");
  constexpr int direct_terms = 64;
  CompensatedSum<double> sum;
  for (int n = 1; n <= direct_terms; ++n) {
    sum += z / (n * (n - z));
  }
  const double N = direct_terms;
  const double f_n = z / (N * (N - z));
  sum += -std::log1p(-z / N);
  sum -= 0.5 * f_n;
  // B_{2k} / (2k) for k = 1..4
  static constexpr std::array<double, 4> bern = {1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0,
                                                 -1.0 / 240.0};
  double pow_shift = 1.0;
  double pow_plain = 1.0;
  const double inv_shift2 = 1.0 / ((N - z) * (N - z));
  const double inv_plain2 = 1.0 / (N * N);
  for (double b : bern) {
    pow_shift *= inv_shift2;
    pow_plain *= inv_plain2;
    sum += b * (pow_shift - pow_plain);
  }
  return sum.value();
}

}  // namespace twosphere
