#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "twosphere/errors.hpp"

namespace twosphere {

/// Two spheres of radii r1, r2 whose surfaces are a distance epsilon apart.
///
/// The gap is held in extended precision: the close-to-touching regime
/// epsilon ~ exp(-1/delta^(1-beta)) leaves the range of double long before the
/// radii or the derived frame do.
struct ResonatorPair {
  double r1 = 1.0;
  double r2 = 1.0;
  long double epsilon = 0.1L;

  bool symmetric() const { return r1 == r2; }
  double volume1() const { return 4.0 * std::numbers::pi * r1 * r1 * r1 / 3.0; }
  double volume2() const { return 4.0 * std::numbers::pi * r2 * r2 * r2 / 3.0; }
  double volume() const { return volume1() + volume2(); }
};

/// Bispherical frame: limit points at (0, 0, +-alpha), dD1 = {xi = -xi1},
/// dD2 = {xi = xi2}, sphere centers on the x3 axis at c1 < -alpha < alpha < c2.
struct BisphericalFrame {
  double alpha = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;

  double xi_sum() const { return xi1 + xi2; }
  bool in_closed_exterior(double xi) const { return xi >= -xi1 && xi <= xi2; }
};

struct BisphericalPoint {
  double xi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

struct CartesianPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  double norm() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }

  friend CartesianPoint operator+(CartesianPoint a, CartesianPoint b) {
    return {a.x1 + b.x1, a.x2 + b.x2, a.x3 + b.x3};
  }
  friend CartesianPoint operator-(CartesianPoint a, CartesianPoint b) {
    return {a.x1 - b.x1, a.x2 - b.x2, a.x3 - b.x3};
  }
  friend CartesianPoint operator*(double s, CartesianPoint a) {
    return {s * a.x1, s * a.x2, s * a.x3};
  }
};

enum class Region { inside_d1, inside_d2, exterior, boundary };

inline std::string to_string(Region region) {
  switch (region) {
    case Region::inside_d1: return "inside_D1";
    case Region::inside_d2: return "inside_D2";
    case Region::exterior: return "exterior";
    case Region::boundary: return "boundary";
  }
  return "unknown";
}

inline void validate(const ResonatorPair& pair) {
  detail::require(std::isfinite(pair.r1) && pair.r1 > 0.0, "radius r1 must be positive");
  detail::require(std::isfinite(pair.r2) && pair.r2 > 0.0, "radius r2 must be positive");
  detail::require(std::isfinite(pair.epsilon) && pair.epsilon > 0.0L,
                  "separation epsilon must be positive");
}

namespace detail {

inline BisphericalFrame frame_from_alpha(long double alpha, double r1, double r2) {
  const long double a2 = alpha * alpha;
  BisphericalFrame frame;
  frame.alpha = static_cast<double>(alpha);
  frame.xi1 = static_cast<double>(std::asinh(alpha / r1));
  frame.xi2 = static_cast<double>(std::asinh(alpha / r2));
  frame.c1 = -static_cast<double>(std::sqrt(static_cast<long double>(r1) * r1 + a2));
  frame.c2 = static_cast<double>(std::sqrt(static_cast<long double>(r2) * r2 + a2));
  frame.r1 = r1;
  frame.r2 = r2;
  return frame;
}

}  // namespace detail

/// Limit-point half distance for a pair, evaluated in extended precision.
inline long double limit_point_alpha(const ResonatorPair& pair) {
  const long double e = pair.epsilon;
  const long double r1 = pair.r1;
  const long double r2 = pair.r2;
  const long double product = e * (2 * r1 + e) * (2 * r2 + e) * (2 * r1 + 2 * r2 + e);
  return std::sqrt(product) / (2 * (r1 + r2 + e));
}

inline BisphericalFrame frame_from_pair(const ResonatorPair& pair) {
  validate(pair);
  return detail::frame_from_alpha(limit_point_alpha(pair), pair.r1, pair.r2);
}

/// Frame for identical spheres built from alpha = sqrt(eps (r + eps/4)).
inline BisphericalFrame frame_symmetric(double r, long double epsilon) {
  validate(ResonatorPair{r, r, epsilon});
  const long double alpha = std::sqrt(epsilon * (r + epsilon / 4));
  return detail::frame_from_alpha(alpha, r, r);
}

// cosh(xi) - cos(theta) without cancellation near the point at infinity.
inline double bispherical_weight(double xi, double theta) {
  const double sh = std::sinh(0.5 * xi);
  const double s = std::sin(0.5 * theta);
  return 2.0 * (sh * sh + s * s);
}

inline CartesianPoint to_cartesian(const BisphericalFrame& frame, const BisphericalPoint& p) {
  if (p.xi == 0.0 && std::fmod(p.theta, 2.0 * std::numbers::pi) == 0.0) {
    throw InvalidArgument("bispherical point (xi=0, theta=0) is the point at infinity");
  }
  if (std::isinf(p.xi)) {
    return {0.0, 0.0, p.xi > 0 ? frame.alpha : -frame.alpha};
  }
  const double w = bispherical_weight(p.xi, p.theta);
  const double rho = frame.alpha * std::sin(p.theta) / w;
  return {rho * std::cos(p.phi), rho * std::sin(p.phi), frame.alpha * std::sinh(p.xi) / w};
}

/// Closed-form inverse through the distances to the two limit points.
inline BisphericalPoint to_bispherical(const BisphericalFrame& frame, const CartesianPoint& p) {
  const double a = frame.alpha;
  const double rho2 = p.x1 * p.x1 + p.x2 * p.x2;
  const double rho = std::sqrt(rho2);
  const double dm = p.x3 - a;
  const double dp = p.x3 + a;
  const double d2_sq = rho2 + dm * dm;  // to (0, 0, +alpha)
  const double d1_sq = rho2 + dp * dp;  // to (0, 0, -alpha)
  if (d1_sq == 0.0 || d2_sq == 0.0) {
    throw InvalidArgument("point coincides with a limit point of the bispherical frame");
  }
  BisphericalPoint out;
  // xi = log(d1/d2); the log1p forms avoid cancellation on either side.
  out.xi = p.x3 >= 0.0 ? 0.5 * std::log1p(4.0 * a * p.x3 / d2_sq)
                       : -0.5 * std::log1p(-4.0 * a * p.x3 / d1_sq);
  out.theta = std::atan2(2.0 * a * rho, rho2 + p.x3 * p.x3 - a * a);
  double phi = std::atan2(p.x2, p.x1);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  out.phi = phi;
  return out;
}

inline Region classify(const BisphericalFrame& frame, const CartesianPoint& p) {
  const double rho2 = p.x1 * p.x1 + p.x2 * p.x2;
  const auto test = [&](double center, double radius, Region inside) -> std::pair<bool, Region> {
    const double dz = p.x3 - center;
    const double d = std::sqrt(rho2 + dz * dz);
    if (std::abs(d - radius) <= 1e-12 * radius) return {true, Region::boundary};
    if (d < radius) return {true, inside};
    return {false, Region::exterior};
  };
  if (auto [hit, region] = test(frame.c1, frame.r1, Region::inside_d1); hit) return region;
  if (auto [hit, region] = test(frame.c2, frame.r2, Region::inside_d2); hit) return region;
  return Region::exterior;
}

/// Point on the gap segment (theta = pi): x3 = alpha tanh(xi / 2).
inline CartesianPoint gap_point(const BisphericalFrame& frame, double xi) {
  return {0.0, 0.0, frame.alpha * std::tanh(0.5 * xi)};
}

/// Separation in the scaling regime epsilon = c0 exp(-1 / delta^(1-beta)).
inline long double epsilon_from_regime(double delta, double beta, double c0) {
  detail::require(delta > 0.0 && delta < 1.0, "contrast delta must lie in (0, 1)");
  detail::require(beta > 0.0 && beta < 1.0, "regime exponent beta must lie in (0, 1)");
  detail::require(c0 > 0.0, "regime scale c0 must be positive");
  const long double exponent = 1.0L / std::pow(static_cast<long double>(delta), 1.0L - beta);
  return static_cast<long double>(c0) * std::exp(-exponent);
}

}  // namespace twosphere
