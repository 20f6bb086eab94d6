#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "twosphere/capacitance.hpp"
#include "twosphere/errors.hpp"
#include "twosphere/fields.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/summation.hpp"

namespace twosphere {

// Brute-force verifiers that share no code path with the bispherical series.

// --- Kelvin image charges ---------------------------------------------------

struct ImageCharge {
  long double z = 0.0L;  // axial position, sphere 1 centered at 0
  long double q = 0.0L;  // in units where a charge q at the center of a sphere
                         // of radius r raises its surface to potential q / r
  int sphere = 1;        // sphere containing the charge
  int generation = 0;
};

struct ImageChargeSystem {
  std::vector<ImageCharge> charges;
  long double total1 = 0.0L;
  long double total2 = 0.0L;
  int generations = 0;
  long double tail_estimate = 0.0L;  // geometric extrapolation of the omitted charges
};

struct ImageChargeResult {
  CapacitanceMatrix matrix;
  std::array<ImageChargeSystem, 2> systems;  // problem j = 1, 2
};

namespace detail {

// Sphere `source` held at unit potential, the other grounded.
inline ImageChargeSystem image_charge_problem(const ResonatorPair& pair, int source,
                                              int max_reflections, bool keep_charges) {
  const long double r1 = pair.r1;
  const long double r2 = pair.r2;
  const long double d = r1 + r2 + pair.epsilon;
  ImageChargeSystem sys;
  ImageCharge cur{source == 1 ? 0.0L : d, source == 1 ? r1 : r2, source, 0};
  CompensatedSum<long double> t1, t2;
  long double prev_same = 0.0L;  // magnitude two generations back (same sphere)
  long double prev = 0.0L;
  for (int g = 0;; ++g) {
    (cur.sphere == 1 ? t1 : t2) += cur.q;
    if (keep_charges) sys.charges.push_back(cur);
    sys.generations = g + 1;
    const long double accumulated = std::abs(t1.value()) + std::abs(t2.value());
    const long double mag = std::abs(cur.q);
    if (g >= 2 && mag < 1e-14L * accumulated) {
      const long double ratio = prev_same > 0.0L ? mag / prev_same : 0.0L;
      sys.tail_estimate = ratio < 1.0L ? (mag + prev) * ratio / (1.0L - ratio) : mag;
      break;
    }
    if (g + 1 >= max_reflections) {
      const long double ratio = prev_same > 0.0L ? mag / prev_same : 1.0L;
      sys.tail_estimate = ratio < 1.0L ? (mag + prev) * ratio / (1.0L - ratio)
                                       : std::numeric_limits<long double>::infinity();
      break;
    }
    prev_same = prev;
    prev = mag;
    // reflect the newest charge in the other sphere
    ImageCharge next;
    next.generation = g + 1;
    if (cur.sphere == 1) {
      const long double dist = d - cur.z;
      next = {d - r2 * r2 / dist, -cur.q * r2 / dist, 2, g + 1};
    } else {
      const long double dist = cur.z;
      next = {r1 * r1 / dist, -cur.q * r1 / dist, 1, g + 1};
    }
    cur = next;
  }
  sys.total1 = t1.value();
  sys.total2 = t2.value();
  return sys;
}

}  // namespace detail

/// Capacitance matrix from the classical image-charge iteration:
/// C_ij = 4 pi (total charge on sphere i when sphere j is at potential 1).
/// Stops once the newest image is below 1e-14 of the accumulated charge.
inline Checked<ImageChargeResult> image_charge_capacitance(const ResonatorPair& pair,
                                                           int max_reflections = 1'000'000,
                                                           bool keep_charges = false) {
  validate(pair);
  detail::require(max_reflections >= 1, "image-charge iteration needs at least one reflection");
  Checked<ImageChargeResult> out;
  auto& res = out.value;
  const long double four_pi = 4.0L * std::numbers::pi_v<long double>;
  for (int j = 1; j <= 2; ++j) {
    res.systems[j - 1] = detail::image_charge_problem(pair, j, max_reflections, keep_charges);
  }
  const auto& s1 = res.systems[0];
  const auto& s2 = res.systems[1];
  CapacitanceMatrix& c = res.matrix;
  c.c11 = static_cast<double>(four_pi * s1.total1);
  c.c21 = static_cast<double>(four_pi * s1.total2);
  c.c12 = static_cast<double>(four_pi * s2.total1);
  c.c22 = static_cast<double>(four_pi * s2.total2);
  c.row_sum1 = static_cast<double>(four_pi * (s1.total1 + s2.total1));
  c.row_sum2 = static_cast<double>(four_pi * (s2.total2 + s1.total2));
  c.n_terms = s1.generations + s2.generations;
  c.tail_bound = static_cast<double>(four_pi * std::max(s1.tail_estimate, s2.tail_estimate));
  const double scale = std::max(std::abs(c.c11), std::abs(c.c22));
  if (!(c.tail_bound <= 1e-12 * scale)) {
    out.warnings.push_back("image-charge iteration stopped at " +
                           std::to_string(c.n_terms) +
                           " reflections with an extrapolated tail above 1e-12 relative");
  }
  return out;
}

// --- Gauss-Legendre surface flux -----------------------------------------------

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int order) {
  detail::require(order >= 1, "quadrature order must be positive");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= order; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(k)] = x;
    rule.weights[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

struct FluxResult {
  std::array<double, 2> value{};  // one entry per integrand component
  int panels = 0;
  std::int64_t evaluations = 0;
};

struct FluxOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;  // floor for integrals that vanish
  int order = 20;
  int min_panels = 8;
  int max_panels = 4096;
};

/// Integral of the outward normal derivative over dD_i of up to two
/// axisymmetric fields, given their xi-derivatives on the level set.
///
/// On xi = xi_b the outward normal of D_i is -e_xi for D_2 and +e_xi for D_1,
/// dsigma = (alpha / w)^2 sin(theta) dtheta dphi, so the flux is
/// +-2 pi alpha int_0^pi f_xi sin(theta) / w dtheta. The substitution
/// theta = 2 atan(e^y) spreads the O(xi_b)-wide far-side cap over a unit range.
inline FluxResult surface_flux(const BisphericalFrame& frame, int sphere,
                               const std::function<std::array<double, 2>(double theta)>& d_xi,
                               const FluxOptions& opt = {}) {
  detail::require(sphere == 1 || sphere == 2, "sphere index must be 1 or 2");
  const double xi_b = sphere == 1 ? -frame.xi1 : frame.xi2;
  const double out_sign = sphere == 1 ? 1.0 : -1.0;
  const double y_lo = std::log(std::tanh(0.5 * std::abs(xi_b))) - 25.0;
  const double y_hi = 25.0;
  const GaussRule rule = gauss_legendre(opt.order);
  FluxResult res;
  std::array<double, 2> previous{};
  for (int panels = opt.min_panels; panels <= opt.max_panels; panels *= 2) {
    std::array<CompensatedSum<double>, 2> acc;
    const double width = (y_hi - y_lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = y_lo + (p + 0.5) * width;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double y = mid + 0.5 * width * rule.nodes[k];
        const double theta = 2.0 * std::atan(std::exp(y));
        const double sin_t = 1.0 / std::cosh(y);
        const double w = bispherical_weight(xi_b, theta);
        const auto f = d_xi(theta);
        const double jac = 0.5 * width * rule.weights[k] * sin_t * sin_t / w;
        acc[0] += jac * f[0];
        acc[1] += jac * f[1];
        ++res.evaluations;
      }
    }
    const double pre = out_sign * 2.0 * std::numbers::pi * frame.alpha;
    const std::array<double, 2> current{pre * acc[0].value(), pre * acc[1].value()};
    res.panels = panels;
    if (panels > opt.min_panels) {
      bool converged = true;
      for (int c = 0; c < 2; ++c) {
        const double scale = std::max(std::abs(current[0]), std::abs(current[1]));
        const double target = std::max(0.1 * opt.rel_tol * scale, opt.abs_tol);
        if (std::abs(current[c] - previous[c]) > target) converged = false;
      }
      if (converged) {
        res.value = current;
        return res;
      }
    }
    previous = current;
  }
  throw NumericalFailure("surface flux quadrature did not converge within " +
                         std::to_string(opt.max_panels) + " panels");
}

/// C_i1 and C_i2 as -int_{dD_i} dV_j / dnu, both potentials from one quadrature.
inline std::array<double, 2> flux_capacitance_row(const PotentialSeries& ps, int i,
                                                  const FluxOptions& opt = {}) {
  const double xi_b = i == 1 ? -ps.frame().xi1 : ps.frame().xi2;
  const FluxResult r = surface_flux(
      ps.frame(), i,
      [&](double theta) {
        const PotentialSample s = ps.sample({xi_b, theta, 0.0}, true);
        return std::array<double, 2>{s.d_xi[0], s.d_xi[1]};
      },
      opt);
  return {-r.value[0], -r.value[1]};
}

/// -int_{dD_i} dV_j / dnu dsigma, an independent estimate of C_ij.
inline double flux_quadrature(const PotentialSeries& ps, int j, int i,
                              const FluxOptions& opt = {}) {
  detail::require(j == 1 || j == 2, "potential index must be 1 or 2");
  return flux_capacitance_row(ps, i, opt)[static_cast<std::size_t>(j - 1)];
}

/// Flux through dD_i of the single series term
/// sqrt(2) sqrt(cosh xi - cos theta) e^{sign (n + 1/2) xi} P_n(cos theta).
inline double term_flux(const BisphericalFrame& frame, int n, int sign, int i,
                        const FluxOptions& opt = {}) {
  detail::require(n >= 0, "term degree must be non-negative");
  detail::require(sign == 1 || sign == -1, "term sign must be +1 or -1");
  const double xi_b = i == 1 ? -frame.xi1 : frame.xi2;
  const double m = n + 0.5;
  const double e = std::exp(sign * m * xi_b);
  FluxOptions local = opt;
  local.abs_tol = std::max(opt.abs_tol, 1e-3 * opt.rel_tol * frame.alpha);
  const FluxResult r = surface_flux(
      frame, i,
      [&](double theta) {
        const double w = bispherical_weight(xi_b, theta);
        const double sw = std::sqrt(w);
        const double pn = legendre_p(n, std::cos(theta));
        const double d = std::sqrt(2.0) * (0.5 * std::sinh(xi_b) / sw + sign * m * sw) * e * pn;
        return std::array<double, 2>{d, 0.0};
      },
      local);
  return r.value[0];
}

// --- Finite differences ---------------------------------------------------------

using ScalarField = std::function<double(const CartesianPoint&)>;

/// Fourth-order central differences along the three axes.
inline CartesianPoint fd_check_gradient(const ScalarField& f, const CartesianPoint& p, double h) {
  detail::require(h > 0.0, "finite-difference step must be positive");
  const auto partial = [&](CartesianPoint e) {
    return (-f(p + 2.0 * h * e) + 8.0 * f(p + h * e) - 8.0 * f(p - h * e) + f(p - 2.0 * h * e)) /
           (12.0 * h);
  };
  return {partial({1, 0, 0}), partial({0, 1, 0}), partial({0, 0, 1})};
}

/// Distance from p to the nearer sphere surface (negative inside).
inline double boundary_distance(const BisphericalFrame& frame, const CartesianPoint& p) {
  const double d1 = (p - CartesianPoint{0, 0, frame.c1}).norm() - frame.r1;
  const double d2 = (p - CartesianPoint{0, 0, frame.c2}).norm() - frame.r2;
  return std::min(d1, d2);
}

inline void require_step_guard(const BisphericalFrame& frame, const CartesianPoint& p, double h) {
  if (!(boundary_distance(frame, p) > 4.0 * h)) {
    throw InvalidArgument("finite-difference stencil of step " + std::to_string(h) +
                          " reaches a resonator boundary");
  }
}

inline CartesianPoint fd_check_gradient(const ScalarField& f, const CartesianPoint& p, double h,
                                        const BisphericalFrame& frame) {
  require_step_guard(frame, p, h);
  return fd_check_gradient(f, p, h);
}

/// Seven-point Laplacian.
inline double fd_check_laplacian(const ScalarField& f, const CartesianPoint& p, double h) {
  detail::require(h > 0.0, "finite-difference step must be positive");
  CompensatedSum<double> sum;
  for (CartesianPoint e : {CartesianPoint{1, 0, 0}, CartesianPoint{0, 1, 0}, CartesianPoint{0, 0, 1}}) {
    sum += f(p + h * e);
    sum += f(p - h * e);
  }
  sum -= 6.0 * f(p);
  return sum.value() / (h * h);
}

inline double fd_check_laplacian(const ScalarField& f, const CartesianPoint& p, double h,
                                 const BisphericalFrame& frame) {
  require_step_guard(frame, p, h);
  return fd_check_laplacian(f, p, h);
}

/// Cartesian evaluator for V_j, for use with the finite-difference checks.
inline ScalarField potential_field(const PotentialSeries& ps, int j) {
  detail::require(j == 1 || j == 2, "potential index must be 1 or 2");
  return [&ps, j](const CartesianPoint& x) {
    return eval_potential(ps, j, to_bispherical(ps.frame(), x));
  };
}

inline ScalarField mode_field(const PotentialSeries& ps, const SpectralPair& sp, int n) {
  detail::require(n == 1 || n == 2, "mode index must be 1 or 2");
  return [&ps, sp, n](const CartesianPoint& x) {
    return eval_mode(n, sp, ps, to_bispherical(ps.frame(), x));
  };
}

}  // namespace twosphere
