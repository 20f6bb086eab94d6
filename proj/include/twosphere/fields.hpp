#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <vector>

#include "twosphere/capacitance.hpp"
#include "twosphere/errors.hpp"
#include "twosphere/fit.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/specfun.hpp"
#include "twosphere/spectra.hpp"
#include "twosphere/summation.hpp"

namespace twosphere {

/// Coefficients A_n^j, B_n^j of
///   V_j = sqrt(2) sqrt(cosh xi - cos theta)
///         sum_n (A_n^j e^{(n+1/2) xi} + B_n^j e^{-(n+1/2) xi}) P_n(cos theta).
/// Written with e^{-(2n+1)(xi1+xi2)} so none of them overflows.
struct SeriesCoefficients {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
};

/// Both capacitance potentials and their bispherical derivatives at a point.
struct PotentialSample {
  std::array<double, 2> value{};
  std::array<double, 2> d_xi{};
  std::array<double, 2> d_theta{};
  std::int64_t terms = 0;
};

/// Capacitance potentials V_1, V_2 of a sphere pair as bispherical series.
///
/// Each series term is evaluated in the grouped form
///   e^{-m xi1} sinh(m (xi2 - xi)) / sinh(m s)   (V_1),
///   e^{-m xi2} sinh(m (xi + xi1)) / sinh(m s)   (V_2),   m = n + 1/2,
/// which is bounded by e^{-m min(xi1, xi2)} on the closed exterior strip,
/// whereas A_n^j e^{m xi} and B_n^j e^{-m xi} separately are not.
class PotentialSeries {
 public:
  PotentialSeries(const BisphericalFrame& frame, double tol, std::int64_t max_terms = 100'000'000)
      : frame_(frame), tol_(tol), max_terms_(max_terms) {
    detail::require(tol > 0.0, "series tolerance must be positive");
    detail::require(frame.alpha > 0.0 && frame.xi1 > 0.0 && frame.xi2 > 0.0,
                    "bispherical frame is degenerate");
    const double k = std::min(frame.xi1, frame.xi2);
    const double prefactor = std::sqrt(2.0 * (std::cosh(std::max(frame.xi1, frame.xi2)) + 1.0));
    const double denom = -std::expm1(-k);
    // prefactor * q^{N + 3/2} / (1 - q) < tol
    const double needed = (std::log(prefactor / (tol * denom)) / k) - 1.5;
    const double n_max = std::max(0.0, std::ceil(needed));
    if (n_max > static_cast<double>(max_terms)) {
      throw NumericalFailure("potential series needs more than the truncation cap of terms");
    }
    n_max_ = static_cast<std::int64_t>(n_max);
  }

  const BisphericalFrame& frame() const { return frame_; }
  double tol() const { return tol_; }
  /// Uniform truncation degree for the potentials over the closed exterior.
  std::int64_t n_max() const { return n_max_; }

  SeriesCoefficients coefficients(std::int64_t n) const {
    const double m = 2.0 * static_cast<double>(n) + 1.0;
    const double s = frame_.xi_sum();
    const double inv = 1.0 / -std::expm1(-m * s);  // 1 / (1 - e^{-m s})
    const double small = -std::exp(-m * s) * inv;  // 1 / (1 - e^{m s})
    return {small, std::exp(-m * frame_.xi1) * inv, std::exp(-m * frame_.xi2) * inv, small};
  }

  bool admissible(const BisphericalPoint& p) const {
    return frame_.in_closed_exterior(p.xi) && p.theta >= 0.0 && p.theta <= std::numbers::pi;
  }

  /// Series values F_j and their xi/theta derivatives (before the
  /// sqrt(2 w) prefactor), summed until the tail bound drops below tol.
  PotentialSample sample(const BisphericalPoint& p, bool with_derivatives) const {
    if (!admissible(p)) {
      throw InvalidArgument("point lies inside a resonator (xi outside [-xi1, xi2])");
    }
    if (p.xi == 0.0 && p.theta == 0.0) {
      throw InvalidArgument("bispherical point (xi=0, theta=0) is the point at infinity");
    }
    const double xi = p.xi;
    const double s = frame_.xi_sum();
    const double a1 = std::max(0.0, frame_.xi2 - xi);
    const double a2 = std::max(0.0, xi + frame_.xi1);
    const double k1 = frame_.xi1 + a2;  // 2 xi1 + xi
    const double k2 = frame_.xi2 + a1;  // 2 xi2 - xi
    const double x = std::cos(p.theta);
    const double sin_t = std::sin(p.theta);
    const double w = bispherical_weight(xi, p.theta);
    const double sqrt_w = std::sqrt(w);

    // one-minus-exponential recurrences: D(m+1) = D(m) + E(m) (1 - e^{-2x})
    struct Ramp {
      double x2;    // 2 x
      double gain;  // 1 - e^{-2x}
      double step;  // e^{-2x}
      double e;     // e^{-2 m x}
      double d;     // 1 - e^{-2 m x}
      void reset(double m) {
        e = std::exp(-m * x2);
        d = -std::expm1(-m * x2);
      }
      void advance() {
        d += e * gain;
        e *= step;
      }
    };
    const auto make_ramp = [](double x_half) {
      Ramp r{2.0 * x_half, -std::expm1(-2.0 * x_half), std::exp(-2.0 * x_half), 0.0, 0.0};
      r.reset(0.5);
      return r;
    };
    Ramp ramp_s = make_ramp(s);
    Ramp ramp_a1 = make_ramp(a1);
    Ramp ramp_a2 = make_ramp(a2);
    const double step_g1 = std::exp(-k1);
    const double step_g2 = std::exp(-k2);
    double g1 = std::exp(-0.5 * k1);
    double g2 = std::exp(-0.5 * k2);
    const double q1 = step_g1;
    const double q2 = step_g2;
    const double one_minus_q1 = -std::expm1(-k1);
    const double one_minus_q2 = -std::expm1(-k2);

    CompensatedSum<double> f1, f2, fx1, fx2, ft1, ft2;
    LegendreRecurrence leg(x);
    const double pre_value = std::sqrt(2.0) * sqrt_w;
    const double pre_deriv = std::sqrt(2.0) * (0.5 * std::abs(std::sinh(xi)) / sqrt_w + sqrt_w);

    std::int64_t n = 0;
    for (;; ++n) {
      if (n >= max_terms_) {
        throw NumericalFailure("potential series hit the truncation cap");
      }
      const double m = static_cast<double>(n) + 0.5;
      if (n % 32 == 0 && n > 0) {
        ramp_s.reset(m);
        ramp_a1.reset(m);
        ramp_a2.reset(m);
        g1 = std::exp(-m * k1);
        g2 = std::exp(-m * k2);
      }
      const double inv_ds = 1.0 / ramp_s.d;
      const double pn = leg.value();
      const double c1 = g1 * ramp_a1.d * inv_ds;
      const double c2 = g2 * ramp_a2.d * inv_ds;
      f1 += c1 * pn;
      f2 += c2 * pn;
      if (with_derivatives) {
        const double dc1 = -m * g1 * (2.0 - ramp_a1.d) * inv_ds;
        const double dc2 = m * g2 * (2.0 - ramp_a2.d) * inv_ds;
        fx1 += dc1 * pn;
        fx2 += dc2 * pn;
        const double dpn = -sin_t * leg.derivative();  // d/dtheta P_n(cos theta)
        ft1 += c1 * dpn;
        ft2 += c2 * dpn;
      }

      // tail over degrees > n: g q / (1 - q) for values,
      // 2/D_s * g q ((m+1)/(1-q) + q/(1-q)^2) for derivatives (|sin P_n'| <= n)
      if (n % 8 == 0 || g1 + g2 < tol_) {
        const double tail_v = std::max(g1 * q1 / one_minus_q1, g2 * q2 / one_minus_q2);
        bool done = pre_value * tail_v < tol_;
        if (done && with_derivatives) {
          const auto deriv_tail = [&](double g, double q, double omq) {
            return 2.0 * inv_ds * g * q * ((m + 1.0) / omq + q / (omq * omq));
          };
          const double tail_d = std::max(deriv_tail(g1, q1, one_minus_q1),
                                         deriv_tail(g2, q2, one_minus_q2));
          done = pre_deriv * (tail_v + tail_d) < tol_;
        }
        if (done) break;
      }
      ramp_s.advance();
      ramp_a1.advance();
      ramp_a2.advance();
      g1 *= step_g1;
      g2 *= step_g2;
      leg.advance();
    }

    PotentialSample out;
    out.terms = n + 1;
    const double root2 = std::sqrt(2.0);
    const double F[2] = {f1.value(), f2.value()};
    const double Fx[2] = {fx1.value(), fx2.value()};
    const double Ft[2] = {ft1.value(), ft2.value()};
    for (int j = 0; j < 2; ++j) {
      out.value[j] = root2 * sqrt_w * F[j];
      if (with_derivatives) {
        out.d_xi[j] = root2 * (0.5 * std::sinh(xi) / sqrt_w * F[j] + sqrt_w * Fx[j]);
        out.d_theta[j] = root2 * (0.5 * sin_t / sqrt_w * F[j] + sqrt_w * Ft[j]);
      }
    }
    return out;
  }

  /// Cartesian gradient from bispherical derivatives (equal scale factors alpha / w).
  CartesianPoint cartesian_gradient(const BisphericalPoint& p, double d_xi, double d_theta) const {
    const double sh = std::sinh(p.xi);
    const double st = std::sin(p.theta);
    const double ct = std::cos(p.theta);
    const double sh_half = std::sinh(0.5 * p.xi);
    const double s_half = std::sin(0.5 * p.theta);
    // 1 - cosh(xi) cos(theta)
    const double one_minus = 2.0 * s_half * s_half - 2.0 * ct * sh_half * sh_half;
    const double inv_a = 1.0 / frame_.alpha;
    const double g_rho = inv_a * (-d_xi * st * sh - d_theta * one_minus);
    const double g_z = inv_a * (d_xi * one_minus - d_theta * sh * st);
    return {g_rho * std::cos(p.phi), g_rho * std::sin(p.phi), g_z};
  }

 private:
  BisphericalFrame frame_;
  double tol_;
  std::int64_t max_terms_;
  std::int64_t n_max_ = 0;
};

inline PotentialSeries potential_series(const BisphericalFrame& frame, double tol = 1e-12) {
  return PotentialSeries(frame, tol);
}

inline double eval_potential(const PotentialSeries& ps, int j, const BisphericalPoint& p) {
  detail::require(j == 1 || j == 2, "potential index must be 1 or 2");
  return ps.sample(p, false).value[j - 1];
}

inline CartesianPoint eval_grad_potential(const PotentialSeries& ps, int j,
                                          const BisphericalPoint& p) {
  detail::require(j == 1 || j == 2, "potential index must be 1 or 2");
  const PotentialSample s = ps.sample(p, true);
  return ps.cartesian_gradient(p, s.d_xi[j - 1], s.d_theta[j - 1]);
}

/// sqrt(2) sqrt(cosh xi - cos theta) sum_n e^{-(n+1/2)|xi|} P_n(cos theta); equals 1.
inline double unit_identity_series(double xi, double theta, double tol = 1e-14) {
  const double w = bispherical_weight(xi, theta);
  const double k = std::abs(xi);
  detail::require(k > 0.0, "unit identity series needs xi != 0");
  const double q = std::exp(-k);
  LegendreRecurrence leg(std::cos(theta));
  CompensatedSum<double> sum;
  double g = std::exp(-0.5 * k);
  const double pre = std::sqrt(2.0 * w);
  while (pre * g * q / -std::expm1(-k) >= tol) {
    sum += g * leg.value();
    g *= q;
    leg.advance();
  }
  return pre * sum.value();
}

/// Leading-order eigenmode u_n = d_n V_1 + V_2 (value d_n on dD1, 1 on dD2).
inline double eval_mode(int n, const SpectralPair& sp, const PotentialSeries& ps,
                        const BisphericalPoint& p) {
  detail::require(n == 1 || n == 2, "mode index must be 1 or 2");
  const PotentialSample s = ps.sample(p, false);
  return sp.ratio(n) * s.value[0] + s.value[1];
}

inline CartesianPoint eval_grad_mode(int n, const SpectralPair& sp, const PotentialSeries& ps,
                                     const BisphericalPoint& p) {
  detail::require(n == 1 || n == 2, "mode index must be 1 or 2");
  const PotentialSample s = ps.sample(p, true);
  const double d = sp.ratio(n);
  return ps.cartesian_gradient(p, d * s.d_xi[0] + s.d_xi[1], d * s.d_theta[0] + s.d_theta[1]);
}

/// Weights of u_n = A_n h_1 + B_n h_2 with h_1 = V_1 + V_2.
struct ModeDecomposition {
  double a_reg = 0.0;
  double b_sing = 0.0;
  double residual = 0.0;
};

/// Solves
///   (d_n - 1) ct11 + sigma1 = A sigma1 + B,
///   lambda_n             = A sigma2 - B.
/// These follow from integrating the normal derivative over each sphere when
/// sigma_i are the exact row sums of ct (see exact_sigma). With the
/// asymptotic sigma_terms the system holds only up to O(sqrt(eps)).
inline ModeDecomposition h_decomposition(const RescaledCapacitance& ct, const SpectralPair& sp,
                                         const SigmaTerms& st, int n) {
  detail::require(n == 1 || n == 2, "mode index must be 1 or 2");
  const double total = st.sigma1 + st.sigma2;
  if (!(total > 0.0)) throw NumericalFailure("singular h1/h2 system: sigma1 + sigma2 <= 0");
  const double lambda = sp.lambda(n);
  // d_n - 1 = (lambda_n - ct22 - ct21) / ct21
  const double d_minus_one = (lambda - ct.rs2) / ct.ct21;
  const double lhs1 = d_minus_one * ct.ct11 + st.sigma1;
  ModeDecomposition out;
  out.a_reg = (lhs1 + lambda) / total;
  out.b_sing = out.a_reg * st.sigma2 - lambda;
  const double r1 = lhs1 - (out.a_reg * st.sigma1 + out.b_sing);
  const double r2 = lambda - (out.a_reg * st.sigma2 - out.b_sing);
  out.residual = std::max(std::abs(r1), std::abs(r2));
  return out;
}

/// Coefficients of h_2 = c1 V_1 + c2 V_2 with prescribed outward fluxes
/// int_{dD_i} dh_2/dnu = flux_i.
struct SingularPart {
  double c1 = 0.0;
  double c2 = 0.0;
};

inline SingularPart singular_part(const CapacitanceMatrix& c, double flux1, double flux2) {
  // flux_i = -(c1 C_i1 + c2 C_i2)
  const double det = c.c11 * c.row_sum2 + c.c22 * c.row_sum1 - c.row_sum1 * c.row_sum2;
  if (!(std::abs(det) > 0.0)) throw NumericalFailure("capacitance matrix is singular");
  return {(-flux1 * c.c22 + flux2 * c.c12) / det, (-flux2 * c.c11 + flux1 * c.c21) / det};
}

/// h_2 normalised with fluxes (-1)^i.
inline SingularPart singular_part_unit(const CapacitanceMatrix& c) {
  return singular_part(c, -1.0, 1.0);
}

/// h_2 in the normalisation implied by h_decomposition: fluxes (-1)^i |D_i|.
inline SingularPart singular_part_volume(const CapacitanceMatrix& c, const ResonatorPair& pair) {
  return singular_part(c, -pair.volume1(), pair.volume2());
}

struct GradientMaximum {
  double value = 0.0;
  BisphericalPoint location;
};

namespace detail {

template <typename F>
double golden_maximize(F&& f, double lo, double hi, double x_tol, int max_iter, double& best_x) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > x_tol; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc > fd) {
    best_x = c;
    return fc;
  }
  best_x = d;
  return fd;
}

// Dense sampling on a sorted grid followed by golden-section refinement in
// the bracket around the best sample.
template <typename F>
GradientMaximum maximize_on_grid(F&& f, const std::vector<double>& grid,
                                 const std::function<BisphericalPoint(double)>& to_point) {
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  double x = grid[best];
  if (hi > lo) {
    double refined_x = x;
    const double refined = golden_maximize(f, lo, hi, 1e-12 * (hi - lo) + 1e-300, 80, refined_x);
    if (refined > best_val) {
      best_val = refined;
      x = refined_x;
    }
  }
  return {best_val, to_point(x)};
}

inline double mode_gradient_norm(int n, const SpectralPair& sp, const PotentialSeries& ps,
                                 const BisphericalPoint& p) {
  return eval_grad_mode(n, sp, ps, p).norm();
}

}  // namespace detail

/// max |grad u_n| over the gap segment theta = pi, xi in [-xi1, xi2].
inline GradientMaximum max_gap_gradient(int n, const SpectralPair& sp, const PotentialSeries& ps,
                                        int samples = 200) {
  detail::require(samples >= 100, "gap search needs at least 100 samples");
  const BisphericalFrame& f = ps.frame();
  std::vector<double> grid(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    grid[static_cast<std::size_t>(i)] = -f.xi1 + f.xi_sum() * i / (samples - 1);
  }
  grid.back() = f.xi2;  // the sum above can overshoot by one ulp
  const auto to_point = [](double xi) { return BisphericalPoint{xi, std::numbers::pi, 0.0}; };
  return detail::maximize_on_grid(
      [&](double xi) { return detail::mode_gradient_norm(n, sp, ps, to_point(xi)); }, grid,
      to_point);
}

/// max |grad u_n| over both sphere surfaces (exterior trace). |grad u| is
/// subharmonic, so this is also the maximum over the whole exterior.
inline GradientMaximum max_surface_gradient(int n, const SpectralPair& sp,
                                            const PotentialSeries& ps, int samples = 200) {
  detail::require(samples >= 100, "surface search needs at least 100 samples");
  const BisphericalFrame& f = ps.frame();
  GradientMaximum best;
  for (double xi : {-f.xi1, f.xi2}) {
    // theta ~ |xi| resolves the far side of the sphere, theta ~ 1 the gap side
    std::vector<double> grid;
    const double t_min = 1e-3 * std::abs(xi);
    const int geometric = samples / 2;
    for (int i = 0; i < geometric; ++i) {
      grid.push_back(t_min * std::pow(1.0 / t_min, static_cast<double>(i) / geometric));
    }
    for (int i = 0; i <= samples - geometric; ++i) {
      grid.push_back(std::numbers::pi * i / (samples - geometric));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto to_point = [xi](double theta) { return BisphericalPoint{xi, theta, 0.0}; };
    const GradientMaximum m = detail::maximize_on_grid(
        [&](double theta) { return detail::mode_gradient_norm(n, sp, ps, to_point(theta)); },
        grid, to_point);
    if (m.value > best.value) best = m;
  }
  return best;
}

struct GradientStudyRow {
  double epsilon = 0.0;
  double max_grad_u1 = 0.0;  // over the exterior
  double max_grad_u2 = 0.0;
  BisphericalPoint location_u1;
  BisphericalPoint location_u2;
  double gap_grad_u1 = 0.0;  // restricted to the gap segment
  double gap_grad_u2 = 0.0;
};

struct BlowupStudy {
  std::vector<GradientStudyRow> rows;
  double slope_u1 = 0.0;  // d log max|grad u_n| / d log eps
  double slope_u2 = 0.0;
  std::vector<double> compensated_u1;      // max|grad u1| eps |log eps|
  std::vector<double> compensated_u2;      // max|grad u2| eps
  std::vector<double> compensated_u1_eps;  // max|grad u1| eps
};

struct BlowupOptions {
  double tol = 1e-11;
  int samples = 200;
  int jobs = 1;
};

inline GradientStudyRow gradient_study_row(const ResonatorPair& pair, const BlowupOptions& opt) {
  const BisphericalFrame frame = frame_from_pair(pair);
  const CapacitanceMatrix c = capacitance_exact(frame, {opt.tol, 100'000'000});
  const SpectralPair sp = eigen(rescale(c, pair));
  const PotentialSeries ps(frame, opt.tol);
  GradientStudyRow row;
  row.epsilon = static_cast<double>(pair.epsilon);
  for (int n : {1, 2}) {
    const GradientMaximum gap = max_gap_gradient(n, sp, ps, opt.samples);
    const GradientMaximum surf = max_surface_gradient(n, sp, ps, opt.samples);
    const GradientMaximum& best = gap.value >= surf.value ? gap : surf;
    if (n == 1) {
      row.max_grad_u1 = best.value;
      row.location_u1 = best.location;
      row.gap_grad_u1 = gap.value;
    } else {
      row.max_grad_u2 = best.value;
      row.location_u2 = best.location;
      row.gap_grad_u2 = gap.value;
    }
  }
  return row;
}

/// Gradient blow-up sweep over eps for fixed radii with log-log slopes.
inline BlowupStudy blowup_study(double r1, double r2, const std::vector<double>& eps_grid,
                                const BlowupOptions& opt = {}) {
  detail::require(eps_grid.size() >= 2, "blow-up study needs at least two separations");
  BlowupStudy out;
  out.rows.resize(eps_grid.size());
  const int jobs = std::max(1, opt.jobs);
  for (std::size_t start = 0; start < eps_grid.size(); start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<GradientStudyRow>> pending;
    for (std::size_t i = start; i < std::min(eps_grid.size(), start + jobs); ++i) {
      const ResonatorPair pair{r1, r2, static_cast<long double>(eps_grid[i])};
      pending.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                   [pair, opt] { return gradient_study_row(pair, opt); }));
    }
    for (std::size_t k = 0; k < pending.size(); ++k) out.rows[start + k] = pending[k].get();
  }
  std::vector<double> eps, g1, g2;
  for (const auto& row : out.rows) {
    eps.push_back(row.epsilon);
    g1.push_back(row.max_grad_u1);
    g2.push_back(row.max_grad_u2);
    const double le = std::abs(std::log(row.epsilon));
    out.compensated_u1.push_back(row.max_grad_u1 * row.epsilon * le);
    out.compensated_u1_eps.push_back(row.max_grad_u1 * row.epsilon);
    out.compensated_u2.push_back(row.max_grad_u2 * row.epsilon);
  }
  out.slope_u1 = loglog_slope(eps, g1);
  out.slope_u2 = loglog_slope(eps, g2);
  return out;
}

}  // namespace twosphere
