#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>
#include <optional>

#include "twosphere/twosphere.hpp"

namespace twosphere::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double as_double(long double x) { return static_cast<double>(x); }

std::string long_text(long double x) { return format_length(x); }

ResonatorPair pair_for(const RunConfig& c, long double eps) { return {c.r1, c.r2, eps}; }

std::optional<double> regime_delta(const RunConfig& c) {
  if (c.delta) return c.delta;
  return std::nullopt;
}

void add_warnings(Table& t, const std::vector<std::string>& ws, const std::string& prefix = "") {
  for (const auto& w : ws) {
    const std::string msg = prefix + w;
    if (std::find(t.warnings.begin(), t.warnings.end(), msg) == t.warnings.end()) {
      t.warnings.push_back(msg);
    }
  }
}

// Exact series are skipped when they would need more terms than allowed.
bool exact_feasible(const BisphericalFrame& f, const RunConfig& c) {
  return capacitance_terms_estimate(f, c.tol) < static_cast<double>(c.max_terms);
}

template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& f) {
  std::vector<T> out(n);
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<T>> pending;
    for (std::size_t i = start; i < std::min(n, start + width); ++i) {
      pending.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred,
                                   [&f, i] { return f(i); }));
    }
    for (std::size_t k = 0; k < pending.size(); ++k) out[start + k] = pending[k].get();
  }
  return out;
}

// One geometry evaluated along both routes, shared by resonances and sweep.
struct SpectrumRow {
  std::vector<Cell> cells;
  std::vector<std::string> warnings;
};

std::vector<Column> spectrum_columns() {
  return {{"epsilon", "L"},         {"log_epsilon", "1"},     {"delta", "1"},
          {"lambda1", "L^-2"},      {"lambda2", "L^-2"},      {"d1", "1"},
          {"d2", "1"},              {"omega1", "T^-1"},       {"omega2", "T^-1"},
          {"omega1_asym", "T^-1"},  {"omega2_asym", "T^-1"},  {"omega2_log", "T^-1"},
          {"ratio1_asym", "1"},     {"ratio2_asym", "1"},     {"ratio2_log", "1"},
          {"n_terms", "1"}};
}

SpectrumRow spectrum_row(const RunConfig& c, long double eps, const Material& m) {
  SpectrumRow row;
  const ResonatorPair pair = pair_for(c, eps);
  const BisphericalFrame frame = frame_from_pair(pair);
  double l1 = kNaN, l2 = kNaN, d1 = kNaN, d2 = kNaN, w1 = kNaN, w2 = kNaN;
  std::int64_t terms = 0;
  // The estimate avoids starting series that cannot finish; the catch covers
  // the rare case where it is optimistic.
  bool done = false;
  if (exact_feasible(frame, c)) {
    try {
      const CapacitanceMatrix cap = capacitance_exact(frame, {c.tol, c.max_terms});
      const SpectralPair sp = eigen(rescale(cap, pair));
      const ResonantFrequencies f = resonant_frequencies(sp, m);
      l1 = sp.lambda1;
      l2 = sp.lambda2;
      d1 = sp.d1;
      d2 = sp.d2;
      w1 = f.omega1;
      w2 = f.omega2;
      terms = cap.n_terms;
      done = true;
    } catch (const NumericalFailure&) {
    }
  }
  if (!done) {
    row.warnings.push_back("exact series skipped at epsilon=" + long_text(eps) +
                           ": needs more than max_terms terms");
  }
  double a1 = kNaN, a2 = kNaN, wl = kNaN;
  try {
    const auto asym = resonance_asymptotic(pair, m);
    a1 = asym.value.omega1;
    a2 = asym.value.omega2;
    for (const auto& w : asym.warnings) row.warnings.push_back(w);
  } catch (const NumericalFailure& e) {
    row.warnings.push_back(std::string("asymptotic route unavailable: ") + e.what());
  }
  try {
    wl = omega2_leading_log(pair, m);
  } catch (const InvalidArgument& e) {
    row.warnings.push_back(std::string("logarithmic omega2 unavailable: ") + e.what());
  }
  row.cells = {as_double(eps), as_double(std::log(eps)), m.delta(), l1, l2, d1, d2, w1, w2,
               a1, a2, wl, a1 / w1, a2 / w2, wl / w2, terms};
  return row;
}

std::vector<double> fit_slope_if_possible(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(y[i]) && y[i] > 0.0 && x[i] > 0.0) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
  if (xs.size() < 2) return {};
  return {loglog_slope(xs, ys)};
}

}  // namespace

Table cmd_capacitance(const RunConfig& c) {
  Table t;
  t.command = "capacitance";
  const long double eps = resolved_epsilon(c);
  const ResonatorPair pair = pair_for(c, eps);
  const BisphericalFrame frame = frame_from_pair(pair);
  if (!exact_feasible(frame, c)) {
    throw NumericalFailure("capacitance series needs more than max_terms = " +
                           std::to_string(c.max_terms) + " terms at this separation");
  }
  const CapacitanceMatrix cap = capacitance_exact(frame, {c.tol, c.max_terms});
  const RescaledCapacitance ct = rescale(cap, pair);
  const SigmaTerms sig = sigma_terms(frame, pair);
  const auto asym = capacitance_asymptotic_rescaled(pair);
  add_warnings(t, asym.warnings);
  const auto rel = [](double a, double e) { return std::abs(a - e) / std::abs(e); };
  t.columns = {{"r1", "L"},           {"r2", "L"},           {"epsilon", "L"},
               {"alpha", "L"},        {"xi1", "1"},          {"xi2", "1"},
               {"c11", "L"},          {"c12", "L"},          {"c21", "L"},
               {"c22", "L"},          {"ct11", "L^-2"},      {"ct12", "L^-2"},
               {"ct21", "L^-2"},      {"ct22", "L^-2"},      {"sigma1", "L^-2"},
               {"sigma2", "L^-2"},    {"sigma1_asym", "L^-2"}, {"sigma2_asym", "L^-2"},
               {"ct11_asym", "L^-2"}, {"ct12_asym", "L^-2"}, {"ct21_asym", "L^-2"},
               {"ct22_asym", "L^-2"}, {"rel_err_ct11", "1"}, {"rel_err_ct12", "1"},
               {"rel_err_ct21", "1"}, {"rel_err_ct22", "1"}, {"n_terms", "1"},
               {"tail_bound", "L"}};
  t.rows.push_back({c.r1, c.r2, as_double(eps), frame.alpha, frame.xi1, frame.xi2, cap.c11,
                    cap.c12, cap.c21, cap.c22, ct.ct11, ct.ct12, ct.ct21, ct.ct22, ct.rs1, ct.rs2,
                    sig.sigma1, sig.sigma2, asym.value.ct11, asym.value.ct12, asym.value.ct21,
                    asym.value.ct22, rel(asym.value.ct11, ct.ct11), rel(asym.value.ct12, ct.ct12),
                    rel(asym.value.ct21, ct.ct21), rel(asym.value.ct22, ct.ct22), cap.n_terms,
                    cap.tail_bound});
  t.summary = {{"epsilon_exact", long_text(eps)}};
  return t;
}

Table cmd_resonances(const RunConfig& c) {
  Table t;
  t.command = "resonances";
  const long double eps = resolved_epsilon(c);
  const Material m = resolved_material(c, regime_delta(c));
  add_warnings(t, validate(m));
  SpectrumRow row = spectrum_row(c, eps, m);
  add_warnings(t, row.warnings);
  t.columns = spectrum_columns();
  t.rows.push_back(std::move(row.cells));
  t.summary = {{"epsilon_exact", long_text(eps)}, {"v_b", m.v_b()}};
  return t;
}

Table cmd_sweep(const RunConfig& c) {
  Table t;
  t.command = "sweep";
  t.columns = spectrum_columns();
  const bool regime = !c.delta_grid.empty();
  const std::size_t n = regime ? c.delta_grid.size() : c.eps_grid.size();
  auto rows = parallel_map<SpectrumRow>(n, c.jobs, [&](std::size_t i) {
    if (regime) {
      const double delta = c.delta_grid[i];
      return spectrum_row(c, epsilon_from_regime(delta, c.beta, c.c0), resolved_material(c, delta));
    }
    return spectrum_row(c, c.eps_grid[i], resolved_material(c, std::nullopt));
  });
  std::vector<double> xs, w1, w2, a1, a2;
  for (auto& row : rows) {
    add_warnings(t, row.warnings);
    xs.push_back(regime ? std::get<double>(row.cells[2]) : std::get<double>(row.cells[0]));
    w1.push_back(std::get<double>(row.cells[7]));
    w2.push_back(std::get<double>(row.cells[8]));
    a1.push_back(std::get<double>(row.cells[9]));
    a2.push_back(std::get<double>(row.cells[10]));
    t.rows.push_back(std::move(row.cells));
  }
  const std::string axis = regime ? "delta" : "epsilon";
  t.summary.emplace_back("sweep_axis", axis);
  const auto put = [&](const std::string& key, const std::vector<double>& y) {
    const auto s = fit_slope_if_possible(xs, y);
    t.summary.emplace_back(key, s.empty() ? kNaN : s.front());
  };
  put("slope_omega1_vs_" + axis, w1);
  put("slope_omega2_vs_" + axis, w2);
  put("slope_omega1_asym_vs_" + axis, a1);
  put("slope_omega2_asym_vs_" + axis, a2);
  return t;
}

Table cmd_field(const RunConfig& c) {
  Table t;
  t.command = "field";
  const long double eps = resolved_epsilon(c);
  const ResonatorPair pair = pair_for(c, eps);
  const BisphericalFrame frame = frame_from_pair(pair);
  const CapacitanceMatrix cap = capacitance_exact(frame, {c.tol, c.max_terms});
  const SpectralPair sp = eigen(rescale(cap, pair));
  const PotentialSeries ps(frame, c.tol, c.max_terms);

  std::vector<CartesianPoint> points;
  for (const auto& p : c.points) {
    const CartesianPoint x{p[0], p[1], p[2]};
    const Region region = classify(frame, x);
    if (region == Region::inside_d1 || region == Region::inside_d2) {
      throw InvalidArgument("point (" + format_number(p[0]) + ", " + format_number(p[1]) + ", " +
                            format_number(p[2]) + ") lies " +
                            (region == Region::inside_d1 ? "inside D1" : "inside D2") +
                            "; fields are only evaluated in the exterior");
    }
    points.push_back(x);
  }
  for (int i = 0; i < c.gap_samples; ++i) {
    const double xi = -frame.xi1 + frame.xi_sum() * (i + 0.5) / c.gap_samples;
    points.push_back(gap_point(frame, xi));
  }

  t.columns = {{"x1", "L"},        {"x2", "L"},         {"x3", "L"},         {"region", "1"},
               {"xi", "1"},        {"theta", "rad"},    {"V1", "1"},         {"V2", "1"},
               {"u1", "1"},        {"u2", "1"},         {"grad_u1_x1", "L^-1"}, {"grad_u1_x2", "L^-1"},
               {"grad_u1_x3", "L^-1"}, {"grad_u2_x1", "L^-1"}, {"grad_u2_x2", "L^-1"},
               {"grad_u2_x3", "L^-1"}, {"abs_grad_u1", "L^-1"}, {"abs_grad_u2", "L^-1"},
               {"series_terms", "1"}};
  auto rows = parallel_map<std::vector<Cell>>(points.size(), c.jobs, [&](std::size_t i) {
    const CartesianPoint x = points[i];
    const Region region = classify(frame, x);
    BisphericalPoint b = to_bispherical(frame, x);
    b.xi = std::clamp(b.xi, -frame.xi1, frame.xi2);
    const PotentialSample s = ps.sample(b, true);
    const CartesianPoint g1 = ps.cartesian_gradient(b, sp.d1 * s.d_xi[0] + s.d_xi[1],
                                                    sp.d1 * s.d_theta[0] + s.d_theta[1]);
    const CartesianPoint g2 = ps.cartesian_gradient(b, sp.d2 * s.d_xi[0] + s.d_xi[1],
                                                    sp.d2 * s.d_theta[0] + s.d_theta[1]);
    return std::vector<Cell>{x.x1, x.x2, x.x3, to_string(region), b.xi, b.theta, s.value[0],
                             s.value[1], sp.d1 * s.value[0] + s.value[1],
                             sp.d2 * s.value[0] + s.value[1], g1.x1, g1.x2, g1.x3, g2.x1, g2.x2,
                             g2.x3, g1.norm(), g2.norm(), s.terms};
  });
  t.rows = std::move(rows);
  t.summary = {{"epsilon_exact", long_text(eps)}, {"d1", sp.d1}, {"d2", sp.d2}};
  return t;
}

Table cmd_blowup(const RunConfig& c) {
  Table t;
  t.command = "blowup";
  BlowupOptions opt;
  opt.tol = std::max(c.tol, 1e-13);
  opt.samples = c.samples;
  opt.jobs = c.jobs;
  const BlowupStudy st = blowup_study(c.r1, c.r2, c.eps_grid, opt);
  t.columns = {{"epsilon", "L"},          {"max_grad_u1", "L^-1"}, {"max_grad_u2", "L^-1"},
               {"xi_u1", "1"},            {"theta_u1", "rad"},     {"xi_u2", "1"},
               {"theta_u2", "rad"},       {"gap_grad_u1", "L^-1"}, {"gap_grad_u2", "L^-1"},
               {"u1_eps_logeps", "1"},    {"u1_eps", "1"},         {"u2_eps", "1"}};
  for (std::size_t i = 0; i < st.rows.size(); ++i) {
    const auto& r = st.rows[i];
    t.rows.push_back({r.epsilon, r.max_grad_u1, r.max_grad_u2, r.location_u1.xi,
                      r.location_u1.theta, r.location_u2.xi, r.location_u2.theta, r.gap_grad_u1,
                      r.gap_grad_u2, st.compensated_u1[i], st.compensated_u1_eps[i],
                      st.compensated_u2[i]});
  }
  const auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
  };
  std::vector<double> g1;
  for (const auto& r : st.rows) g1.push_back(r.max_grad_u1);
  t.summary = {{"slope_u1", st.slope_u1},
               {"slope_u2", st.slope_u2},
               {"spread_max_grad_u1", spread(g1)},
               {"spread_u1_eps_logeps", spread(st.compensated_u1)},
               {"spread_u2_eps", spread(st.compensated_u2)}};
  return t;
}

Table cmd_scattering(const RunConfig& c) {
  Table t;
  t.command = "scattering";
  const long double eps = resolved_epsilon(c);
  const ResonatorPair pair = pair_for(c, eps);
  const Material m = resolved_material(c, regime_delta(c));
  add_warnings(t, validate(m));
  const BisphericalFrame frame = frame_from_pair(pair);
  const CapacitanceMatrix cap = capacitance_exact(frame, {c.tol, c.max_terms});
  const SpectralPair sp = eigen(rescale(cap, pair));
  const ResonantFrequencies freq = resonant_frequencies(sp, m);
  const CartesianPoint dir{c.direction[0], c.direction[1], c.direction[2]};
  const PoleGuard guard{c.pole_guard};
  t.summary = {{"epsilon_exact", long_text(eps)}, {"omega1", freq.omega1}, {"omega2", freq.omega2}};
  const double max_r = std::max(c.r1, c.r2);

  if (c.omega) {
    const auto w = make_incident_wave(*c.omega, dir, {1.0, 0.0}, m, max_r);
    add_warnings(t, w.warnings);
    const ModalCoefficients mc = modal_coefficients(cap, pair, m, w.value, guard);
    t.summary.emplace_back("re_a", mc.a.real());
    t.summary.emplace_back("im_a", mc.a.imag());
    t.summary.emplace_back("re_b", mc.b.real());
    t.summary.emplace_back("im_b", mc.b.imag());
    if (c.points.empty()) {
      t.columns = {{"omega", "T^-1"}, {"re_a", "1"}, {"im_a", "1"}, {"re_b", "1"}, {"im_b", "1"},
                   {"abs_a", "1"},    {"abs_b", "1"}};
      t.rows.push_back({*c.omega, mc.a.real(), mc.a.imag(), mc.b.real(), mc.b.imag(),
                        std::abs(mc.a), std::abs(mc.b)});
      return t;
    }
    const PotentialSeries ps(frame, c.tol, c.max_terms);
    t.columns = {{"x1", "L"},    {"x2", "L"},    {"x3", "L"},     {"re_u", "P"},
                 {"im_u", "P"},  {"abs_u", "P"}, {"re_u_in", "P"}, {"im_u_in", "P"}};
    for (const auto& p : c.points) {
      const CartesianPoint x{p[0], p[1], p[2]};
      const Complex u = eval_scattered(mc, ps, sp, w.value, x);
      const Complex uin = w.value.value(x);
      t.rows.push_back({x.x1, x.x2, x.x3, u.real(), u.imag(), std::abs(u), uin.real(), uin.imag()});
    }
    return t;
  }

  const double lo = c.omega_min.value_or(0.2 * freq.omega1);
  const double hi = c.omega_max.value_or(1.5 * freq.omega2);
  if (!(lo < hi)) throw InvalidArgument("empty frequency range");
  std::vector<double> grid(static_cast<std::size_t>(c.omega_points));
  for (int i = 0; i < c.omega_points; ++i) grid[i] = lo + (hi - lo) * i / (c.omega_points - 1);
  if (hi * max_r >= 0.1) t.warnings.push_back("frequency range is not small compared to 1 / radius");
  const auto rows = response_curve(cap, pair, m, grid, dir, {1.0, 0.0}, guard);
  if (rows.size() < grid.size()) {
    t.warnings.push_back(std::to_string(grid.size() - rows.size()) +
                         " grid points inside the pole guard were skipped");
  }
  t.columns = {{"omega", "T^-1"}, {"abs_a", "1"}, {"abs_b", "1"}};
  double peak_a = kNaN, peak_b = kNaN, best_a = -1.0, best_b = -1.0;
  for (const auto& r : rows) {
    t.rows.push_back({r.omega, r.abs_a, r.abs_b});
    if (r.abs_a > best_a) best_a = r.abs_a, peak_a = r.omega;
    if (r.abs_b > best_b) best_b = r.abs_b, peak_b = r.omega;
  }
  t.summary.emplace_back("peak_abs_a_omega", peak_a);
  // In the symmetric case b vanishes up to rounding and has no meaningful peak.
  t.summary.emplace_back("peak_abs_b_omega", best_b > 1e-12 * best_a ? peak_b : kNaN);
  return t;
}

Table run_command(const RunConfig& c) {
  validate(c);
  if (c.command == "capacitance") return cmd_capacitance(c);
  if (c.command == "resonances") return cmd_resonances(c);
  if (c.command == "field") return cmd_field(c);
  if (c.command == "blowup") return cmd_blowup(c);
  if (c.command == "scattering") return cmd_scattering(c);
  return cmd_sweep(c);
}

}  // namespace twosphere::cli
