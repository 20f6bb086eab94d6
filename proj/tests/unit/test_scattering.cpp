#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mp_oracle.hpp"
#include "twosphere/oracle.hpp"
#include "twosphere/scattering.hpp"

namespace ts = twosphere;
using ts::testing::mp;

namespace {

struct Problem {
  ts::ResonatorPair pair;
  ts::Material material;
  ts::CapacitanceMatrix c;
  ts::SpectralPair sp;
  ts::ResonantFrequencies freq;

  Problem(double r1, double r2, long double eps, ts::Material m = {})
      : pair{r1, r2, eps},
        material(m),
        c(ts::capacitance_exact(ts::frame_from_pair(pair))),
        sp(ts::eigen(ts::rescale(c, pair))),
        freq(ts::resonant_frequencies(sp, m)) {}

  ts::IncidentWave wave(double omega) const {
    return ts::make_incident_wave(omega, {0.0, 0.0, 1.0}, {1.0, 0.0}, material).value;
  }
};

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

double argmax_omega(const std::vector<ts::ResponseRow>& rows, bool use_b) {
  const auto it = std::max_element(rows.begin(), rows.end(), [&](const auto& x, const auto& y) {
    return use_b ? x.abs_b < y.abs_b : x.abs_a < y.abs_a;
  });
  return it->omega;
}

}  // namespace

TEST(IncidentWave, ValidationAndWarnings) {
  const ts::Material m;
  EXPECT_THROW(ts::make_incident_wave(0.0, {0, 0, 1}, {1, 0}, m), ts::InvalidArgument);
  EXPECT_THROW(ts::make_incident_wave(1e-3, {0, 0, 2}, {1, 0}, m), ts::InvalidArgument);
  EXPECT_THROW(ts::make_incident_wave(1e-3, {0, 0, 0}, {1, 0}, m), ts::InvalidArgument);
  const auto w = ts::make_incident_wave(1e-3, {0.6, 0, 0.8}, {2, 1}, m);
  EXPECT_TRUE(w.clean());
  EXPECT_DOUBLE_EQ(w.value.k, 1e-3 / m.v());
  EXPECT_DOUBLE_EQ(w.value.k_b, 1e-3 / m.v_b());
  EXPECT_FALSE(ts::make_incident_wave(5.0, {0, 0, 1}, {1, 0}, m).clean());
}

TEST(ModalCoefficients, SymmetricAntiPhaseNumeratorVanishes) {
  const Problem p(1.0, 1.0, 1e-3L);
  const auto mc = ts::modal_coefficients(p.c, p.pair, p.material, p.wave(0.5 * p.freq.omega1));
  EXPECT_LT(std::abs(mc.flux_difference), 1e-12);
  EXPECT_LT(std::abs(mc.b), 1e-12);
}

TEST(ModalCoefficients, PoleGrowthNearLowResonance) {
  const Problem p(1.0, 2.0, 1e-3L);
  const double w1 = p.freq.omega1;
  double prev = 0.0;
  for (double rel : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto mc = ts::modal_coefficients(p.c, p.pair, p.material, p.wave(w1 * (1.0 + rel)));
    EXPECT_GT(std::abs(mc.a), prev);
    prev = std::abs(mc.a);
    // residue at the pole is independent of the approach
    const auto ref = ts::modal_coefficients(p.c, p.pair, p.material, p.wave(w1 * 1.1));
    EXPECT_NEAR(std::abs(mc.a * mc.denom1) / std::abs(ref.a * ref.denom1), 1.0, 1e-12);
  }
  EXPECT_THROW(ts::modal_coefficients(p.c, p.pair, p.material, p.wave(w1)), ts::NumericalFailure);
  EXPECT_THROW(ts::modal_coefficients(p.c, p.pair, p.material, p.wave(p.freq.omega2)),
               ts::NumericalFailure);
}

TEST(ModalCoefficients, MatchesExtendedPrecisionAssemblyFromImageCharges) {
  const ts::Material m{1.0, 1e-3, 1.0, 2e-3};
  const Problem p(1.0, 2.0, 0.01L, m);
  const auto img = ts::image_charge_capacitance(p.pair).value.matrix;
  // independent assembly: eigenvalues, frequencies and coefficients in 50 digits
  const mp v1 = 4 * boost::math::constants::pi<mp>() / 3;
  const mp v2 = v1 * 8;
  const mp a11 = mp(img.c11) / v1, a12 = mp(img.c12) / v1;
  const mp a21 = mp(img.c21) / v2, a22 = mp(img.c22) / v2;
  const auto [l1, l2] = ts::testing::quadratic_roots_mp(a11, a12, a21, a22);
  const mp scale = mp(m.delta()) * mp(m.v_b()) * mp(m.v_b());
  const double omega = 0.5 * (p.freq.omega1 + p.freq.omega2);
  const mp w2 = mp(omega) * omega;
  const mp flux1 = -(mp(img.c11) + mp(img.c12));
  const mp flux2 = -(mp(img.c22) + mp(img.c21));
  const mp vol = v1 + v2;
  const mp a = scale / vol * (flux1 + flux2) / (w2 - scale * l1);
  const mp b = -scale / vol * (flux1 - v1 / v2 * flux2) / (w2 - scale * l2);
  const auto mc = ts::modal_coefficients(p.c, p.pair, m, p.wave(omega));
  EXPECT_NEAR(mc.a.real(), a.convert_to<double>(), 1e-8 * std::abs(a.convert_to<double>()));
  EXPECT_NEAR(mc.b.real(), b.convert_to<double>(), 1e-8 * std::abs(b.convert_to<double>()));
  EXPECT_EQ(mc.a.imag(), 0.0);
}

TEST(ModalCoefficients, LinearInContrastAboveResonance) {
  for (double delta : {1e-4, 1e-5, 1e-6}) {
    const ts::Material m1{1.0, delta, 1.0, delta};
    const ts::Material m2{1.0, 2.0 * delta, 1.0, 2.0 * delta};  // same v_b
    const Problem p1(1.0, 2.0, 1e-3L, m1);
    const Problem p2(1.0, 2.0, 1e-3L, m2);
    const double omega = 100.0 * p2.freq.omega1;
    const auto a1 = ts::modal_coefficients(p1.c, p1.pair, m1, p1.wave(omega)).a;
    const auto a2 = ts::modal_coefficients(p2.c, p2.pair, m2, p2.wave(omega)).a;
    EXPECT_NEAR(std::abs(a2) / std::abs(a1), 2.0, 0.02);
  }
}

TEST(ModalCoefficients, LabelSwapReciprocity) {
  const Problem p(1.0, 2.0, 1e-3L);
  const Problem q(2.0, 1.0, 1e-3L);
  const double omega = 0.3 * p.freq.omega1 + 0.7 * p.freq.omega2;
  const auto mp_ = ts::modal_coefficients(p.c, p.pair, p.material, p.wave(omega));
  const auto mq = ts::modal_coefficients(q.c, q.pair, q.material, q.wave(omega));
  EXPECT_NEAR(std::abs(mq.a - mp_.a), 0.0, 1e-12 * std::abs(mp_.a));
  EXPECT_NEAR(std::abs(mq.b + 8.0 * mp_.b), 0.0, 1e-12 * std::abs(8.0 * mp_.b));
  EXPECT_NEAR(q.sp.d2 * p.sp.d2, 1.0, 1e-10);
}

TEST(EvalScattered, FarFieldDecay) {
  const Problem p(1.0, 2.0, 1e-2L);
  const auto ps = ts::potential_series(ts::frame_from_pair(p.pair));
  const auto w = p.wave(0.5 * p.freq.omega1);
  const auto mc = ts::modal_coefficients(p.c, p.pair, p.material, w);
  std::vector<double> dist, val;
  for (double R : {1e2, 1e3, 1e4}) {
    const ts::CartesianPoint x{0.0, 0.8 * R, 0.6 * R};
    dist.push_back(R);
    val.push_back(std::abs(ts::eval_scattered(mc, ps, p.sp, w, x) - w.value(x)));
  }
  EXPECT_NEAR(ts::loglog_slope(dist, val), -1.0, 1e-2);
}

TEST(EvalScattered, BoundaryBehaviourAwayFromResonance) {
  const Problem p(1.0, 1.0, 1e-2L, ts::Material{1.0, 1e-12, 1.0, 1e-12});
  const auto frame = ts::frame_from_pair(p.pair);
  const auto ps = ts::potential_series(frame);
  for (double factor : {1e-3, 1e3}) {
    const auto w = p.wave(factor * p.freq.omega1);
    const auto mc = ts::modal_coefficients(p.c, p.pair, p.material, w);
    for (int k = 0; k < 20; ++k) {
      const double theta = std::numbers::pi * k / 19.0;
      for (double xi : {-frame.xi1, frame.xi2}) {
        const auto x = ts::to_cartesian(frame, {xi, theta, 0.3});
        const auto u = ts::eval_scattered(mc, ps, p.sp, w, x);
        if (factor < 1.0) {
          // below resonance the pair follows the incident field
          EXPECT_LT(std::abs(u - w.value(x)), 1e-5);
        } else {
          // above resonance the boundary is screened, up to the O(k r) phase
          // variation of u_in and the O((omega1 / omega)^2) modal residue
          const double ratio = p.freq.omega1 / w.omega;
          EXPECT_LT(std::abs(u), 2.0 * (w.k * x.norm() + ratio * ratio));
        }
      }
    }
  }
}

TEST(EvalScattered, ScreeningTermBoundedAsGapCloses) {
  const ts::CartesianPoint x{1.5, 0.0, 0.0};
  for (long double eps : {1e-2L, 1e-4L, 1e-6L}) {
    const auto ps = ts::potential_series(ts::frame_from_pair({1.0, 2.0, eps}));
    const auto b = ts::to_bispherical(ps.frame(), x);
    const double h1 = ts::eval_potential(ps, 1, b) + ts::eval_potential(ps, 2, b);
    EXPECT_GT(h1, 0.0);
    EXPECT_LT(h1, 1.0);
  }
}

TEST(EvalScattered, RejectsInteriorPoints) {
  const Problem p(1.0, 2.0, 1e-2L);
  const auto frame = ts::frame_from_pair(p.pair);
  const auto ps = ts::potential_series(frame);
  const auto w = p.wave(0.5 * p.freq.omega1);
  const auto mc = ts::modal_coefficients(p.c, p.pair, p.material, w);
  EXPECT_THROW(ts::eval_scattered(mc, ps, p.sp, w, {0, 0, frame.c1}), ts::InvalidArgument);
  EXPECT_THROW(ts::eval_scattered(mc, ps, p.sp, w, {0, 0, frame.c2}), ts::InvalidArgument);
}

TEST(ResponseCurve, PeaksAtResonances) {
  const Problem asym(1.0, 2.0, 1e-3L);
  const double w1 = asym.freq.omega1;
  const double w2 = asym.freq.omega2;
  const auto coarse = ts::response_curve(asym.c, asym.pair, asym.material,
                                         linear_grid(0.2 * w1, 1.5 * w2, 2001), {0, 0, 1});
  const double peak_a = argmax_omega(coarse, false);
  EXPECT_LT(std::abs(peak_a - w1) / w1, 0.01);
  // refine around the coarse |b| peak
  const double coarse_b = argmax_omega(
      ts::response_curve(asym.c, asym.pair, asym.material,
                         linear_grid(1.5 * w1, 1.5 * w2, 2001), {0, 0, 1}),
      true);
  const auto fine = ts::response_curve(asym.c, asym.pair, asym.material,
                                       linear_grid(0.97 * coarse_b, 1.03 * coarse_b, 2001),
                                       {0, 0, 1});
  EXPECT_LT(std::abs(argmax_omega(fine, true) - w2) / w2, 0.01);

  const Problem sym(1.0, 1.0, 1e-3L);
  const auto rows = ts::response_curve(sym.c, sym.pair, sym.material,
                                       linear_grid(0.2 * sym.freq.omega1, 1.5 * sym.freq.omega2, 501),
                                       {0, 0, 1});
  for (const auto& r : rows) EXPECT_LT(r.abs_b, 1e-12);
}

TEST(ResponseCurve, GuardBandPointsAreSkipped) {
  const Problem p(1.0, 2.0, 1e-3L);
  const std::vector<double> grid{0.5 * p.freq.omega1, p.freq.omega1, 2.0 * p.freq.omega1};
  const auto rows = ts::response_curve(p.c, p.pair, p.material, grid, {0, 0, 1});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].omega, grid[0]);
  EXPECT_EQ(rows[1].omega, grid[2]);
}
