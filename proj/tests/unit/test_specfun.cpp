#include <gtest/gtest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <numbers>

#include "mp_oracle.hpp"
#include "twosphere/specfun.hpp"

namespace ts = twosphere;

TEST(Constants, EulerGamma) { EXPECT_NEAR(ts::euler_gamma, 0.57721566490153286, 1e-16); }

TEST(LegendreP, DegreeZeroAndEndpoints) {
  for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) EXPECT_EQ(ts::legendre_p(0, x), 1.0);
  for (int n = 0; n <= 50; ++n) {
    EXPECT_NEAR(ts::legendre_p(n, 1.0), 1.0, 1e-13);
    EXPECT_NEAR(ts::legendre_p(n, -1.0), n % 2 ? -1.0 : 1.0, 1e-13);
  }
}

TEST(LegendreP, DegreeFiveExpansion) {
  const double x = 0.3;
  const double expected = (63 * std::pow(x, 5) - 70 * std::pow(x, 3) + 15 * x) / 8.0;
  EXPECT_NEAR(ts::legendre_p(5, x), expected, 1e-15);
}

TEST(LegendreP, AgreesWithBoostAndStaysBounded) {
  ts::testing::Generator gen(21);
  for (int k = 0; k < 200; ++k) {
    const int n = gen.integer(0, 300);
    const double x = gen.uniform(-1.0, 1.0);
    EXPECT_NEAR(ts::legendre_p(n, x), boost::math::legendre_p(n, x), 1e-12);
  }
  // long recurrence stays inside [-1, 1]
  for (double x : {-0.999, -0.31, 0.0, 0.5, 0.9999}) {
    ts::LegendreRecurrence rec(x);
    double worst = 0.0;
    while (rec.degree() < 1'000'000) {
      worst = std::max(worst, std::abs(rec.value()));
      rec.advance();
    }
    EXPECT_LE(worst, 1.0 + 1e-12);
  }
}

TEST(LegendreP, RejectsOutOfRange) {
  EXPECT_THROW(ts::legendre_p(3, 1.0001), ts::InvalidArgument);
  EXPECT_THROW(ts::legendre_p(-1, 0.5), ts::InvalidArgument);
  EXPECT_THROW(ts::legendre_p_deriv(3, -1.5), ts::InvalidArgument);
}

TEST(LegendreDeriv, IdentitiesAndFiniteDifference) {
  for (double x : {-0.9, 0.0, 0.4}) EXPECT_NEAR(ts::legendre_p_deriv(1, x), 1.0, 1e-15);
  for (int n = 0; n <= 30; ++n) {
    EXPECT_NEAR(ts::legendre_p_deriv(n, 1.0), n * (n + 1) / 2.0, 1e-10 * (1 + n * n));
  }
  const double h = 1e-5;
  const double fd = (ts::legendre_p(7, 0.4 + h) - ts::legendre_p(7, 0.4 - h)) / (2 * h);
  EXPECT_NEAR(ts::legendre_p_deriv(7, 0.4), fd, 1e-8);
}

TEST(Digamma, SpecialValues) {
  EXPECT_NEAR(ts::digamma(1.0), -ts::euler_gamma, 1e-14);
  EXPECT_NEAR(ts::digamma(0.5), -ts::euler_gamma - 2.0 * std::log(2.0), 1e-14);
}

TEST(Digamma, RecurrenceAndReference) {
  ts::testing::Generator gen(22);
  for (int k = 0; k < 500; ++k) {
    const double z = gen.log_uniform(1e-3, 10.0);
    EXPECT_NEAR(ts::digamma(z + 1.0) - ts::digamma(z), 1.0 / z, 1e-12 * std::max(1.0, 1.0 / z));
    const double ref = boost::math::digamma(z);
    EXPECT_NEAR(ts::digamma(z), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
  EXPECT_NEAR(ts::digamma(1e6), boost::math::digamma(1e6), 1e-12);
}

TEST(Digamma, RejectsNonPositive) {
  EXPECT_THROW(ts::digamma(0.0), ts::InvalidArgument);
  EXPECT_THROW(ts::digamma(-2.5), ts::InvalidArgument);
}

TEST(DigammaSeriesTail, HalfAndLimits) {
  EXPECT_NEAR(ts::digamma_series_tail(0.5), 2.0 * std::log(2.0), 1e-14);
  EXPECT_LT(ts::digamma_series_tail(1e-12), 1e-11);
  EXPECT_NEAR(ts::digamma_series_tail(0.3), -ts::euler_gamma - ts::digamma(0.7), 1e-12);
  EXPECT_THROW(ts::digamma_series_tail(0.0), ts::InvalidArgument);
  EXPECT_THROW(ts::digamma_series_tail(1.0), ts::InvalidArgument);
}

TEST(DigammaSeriesTail, ProofIdentityOverGrid) {
  for (int k = 1; k <= 19; ++k) {
    const double z = 0.05 * k;
    // -gamma - sum = psi(1 - z)
    EXPECT_NEAR(-ts::euler_gamma - ts::digamma_series_tail(z), ts::digamma(1.0 - z), 1e-12) << z;
    EXPECT_NEAR(-ts::euler_gamma - ts::digamma_series_tail(z), boost::math::digamma(1.0 - z),
                1e-12)
        << z;
  }
}
