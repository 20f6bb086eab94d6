#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "twosphere/errors.hpp"

namespace twosphere {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "fit needs two or more paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  detail::require(sxx > 0.0, "fit abscissae are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Slope of log y against log x; all samples must be positive.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size(), "fit needs paired samples");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive samples");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return linear_fit(lx, ly).slope;
}

}  // namespace twosphere
