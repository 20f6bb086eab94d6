#pragma once

#include <cmath>

namespace twosphere {

/// Neumaier (improved Kahan-Babuska) compensated accumulator.
///
/// The running compensation also captures the error when an addend is larger
/// in magnitude than the partial sum, so the result does not depend on the
/// terms arriving in decreasing order.
template <typename Real>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(Real initial) : sum_(initial) {}

  CompensatedSum& operator+=(Real term) {
    const Real t = sum_ + term;
    if (std::abs(sum_) >= std::abs(term)) {
      compensation_ += (sum_ - t) + term;
    } else {
      compensation_ += (term - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  CompensatedSum& operator-=(Real term) { return *this += -term; }

  Real value() const { return sum_ + compensation_; }

 private:
  Real sum_ = Real(0);
  Real compensation_ = Real(0);
};

}  // namespace twosphere
