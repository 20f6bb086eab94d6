#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twosphere {

// Bad input: non-positive radii, points outside the admissible region, etc.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not meet its contract: truncation cap reached,
// pole guard violated, quadrature failed to converge.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value together with non-fatal advisories (asymptotic formula used outside
// its regime, oracle tail above target, ...).
template <typename T>
struct Checked {
  T value;
  std::vector<std::string> warnings;

  bool clean() const { return warnings.empty(); }
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace twosphere
