#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace brwldp {

/// A real number or +infinity. Rates are compared and ordered; arithmetic on
/// an infinite value has to go through value(), which refuses it.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : v_(v) {}  // NOLINT: implicit from double

  static constexpr ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  bool is_finite() const { return std::isfinite(v_); }
  bool is_infinite() const { return std::isinf(v_) && v_ > 0; }

  double value() const {
    if (!is_finite()) throw std::domain_error("arithmetic on an infinite rate");
    return v_;
  }

  /// Raw double, +inf included. Only for serialization and comparisons.
  constexpr double raw() const { return v_; }

  friend constexpr std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    return a.v_ <=> b.v_;
  }
  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal x) {
    if (x.is_infinite()) return os << "inf";
    return os << x.v_;
  }

 private:
  double v_ = 0.0;
};

}  // namespace brwldp
