#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace ifcx {

// Extended real in nats: a finite double, +inf, or -inf. NaN is never a
// legal value; the one sum that could produce it (inf - inf in gap
// computations) is handled explicitly where it arises.
class ExtReal {
 public:
  constexpr ExtReal() : v_(0.0) {}
  constexpr ExtReal(double v) : v_(v) { assert(!std::isnan(v_)); }

  static constexpr ExtReal pos_inf() {
    return ExtReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtReal neg_inf() {
    return ExtReal(-std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return v_; }
  constexpr bool is_finite() const {
    return v_ == v_ && v_ != std::numeric_limits<double>::infinity() &&
           v_ != -std::numeric_limits<double>::infinity();
  }
  constexpr bool is_pos_inf() const {
    return v_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_neg_inf() const {
    return v_ == -std::numeric_limits<double>::infinity();
  }

  friend constexpr bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return a.v_ > b.v_; }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return a.v_ >= b.v_; }
  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }

  // x + (+inf) = +inf for finite x; (+inf) + (-inf) is a caller bug.
  friend ExtReal operator+(ExtReal a, ExtReal b) {
    assert(!(a.is_pos_inf() && b.is_neg_inf()));
    assert(!(a.is_neg_inf() && b.is_pos_inf()));
    return ExtReal(a.v_ + b.v_);
  }
  friend ExtReal operator-(ExtReal a, ExtReal b) {
    assert(!(a.is_pos_inf() && b.is_pos_inf()));
    assert(!(a.is_neg_inf() && b.is_neg_inf()));
    return ExtReal(a.v_ - b.v_);
  }

  friend constexpr ExtReal ext_max(ExtReal a, ExtReal b) { return a.v_ < b.v_ ? b : a; }
  friend constexpr ExtReal ext_min(ExtReal a, ExtReal b) { return b.v_ < a.v_ ? b : a; }

 private:
  double v_;
};

// [x]_+ = max{0, x}
inline ExtReal clip_positive(ExtReal x) { return ext_max(x, ExtReal(0.0)); }
inline double clip_positive(double x) { return x > 0.0 ? x : 0.0; }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace ifcx
