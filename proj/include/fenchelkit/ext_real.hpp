#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "fenchelkit/error.hpp"

namespace fenchelkit {

/// A value in R ∪ {+∞}. The infinite value is a tag, never a large float;
/// NaN and -∞ are rejected on construction.
class ExtReal {
 public:
  constexpr ExtReal() noexcept = default;

  // Implicit on purpose: finite doubles are the common case.
  ExtReal(double v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v)) throw Error("ExtReal: NaN is not representable");
    if (v == -std::numeric_limits<double>::infinity())
      throw Error("ExtReal: -infinity is not representable");
    if (v == std::numeric_limits<double>::infinity()) {
      inf_ = true;
    } else {
      v_ = v;
    }
  }

  static constexpr ExtReal infinity() noexcept {
    ExtReal r;
    r.inf_ = true;
    return r;
  }

  constexpr bool is_finite() const noexcept { return !inf_; }
  constexpr bool is_infinite() const noexcept { return inf_; }

  double value() const {
    if (inf_) throw Error("ExtReal: value() on +infinity");
    return v_;
  }

  /// +infinity maps to the IEEE infinity; used for comparisons and printing.
  constexpr double to_double() const noexcept {
    return inf_ ? std::numeric_limits<double>::infinity() : v_;
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return infinity();
    return ExtReal(a.v_ + b.v_);
  }
  friend ExtReal operator-(ExtReal a, double b) {
    if (a.inf_) return infinity();
    return ExtReal(a.v_ - b);
  }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  friend bool operator==(const ExtReal& a, const ExtReal& b) noexcept {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }
  friend std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) noexcept {
    return a.to_double() <=> b.to_double();
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
    if (x.inf_) return os << "+inf";
    return os << x.v_;
  }

 private:
  double v_ = 0.0;
  bool inf_ = false;
};

inline ExtReal min(ExtReal a, ExtReal b) { return b < a ? b : a; }
inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

}  // namespace fenchelkit
