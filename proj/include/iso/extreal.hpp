#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace iso {

// Extended real with explicit +/- infinity markers. Arithmetic saturates;
// NaN is never stored (inf - inf is a logic error and throws).
class ExtReal {
 public:
  ExtReal() : v_(0.0) {}
  ExtReal(double v) : v_(v) {
    if (std::isnan(v)) throw std::invalid_argument("ExtReal: NaN");
  }

  static ExtReal pos_inf() { return ExtReal(Tag::kPosInf); }
  static ExtReal neg_inf() { return ExtReal(Tag::kNegInf); }

  bool is_finite() const { return tag_ == Tag::kFinite; }
  bool is_pos_inf() const { return tag_ == Tag::kPosInf; }
  bool is_neg_inf() const { return tag_ == Tag::kNegInf; }

  // Finite value; throws on infinities.
  double value() const {
    if (!is_finite()) throw std::logic_error("ExtReal: value() on infinity");
    return v_;
  }
  // Value with infinities mapped to +/-HUGE_VAL, for comparisons and output.
  double as_double() const {
    if (is_pos_inf()) return std::numeric_limits<double>::infinity();
    if (is_neg_inf()) return -std::numeric_limits<double>::infinity();
    return v_;
  }

  ExtReal operator+(const ExtReal& o) const {
    if (is_pos_inf() || o.is_pos_inf()) {
      if (is_neg_inf() || o.is_neg_inf())
        throw std::logic_error("ExtReal: inf + -inf");
      return pos_inf();
    }
    if (is_neg_inf() || o.is_neg_inf()) return neg_inf();
    return ExtReal(v_ + o.v_);
  }
  ExtReal operator-() const {
    if (is_pos_inf()) return neg_inf();
    if (is_neg_inf()) return pos_inf();
    return ExtReal(-v_);
  }
  ExtReal operator-(const ExtReal& o) const { return *this + (-o); }
  // Scaling by a nonnegative finite weight; 0 * inf = 0 (measure convention).
  ExtReal scaled(double w) const {
    if (w == 0.0) return ExtReal(0.0);
    if (is_pos_inf()) return w > 0 ? pos_inf() : neg_inf();
    if (is_neg_inf()) return w > 0 ? neg_inf() : pos_inf();
    return ExtReal(w * v_);
  }

  bool operator<(const ExtReal& o) const { return as_double() < o.as_double(); }
  bool operator>(const ExtReal& o) const { return o < *this; }
  bool operator<=(const ExtReal& o) const { return !(o < *this); }
  bool operator>=(const ExtReal& o) const { return !(*this < o); }
  bool operator==(const ExtReal& o) const {
    return tag_ == o.tag_ && (tag_ != Tag::kFinite || v_ == o.v_);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
    if (x.is_pos_inf()) return os << "inf";
    if (x.is_neg_inf()) return os << "-inf";
    return os << x.v_;
  }

 private:
  enum class Tag { kFinite, kPosInf, kNegInf };
  explicit ExtReal(Tag t) : v_(0.0), tag_(t) {}
  double v_;
  Tag tag_ = Tag::kFinite;
};

inline ExtReal ext_min(const ExtReal& a, const ExtReal& b) { return a <= b ? a : b; }
inline ExtReal ext_max(const ExtReal& a, const ExtReal& b) { return a >= b ? a : b; }

}  // namespace iso
