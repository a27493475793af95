#pragma once

/**
 * @file interval.hpp
 * @brief Outward-rounded interval arithmetic for scalars, vectors and matrices.
 *
 * Rounding is done without touching the FPU rounding mode: every operation
 * computes the round-to-nearest result together with its exact residual
 * (TwoSum for +/-, fma for *, / and sqrt) and moves the bound one ulp
 * outward only when the residual points outward. Exactly representable
 * results therefore stay exact, e.g. [1,2]+[3,4] = [4,6].
 */

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lyap/errors.hpp"

namespace lyap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace rounding {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude fma residuals may themselves underflow.
inline constexpr double kTiny = 0x1p-960;

inline double down(double x) { return std::nextafter(x, -kInf); }
inline double up(double x) { return std::nextafter(x, kInf); }

// Residual of a + b (exact unless the sum overflows).
inline double sum_err(double a, double b, double s) {
  double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

inline double add_down(double a, double b) {
  double s = a + b;
  return sum_err(a, b, s) < 0 ? down(s) : s;
}
inline double add_up(double a, double b) {
  double s = a + b;
  return sum_err(a, b, s) > 0 ? up(s) : s;
}
inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  double p = a * b;
  if (a == 0.0 || b == 0.0) return 0.0;
  if (std::fabs(p) < kTiny) return down(p);
  return std::fma(a, b, -p) < 0 ? down(p) : p;
}
inline double mul_up(double a, double b) {
  double p = a * b;
  if (a == 0.0 || b == 0.0) return 0.0;
  if (std::fabs(p) < kTiny) return up(p);
  return std::fma(a, b, -p) > 0 ? up(p) : p;
}

// Sign of a/b - fl(a/b), or 2 when the residual cannot be trusted.
inline int div_err_sign(double a, double b, double q) {
  if (std::fabs(a) < kTiny || std::fabs(q) < kTiny) return 2;
  double r = std::fma(-q, b, a);
  if (r == 0.0) return 0;
  return ((r > 0) == (b > 0)) ? 1 : -1;
}
inline double div_down(double a, double b) {
  if (a == 0.0) return 0.0;
  double q = a / b;
  int s = div_err_sign(a, b, q);
  return (s < 0 || s == 2) ? down(q) : q;
}
inline double div_up(double a, double b) {
  if (a == 0.0) return 0.0;
  double q = a / b;
  int s = div_err_sign(a, b, q);
  return (s > 0) ? up(q) : q;
}

inline double sqrt_down(double a) {
  if (a == 0.0) return 0.0;
  double s = std::sqrt(a);
  if (a < kTiny) return down(s);
  return std::fma(-s, s, a) < 0 ? down(s) : s;
}
inline double sqrt_up(double a) {
  if (a == 0.0) return 0.0;
  double s = std::sqrt(a);
  if (a < kTiny) return up(s);
  return std::fma(-s, s, a) > 0 ? up(s) : s;
}

}  // namespace rounding

/// Closed interval [lo, hi] of binary64 numbers. Bounds are always finite.
class Interval {
 public:
  constexpr Interval() noexcept = default;

  /// Degenerate interval [x, x].
  Interval(double x) : lo_(x), hi_(x) {  // NOLINT(google-explicit-constructor)
    if (!std::isfinite(x)) throw DomainError("interval bound is not finite");
  }

  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw DomainError("interval bound is not finite");
    if (lo > hi) throw DomainError("interval with lo > hi");
  }

  /// Smallest interval containing both numbers, in either order.
  static Interval spanning(double a, double b) { return a <= b ? Interval(a, b) : Interval(b, a); }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  /// A float inside the interval, near its center.
  double mid() const noexcept {
    if (lo_ == -hi_) return 0.0;
    double m = 0.5 * lo_ + 0.5 * hi_;
    return m < lo_ ? lo_ : (m > hi_ ? hi_ : m);
  }
  /// Upper bound of hi - lo.
  double width() const noexcept { return rounding::sub_up(hi_, lo_); }
  /// Upper bound of the radius.
  double rad() const noexcept { return rounding::mul_up(width(), 0.5); }
  /// max |x| over the interval.
  double mag() const noexcept { return std::fmax(std::fabs(lo_), std::fabs(hi_)); }
  /// min |x| over the interval.
  double mig() const noexcept {
    if (lo_ <= 0.0 && hi_ >= 0.0) return 0.0;
    return std::fmin(std::fabs(lo_), std::fabs(hi_));
  }

  bool is_point() const noexcept { return lo_ == hi_; }
  bool is_zero() const noexcept { return lo_ == 0.0 && hi_ == 0.0; }
  bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
  /// Subset test: other ⊆ *this.
  bool contains(const Interval& other) const noexcept { return lo_ <= other.lo_ && other.hi_ <= hi_; }
  /// Strict inclusion: other lies in the interior of *this.
  bool interior_contains(const Interval& other) const noexcept {
    return lo_ < other.lo_ && other.hi_ < hi_;
  }
  bool contains_zero() const noexcept { return lo_ <= 0.0 && 0.0 <= hi_; }
  bool certainly_positive() const noexcept { return lo_ > 0.0; }
  bool certainly_negative() const noexcept { return hi_ < 0.0; }

  Interval& operator+=(const Interval& b);
  Interval& operator-=(const Interval& b);
  Interval& operator*=(const Interval& b);
  Interval& operator/=(const Interval& b);

  /// Construct from bounds already known to be valid; non-finite bounds
  /// (overflow) raise DomainError.
  static Interval from_rounded(double lo, double hi) {
    if (!(lo >= -std::numeric_limits<double>::max() && hi <= std::numeric_limits<double>::max()))
      throw DomainError("interval overflow");
    Interval r;
    r.lo_ = lo;
    r.hi_ = hi;
    return r;
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline bool operator==(const Interval& a, const Interval& b) noexcept {
  return a.lo() == b.lo() && a.hi() == b.hi();
}

inline Interval operator-(const Interval& a) { return Interval::from_rounded(-a.hi(), -a.lo()); }

inline Interval operator+(const Interval& a, const Interval& b) {
  using namespace rounding;
  return Interval::from_rounded(add_down(a.lo(), b.lo()), add_up(a.hi(), b.hi()));
}

inline Interval operator-(const Interval& a, const Interval& b) {
  using namespace rounding;
  return Interval::from_rounded(sub_down(a.lo(), b.hi()), sub_up(a.hi(), b.lo()));
}

inline Interval operator*(const Interval& a, const Interval& b) {
  using namespace rounding;
  const double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
  if (al >= 0.0) {
    if (bl >= 0.0) return Interval::from_rounded(mul_down(al, bl), mul_up(ah, bh));
    if (bh <= 0.0) return Interval::from_rounded(mul_down(ah, bl), mul_up(al, bh));
    return Interval::from_rounded(mul_down(ah, bl), mul_up(ah, bh));
  }
  if (ah <= 0.0) {
    if (bl >= 0.0) return Interval::from_rounded(mul_down(al, bh), mul_up(ah, bl));
    if (bh <= 0.0) return Interval::from_rounded(mul_down(ah, bh), mul_up(al, bl));
    return Interval::from_rounded(mul_down(al, bh), mul_up(al, bl));
  }
  if (bl >= 0.0) return Interval::from_rounded(mul_down(al, bh), mul_up(ah, bh));
  if (bh <= 0.0) return Interval::from_rounded(mul_down(ah, bl), mul_up(al, bl));
  return Interval::from_rounded(std::fmin(mul_down(al, bh), mul_down(ah, bl)),
                                std::fmax(mul_up(al, bl), mul_up(ah, bh)));
}

inline Interval operator*(const Interval& a, double b) {
  using namespace rounding;
  if (b >= 0.0) return Interval::from_rounded(mul_down(a.lo(), b), mul_up(a.hi(), b));
  return Interval::from_rounded(mul_down(a.hi(), b), mul_up(a.lo(), b));
}
inline Interval operator*(double a, const Interval& b) { return b * a; }

inline Interval operator/(const Interval& a, const Interval& b) {
  using namespace rounding;
  const double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
  if (b.contains_zero()) throw DomainError("division by an interval containing zero");
  if (bl > 0.0) {
    if (al >= 0.0) return Interval::from_rounded(div_down(al, bh), div_up(ah, bl));
    if (ah <= 0.0) return Interval::from_rounded(div_down(al, bl), div_up(ah, bh));
    return Interval::from_rounded(div_down(al, bl), div_up(ah, bl));
  }
  if (al >= 0.0) return Interval::from_rounded(div_down(ah, bh), div_up(al, bl));
  if (ah <= 0.0) return Interval::from_rounded(div_down(ah, bl), div_up(al, bh));
  return Interval::from_rounded(div_down(ah, bh), div_up(al, bh));
}

inline Interval& Interval::operator+=(const Interval& b) { return *this = *this + b; }
inline Interval& Interval::operator-=(const Interval& b) { return *this = *this - b; }
inline Interval& Interval::operator*=(const Interval& b) { return *this = *this * b; }
inline Interval& Interval::operator/=(const Interval& b) { return *this = *this / b; }

inline Interval sqr(const Interval& a) {
  using namespace rounding;
  if (a.lo() >= 0.0) return Interval::from_rounded(mul_down(a.lo(), a.lo()), mul_up(a.hi(), a.hi()));
  if (a.hi() <= 0.0) return Interval::from_rounded(mul_down(a.hi(), a.hi()), mul_up(a.lo(), a.lo()));
  return Interval::from_rounded(0.0, std::fmax(mul_up(a.lo(), a.lo()), mul_up(a.hi(), a.hi())));
}

/// Square root; raises DomainError if the interval reaches below zero.
inline Interval sqrt(const Interval& a) {
  if (a.lo() < 0.0) throw DomainError("sqrt of an interval with negative part");
  return Interval::from_rounded(rounding::sqrt_down(a.lo()), rounding::sqrt_up(a.hi()));
}

inline Interval abs(const Interval& a) { return Interval::from_rounded(a.mig(), a.mag()); }

Interval pow(const Interval& a, int n);

inline Interval hull(const Interval& a, const Interval& b) {
  return Interval::from_rounded(std::fmin(a.lo(), b.lo()), std::fmax(a.hi(), b.hi()));
}

/// Intersection; std::nullopt when the intervals are disjoint.
inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  double lo = std::fmax(a.lo(), b.lo());
  double hi = std::fmin(a.hi(), b.hi());
  if (lo > hi) return std::nullopt;
  return Interval::from_rounded(lo, hi);
}

inline double midpoint(const Interval& a) { return a.mid(); }
inline double width(const Interval& a) { return a.width(); }
inline bool contains(const Interval& a, double x) { return a.contains(x); }

/// Symmetric enlargement [lo - r, hi + r] (outward rounded).
inline Interval inflate(const Interval& a, double r) {
  return Interval::from_rounded(rounding::sub_down(a.lo(), r), rounding::add_up(a.hi(), r));
}

/// "[lo,hi]" with shortest round-trip decimal bounds.
std::string to_string(const Interval& a);
/// Parses "[lo,hi]" or a bare number.
Interval parse_interval(std::string_view text);
std::ostream& operator<<(std::ostream& os, const Interval& a);

// --------------------------------------------------------------------------

/// Box: Cartesian product of intervals.
class IntervalVector {
 public:
  IntervalVector() = default;
  explicit IntervalVector(std::size_t n, const Interval& value = Interval()) : v_(n, value) {}
  IntervalVector(std::initializer_list<Interval> init) : v_(init) {}
  explicit IntervalVector(std::vector<Interval> v) : v_(std::move(v)) {}

  static IntervalVector point(const Vec& x);
  static IntervalVector from_bounds(const Vec& lo, const Vec& hi);

  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }
  Interval& operator[](std::size_t i) { return v_[i]; }
  const Interval& operator[](std::size_t i) const { return v_[i]; }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }
  void push_back(const Interval& x) { v_.push_back(x); }
  const std::vector<Interval>& entries() const noexcept { return v_; }

  Vec mid() const;
  Vec lower() const;
  Vec upper() const;
  /// Per-component upper bounds of widths.
  Vec widths() const;
  double max_width() const;
  bool contains(const Vec& x) const;
  bool contains(const IntervalVector& other) const;
  bool interior_contains(const IntervalVector& other) const;

  /// Sub-box of entries [begin, begin + count).
  IntervalVector segment(std::size_t begin, std::size_t count) const;

 private:
  std::vector<Interval> v_;
};

bool operator==(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator+(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a);
IntervalVector operator+(const IntervalVector& a, const Vec& b);
IntervalVector operator-(const IntervalVector& a, const Vec& b);
IntervalVector operator*(const Interval& s, const IntervalVector& a);
IntervalVector hull(const IntervalVector& a, const IntervalVector& b);
std::optional<IntervalVector> intersect(const IntervalVector& a, const IntervalVector& b);
IntervalVector inflate(const IntervalVector& a, double r);
Interval dot(const IntervalVector& a, const IntervalVector& b);
Interval dot(const Vec& a, const IntervalVector& b);
/// Upper bound of max_i |a_i|.
double norm_inf(const IntervalVector& a);
std::string to_string(const IntervalVector& a);
std::ostream& operator<<(std::ostream& os, const IntervalVector& a);

// --------------------------------------------------------------------------

/// Row-major matrix of intervals.
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  IntervalMatrix(std::size_t rows, std::size_t cols, const Interval& value = Interval())
      : rows_(rows), cols_(cols), a_(rows * cols, value) {}
  IntervalMatrix(std::initializer_list<std::initializer_list<Interval>> init);

  static IntervalMatrix point(const Mat& m);
  static IntervalMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Interval& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Interval& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  Interval* data() noexcept { return a_.data(); }
  const Interval* data() const noexcept { return a_.data(); }

  Mat mid() const;
  Mat lower() const;
  Mat upper() const;
  double max_width() const;
  IntervalMatrix transpose() const;
  bool contains(const Mat& m) const;
  bool contains(const IntervalMatrix& other) const;
  IntervalMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Interval> a_;
};

bool operator==(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator*(const Interval& s, const IntervalMatrix& a);
IntervalMatrix hull(const IntervalMatrix& a, const IntervalMatrix& b);
std::optional<IntervalMatrix> intersect(const IntervalMatrix& a, const IntervalMatrix& b);

IntervalMatrix mat_mul(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix mat_mul(const IntervalMatrix& a, const Mat& b);
IntervalMatrix mat_mul(const Mat& a, const IntervalMatrix& b);
IntervalVector mat_vec(const IntervalMatrix& a, const IntervalVector& v);
IntervalVector mat_vec(const Mat& a, const IntervalVector& v);
IntervalVector mat_vec(const IntervalMatrix& a, const Vec& v);
/// Enclosure of the exact product of two point matrices.
IntervalMatrix enclose_product(const Mat& a, const Mat& b);

/// Enclosure of {z^T Y z : z in v}. Symmetric pairs are combined so the
/// result is invariant under Y -> Y^T.
Interval quad_form(const IntervalVector& v, const Mat& y);

/// Upper bound of the row-sum norm.
double norm_inf(const IntervalMatrix& a);
std::string to_string(const IntervalMatrix& a);
std::ostream& operator<<(std::ostream& os, const IntervalMatrix& a);

}  // namespace lyap
