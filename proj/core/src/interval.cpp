#include "lyap/interval.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include <fmt/format.h>

namespace lyap {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw UsageError(fmt::format("{}: size mismatch ({} vs {})", what, a, b));
}

double parse_double(std::string_view s) {
  std::string buf(s);
  const char* begin = buf.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end == begin) throw UsageError(fmt::format("cannot parse number '{}'", s));
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') throw UsageError(fmt::format("trailing characters in number '{}'", s));
  return x;
}

// Accumulates sum_k a_k * b_k with outward rounding.
inline void accumulate(Interval& acc, const Interval& a, const Interval& b) {
  if (a.is_zero() || b.is_zero()) return;
  acc += a * b;
}

}  // namespace

Interval pow(const Interval& a, int n) {
  using namespace rounding;
  if (n < 0) return Interval(1.0) / pow(a, -n);
  if (n == 0) return Interval(1.0);
  if (n == 1) return a;
  auto pow_pos = [n](double lo, double hi) {
    double l = lo, h = hi;
    for (int k = 1; k < n; ++k) {
      l = mul_down(l, lo);
      h = mul_up(h, hi);
    }
    return Interval::from_rounded(l, h);
  };
  if (a.lo() >= 0.0) return pow_pos(a.lo(), a.hi());
  if (a.hi() <= 0.0) {
    Interval p = pow_pos(-a.hi(), -a.lo());
    return (n % 2 == 0) ? p : -p;
  }
  if (n % 2 == 0) return Interval::from_rounded(0.0, pow_pos(0.0, a.mag()).hi());
  return Interval::from_rounded(-pow_pos(0.0, -a.lo()).hi(), pow_pos(0.0, a.hi()).hi());
}

std::string to_string(const Interval& a) { return fmt::format("[{},{}]", a.lo(), a.hi()); }

Interval parse_interval(std::string_view text) {
  auto first = text.find_first_not_of(" \t");
  auto last = text.find_last_not_of(" \t");
  if (first == std::string_view::npos) throw UsageError("empty interval text");
  text = text.substr(first, last - first + 1);
  if (text.front() != '[') return Interval(parse_double(text));
  if (text.back() != ']') throw UsageError(fmt::format("unterminated interval '{}'", text));
  auto body = text.substr(1, text.size() - 2);
  auto comma = body.find(',');
  if (comma == std::string_view::npos) throw UsageError(fmt::format("interval '{}' needs lo,hi", text));
  return Interval(parse_double(body.substr(0, comma)), parse_double(body.substr(comma + 1)));
}

std::ostream& operator<<(std::ostream& os, const Interval& a) { return os << to_string(a); }

// ---------------------------------------------------------------- vectors

IntervalVector IntervalVector::point(const Vec& x) {
  IntervalVector r(static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = Interval(x(i));
  return r;
}

IntervalVector IntervalVector::from_bounds(const Vec& lo, const Vec& hi) {
  require_same_size(lo.size(), hi.size(), "IntervalVector::from_bounds");
  IntervalVector r(static_cast<std::size_t>(lo.size()));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = Interval(lo(i), hi(i));
  return r;
}

Vec IntervalVector::mid() const {
  Vec r(size());
  for (std::size_t i = 0; i < size(); ++i) r(i) = v_[i].mid();
  return r;
}

Vec IntervalVector::lower() const {
  Vec r(size());
  for (std::size_t i = 0; i < size(); ++i) r(i) = v_[i].lo();
  return r;
}

Vec IntervalVector::upper() const {
  Vec r(size());
  for (std::size_t i = 0; i < size(); ++i) r(i) = v_[i].hi();
  return r;
}

Vec IntervalVector::widths() const {
  Vec r(size());
  for (std::size_t i = 0; i < size(); ++i) r(i) = v_[i].width();
  return r;
}

double IntervalVector::max_width() const {
  double w = 0.0;
  for (const auto& x : v_) w = std::max(w, x.width());
  return w;
}

bool IntervalVector::contains(const Vec& x) const {
  require_same_size(size(), x.size(), "IntervalVector::contains");
  for (std::size_t i = 0; i < size(); ++i)
    if (!v_[i].contains(x(i))) return false;
  return true;
}

bool IntervalVector::contains(const IntervalVector& other) const {
  require_same_size(size(), other.size(), "IntervalVector::contains");
  for (std::size_t i = 0; i < size(); ++i)
    if (!v_[i].contains(other[i])) return false;
  return true;
}

bool IntervalVector::interior_contains(const IntervalVector& other) const {
  require_same_size(size(), other.size(), "IntervalVector::interior_contains");
  for (std::size_t i = 0; i < size(); ++i)
    if (!v_[i].interior_contains(other[i])) return false;
  return true;
}

IntervalVector IntervalVector::segment(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) throw UsageError("IntervalVector::segment out of range");
  return IntervalVector(std::vector<Interval>(v_.begin() + begin, v_.begin() + begin + count));
}

bool operator==(const IntervalVector& a, const IntervalVector& b) { return a.entries() == b.entries(); }

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "vector +");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

IntervalVector operator-(const IntervalVector& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "vector -");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

IntervalVector operator-(const IntervalVector& a) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

IntervalVector operator+(const IntervalVector& a, const Vec& b) {
  require_same_size(a.size(), b.size(), "vector +");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + Interval(b(i));
  return r;
}

IntervalVector operator-(const IntervalVector& a, const Vec& b) {
  require_same_size(a.size(), b.size(), "vector -");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - Interval(b(i));
  return r;
}

IntervalVector operator*(const Interval& s, const IntervalVector& a) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

IntervalVector hull(const IntervalVector& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "vector hull");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = hull(a[i], b[i]);
  return r;
}

std::optional<IntervalVector> intersect(const IntervalVector& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "vector intersect");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = intersect(a[i], b[i]);
    if (!x) return std::nullopt;
    r[i] = *x;
  }
  return r;
}

IntervalVector inflate(const IntervalVector& a, double r) {
  IntervalVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = inflate(a[i], r);
  return out;
}

Interval dot(const IntervalVector& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "dot");
  Interval s;
  for (std::size_t i = 0; i < a.size(); ++i) accumulate(s, a[i], b[i]);
  return s;
}

Interval dot(const Vec& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "dot");
  Interval s;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (a(i) != 0.0) s += b[i] * a(i);
  return s;
}

double norm_inf(const IntervalVector& a) {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, x.mag());
  return m;
}

std::string to_string(const IntervalVector& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ", ";
    s += to_string(a[i]);
  }
  return s + ")";
}

std::ostream& operator<<(std::ostream& os, const IntervalVector& a) { return os << to_string(a); }

// --------------------------------------------------------------- matrices

IntervalMatrix::IntervalMatrix(std::initializer_list<std::initializer_list<Interval>> init) {
  rows_ = init.size();
  cols_ = rows_ ? init.begin()->size() : 0;
  a_.reserve(rows_ * cols_);
  for (const auto& row : init) {
    if (row.size() != cols_) throw UsageError("IntervalMatrix: ragged initializer");
    a_.insert(a_.end(), row.begin(), row.end());
  }
}

IntervalMatrix IntervalMatrix::point(const Mat& m) {
  IntervalMatrix r(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) = Interval(m(i, j));
  return r;
}

IntervalMatrix IntervalMatrix::identity(std::size_t n) {
  IntervalMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i) r(i, i) = Interval(1.0);
  return r;
}

Mat IntervalMatrix::mid() const {
  Mat r(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).mid();
  return r;
}

Mat IntervalMatrix::lower() const {
  Mat r(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).lo();
  return r;
}

Mat IntervalMatrix::upper() const {
  Mat r(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).hi();
  return r;
}

double IntervalMatrix::max_width() const {
  double w = 0.0;
  for (const auto& x : a_) w = std::max(w, x.width());
  return w;
}

IntervalMatrix IntervalMatrix::transpose() const {
  IntervalMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

bool IntervalMatrix::contains(const Mat& m) const {
  if (static_cast<std::size_t>(m.rows()) != rows_ || static_cast<std::size_t>(m.cols()) != cols_)
    throw UsageError("IntervalMatrix::contains: shape mismatch");
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (!(*this)(i, j).contains(m(i, j))) return false;
  return true;
}

bool IntervalMatrix::contains(const IntervalMatrix& other) const {
  if (other.rows_ != rows_ || other.cols_ != cols_)
    throw UsageError("IntervalMatrix::contains: shape mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k)
    if (!a_[k].contains(other.a_[k])) return false;
  return true;
}

IntervalMatrix IntervalMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                                     std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw UsageError("IntervalMatrix::block out of range");
  IntervalMatrix r(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
  return r;
}

namespace {
void require_same_shape(const IntervalMatrix& a, const IntervalMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw UsageError(fmt::format("{}: shape mismatch ({}x{} vs {}x{})", what, a.rows(), a.cols(),
                                 b.rows(), b.cols()));
}
}  // namespace

bool operator==(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k)
    if (!(a.data()[k] == b.data()[k])) return false;
  return true;
}

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b, "matrix +");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k) r.data()[k] = a.data()[k] + b.data()[k];
  return r;
}

IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b, "matrix -");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k) r.data()[k] = a.data()[k] - b.data()[k];
  return r;
}

IntervalMatrix operator*(const Interval& s, const IntervalMatrix& a) {
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k) r.data()[k] = s * a.data()[k];
  return r;
}

IntervalMatrix hull(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b, "matrix hull");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k) r.data()[k] = hull(a.data()[k], b.data()[k]);
  return r;
}

std::optional<IntervalMatrix> intersect(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b, "matrix intersect");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k) {
    auto x = intersect(a.data()[k], b.data()[k]);
    if (!x) return std::nullopt;
    r.data()[k] = *x;
  }
  return r;
}

IntervalMatrix mat_mul(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.cols() != b.rows()) throw UsageError("mat_mul: inner dimensions differ");
  IntervalMatrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Interval& aik = a(i, k);
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) accumulate(r(i, j), aik, b(k, j));
    }
  return r;
}

IntervalMatrix mat_mul(const IntervalMatrix& a, const Mat& b) {
  if (a.cols() != static_cast<std::size_t>(b.rows())) throw UsageError("mat_mul: inner dimensions differ");
  IntervalMatrix r(a.rows(), static_cast<std::size_t>(b.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Interval& aik = a(i, k);
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < r.cols(); ++j)
        if (b(k, j) != 0.0) r(i, j) += aik * b(k, j);
    }
  return r;
}

IntervalMatrix mat_mul(const Mat& a, const IntervalMatrix& b) {
  if (static_cast<std::size_t>(a.cols()) != b.rows()) throw UsageError("mat_mul: inner dimensions differ");
  IntervalMatrix r(static_cast<std::size_t>(a.rows()), b.cols());
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t k = 0; k < b.rows(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (!b(k, j).is_zero()) r(i, j) += b(k, j) * aik;
    }
  return r;
}

IntervalVector mat_vec(const IntervalMatrix& a, const IntervalVector& v) {
  if (a.cols() != v.size()) throw UsageError("mat_vec: dimension mismatch");
  IntervalVector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) accumulate(r[i], a(i, j), v[j]);
  return r;
}

IntervalVector mat_vec(const Mat& a, const IntervalVector& v) {
  if (static_cast<std::size_t>(a.cols()) != v.size()) throw UsageError("mat_vec: dimension mismatch");
  IntervalVector r(static_cast<std::size_t>(a.rows()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (a(i, j) != 0.0) r[i] += v[j] * a(i, j);
  return r;
}

IntervalVector mat_vec(const IntervalMatrix& a, const Vec& v) {
  if (a.cols() != static_cast<std::size_t>(v.size())) throw UsageError("mat_vec: dimension mismatch");
  IntervalVector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (v(j) != 0.0) r[i] += a(i, j) * v(j);
  return r;
}

IntervalMatrix enclose_product(const Mat& a, const Mat& b) {
  return mat_mul(IntervalMatrix::point(a), b);
}

Interval quad_form(const IntervalVector& v, const Mat& y) {
  if (static_cast<std::size_t>(y.rows()) != v.size() || static_cast<std::size_t>(y.cols()) != v.size())
    throw UsageError("quad_form: dimension mismatch");
  Interval s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (y(i, i) != 0.0) s += sqr(v[i]) * y(i, i);
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      Interval c = Interval(y(i, j)) + Interval(y(j, i));
      if (c.is_zero()) continue;
      s += c * (v[i] * v[j]);
    }
  }
  return s;
}

double norm_inf(const IntervalMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) row = rounding::add_up(row, a(i, j).mag());
    m = std::max(m, row);
  }
  return m;
}

std::string to_string(const IntervalMatrix& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (i) s += ", ";
    s += "(";
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) s += ", ";
      s += to_string(a(i, j));
    }
    s += ")";
  }
  return s + "]";
}

std::ostream& operator<<(std::ostream& os, const IntervalMatrix& a) { return os << to_string(a); }

}  // namespace lyap
