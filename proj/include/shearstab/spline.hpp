#pragma once

#include <algorithm>
#include <vector>

#include "errors.hpp"

namespace shearstab {

// Natural cubic spline on strictly increasing knots.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw DomainError("spline needs at least 3 matching samples");
    for (size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw DomainError("spline knots must be strictly increasing");
    m_.assign(n, 0.0);
    // Thomas algorithm for the second derivatives, natural ends.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double a = h0 / 6, b = (h0 + h1) / 3, cc = h1 / 6;
      const double r = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
      const double den = b - a * c[i - 1];
      c[i] = cc / den;
      d[i] = (r - a * d[i - 1]) / den;
    }
    for (size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
  }

  struct Value {
    double f, df, d2f;
  };

  Value operator()(double t) const {
    const size_t n = x_.size();
    size_t i = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin();
    i = std::clamp<size_t>(i, 1, n - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    Value v;
    v.f = a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6;
    v.df = (y_[i + 1] - y_[i]) / h + ((1 - 3 * a * a) * m_[i] + (3 * b * b - 1) * m_[i + 1]) * h / 6;
    v.d2f = a * m_[i] + b * m_[i + 1];
    return v;
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace shearstab
