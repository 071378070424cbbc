#pragma once

#include <cmath>
#include <complex>

namespace shearstab::detail {

using cplx = std::complex<double>;

inline constexpr double kSqrtPi = 1.7724538509055160273;

// Scaled complementary error function e^{z^2} erfc(z) for complex z.
// Maclaurin series for erf inside |z| < 3, Laplace continued fraction
// (evaluated bottom-up) for Re z >= 0 outside, reflection for Re z < 0.
inline cplx erfcx(cplx z) {
  if (std::abs(z) < 3.0) {
    cplx term = z, sum = z;
    const cplx z2 = z * z;
    for (int n = 1; n < 200; ++n) {
      term *= -z2 / double(n);
      const cplx add = term / double(2 * n + 1);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(z2) * (1.0 - 2.0 / kSqrtPi * sum);
  }
  if (z.real() < 0.0) return 2.0 * std::exp(z * z) - erfcx(-z);
  // erfc z = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
  const int depth = std::abs(z) > 6.0 ? 60 : 160;
  cplx tail = z;
  for (int n = depth; n >= 1; --n) tail = z + (0.5 * n) / tail;
  return 1.0 / (kSqrtPi * tail);
}

inline cplx erfc(cplx z) {
  if (z.real() < 0.0) return 2.0 - erfc(-z);
  return std::exp(-z * z) * erfcx(z);
}

inline cplx erf(cplx z) { return 1.0 - erfc(z); }

// Real erfcx that stays finite for large positive x.
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double r = 1.0 / (x * x);
  return (1.0 - 0.5 * r + 0.75 * r * r - 1.875 * r * r * r) / (x * kSqrtPi);
}

}  // namespace shearstab::detail
