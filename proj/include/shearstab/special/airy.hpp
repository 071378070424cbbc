#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "../errors.hpp"
#include "../numerics.hpp"

namespace shearstab {

struct AiryPair {
  cplx ai, dai;
};

// Ai in log form: log Ai(z) and the logarithmic derivative Ai'(z)/Ai(z).
// Stays representable where Ai itself under- or overflows.
struct LogAiry {
  cplx log_ai;
  cplx dlog;
};

namespace detail {

// Minimal complex arithmetic in binary128 for the Maclaurin sums, which
// cancel by up to e^{(2/3)|z|^{3/2}} on the positive axis.
struct Q2 {
  __float128 re, im;
};
inline Q2 operator+(Q2 a, Q2 b) { return {a.re + b.re, a.im + b.im}; }
inline Q2 operator-(Q2 a, Q2 b) { return {a.re - b.re, a.im - b.im}; }
inline Q2 operator*(Q2 a, Q2 b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline Q2 operator*(Q2 a, __float128 s) { return {a.re * s, a.im * s}; }
inline double qabs2(Q2 a) { return double(a.re) * double(a.re) + double(a.im) * double(a.im); }

inline constexpr double kAiryMaclaurinRadius = 9.0;

inline AiryPair airy_maclaurin(cplx zd) {
  // Ai(0) and -Ai'(0) as double-double sums.
  const __float128 c1 = __float128(0.3550280538878172) + __float128(2.05233632436212e-17);
  const __float128 c2 = __float128(0.2588194037928068) - __float128(2.522243111610832e-17);
  const Q2 z{zd.real(), zd.imag()};
  const Q2 z3 = z * z * z;
  Q2 t{1, 0}, s = z, p = z * z * __float128(0.5), q{1, 0};
  Q2 f = t, g = s, df = p, dg = q;
  for (int k = 1; k < 400; ++k) {
    t = t * z3 * (__float128(1) / ((3 * k - 1) * (3 * k)));
    s = s * z3 * (__float128(1) / ((3 * k) * (3 * k + 1)));
    p = p * z3 * (__float128(1) / ((3 * k) * (3 * k + 2)));
    q = q * z3 * (__float128(1) / ((3 * k - 2) * (3 * k)));
    f = f + t;
    g = g + s;
    df = df + p;
    dg = dg + q;
    if (qabs2(t) + qabs2(s) + qabs2(p) + qabs2(q) < 1e-66 * (qabs2(f) + qabs2(g) + 1e-300)) break;
  }
  const Q2 ai = f * c1 - g * c2;
  const Q2 dai = df * c1 - dg * c2;
  return {cplx(double(ai.re), double(ai.im)), cplx(double(dai.re), double(dai.im))};
}

// Asymptotic expansion for |arg z| <= 2 pi / 3, returned in log form:
// Ai ~ e^{-zeta} / (2 sqrt(pi) z^{1/4}) sum (-1)^k u_k zeta^{-k}.
inline LogAiry airy_asymptotic_log(cplx z) {
  const cplx sz = std::sqrt(z);
  const cplx zeta = 2.0 / 3.0 * z * sz;
  double u = 1.0;
  cplx su = 1.0, sv = 1.0, zp = 1.0;
  double last = 1e300;
  for (int k = 1; k < 60; ++k) {
    u *= double((6 * k - 5) * (6 * k - 3) * (6 * k - 1)) / double((2 * k - 1) * 216 * k);
    const double v = -double(6 * k + 1) / double(6 * k - 1) * u;
    zp *= -1.0 / zeta;
    const double mag = u * std::abs(zp);
    if (mag > last) break;  // smallest term reached
    su += u * zp;
    sv += v * zp;
    last = mag;
    if (mag < 1e-17) break;
  }
  const double l2sp = std::log(2.0 * std::sqrt(std::numbers::pi));
  LogAiry r;
  r.log_ai = -zeta - l2sp - 0.25 * std::log(z) + std::log(su);
  // Ai'/Ai = -sqrt(z) * sv / su
  r.dlog = -sz * sv / su;
  return r;
}

inline cplx log_sum(cplx la, cplx lb) {
  // log(e^{la} + e^{lb}) without overflow.
  if (la.real() < lb.real()) std::swap(la, lb);
  return la + std::log(1.0 + std::exp(lb - la));
}

}  // namespace detail

inline LogAiry airy_log(cplx z) {
  if (!(std::abs(z) < 1e8)) throw ScaledRepresentation("airy_log argument beyond 1e8");
  if (std::abs(z) <= detail::kAiryMaclaurinRadius) {
    const auto a = detail::airy_maclaurin(z);
    return {std::log(a.ai), a.dai / a.ai};
  }
  if (std::abs(std::arg(z)) <= 2.0 * std::numbers::pi / 3.0) return detail::airy_asymptotic_log(z);
  // Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z), w = e^{2 pi i / 3}; both rotated
  // arguments fall inside the sector where the expansion holds.
  const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  const auto a = detail::airy_asymptotic_log(w * z);
  const auto b = detail::airy_asymptotic_log(w * w * z);
  const cplx la = std::log(-w) + a.log_ai;
  const cplx lb = std::log(-w * w) + b.log_ai;
  const cplx log_ai = detail::log_sum(la, lb);
  // Ai'(z) = -w^2 Ai'(w z) - w Ai'(w^2 z)
  const cplx lda = std::log(-w * w) + a.log_ai + std::log(a.dlog);
  const cplx ldb = std::log(-w) + b.log_ai + std::log(b.dlog);
  return {log_ai, std::exp(detail::log_sum(lda, ldb) - log_ai)};
}

// Ai(z) and Ai'(z). Maclaurin series (binary128) for |z| <= 9, asymptotic
// expansion with sector rotation beyond.
inline AiryPair airy(cplx z) {
  if (!(std::abs(z) < 1e4))
    throw ScaledRepresentation("airy: |z| >= 1e4, use airy_log for the scaled representation");
  if (std::abs(z) <= detail::kAiryMaclaurinRadius) return detail::airy_maclaurin(z);
  const auto l = airy_log(z);
  if (std::abs(l.log_ai.real()) > 700.0)
    throw ScaledRepresentation("airy: value out of double range, use airy_log");
  const cplx ai = std::exp(l.log_ai);
  return {ai, ai * l.dlog};
}

}  // namespace shearstab
