#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"
#include "../profile.hpp"

namespace shearstab {

struct DispersionOptions {
  double kappa = 0.0;   // step scale; 0 picks clamp(0.5 (nu/1e-6)^{1/5}, 0.2, 1)
  double h_outer = 0.005;
  double y_start = 0.0;  // 0: where the profile equals U+ to 1e-16
  // Center of the step refinement around the critical point. Negative: taken
  // from Re c. Root finders pin it so the mesh does not move with c.
  double refine_at = -1.0;
  // Integrate the transposed operator (U - c) Dpsi + 2 U' psi' - (nu / (i alpha)) D^2 psi
  // instead, whose eigenvalues are those of the adjoint problem.
  bool transposed = false;
};

// D = mantissa * exp(log_scale). The split keeps D representable when the
// fast minors grow like exp(sqrt(alpha/nu) y).
struct Dispersion {
  cplx mantissa;
  cplx log_scale;
  double residual;  // |z1(0)| / max_i |z_i(0)|
  int steps = 0;

  cplx log() const { return std::log(mantissa) + log_scale; }
  cplx value() const { return mantissa * std::exp(log_scale); }
};

namespace detail {

using M6 = Eigen::Matrix<cplx, 6, 6>;
using V6 = Eigen::Matrix<cplx, 6, 1>;

// Coefficients of psi'''' = a psi'' + e psi' + b psi for the Orr-Sommerfeld operator
// (U - c)(psi'' - alpha^2 psi) - U'' psi - (nu / (i alpha)) (d^2 - alpha^2)^2 psi.
struct OrrCoef {
  cplx a, b, e = 0.0;
};

inline OrrCoef orr_coef(double alpha, double nu, cplx c, double u, double d2u) {
  const cplx k = I * alpha / nu;
  const double a2 = alpha * alpha;
  return {2.0 * a2 + k * (u - c), -a2 * a2 - k * ((u - c) * a2 + d2u)};
}

// Same for the transposed operator; U'' cancels and a U' psi' term appears.
inline OrrCoef transposed_coef(double alpha, double nu, cplx c, double u, double du) {
  const cplx k = I * alpha / nu;
  const double a2 = alpha * alpha;
  return {2.0 * a2 + k * (u - c), -a2 * a2 - k * (u - c) * a2, 2.0 * k * du};
}

inline OrrCoef coef_at(bool transposed, double alpha, double nu, cplx c, const ProfileValue<double>& v) {
  return transposed ? transposed_coef(alpha, nu, c, v.u, v.du) : orr_coef(alpha, nu, c, v.u, v.d2u);
}

// Minors y1..y6 = [12],[13],[14],[23],[24],[34] of two solutions with
// columns (psi, psi', psi'', psi''').
inline M6 compound_matrix(const OrrCoef& k) {
  M6 m = M6::Zero();
  m(0, 1) = 1;
  m(1, 2) = 1;
  m(1, 3) = 1;
  m(2, 0) = k.e;
  m(2, 1) = k.a;
  m(2, 4) = 1;
  m(3, 4) = 1;
  m(4, 0) = -k.b;
  m(4, 3) = k.a;
  m(4, 5) = 1;
  m(5, 1) = -k.b;
  m(5, 3) = -k.e;
  return m;
}

// Decaying rate of the fast far-field solution, Re Q > 0.
inline cplx far_rate(double alpha, double nu, cplx c, double u) {
  return std::sqrt(alpha * alpha + I * alpha * (u - c) / nu);
}

// Minors of the two decaying far-field solutions e^{-|alpha| y}, e^{-Q y},
// divided by (|alpha| - Q).
inline V6 far_field_minors(double a, cplx Q) {
  V6 v;
  v << 1.0, -(Q + a), a * a + a * Q + Q * Q, a * Q, -a * Q * (Q + a), a * a * Q * Q;
  return v;
}

// Where U = c_r on [0, y_max] by bisection; 0 if c_r is outside (0, U+).
inline double real_critical_point(const ShearProfile& p, double cr, double y_max) {
  if (!(cr > 0 && cr < p.u_plus())) return 0.0;
  double lo = 0.0, hi = y_max;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (lo + hi);
    (p(m).u < cr ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

inline double default_kappa(double nu) { return std::clamp(0.5 * std::pow(nu / 1e-6, 0.2), 0.2, 1.0); }

}  // namespace detail

// Compound-matrix evaluation of the Orr-Sommerfeld dispersion function.
// Fourth-order Magnus steps downward from the far field, each step's growth
// e^{(|alpha| + Q) h} factored out analytically and the rest renormalized.
// Normalized so that a constant profile gives D = 1.
inline Dispersion os_dispersion(const ShearProfile& p, double alpha, cplx c, double nu, const DispersionOptions& o = {}) {
  if (alpha == 0.0) throw DomainError("os_dispersion needs alpha != 0");
  if (!(nu > 0)) throw DomainError("os_dispersion needs nu > 0");
  const double aa = std::abs(alpha);
  const double kappa = o.kappa > 0 ? o.kappa : detail::default_kappa(nu);
  const double ys = o.y_start > 0 ? o.y_start : p.far_field(1e-16);
  const double k = std::isfinite(p.decay_rate()) ? p.decay_rate() : 1.0;
  const double du0 = std::max(std::abs(p(0.0).du), 1e-300);
  const double delta = std::cbrt(nu / (aa * du0));
  const double yc = o.refine_at >= 0 ? o.refine_at : detail::real_critical_point(p, c.real(), ys);
  const double g = std::sqrt(3.0) / 6.0;
  const cplx Qinf = detail::far_rate(alpha, nu, c, p.u_plus());
  detail::V6 z = detail::far_field_minors(aa, Qinf);
  cplx log_scale = 0.0;
  double y = ys;
  int steps = 0;
  while (y > 0) {
    double h = kappa * std::min(0.3 * (delta + std::min(y, std::abs(y - yc))), o.h_outer * std::exp(k * y / 5));
    h = std::min(h, 2.0 / k);
    if (y - h < 0 || y - h < 1e-3 * h) h = y;
    const double y1 = y - h * (0.5 - g), y2 = y - h * (0.5 + g);
    const auto v1 = p(y1), v2 = p(y2);
    const detail::M6 A1 = detail::compound_matrix(detail::coef_at(o.transposed, alpha, nu, c, v1));
    const detail::M6 A2 = detail::compound_matrix(detail::coef_at(o.transposed, alpha, nu, c, v2));
    const double hs = -h;
    detail::M6 Om = (hs / 2) * (A1 + A2) + (std::sqrt(3.0) / 12 * hs * hs) * (A2 * A1 - A1 * A2);
    const cplx Q = detail::far_rate(alpha, nu, c, p(y - h / 2).u);
    const cplx sigma = -hs * (aa + Q);
    Om.diagonal().array() -= sigma;
    z = Om.exp() * z;
    const double nr = z.cwiseAbs().maxCoeff();
    if (!(nr > 0) || !std::isfinite(nr))
      throw IntegrationFailure("os_dispersion: minors lost at y = " + std::to_string(y));
    z /= nr;
    log_scale += sigma + std::log(nr);
    y -= h;
    ++steps;
  }
  log_scale -= (aa + Qinf) * ys;
  return {z(0), log_scale, std::abs(z(0)) / z.cwiseAbs().maxCoeff(), steps};
}

// Phase winding of D around a closed polygon, following the continuous
// imaginary part of log D.
inline int dispersion_winding(const ShearProfile& p, double alpha, double nu, const std::vector<cplx>& polygon,
                              int samples_per_edge = 100, const DispersionOptions& o = {}) {
  return winding_number_log([&](cplx c) { return os_dispersion(p, alpha, c, nu, o).log(); }, polygon, samples_per_edge);
}

}  // namespace shearstab
