#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"
#include "../profile.hpp"
#include "airy.hpp"

namespace shearstab {

namespace detail {

// Composite Gauss-Legendre in t on [0,1], panels refined toward t = 0.
struct LangerRule {
  std::vector<double> t, w;
  LangerRule() {
    const auto q = gauss_legendre(24);
    const double edges[] = {0.0, 0.0625, 0.125, 0.25, 0.5, 1.0};
    for (int p = 0; p < 5; ++p) {
      const double a = edges[p], b = edges[p + 1];
      for (size_t i = 0; i < q.nodes.size(); ++i) {
        t.push_back(a + (b - a) * (q.nodes[i] + 1) / 2);
        w.push_back((b - a) / 2 * q.weights[i]);
      }
    }
  }
};

inline const LangerRule& langer_rule() {
  static const LangerRule r;
  return r;
}

}  // namespace detail

// Branch bookkeeping for one Langer evaluation: how often the square root of
// R flipped sheet to stay continuous along the path, and the winding of the
// 2/3 power base relative to the principal branch.
struct BranchRecord {
  int sqrt_flips = 0;
  int power_sheet = 0;
};

// g(y) = y_c + (y - y_c) K^{2/3}, K = (3/2) \int_0^1 2 t^2 sqrt(R(t^2)) dt,
// R(s) = (U(z) - c) / (U'(y_c)(z - y_c)), z = y_c + s (y - y_c).
// This is the Langer map with the (y - y_c)^{3/2} factor pulled out, so the
// integrand is smooth and R(0) = 1 fixes the square-root branch.
// P is any callable cplx -> ProfileValue<cplx>.
template <class P>
cplx langer_g_from(const P& p, cplx c, cplx y_c, cplx u1, cplx y, BranchRecord* rec = nullptr) {
  const cplx d = y - y_c;
  if (std::abs(d) == 0.0) return y_c;
  const auto& rule = detail::langer_rule();
  cplx J = 0.0;
  cplx prev = 1.0;
  BranchRecord br;
  for (size_t i = 0; i < rule.t.size(); ++i) {
    const double s = rule.t[i] * rule.t[i];
    const cplx z = y_c + s * d;
    cplx R;
    if (std::abs(s * d) < 1e-7) {
      const auto v = p(y_c);
      R = 1.0 + v.d2u / (2.0 * u1) * (s * d);
    } else {
      R = (p(z).u - c) / (u1 * s * d);
    }
    if (std::abs(R) < 1e-8) throw TurningPointOnPath("langer_g: U - c vanishes on the path from y_c");
    cplx r = std::sqrt(R);
    if (std::real(r * std::conj(prev)) < 0) {
      r = -r;
      ++br.sqrt_flips;
    }
    prev = r;
    J += rule.w[i] * 2.0 * rule.t[i] * rule.t[i] * r;
  }
  const cplx K = 1.5 * J;
  // K = 1 for a linear profile; the principal 2/3 power is continuous from there
  // unless K crosses the negative real axis, which would mean a turning point.
  if (K.real() < 0 && std::abs(K.imag()) < 1e-3 * std::abs(K)) {
    throw TurningPointOnPath("langer_g: 2/3 power base on the branch cut");
  }
  if (rec) *rec = br;
  return y_c + d * std::pow(K, 2.0 / 3.0);
}

inline cplx langer_g(const ShearProfile& p, cplx c, cplx y) {
  const auto cl = critical_layer(p, c);
  return langer_g_from(p, c, cl.y_c, cl.u_prime_at_yc, y);
}

struct LangerFrame {
  ShearProfile profile;
  double alpha, nu;
  cplx c, y_c, u1, gamma;
  BranchRecord branch_record;

  cplx g(cplx y) const { return langer_g_from(profile, c, y_c, u1, y); }

  // g' from (g - y_c) g'^2 = (U - c)/U'(y_c), sign matched to the secant slope.
  cplx dg(cplx y) const {
    const cplx gy = g(y);
    const cplx d = y - y_c;
    if (std::abs(d) < 1e-10) return 1.0;
    const cplx slope = (gy - y_c) / d;
    cplx r = std::sqrt((profile(y).u - c) / (u1 * (gy - y_c)));
    if (std::real(r * std::conj(slope)) < 0) r = -r;
    return r;
  }
};

// gamma is the principal cube root of i alpha U'(y_c) / nu, so Re gamma > 0.
inline LangerFrame langer_frame(const ShearProfile& p, double alpha, double nu, cplx c) {
  if (!(nu > 0)) throw DomainError("langer_frame needs nu > 0");
  const auto cl = critical_layer(p, c);
  const cplx g3 = I * alpha * cl.u_prime_at_yc / nu;
  const cplx gamma = std::polar(std::cbrt(std::abs(g3)), std::arg(g3) / 3.0);
  if (!(gamma.real() > 0)) throw DomainError("langer_frame: Re gamma <= 0");
  return {p, alpha, nu, c, cl.y_c, cl.u_prime_at_yc, gamma, {}};
}

struct FastMode {
  std::vector<double> y;
  std::vector<cplx> log_phi;  // log phi_{f,-}, always representable
  std::vector<cplx> phi, dphi;  // zero where phi underflows
  std::vector<cplx> mu;
  bool small_gamma_warning = false;
};

// Leading-order fast mode Ai(gamma (g(y) - y_c)) normalized to 1 at y = 0,
// and its logarithmic derivative mu = gamma g' Ai'/Ai.
inline FastMode fast_mode(const LangerFrame& f, const std::vector<double>& grid) {
  FastMode m;
  m.small_gamma_warning = std::abs(f.gamma) < 5.0;
  const auto a0 = airy_log(f.gamma * (f.g(0.0) - f.y_c));
  if (!std::isfinite(a0.log_ai.real())) throw NormalizationFailure("fast_mode: Ai_a(0) = 0");
  for (double y : grid) {
    const cplx gy = f.g(y);
    const auto a = airy_log(f.gamma * (gy - f.y_c));
    const cplx lp = a.log_ai - a0.log_ai;
    const cplx mu = f.gamma * f.dg(y) * a.dlog;
    const cplx ph = lp.real() > -700 ? std::exp(lp) : cplx(0.0);
    m.y.push_back(y);
    m.log_phi.push_back(lp);
    m.phi.push_back(y == 0.0 ? cplx(1.0) : ph);
    m.dphi.push_back(mu * ph);
    m.mu.push_back(mu);
  }
  return m;
}

}  // namespace shearstab
