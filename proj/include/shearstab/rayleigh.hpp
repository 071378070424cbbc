#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "profile.hpp"

namespace shearstab {

struct RayleighOptions {
  double step = 0.0025;
  double y_max = 0.0;  // 0: max(12, 12/alpha)
  double im_floor = 1e-8;
  int max_iter = 50;
  double miss_tol = 1e-11;
  double accept_tol = 1e-10;
};

struct RayleighMode {
  double alpha;
  cplx c;
  std::vector<double> y;  // increasing, y[0] = 0
  std::vector<cplx> psi, dpsi;
  cplx miss_residual;
  int iterations = 0;
};

struct RayleighTrajectory {
  std::vector<double> y;  // decreasing from y_max to 0
  std::vector<cplx> psi, dpsi;
};

namespace detail {

inline double rayleigh_ymax(double alpha, const RayleighOptions& o) {
  return o.y_max > 0 ? o.y_max : std::max(12.0, 12.0 / alpha);
}

// psi'' = (alpha^2 + U''/(U - c)) psi, integrated downward from y_max with
// the decaying seed psi = e^{-alpha y}. Classical RK4 on a fixed grid, so
// the miss is a smooth function of c; a step is split locally only when
// |coefficient| h^2 would leave the RK4 stability region.
inline cplx rayleigh_integrate(const ShearProfile& p, double alpha, cplx c, const RayleighOptions& o,
                               RayleighTrajectory* traj) {
  if (c.imag() == 0.0) throw SingularIntegration("rayleigh_miss: Im c = 0 puts a critical layer on the real axis");
  if (!(alpha > 0)) throw DomainError("rayleigh_miss needs alpha > 0");
  const double ym = rayleigh_ymax(alpha, o);
  const int n = int(std::ceil(ym / o.step));
  const double h = ym / n;
  auto coef = [&](double y) {
    const auto v = p(y);
    return alpha * alpha + v.d2u / (v.u - c);
  };
  std::array<cplx, 2> z{std::exp(-alpha * ym), -alpha * std::exp(-alpha * ym)};
  auto rk4 = [&](double y, double hs) {
    // hs < 0: downward
    const cplx k0 = coef(y), km = coef(y + hs / 2), k1 = coef(y + hs);
    const cplx a1 = z[1], b1 = k0 * z[0];
    const cplx a2 = z[1] + hs / 2 * b1, b2 = km * (z[0] + hs / 2 * a1);
    const cplx a3 = z[1] + hs / 2 * b2, b3 = km * (z[0] + hs / 2 * a2);
    const cplx a4 = z[1] + hs * b3, b4 = k1 * (z[0] + hs * a3);
    z[0] += hs / 6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    z[1] += hs / 6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
  };
  if (traj) {
    traj->y = {ym};
    traj->psi = {z[0]};
    traj->dpsi = {z[1]};
  }
  for (int i = 0; i < n; ++i) {
    const double y = ym - i * h;
    int sub = 1;
    while (std::abs(coef(y - h / (2 * sub))) * (h / sub) * (h / sub) > 1.0) {
      sub *= 2;
      if (h / sub < 1e-12) throw StepUnderflow("rayleigh_miss: step underflow near a critical layer");
    }
    for (int s = 0; s < sub; ++s) rk4(y - s * h / sub, -h / sub);
    if (!std::isfinite(std::abs(z[0])) || !std::isfinite(std::abs(z[1])))
      throw StepUnderflow("rayleigh_miss: solution blew up");
    if (traj) {
      traj->y.push_back(i + 1 == n ? 0.0 : y - h);
      traj->psi.push_back(z[0]);
      traj->dpsi.push_back(z[1]);
    }
  }
  return z[0];
}

}  // namespace detail

// psi(0) of the decaying Rayleigh solution; zero exactly at an eigenvalue.
inline cplx rayleigh_miss(const ShearProfile& p, double alpha, cplx c, const RayleighOptions& o = {}) {
  return detail::rayleigh_integrate(p, alpha, c, o, nullptr);
}

struct RayleighDiagnostics {
  std::string reason;
  MullerResult search;
};

inline std::optional<RayleighMode> find_rayleigh_mode(const ShearProfile& p, double alpha, cplx c_guess,
                                                      const RayleighOptions& o = {},
                                                      RayleighDiagnostics* diag = nullptr) {
  if (!(c_guess.imag() > 0)) throw DomainError("find_rayleigh_mode needs Im c_guess > 0");
  const double d = std::min(0.01 * std::max(std::abs(c_guess), 0.01), 0.5 * c_guess.imag());
  auto f = [&](cplx c) { return rayleigh_miss(p, alpha, c, o); };
  MullerOptions mo;
  mo.max_iter = o.max_iter;
  mo.f_tol = o.miss_tol;
  mo.step_tol = 1e-14;
  const double bound = 2.0 * std::abs(p.u_plus()) + 1.0;
  auto guard = [&](cplx c) { return c.imag() > o.im_floor && std::abs(c) < bound; };
  MullerResult r;
  try {
    r = muller(f, c_guess - d, c_guess + I * d, c_guess, mo, guard);
  } catch (const Error& e) {
    if (diag) diag->reason = e.what();
    return std::nullopt;
  }
  if (diag) diag->search = r;
  if (r.aborted) {
    if (diag) diag->reason = "iterate left the Im c > floor half-plane";
    return std::nullopt;
  }
  const cplx miss = f(r.root);
  if (!(std::abs(miss) < o.accept_tol)) {
    if (diag) diag->reason = "no convergence: |miss| = " + std::to_string(std::abs(miss));
    return std::nullopt;
  }
  RayleighTrajectory t;
  detail::rayleigh_integrate(p, alpha, r.root, o, &t);
  RayleighMode m;
  m.alpha = alpha;
  m.c = r.root;
  m.miss_residual = miss;
  m.iterations = r.iterations;
  m.y.assign(t.y.rbegin(), t.y.rend());
  m.psi.assign(t.psi.rbegin(), t.psi.rend());
  m.dpsi.assign(t.dpsi.rbegin(), t.dpsi.rend());
  double mx = 0;
  cplx at;
  for (const cplx& v : m.psi)
    if (std::abs(v) > mx) {
      mx = std::abs(v);
      at = v;
    }
  const cplx scale = std::abs(at) / at / mx;  // max |psi| = 1, real positive there
  for (auto& v : m.psi) v *= scale;
  for (auto& v : m.dpsi) v *= scale;
  return m;
}

}  // namespace shearstab
