#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "profile.hpp"

namespace shearstab {

struct CrankNicolsonOptions {
  int cells = 4000;
  int steps = 400;
};

namespace detail {

// One Crank-Nicolson (theta = 1/2) or backward Euler (theta = 1) step of
// u_t = nu u_yy with Dirichlet u(0) = 0, u(y_max) = u_plus.
inline void heat_step(const std::vector<double>& y, std::vector<double>& u, double nu_dt, double theta) {
  const size_t n = y.size();
  std::vector<double> lo(n, 0), di(n, 1), up(n, 0), rhs(u);
  for (size_t j = 1; j + 1 < n; ++j) {
    const double hm = y[j] - y[j - 1], hp = y[j + 1] - y[j];
    const double cm = 2 / (hm * (hm + hp)), cp = 2 / (hp * (hm + hp));
    const double lap = cm * u[j - 1] - (cm + cp) * u[j] + cp * u[j + 1];
    rhs[j] = u[j] + (1 - theta) * nu_dt * lap;
    lo[j] = -theta * nu_dt * cm;
    up[j] = -theta * nu_dt * cp;
    di[j] = 1 + theta * nu_dt * (cm + cp);
  }
  for (size_t j = 1; j < n; ++j) {
    const double m = lo[j] / di[j - 1];
    di[j] -= m * up[j - 1];
    rhs[j] -= m * rhs[j - 1];
  }
  u[n - 1] = rhs[n - 1] / di[n - 1];
  for (size_t j = n - 1; j-- > 0;) u[j] = (rhs[j] - up[j] * u[j + 1]) / di[j];
}

inline std::vector<double> heat_march(const std::vector<double>& y, std::vector<double> u, double tau, int steps) {
  // Rannacher start: two backward Euler half steps damp the corner mode.
  const double dt = tau / steps;
  heat_step(y, u, 0.5 * dt, 1.0);
  heat_step(y, u, 0.5 * dt, 1.0);
  for (int s = 1; s < steps; ++s) heat_step(y, u, dt, 0.5);
  return u;
}

inline std::vector<double> sinh_grid(double y_max, int cells, double beta) {
  std::vector<double> y(cells + 1);
  for (int j = 0; j <= cells; ++j) {
    const double s = double(j) / cells;
    y[j] = beta > 1e-8 ? y_max * std::sinh(beta * s) / std::sinh(beta) : y_max * s;
  }
  return y;
}

}  // namespace detail

// Crank-Nicolson route, usable on any profile. Two resolutions are combined
// by Richardson extrapolation; the result is a table profile.
inline ShearProfile evolve_heat_cn(const ShearProfile& p, double nu, double t, CrankNicolsonOptions opt = {}) {
  if (!(t >= 0)) throw DomainError("evolve_heat needs t >= 0");
  if (!(nu > 0)) throw DomainError("evolve_heat needs nu > 0");
  if (t == 0) return p;
  const double tau = nu * t;
  const double rate = std::isfinite(p.decay_rate()) ? p.decay_rate() : 1.0 / std::sqrt(tau);
  const double y_max = std::max(10.0 / rate, p.far_field(1e-12)) + 10 * std::sqrt(tau);
  // Aim the first cell at a few hundredths of the diffusion length.
  double beta = 0.0;
  const double target = std::sqrt(tau) / 200 * opt.cells / y_max;
  for (double b = 0.5; b < 12.0; b += 0.01)
    if (b / std::sinh(b) > target) beta = b;
  auto solve = [&](int cells, int steps) {
    const auto y = detail::sinh_grid(y_max, cells, beta);
    std::vector<double> u(y.size());
    for (size_t j = 0; j < y.size(); ++j) u[j] = p(y[j]).u;
    u.front() = 0.0;
    u.back() = p.u_plus();
    return std::pair{y, detail::heat_march(y, std::move(u), tau, steps)};
  };
  const auto [yc, uc] = solve(opt.cells, opt.steps);
  const auto [yf, uf] = solve(2 * opt.cells, 2 * opt.steps);
  std::vector<double> u(yc.size());
  for (size_t j = 0; j < yc.size(); ++j) u[j] = (4 * uf[2 * j] - uc[j]) / 3;
  u.front() = 0.0;
  u.back() = p.u_plus();
  return ShearProfile::table(yc, u, rate);
}

// Heat flow of the base profile for time t at viscosity nu, Dirichlet 0 at the
// wall. Closed forms for the erf and exponential families, Crank-Nicolson otherwise.
inline ShearProfile evolve_heat(const ShearProfile& p, double nu, double t, CrankNicolsonOptions opt = {}) {
  if (!(t >= 0)) throw DomainError("evolve_heat needs t >= 0");
  if (!(nu > 0)) throw DomainError("evolve_heat needs nu > 0");
  if (t == 0) return p;
  const double tau = nu * t;
  if (const auto* e = std::get_if<ShearProfile::Erf>(&p.shape())) return ShearProfile::erf(p.u_plus(), e->tau + tau);
  if (const auto* e = std::get_if<ShearProfile::Exponential>(&p.shape()))
    return ShearProfile::heated_exponential(p.u_plus(), e->k, tau);
  if (const auto* e = std::get_if<ShearProfile::HeatedExponential>(&p.shape()))
    return ShearProfile::heated_exponential(p.u_plus(), e->k, e->tau + tau);
  return evolve_heat_cn(p, nu, t, opt);
}

}  // namespace shearstab
