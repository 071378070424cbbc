#pragma once

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace shearstab {

// phi' = lambda phi + A |phi|^2 phi, the cubic truncation of the Landau equation.
struct LandauModel {
  cplx lambda;
  cplx A = -1.0;
  cplx phi0;
};

struct LandauOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  double blowup = 10.0;    // stop when |phi| reaches this
  double validity = 0.3;   // quintic terms doubtful above this
};

struct LandauTrajectory {
  std::vector<double> t, modulus, phase;
  std::vector<cplx> phi;
  bool blow_up = false;
  double validity_exceeded_at = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

using LandauState = std::array<double, 2>;

struct LandauRhs {
  cplx lambda, A;
  void operator()(const LandauState& x, LandauState& dx, double) const {
    const cplx p(x[0], x[1]);
    const cplx d = lambda * p + A * std::norm(p) * p;
    dx = {d.real(), d.imag()};
  }
};

}  // namespace detail

// Adaptive Dormand-Prince with dense output, sampled every dt on [0, T]. A
// blow-up is located on the dense output by bisection so the last sample sits
// at |phi| = blowup.
inline LandauTrajectory integrate_landau(const LandauModel& m, double T, double dt, const LandauOptions& o = {}) {
  namespace ode = boost::numeric::odeint;
  if (!(std::abs(m.phi0) > 0)) throw DomainError("integrate_landau: phi0 must be nonzero");
  if (!(dt > 0) || !(T >= 0)) throw DomainError("integrate_landau: need dt > 0 and T >= 0");
  if (dt * std::abs(m.lambda) >= 0.1) throw DomainError("integrate_landau: dt |lambda| must be below 0.1");
  using State = detail::LandauState;
  auto stepper = ode::make_dense_output(o.abs_tol, o.rel_tol, ode::runge_kutta_dopri5<State>());
  const detail::LandauRhs rhs{m.lambda, m.A};
  stepper.initialize(State{m.phi0.real(), m.phi0.imag()}, 0.0, dt);
  LandauTrajectory tr;
  auto record = [&](double t, const State& x) {
    const cplx p(x[0], x[1]);
    tr.t.push_back(t);
    tr.phi.push_back(p);
    tr.modulus.push_back(std::abs(p));
    tr.phase.push_back(std::arg(p));
    if (std::isnan(tr.validity_exceeded_at) && std::abs(p) > o.validity) tr.validity_exceeded_at = t;
  };
  record(0.0, State{m.phi0.real(), m.phi0.imag()});
  const auto n = static_cast<long>(std::floor(T / dt + 1e-9));
  long next = 1;
  State x;
  while (next <= n) {
    stepper.do_step(rhs);
    const double t1 = stepper.current_time();
    const State& cur = stepper.current_state();
    if (std::hypot(cur[0], cur[1]) >= o.blowup) {
      double a = stepper.previous_time(), b = t1;
      for (int k = 0; k < 200 && b - a > 1e-15 * b; ++k) {
        const double c = 0.5 * (a + b);
        stepper.calc_state(c, x);
        (std::hypot(x[0], x[1]) >= o.blowup ? b : a) = c;
      }
      while (next <= n && next * dt < b) {
        stepper.calc_state(next * dt, x);
        record(next * dt, x);
        ++next;
      }
      stepper.calc_state(b, x);
      record(b, x);
      tr.blow_up = true;
      return tr;
    }
    while (next <= n && next * dt <= t1) {
      stepper.calc_state(next * dt, x);
      record(next * dt, x);
      ++next;
    }
  }
  return tr;
}

enum class SaturationKind { saturates, escapes, stable };

struct Saturation {
  SaturationKind kind = SaturationKind::stable;
  double amplitude = 0;  // saturates: sqrt(-Re lambda / Re A)
  double time = 0;       // escapes: first passage to |phi| = 1
};

// Re A < 0 saturates at the radial fixed point; Re A > 0 escapes, with the
// first-passage time to |phi| = 1 from the integrated trajectory; Re A = 0
// escapes in linear time log(1/|phi0|)/Re lambda.
inline Saturation classify_saturation(const LandauModel& m, const LandauOptions& o = {}) {
  const double lr = m.lambda.real(), ar = m.A.real();
  if (!(lr > 0)) return {SaturationKind::stable, 0.0, 0.0};
  if (ar < 0) return {SaturationKind::saturates, std::sqrt(-lr / ar), 0.0};
  if (std::abs(m.phi0) >= 1) return {SaturationKind::escapes, 0.0, 0.0};
  const double linear = std::log(1 / std::abs(m.phi0)) / lr;
  if (ar == 0) return {SaturationKind::escapes, 0.0, linear};
  LandauOptions oo = o;
  oo.blowup = 1.0;
  const double dt = 0.05 / std::abs(m.lambda);
  const auto tr = integrate_landau(m, 2 * linear + 10 * dt, dt, oo);
  if (!tr.blow_up) throw IntegrationFailure("classify_saturation: no escape within twice the linear time");
  return {SaturationKind::escapes, 0.0, tr.t.back()};
}

struct InstabilityTime {
  double T = 0;
  double ratio = 0;     // T nu^{1/2} / log(1/nu)
  double residual = 0;  // of the log-form defining equation
};

// T solves nu^N e^{nu^{1/2} Re lambda~ T} / sqrt(nu^{1/2} T) = nu^{1/4+theta}.
// With tau = nu^{1/2} T and z = log tau this is R e^z - z/2 = K,
// K = (N - 1/4 - theta) log(1/nu); the relevant root is the larger one.
inline InstabilityTime instability_time(double nu, double N, double theta, double re_lambda_tilde) {
  if (!(nu > 0 && nu < 1)) throw DomainError("instability_time: nu must lie in (0, 1)");
  if (!(N > 0.25 + theta)) throw DomainError("instability_time: need N > 1/4 + theta");
  if (!(re_lambda_tilde > 0)) throw DomainError("instability_time: Re lambda~ must be positive");
  const double R = re_lambda_tilde, K = (N - 0.25 - theta) * std::log(1 / nu);
  auto g = [&](double z) { return R * std::exp(z) - 0.5 * z - K; };
  // g is convex in z with its minimum at tau = 1/(2R).
  const double zmin = -std::log(2 * R);
  if (g(zmin) > 0) throw Infeasible("instability_time: growth never reaches the target amplitude");
  double z = std::max(std::log(std::max(K, 1e-300) / R), zmin + 1);
  for (int it = 0; it < 100; ++it) {
    const double dz = g(z) / (R * std::exp(z) - 0.5);
    z -= dz;
    if (z <= zmin) z = zmin + 1e-3;
    if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  InstabilityTime r;
  const double tau = std::exp(z);
  r.T = tau / std::sqrt(nu);
  r.ratio = tau / std::log(1 / nu);
  r.residual = std::abs(g(z)) / std::max(1.0, K);
  return r;
}

// (e^{lambda t} - e^{eps t}) / (lambda - eps), switching to the series
// e^{eps t} sum_{n>=1} d^{n-1} t^n / n! when |d| t <= 1e-3, d = lambda - eps.
inline cplx resonant_kernel(cplx lambda, cplx eps, double t) {
  if (!(t >= 0)) throw DomainError("resonant_kernel: t must be nonnegative");
  const cplx d = lambda - eps;
  if (std::abs(d) * t > 1e-3) return (std::exp(lambda * t) - std::exp(eps * t)) / d;
  cplx term = t, sum = 0;
  for (int n = 1; n < 60; ++n) {
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    term *= d * t / double(n + 1);
  }
  return std::exp(eps * t) * sum;
}

}  // namespace shearstab
