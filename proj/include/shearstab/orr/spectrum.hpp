#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"
#include "../profile.hpp"
#include "dispersion.hpp"

namespace shearstab {

struct SpectralPoint {
  double alpha = 0, nu = 0;
  cplx c;
  double residual = 0;

  cplx lambda() const { return -I * alpha * c; }
  double alpha_tilde() const { return alpha / std::pow(nu, 0.25); }
  cplx lambda_tilde() const { return lambda() / std::sqrt(nu); }
  cplx c_tilde() const { return c / std::pow(nu, 0.25); }
};

struct EigenSearchOptions {
  DispersionOptions dispersion;
  double disk_radius = 0.0;  // 0: 0.5 |c_guess| + 0.02 |U+|
  int max_iter = 40;
  double accept_residual = 1e-9;
};

struct EigenDiagnostics {
  std::string reason;
  MullerResult search;
};

// Muller iteration on D(c) / D(c_guess) inside a disk around the guess.
inline std::optional<SpectralPoint> find_eigenvalue(const ShearProfile& p, double alpha, double nu, cplx c_guess,
                                                    const EigenSearchOptions& o = {}, EigenDiagnostics* diag = nullptr) {
  if (!(std::abs(c_guess) < std::abs(p.u_plus()))) throw DomainError("find_eigenvalue needs |c_guess| < |U+|");
  DispersionOptions dopt = o.dispersion;
  if (dopt.refine_at < 0) dopt.refine_at = detail::real_critical_point(p, c_guess.real(), p.far_field(1e-16));
  const cplx lref = os_dispersion(p, alpha, c_guess, nu, dopt).log();
  auto f = [&](cplx c) {
    const auto d = os_dispersion(p, alpha, c, nu, dopt);
    return d.mantissa * std::exp(d.log_scale - lref);
  };
  const double radius = o.disk_radius > 0 ? o.disk_radius : 0.5 * std::abs(c_guess) + 0.02 * std::abs(p.u_plus());
  auto guard = [&](cplx c) { return std::abs(c - c_guess) < radius && std::abs(c) < std::abs(p.u_plus()); };
  const cplx d = 0.01 * std::abs(c_guess) + 1e-6;
  MullerOptions mo;
  mo.max_iter = o.max_iter;
  // The dispersion function is accurate to roughly 1e-13 relative, which
  // pins c to about 1e-11; asking for more makes Muller wander in noise.
  mo.step_tol = 1e-11;
  mo.stagnation_tol = 1e-7;
  mo.scale = std::abs(c_guess);
  MullerResult r;
  try {
    r = muller(f, c_guess - d, c_guess + I * d, c_guess, mo, guard);
  } catch (const Error& e) {
    if (diag) diag->reason = e.what();
    return std::nullopt;
  }
  if (diag) diag->search = r;
  if (r.aborted) {
    if (diag) diag->reason = "iterate left the search disk";
    return std::nullopt;
  }
  const auto disp = os_dispersion(p, alpha, r.root, nu, dopt);
  if (!r.converged || !(disp.residual < o.accept_residual)) {
    if (diag) diag->reason = "no convergence, residual " + std::to_string(disp.residual);
    return std::nullopt;
  }
  return SpectralPoint{alpha, nu, r.root, disp.residual};
}

// Follows one eigenvalue branch in alpha with a secant predictor in log alpha
// and step halving when the corrector lands far from the prediction.
class BranchTracker {
 public:
  BranchTracker(const ShearProfile& p, double nu, const EigenSearchOptions& o = {}) : p_(p), nu_(nu), o_(o) {}

  const std::vector<SpectralPoint>& points() const { return pts_; }

  void seed(const SpectralPoint& s) { pts_ = {s}; }

  // Step to alpha_new from the last point; returns nullopt when the branch
  // cannot be followed even with a step of min_step in log alpha.
  std::optional<SpectralPoint> advance(double alpha_new, double min_step = 1e-4) {
    double la_target = std::log(alpha_new);
    std::optional<SpectralPoint> last;
    while (true) {
      const double la0 = std::log(pts_.back().alpha);
      double la = la_target;
      for (;;) {
        const auto sp = correct(la);
        if (sp) {
          pts_.push_back(*sp);
          break;
        }
        const double half = 0.5 * (la - la0);
        if (std::abs(half) < min_step) return std::nullopt;
        la = la0 + half;
      }
      if (std::abs(std::log(pts_.back().alpha) - la_target) < 1e-14) return pts_.back();
    }
  }

  cplx predict(double la) const {
    const size_t n = pts_.size();
    if (n == 1) return pts_[0].c;
    const auto& a = pts_[n - 2];
    const auto& b = pts_[n - 1];
    const double la_a = std::log(a.alpha), la_b = std::log(b.alpha);
    if (std::abs(la_b - la_a) < 1e-15) return b.c;
    return b.c + (b.c - a.c) * ((la - la_b) / (la_b - la_a));
  }

 private:
  std::optional<SpectralPoint> correct(double la) {
    const cplx pred = predict(la);
    const double alpha = std::exp(la);
    const double step = std::abs(la - std::log(pts_.back().alpha));
    EigenSearchOptions o = o_;
    o.disk_radius = 0.25 * std::abs(pred);
    if (!(std::abs(pred) < std::abs(p_.u_plus()))) return std::nullopt;
    const auto sp = find_eigenvalue(p_, alpha, nu_, pred, o);
    if (!sp) return std::nullopt;
    // Branch-jump guard: the correction must be small next to the change
    // along the branch so far.
    const cplx prev = pts_.back().c;
    const double tol = std::max(0.3 * std::abs(pred - prev), 2e-3 * std::abs(prev)) + 0.05 * step * std::abs(prev);
    if (std::abs(sp->c - pred) > tol) return std::nullopt;
    return sp;
  }

  ShearProfile p_;
  double nu_;
  EigenSearchOptions o_;
  std::vector<SpectralPoint> pts_;
};

}  // namespace shearstab
