#pragma once

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "orr/modes.hpp"
#include "profile.hpp"
#include "rayleigh.hpp"

namespace shearstab {

// Boundary-layer terms are P(Y) e^{-mu Y} with P a polynomial, Y = y / nu^{1/2}.
using Poly = std::vector<cplx>;

namespace detail {

inline Poly poly_add(Poly a, const Poly& b, cplx s = 1.0) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
  return a;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Poly poly_deriv(const Poly& a) {
  Poly r(a.size() > 1 ? a.size() - 1 : 0);
  for (size_t i = 1; i < a.size(); ++i) r[i - 1] = double(i) * a[i];
  return r;
}

// d/dY (P e^{-mu Y}) = (P' - mu P) e^{-mu Y}.
inline Poly exp_deriv(const Poly& p, cplx mu) { return poly_add(poly_deriv(p), p, -mu); }

inline cplx poly_eval(const Poly& p, cplx y) {
  cplx s = 0;
  for (size_t i = p.size(); i-- > 0;) s = s * y + p[i];
  return s;
}

// P with P(0) = 0 and (d^4 - mu^2 d^2)(P e^{-mu Y}) = Q e^{-mu Y}, i.e.
// R''' - 4 mu R'' + 5 mu^2 R' - 2 mu^3 R = Q for R = P', by back substitution.
inline Poly bl_particular(const Poly& q, cplx mu) {
  const int d = int(q.size());
  if (d == 0) return {};
  std::vector<cplx> r(d + 3, 0.0);
  const cplx m2 = mu * mu, m3 = m2 * mu;
  for (int j = d - 1; j >= 0; --j) {
    const double j1 = j + 1, j2 = (j + 1) * (j + 2), j3 = (j + 1.0) * (j + 2) * (j + 3);
    r[j] = (q[j] - 5.0 * m2 * j1 * r[j + 1] + 4.0 * mu * j2 * r[j + 2] - j3 * r[j + 3]) / (-2.0 * m3);
  }
  Poly p(d + 1, 0.0);
  for (int j = 0; j < d; ++j) p[j + 1] = r[j] / double(j + 1);
  return p;
}

// Taylor coefficients U^{(k)}(0)/k!, k = 0..K: the first three from the
// profile's derivatives, higher ones from a Cauchy integral on a circle in
// the complex y-plane.
inline std::vector<double> wall_taylor(const ShearProfile& p, int K) {
  const auto v = p(0.0);
  std::vector<double> u{v.u, v.du, 0.5 * v.d2u};
  if (K <= 2) return {u.begin(), u.begin() + K + 1};
  const double k = std::isfinite(p.decay_rate()) ? p.decay_rate() : 1.0;
  const double r = std::min(0.5, 0.5 / k);
  const int M = 128;
  std::vector<cplx> vals(M);
  for (int m = 0; m < M; ++m) vals[m] = eval_profile(p, std::polar(r, 2 * M_PI * m / M)).u;
  for (int j = 3; j <= K; ++j) {
    cplx s = 0;
    for (int m = 0; m < M; ++m) s += vals[m] * std::polar(1.0, -2 * M_PI * j * m / M);
    u.push_back((s / double(M)).real() / std::pow(r, j));
  }
  return u;
}

// Derivatives 0..m at y of grid data, from a 10-point stencil around y.
inline std::vector<cplx> local_derivatives(const Grid& g, const std::vector<cplx>& f, double y, int m) {
  const int n = g.size(), w = std::min(10, n);
  const int j = int(std::upper_bound(g.y.begin(), g.y.end(), y) - g.y.begin());
  const int s0 = std::clamp(j - w / 2, 0, n - w);
  const std::vector<double> xs(g.y.begin() + s0, g.y.begin() + s0 + w);
  const auto wt = fornberg_weights(y, xs, m);
  std::vector<cplx> out(m + 1, 0.0);
  for (int k = 0; k <= m; ++k)
    for (int i = 0; i < w; ++i) out[k] += wt[k][i] * f[s0 + i];
  return out;
}

}  // namespace detail

// Interior orders live on a smooth grid (wall spacing interior_spacing);
// layer terms are sampled on a grid resolving nu^{1/2}/|mu|.
struct ExpansionOptions {
  int orders = 2;
  int points = 1500;
  double interior_spacing = 0.01;
  int layer_points = 2000;
};

// phi_Orr = sum_n nu^{n/2} (phi_n^int(y) + P_n(Y) e^{-mu Y}) + nu^{(N+1)/2} gamma_N Y e^{-mu Y},
// c_Orr = sum_n nu^{n/2} c_n, with mu = (-i alpha c_0)^{1/2}, Re mu > 0. The
// last term closes the wall slope left by the top interior order; it is the
// shape of the next layer's particular part and does not change the order of
// the residual.
struct ViscousModeExpansion {
  double alpha = 0, nu = 0;
  cplx mu, c_rayleigh;
  Grid grid;        // interior grid
  Grid layer_grid;  // resolves the wall layer
  std::vector<std::vector<cplx>> interior;  // phi_n^int on grid
  std::vector<Poly> layer;                  // P_n, P_0 empty
  std::vector<cplx> c;                      // c_n
  std::vector<cplx> wall_slope;             // d/dy phi_n^int at y = 0

  int orders() const { return int(c.size()) - 1; }

  cplx c_orr(int N) const {
    cplx s = 0;
    for (int n = 0; n <= N; ++n) s += std::pow(nu, 0.5 * n) * c[n];
    return s;
  }

  cplx closure(int N) const { return N >= 1 ? -wall_slope[N] : cplx(0); }

  // Interior part sum_{n<=N} nu^{n/2} phi_n^int at y, derivatives 0..m.
  std::vector<cplx> interior_part(int N, double y, int m = 0) const {
    std::vector<cplx> out(m + 1, 0.0);
    for (int n = 0; n <= N; ++n) {
      const auto v = detail::local_derivatives(grid, interior[n], y, m);
      for (int k = 0; k <= m; ++k) out[k] += std::pow(nu, 0.5 * n) * v[k];
    }
    return out;
  }

  // Layer part, including the closure term, at y.
  cplx layer_part(int N, double y) const {
    const double s = std::sqrt(nu), Y = y / s;
    const cplx e = std::exp(-mu * Y);
    cplx v = 0;
    for (int n = 1; n <= N; ++n) v += std::pow(s, n) * detail::poly_eval(layer[n], Y) * e;
    return v + std::pow(s, N + 1) * closure(N) * Y * e;
  }

  void check_order(int N) const {
    if (N < 0 || N > orders()) throw DomainError("viscous expansion: order outside the expansion");
  }

  // phi_Orr on the layer grid.
  std::vector<cplx> assemble(int N) const {
    check_order(N);
    std::vector<cplx> out(layer_grid.size());
    for (int i = 0; i < layer_grid.size(); ++i)
      out[i] = interior_part(N, layer_grid.y[i])[0] + layer_part(N, layer_grid.y[i]);
    return out;
  }

  // phi_Orr(0) and d/dy phi_Orr(0) from the exact layer forms.
  std::pair<cplx, cplx> wall_values(int N) const {
    check_order(N);
    const double s = std::sqrt(nu);
    cplx v = 0, d = 0;
    for (int n = 0; n <= N; ++n) {
      const cplx p0 = layer[n].empty() ? cplx(0) : layer[n][0];
      const cplx p1 = layer[n].size() > 1 ? layer[n][1] : cplx(0);
      v += std::pow(s, n) * (interior[n][0] + p0);
      d += std::pow(s, n) * wall_slope[n] + std::pow(s, n - 1) * (p1 - mu * p0);
    }
    d += std::pow(s, N) * closure(N);
    return {v, d};
  }
};

namespace detail {

struct Bordered {
  Eigen::SparseLU<SpMatC> lu;
  bool ok = false;
};

}  // namespace detail

// Rayleigh-to-viscous expansion of an unstable Rayleigh mode. Layer order m
// solves (d^4 - mu^2 d^2) Phi_m = i alpha [sum_{j>=1} a_j Phi''_{m-j}
// - alpha^2 sum a_j Phi_{m-2-j} - sum w_k Y^k Phi_{m-2-k} + (2 alpha^2/(i alpha)) Phi''_{m-2}
// - (alpha^4/(i alpha)) Phi_{m-4}] (the last term first enters at m = 5) with a_0 = -c_0, a_j = u_j Y^j - c_j and U'' = sum w_k (nu^{1/2} Y)^k;
// its free amplitude cancels the slope of interior order m-1. Interior order m
// solves R_{c0} phi_m - c_m L phi_0 = sum_{k<m} c_k L phi_{m-k} + (1/(i alpha)) L^2 phi_{m-2}
// with phi_m(0) = -Phi_m(0), decay at infinity and no component along phi_0.
inline ViscousModeExpansion viscous_mode_from_rayleigh(const ShearProfile& p, const RayleighMode& ray, double nu,
                                                       const ExpansionOptions& o = {}) {
  if (!(ray.c.imag() > 0)) throw DomainError("viscous_mode_from_rayleigh: Rayleigh mode must be unstable");
  if (!(nu > 0)) throw DomainError("viscous_mode_from_rayleigh: nu must be positive");
  if (o.orders < 0 || o.orders > 4) throw DomainError("viscous_mode_from_rayleigh: orders must lie in 0..4");
  if (std::abs(p(0.0).u) > 1e-12) throw DomainError("viscous_mode_from_rayleigh: needs U(0) = 0");
  const double alpha = ray.alpha, s = std::sqrt(nu), a2 = alpha * alpha;
  const cplx ia = I * alpha;
  ViscousModeExpansion e;
  e.alpha = alpha;
  e.nu = nu;
  e.c_rayleigh = ray.c;
  auto mu_of = [&](cplx c0) {
    cplx m = std::sqrt(-ia * c0);
    return m.real() > 0 ? m : -m;
  };
  e.mu = mu_of(ray.c);
  if (!(s / std::abs(e.mu) < 0.1)) throw DomainError("viscous_mode_from_rayleigh: nu^{1/2}/|mu| is not small");
  const double k = std::isfinite(p.decay_rate()) ? p.decay_rate() : 1.0;
  const double y_max = std::max(40.0 / k, 20.0 / alpha);
  e.grid = stretched_grid(y_max, o.interior_spacing, o.points);
  e.layer_grid = stretched_grid(y_max, s / (40 * std::abs(e.mu)), o.layer_points);
  const Grid& g = e.grid;
  const int n = g.size();
  const auto d = fd_operators(g);
  std::vector<cplx> u(n), d2u(n), one(n, 1.0);
  for (int i = 0; i < n; ++i) {
    const auto v = p(g.y[i]);
    u[i] = v.u;
    d2u[i] = v.d2u;
  }
  const SpMatC D1 = d.d1.cast<cplx>(), D2 = d.d2.cast<cplx>(), D4 = d.d4.cast<cplx>();
  const SpMatC Id = detail::sp_diag(one);
  const SpMatC L = D2 - a2 * Id, L2 = D4 - 2 * a2 * D2 + (a2 * a2) * Id;
  const SpMatC A = detail::sp_diag(u) * L - detail::sp_diag(d2u);
  auto row_of = [&](const SpMatC& S, int r) {
    std::vector<std::pair<int, cplx>> out;
    for (int kk = 0; kk < S.outerSize(); ++kk)
      for (SpMatC::InnerIterator it(S, kk); it; ++it)
        if (it.row() == r) out.emplace_back(it.col(), it.value());
    return out;
  };
  const auto far = row_of(D1, n - 1);
  // Bordered matrix [rows of (A - c L) with wall and far rows, -col; e_ref^T, 0].
  auto bordered = [&](cplx c, const VecC& col, int iref) {
    std::vector<Eigen::Triplet<cplx>> t;
    const SpMatC R = A - c * L;
    for (int kk = 0; kk < R.outerSize(); ++kk)
      for (SpMatC::InnerIterator it(R, kk); it; ++it)
        if (it.row() > 0 && it.row() < n - 1) t.emplace_back(it.row(), it.col(), it.value());
    t.emplace_back(0, 0, 1.0);
    for (auto [j, w] : far) t.emplace_back(n - 1, j, w);
    t.emplace_back(n - 1, n - 1, alpha);
    for (int i = 1; i < n - 1; ++i) t.emplace_back(i, n, -col(i));
    t.emplace_back(n, iref, 1.0);
    SpMatC M(n + 1, n + 1);
    M.setFromTriplets(t.begin(), t.end());
    auto b = std::make_unique<detail::Bordered>();
    b->lu.compute(M);
    b->ok = b->lu.info() == Eigen::Success;
    return b;
  };
  auto solve = [&](detail::Bordered& b, const VecC& rhs, int order) {
    VecC x = b.lu.solve(rhs);
    if (b.lu.info() != Eigen::Success || !x.allFinite())
      throw ExpansionTruncation("viscous_mode_from_rayleigh: inhomogeneous Rayleigh solve failed at order " +
                                std::to_string(order));
    return x;
  };

  // Order 0: the Rayleigh mode on this grid, refined by Newton on the
  // bordered system so that it is an exact kernel vector of the discrete operator.
  VecC phi(n);
  for (int i = 0; i < n; ++i) {
    const double y = g.y[i];
    const auto it = std::upper_bound(ray.y.begin(), ray.y.end(), y);
    if (it == ray.y.end()) {
      phi(i) = ray.psi.back() * std::exp(-alpha * (y - ray.y.back()));
      continue;
    }
    const size_t j = std::max<size_t>(1, it - ray.y.begin());
    const double t = (y - ray.y[j - 1]) / (ray.y[j] - ray.y[j - 1]);
    phi(i) = (1 - t) * ray.psi[j - 1] + t * ray.psi[j];
  }
  Eigen::Index iref;
  phi.cwiseAbs().maxCoeff(&iref);
  phi /= phi(iref);
  cplx c0 = ray.c;
  for (int it = 0;; ++it) {
    if (it == 20) throw ExpansionTruncation("viscous_mode_from_rayleigh: order-0 refinement did not converge");
    const VecC Lphi = L * phi;
    auto b = bordered(c0, Lphi, int(iref));
    if (!b->ok) throw ExpansionTruncation("viscous_mode_from_rayleigh: singular order-0 system");
    VecC r(n + 1);
    r.head(n) = -(A * phi - c0 * Lphi);
    r(0) = -phi(0);
    r(n - 1) = 0;
    for (auto [j, w] : far) r(n - 1) -= w * phi(j);
    r(n - 1) -= alpha * phi(n - 1);
    r(n) = 1.0 - phi(iref);
    const VecC x = solve(*b, r, 0);
    phi += x.head(n);
    c0 += x(n);
    // Rounding in the wall rows leaves a floor near 1e-12.
    if (std::abs(x(n)) < 1e-10 * std::abs(c0) && x.head(n).cwiseAbs().maxCoeff() < 1e-9) break;
  }
  {
    Eigen::Index im;
    const double mx = phi.cwiseAbs().maxCoeff(&im);
    phi *= std::abs(phi(im)) / phi(im) / mx;  // max |phi| = 1, real positive there
    iref = im;
  }
  e.mu = mu_of(c0);
  const cplx mu = e.mu;
  e.c = {c0};
  e.interior = {std::vector<cplx>(phi.data(), phi.data() + n)};
  e.layer = {Poly{}};
  e.wall_slope = {(D1 * phi)(0)};
  const VecC Lphi0 = L * phi;
  const auto ut = detail::wall_taylor(p, std::max(2, o.orders - 1));
  std::vector<VecC> phis{phi};
  auto b = bordered(c0, Lphi0, int(iref));
  if (!b->ok) throw ExpansionTruncation("viscous_mode_from_rayleigh: singular bordered system");
  for (int m = 1; m <= o.orders; ++m) {
    // Layer order m.
    auto D2p = [&](const Poly& P) { return detail::exp_deriv(detail::exp_deriv(P, mu), mu); };
    auto a_of = [&](int j) {
      Poly a(j + 1, 0.0);
      a[0] = -e.c[j];
      a[j] += ut[j];
      return a;
    };
    auto Phi = [&](int idx) { return idx >= 1 ? e.layer[idx] : Poly{}; };
    Poly q;
    for (int j = 1; j <= m - 1; ++j) q = detail::poly_add(q, detail::poly_mul(a_of(j), D2p(Phi(m - j))));
    for (int j = 0; j <= m - 3; ++j) q = detail::poly_add(q, detail::poly_mul(a_of(j), Phi(m - 2 - j)), -a2);
    for (int kk = 0; kk <= m - 3; ++kk) {
      Poly w(kk + 1, 0.0);
      w[kk] = double((kk + 2) * (kk + 1)) * ut[kk + 2];
      q = detail::poly_add(q, detail::poly_mul(w, Phi(m - 2 - kk)), -1.0);
    }
    if (m >= 3) q = detail::poly_add(q, D2p(Phi(m - 2)), 2 * a2 / ia);
    for (auto& v : q) v *= ia;
    Poly P = detail::bl_particular(q, mu);
    if (P.empty()) P = {0.0};
    const cplx p1 = P.size() > 1 ? P[1] : cplx(0);
    P[0] = (p1 + e.wall_slope[m - 1]) / mu;
    e.layer.push_back(P);

    // Interior order m.
    VecC rhs = VecC::Zero(n + 1);
    VecC src = VecC::Zero(n);
    for (int kk = 1; kk <= m - 1; ++kk) src += e.c[kk] * (L * phis[m - kk]);
    if (m >= 2) src += (L2 * phis[m - 2]) / ia;
    rhs.head(n) = src;
    rhs(0) = -P[0];
    rhs(n - 1) = 0;
    rhs(n) = 0;
    const VecC x = solve(*b, rhs, m);
    phis.push_back(x.head(n));
    e.c.push_back(x(n));
    e.interior.emplace_back(x.data(), x.data() + n);
    e.wall_slope.push_back((D1 * phis.back())(0));
  }
  return e;
}

// Sup of the Orr-Sommerfeld residual of the order-N assembly over the interior
// rows of the layer grid, relative to max |phi_Orr|. The layer part goes
// through the discrete operator on the layer grid; the interior part through
// the same operator with 10-point derivatives taken on the interior grid.
inline double expansion_residual(const ShearProfile& p, const ViscousModeExpansion& e, int N) {
  e.check_order(N);
  const Grid& g = e.layer_grid;
  const int n = g.size();
  const auto d = fd_operators(g);
  const auto P = detail::orr_pencil(p, e.alpha, e.nu, g, d, false);
  const cplx c = e.c_orr(N), visc = e.nu / (I * e.alpha);
  const double a2 = e.alpha * e.alpha;
  VecC bl(n), full(n);
  for (int i = 0; i < n; ++i) bl(i) = e.layer_part(N, g.y[i]);
  const VecC r = P.apply(c, bl);
  double rmax = 0, fmax = 0;
  for (int i = 0; i < n; ++i) {
    const auto f = e.interior_part(N, g.y[i], 4);
    fmax = std::max(fmax, std::abs(f[0] + bl(i)));
    if (i < 2 || i >= n - 2) continue;
    const auto v = p(g.y[i]);
    const cplx lap = f[2] - a2 * f[0];
    const cplx ri = (v.u - c) * lap - v.d2u * f[0] - visc * (f[4] - 2 * a2 * f[2] + a2 * a2 * f[0]);
    rmax = std::max(rmax, std::abs(ri + r(i)));
  }
  return rmax / fmax;
}

}  // namespace shearstab
