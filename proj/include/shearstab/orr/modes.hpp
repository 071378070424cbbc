#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"
#include "../profile.hpp"
#include "grid.hpp"
#include "spectrum.hpp"

namespace shearstab {

using SpMatC = Eigen::SparseMatrix<cplx>;
using VecC = Eigen::VectorXcd;

struct ModeOptions {
  GridOptions grid;
  int max_iter = 30;
};

// Stream function and vorticity omega = -(d^2 - alpha^2) psi on a grid.
// For an adjoint mode psi solves the Hilbert-space adjoint equation
// D((U - conj c) psi) - U'' psi + (nu / (i alpha)) D^2 psi = 0.
struct Eigenmode {
  Grid grid;
  double alpha = 0, nu = 0;
  cplx c;           // the spectral parameter the field belongs to
  cplx c_discrete;  // eigenvalue of the discrete operator (modes only)
  std::vector<cplx> psi, omega;
  // (outer, middle, critical): amplitude at y = 0 and decay rate of the
  // exponential fits to |psi| on the 1/alpha tail, |omega| on the O(1) shear
  // and |omega| in the wall layer.
  std::array<double, 3> scale_amplitudes{}, scale_rates{};
  double outer_vorticity_ratio = 0;  // max |omega| / max |psi| on the outer window
  double residual = 0;               // sup of the discrete residual over row magnitudes
  bool adjoint = false;
};

namespace detail {

inline SpMatC sp_diag(const std::vector<cplx>& d) {
  SpMatC m(d.size(), d.size());
  std::vector<Eigen::Triplet<cplx>> t;
  for (size_t i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Pencil A - c M of the Orr-Sommerfeld operator (or its transpose) with rows
// 0, 1 replaced by psi(0) = psi'(0) = 0 and the last two by the decay
// conditions psi' + |alpha| psi = 0, psi'' - alpha^2 psi = 0 at y_max.
// Rows are scaled to unit max-norm in A (stored in `scale`): the viscous rows
// are ~nu h^{-4} / alpha larger than the boundary rows, and unscaled LU
// rounding would land on the boundary conditions.
struct OrrPencil {
  SpMatC a, m;
  Eigen::VectorXd scale;

  // Unscaled (A - c M) x.
  VecC apply(cplx c, const VecC& x) const { return ((a - c * m) * x).cwiseQuotient(scale.cast<cplx>()); }
};

inline OrrPencil orr_pencil(const ShearProfile& p, double alpha, double nu, const Grid& g, const FdOperators& d,
                            bool transposed) {
  const int n = g.size();
  std::vector<cplx> u(n), du(n), d2u(n), id(n, 1.0);
  for (int i = 0; i < n; ++i) {
    const auto v = p(g.y[i]);
    u[i] = v.u;
    du[i] = v.du;
    d2u[i] = v.d2u;
  }
  const double a2 = alpha * alpha;
  const SpMatC D1 = d.d1.cast<cplx>(), D2 = d.d2.cast<cplx>(), D4 = d.d4.cast<cplx>();
  const SpMatC Id = sp_diag(id);
  const SpMatC lap = D2 - a2 * Id;
  const SpMatC bilap = D4 - 2 * a2 * D2 + (a2 * a2) * Id;
  const cplx visc = nu / (I * alpha);
  SpMatC A = sp_diag(u) * lap - visc * bilap;
  A += transposed ? SpMatC(2.0 * sp_diag(du) * D1) : SpMatC(-sp_diag(d2u));
  SpMatC M = lap;
  std::vector<Eigen::Triplet<cplx>> ta, tm;
  auto keep = [&](const SpMatC& s, std::vector<Eigen::Triplet<cplx>>& t) {
    for (int k = 0; k < s.outerSize(); ++k)
      for (SpMatC::InnerIterator it(s, k); it; ++it)
        if (it.row() >= 2 && it.row() < n - 2) t.emplace_back(it.row(), it.col(), it.value());
  };
  keep(A, ta);
  keep(M, tm);
  ta.emplace_back(0, 0, 1.0);
  auto row_of = [&](const SpMat& s, int r) {
    std::vector<std::pair<int, double>> out;
    for (int k = 0; k < s.outerSize(); ++k)
      for (SpMat::InnerIterator it(s, k); it; ++it)
        if (it.row() == r) out.emplace_back(it.col(), it.value());
    return out;
  };
  for (auto [j, w] : row_of(d.d1, 0)) ta.emplace_back(1, j, w);
  for (auto [j, w] : row_of(d.d1, n - 1)) ta.emplace_back(n - 2, j, w);
  ta.emplace_back(n - 2, n - 1, std::abs(alpha));
  for (auto [j, w] : row_of(d.d2, n - 1)) ta.emplace_back(n - 1, j, w);
  ta.emplace_back(n - 1, n - 1, -a2);
  Eigen::VectorXd rmax = Eigen::VectorXd::Zero(n);
  for (const auto& t : ta) rmax(t.row()) = std::max(rmax(t.row()), std::abs(t.value()));
  const Eigen::VectorXd sc = rmax.cwiseInverse();
  for (auto& t : ta) t = Eigen::Triplet<cplx>(t.row(), t.col(), t.value() * sc(t.row()));
  for (auto& t : tm) t = Eigen::Triplet<cplx>(t.row(), t.col(), t.value() * sc(t.row()));
  OrrPencil out{SpMatC(n, n), SpMatC(n, n), sc};
  out.a.setFromTriplets(ta.begin(), ta.end());
  out.m.setFromTriplets(tm.begin(), tm.end());
  return out;
}

struct PencilEigen {
  cplx c, c_next;  // nearest and second-nearest Ritz values to the shift
  VecC x;
};

// Block inverse iteration with two vectors on (A - shift M)^{-1} M; the
// second Ritz value detects a numerically double eigenvalue.
inline PencilEigen inverse_iteration(const OrrPencil& P, cplx shift, int max_iter) {
  const int n = static_cast<int>(P.a.rows());
  Eigen::SparseLU<SpMatC> lu;
  lu.compute(SpMatC(P.a - shift * P.m));
  if (lu.info() != Eigen::Success) throw NearSingularSolve("inverse_iteration: factorization failed at the shift");
  std::mt19937 rng(20240611);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd X(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) X(i, k) = cplx(nd(rng), nd(rng));
  X = Eigen::HouseholderQR<Eigen::MatrixXcd>(X).householderQ() * Eigen::MatrixXcd::Identity(n, 2);
  PencilEigen out{shift, shift, VecC()};
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXcd Y(n, 2);
    for (int k = 0; k < 2; ++k) Y.col(k) = lu.solve(P.m * X.col(k));
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(X.adjoint() * Y);
    int big = std::abs(es.eigenvalues()(0)) >= std::abs(es.eigenvalues()(1)) ? 0 : 1;
    const cplx mu1 = es.eigenvalues()(big), mu2 = es.eigenvalues()(1 - big);
    if (!std::isfinite(std::abs(mu1)) || mu1 == 0.0) throw NearSingularSolve("inverse_iteration: no Ritz value");
    const cplx c1 = shift + 1.0 / mu1;
    out.c_next = mu2 == 0.0 ? cplx(INFINITY, 0) : shift + 1.0 / mu2;
    out.x = Y * es.eigenvectors().col(big);
    X = Eigen::HouseholderQR<Eigen::MatrixXcd>(Y).householderQ() * Eigen::MatrixXcd::Identity(n, 2);
    const bool done = it >= 2 && std::abs(c1 - out.c) < 1e-14 * std::abs(c1);
    out.c = c1;
    if (done) break;
  }
  // Rayleigh quotient of the final vector on the inverse operator.
  const VecC y = lu.solve(P.m * out.x);
  out.c = shift + out.x.squaredNorm() / out.x.dot(y);
  out.x = y / y.norm();
  return out;
}

// max_i |(L x - rhs)_i| / max_i (sum_j |L_ij x_j| + |rhs_i|).
inline double relative_residual(const SpMatC& L, const VecC& x, const VecC& rhs) {
  const VecC r = L * x - rhs;
  Eigen::VectorXd s = rhs.cwiseAbs();
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMatC::InnerIterator it(L, k); it; ++it) s(it.row()) += std::abs(it.value() * x(it.col()));
  return r.cwiseAbs().maxCoeff() / s.maxCoeff();
}

inline std::vector<cplx> to_std(const VecC& v) { return std::vector<cplx>(v.data(), v.data() + v.size()); }

inline std::vector<cplx> vorticity(const FdOperators& d, double alpha, const VecC& psi) {
  return to_std(-(d.d2.cast<cplx>() * psi - alpha * alpha * psi));
}

}  // namespace detail

namespace detail {

inline Eigenmode build_mode(const ShearProfile& p, double alpha, double nu, cplx c, bool transposed,
                            const ModeOptions& o) {
  Eigenmode m;
  m.grid = stretched_grid(alpha, nu, p.decay_rate(), o.grid);
  m.alpha = alpha;
  m.nu = nu;
  m.c = c;
  const FdOperators d = fd_operators(m.grid);
  const OrrPencil P = orr_pencil(p, alpha, nu, m.grid, d, transposed);
  const PencilEigen e = inverse_iteration(P, c, o.max_iter);
  if (std::abs(e.c_next - e.c) < 1e-6 * std::abs(e.c))
    throw DegenerateEigenvalue("two discrete eigenvalues within 1e-6 of " + std::to_string(std::abs(e.c)));
  m.c_discrete = e.c;
  m.residual = relative_residual(SpMatC(P.a - e.c * P.m), e.x, VecC::Zero(e.x.size()));
  Eigen::Index imax;
  e.x.cwiseAbs().maxCoeff(&imax);
  VecC psi = e.x / e.x(imax);
  if (transposed) {
    // The transposed field is the conjugate of the adjoint one.
    psi = psi.conjugate().eval();
  }
  m.psi = to_std(psi);
  m.omega = vorticity(d, alpha, psi);
  m.adjoint = transposed;
  return m;
}

// Least-squares line through (y, log|f|) for y in [lo, hi].
inline LineFit log_fit(const Grid& g, const std::vector<cplx>& f, double lo, double hi) {
  std::vector<double> x, v;
  for (int i = 0; i < g.size(); ++i)
    if (g.y[i] >= lo && g.y[i] <= hi && std::abs(f[i]) > 0) {
      x.push_back(g.y[i]);
      v.push_back(std::log(std::abs(f[i])));
    }
  if (x.size() < 3) throw DomainError("three-scale fit: window holds fewer than 3 nodes");
  return fit_line(x, v);
}

}  // namespace detail

// Exponential envelopes on the three windows of the unstable-mode structure:
// |psi| on the 1/alpha tail past the shear, |omega| on the O(1) shear, and
// |omega| inside the wall layer of width |gamma|^{-1}.
inline void fit_scales(Eigenmode& m, const ShearProfile& p) {
  const double k = std::isfinite(p.decay_rate()) && p.decay_rate() > 0 ? p.decay_rate() : 1.0;
  const double aa = std::abs(m.alpha), ym = m.grid.y_max();
  const double o0 = std::max(30.0 / k, 1.0 / aa), o1 = std::min(o0 + 8.0 / aa, 0.9 * ym);
  const double yc = detail::real_critical_point(p, m.c.real(), p.far_field(1e-16));
  const double gam = std::cbrt(aa * std::abs(p(yc).du) / m.nu);
  const std::array<std::pair<double, double>, 3> win{{{o0, o1}, {4.0 / k, 12.0 / k}, {1.0 / gam, 4.0 / gam}}};
  for (int s = 0; s < 3; ++s) {
    const auto f = detail::log_fit(m.grid, s == 0 ? m.psi : m.omega, win[s].first, win[s].second);
    m.scale_rates[s] = -f.slope;
    m.scale_amplitudes[s] = std::exp(f.intercept);
  }
  double wo = 0, po = 0;
  for (int i = 0; i < m.grid.size(); ++i)
    if (m.grid.y[i] >= o0 && m.grid.y[i] <= o1) {
      wo = std::max(wo, std::abs(m.omega[i]));
      po = std::max(po, std::abs(m.psi[i]));
    }
  m.outer_vorticity_ratio = wo / po;
}

// Unstable (or any isolated) mode at a converged spectral point, normalized to
// max |psi| = 1 with psi real and positive there.
inline Eigenmode eigenmode(const SpectralPoint& pt, const ShearProfile& p, const ModeOptions& o = {}) {
  if (!(pt.residual < 1e-9)) throw DomainError("eigenmode needs a converged spectral point (residual < 1e-9)");
  Eigenmode m = detail::build_mode(p, pt.alpha, pt.nu, pt.c, false, o);
  fit_scales(m, p);
  return m;
}

// Adjoint mode at the same point. Its eigenvalue is located independently
// from the compound-matrix dispersion of the transposed operator.
inline Eigenmode adjoint_eigenmode(const SpectralPoint& pt, const ShearProfile& p, const ModeOptions& o = {}) {
  if (!(pt.residual < 1e-9)) throw DomainError("adjoint_eigenmode needs a converged spectral point (residual < 1e-9)");
  EigenSearchOptions so;
  so.dispersion.transposed = true;
  so.disk_radius = 0.05 * std::abs(pt.c);
  EigenDiagnostics diag;
  const auto t = find_eigenvalue(p, pt.alpha, pt.nu, pt.c * (1.0 + 1e-3 * I), so, &diag);
  if (!t) throw RootNotFound("adjoint eigenvalue not found: " + diag.reason, diag.search.root);
  Eigenmode m = detail::build_mode(p, pt.alpha, pt.nu, t->c, true, o);
  fit_scales(m, p);
  return m;
}

// Pairing of two stream functions on the same grid through their velocities,
// the integral of psi_a' conj(psi_b') + alpha^2 psi_a conj(psi_b).
inline cplx mode_pairing(const Grid& g, double alpha, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  const int n = g.size();
  if (int(a.size()) != n || int(b.size()) != n) throw DomainError("mode_pairing: fields not on the grid");
  const FdOperators d = fd_operators(g);
  const auto q = quadrature_weights(g);
  const Eigen::Map<const VecC> va(a.data(), n), vb(b.data(), n);
  const VecC da = d.d1.cast<cplx>() * va, db = d.d1.cast<cplx>() * vb;
  cplx s = 0;
  for (int i = 0; i < n; ++i) s += q[i] * (da(i) * std::conj(db(i)) + alpha * alpha * va(i) * std::conj(vb(i)));
  return s;
}

inline double energy_norm(const Grid& g, double alpha, const std::vector<cplx>& a) {
  return std::sqrt(std::abs(mode_pairing(g, alpha, a, a)));
}

// |(a, b)| / (|a| |b|) in the energy norm.
inline double normalized_pairing(const Eigenmode& a, const Eigenmode& b) {
  return std::abs(mode_pairing(a.grid, a.alpha, a.psi, b.psi)) /
         (energy_norm(a.grid, a.alpha, a.psi) * energy_norm(b.grid, b.alpha, b.psi));
}

// Mode of the discrete operator whose eigenvalue is nearest to `shift`,
// without a compound-matrix root; c is the discrete eigenvalue.
inline Eigenmode nearest_mode(const ShearProfile& p, double alpha, double nu, cplx shift, bool adjoint,
                              const ModeOptions& o = {}) {
  Eigenmode m = detail::build_mode(p, alpha, nu, shift, adjoint, o);
  m.c = m.c_discrete;
  return m;
}

struct ResolventOptions {
  GridOptions grid;
  std::optional<cplx> eigenvalue;  // c(alpha, nu), if known, to refuse solves on top of it
};

// Solve Orr_{alpha,c,nu} psi = f with psi(0) = psi'(0) = 0 and decay at
// y_max. The result carries psi, omega and the relative residual.
inline Eigenmode resolvent_solve(const ShearProfile& p, double alpha, cplx c, double nu, const Grid& g,
                                 const std::vector<cplx>& f, const std::optional<cplx>& eigenvalue = std::nullopt) {
  if (eigenvalue && std::abs(c - *eigenvalue) <= 1e-10)
    throw NearSingularSolve("resolvent_solve: c is at the eigenvalue; split f with project_kernel_range first");
  const int n = g.size();
  if (int(f.size()) != n) throw DomainError("resolvent_solve: source not on the grid");
  const FdOperators d = fd_operators(g);
  const detail::OrrPencil P = detail::orr_pencil(p, alpha, nu, g, d, false);
  const SpMatC L = P.a - c * P.m;
  VecC rhs = Eigen::Map<const VecC>(f.data(), n).cwiseProduct(P.scale.cast<cplx>());
  rhs(0) = rhs(1) = rhs(n - 2) = rhs(n - 1) = 0.0;
  Eigen::SparseLU<SpMatC> lu;
  lu.compute(L);
  if (lu.info() != Eigen::Success) throw NearSingularSolve("resolvent_solve: singular operator at c");
  VecC psi = lu.solve(rhs);
  // Residual relative to the row magnitudes |L||psi| + |f|: near an
  // eigenvalue psi is large and rounding in L psi scales with it.
  double res = detail::relative_residual(L, psi, rhs);
  for (int it = 0; it < 3 && res > 1e-14; ++it) {
    psi += lu.solve(rhs - L * psi);
    res = detail::relative_residual(L, psi, rhs);
  }
  if (!(res < 1e-8)) throw NearSingularSolve("resolvent_solve: residual " + std::to_string(res) + " near an eigenvalue");
  Eigenmode m;
  m.grid = g;
  m.alpha = alpha;
  m.nu = nu;
  m.c = c;
  m.c_discrete = c;
  m.psi = detail::to_std(psi);
  m.omega = detail::vorticity(d, alpha, psi);
  m.residual = res;
  return m;
}

inline Eigenmode resolvent_solve(const ShearProfile& p, double alpha, cplx c, double nu,
                                 const std::function<cplx(double)>& f, const ResolventOptions& o = {}) {
  const Grid g = stretched_grid(alpha, nu, p.decay_rate(), o.grid);
  std::vector<cplx> fv(g.size());
  for (int i = 0; i < g.size(); ++i) fv[i] = f(g.y[i]);
  return resolvent_solve(p, alpha, c, nu, g, fv, o.eigenvalue);
}

// B1 v = [(v, adj) / (direct, adj)] direct and B2 v = v - B1 v for a stream
// function v on the modes' grid.
struct KernelRange {
  std::vector<cplx> kernel, range;
  cplx coefficient;
};

inline KernelRange project_kernel_range(const std::vector<cplx>& v, const Eigenmode& direct, const Eigenmode& adj) {
  if (direct.grid.size() != adj.grid.size() || int(v.size()) != direct.grid.size())
    throw DomainError("project_kernel_range: fields on different grids");
  const cplx den = mode_pairing(direct.grid, direct.alpha, direct.psi, adj.psi);
  const double scale = energy_norm(direct.grid, direct.alpha, direct.psi) * energy_norm(adj.grid, adj.alpha, adj.psi);
  if (!(std::abs(den) > 1e-10 * scale)) throw DegeneratePairing("project_kernel_range: direct/adjoint pairing vanishes");
  KernelRange out;
  out.coefficient = mode_pairing(direct.grid, direct.alpha, v, adj.psi) / den;
  out.kernel.resize(v.size());
  out.range.resize(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out.kernel[i] = out.coefficient * direct.psi[i];
    out.range[i] = v[i] - out.kernel[i];
  }
  return out;
}

// Pseudo-inverse at the eigenvalue: the solution of Orr psi = f - s M psi_NS
// with (psi, adj) = 0, from a system bordered by the kernel and the adjoint
// pairing. s removes the part of f outside the range.
inline Eigenmode pseudo_inverse(const ShearProfile& p, const Eigenmode& direct, const Eigenmode& adj,
                                const std::vector<cplx>& f) {
  const Grid& g = direct.grid;
  const int n = g.size();
  if (int(f.size()) != n || adj.grid.size() != n) throw DomainError("pseudo_inverse: fields on different grids");
  const double alpha = direct.alpha;
  const FdOperators d = fd_operators(g);
  const detail::OrrPencil P = detail::orr_pencil(p, alpha, direct.nu, g, d, false);
  const SpMatC L = P.a - direct.c_discrete * P.m;
  const Eigen::Map<const VecC> psi(direct.psi.data(), n), phi(adj.psi.data(), n);
  const VecC border = P.m * psi;
  const auto q = quadrature_weights(g);
  VecC w = VecC::Zero(n), dphi = d.d1.cast<cplx>() * phi;
  for (int i = 0; i < n; ++i) w(i) = q[i] * alpha * alpha * std::conj(phi(i));
  VecC qd(n);
  for (int i = 0; i < n; ++i) qd(i) = q[i] * std::conj(dphi(i));
  w += d.d1.cast<cplx>().transpose() * qd;
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMatC::InnerIterator it(L, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    if (border(i) != 0.0) t.emplace_back(i, n, border(i));
    if (w(i) != 0.0) t.emplace_back(n, i, w(i));
  }
  SpMatC B(n + 1, n + 1);
  B.setFromTriplets(t.begin(), t.end());
  VecC rhs = VecC::Zero(n + 1);
  for (int i = 2; i < n - 2; ++i) rhs(i) = f[i] * P.scale(i);
  Eigen::SparseLU<SpMatC> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) throw DegeneratePairing("pseudo_inverse: bordered system is singular");
  VecC x = lu.solve(rhs);
  x += lu.solve(rhs - B * x);
  Eigenmode m;
  m.grid = g;
  m.alpha = alpha;
  m.nu = direct.nu;
  m.c = direct.c;
  m.c_discrete = direct.c_discrete;
  const VecC sol = x.head(n);
  m.psi = detail::to_std(sol);
  m.omega = detail::vorticity(d, alpha, sol);
  m.residual = (B * x - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
  return m;
}

}  // namespace shearstab
