#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "orr/modes.hpp"
#include "profile.hpp"

namespace shearstab {

// Normalized bump e^{-1/(1-u^2)} on [-1, 1] with unit integral.
inline double bump(double u) {
  constexpr double kMass = 0.443993816168079437823;  // integral of e^{-1/(1-u^2)}
  return std::abs(u) < 1 ? std::exp(-1.0 / (1.0 - u * u)) / kMass : 0.0;
}

// Barycentric Lagrange interpolation through fixed nodes.
class Barycentric {
 public:
  Barycentric() = default;
  explicit Barycentric(std::vector<double> x) : x_(std::move(x)), w_(x_.size(), 1.0) {
    for (size_t k = 0; k < x_.size(); ++k)
      for (size_t j = 0; j < x_.size(); ++j)
        if (j != k) w_[k] /= x_[k] - x_[j];
  }

  // Weights l_k(t) with f(t) = sum_k l_k f_k.
  std::vector<double> weights(double t) const {
    std::vector<double> l(x_.size(), 0.0);
    for (size_t k = 0; k < x_.size(); ++k)
      if (t == x_[k]) {
        l[k] = 1.0;
        return l;
      }
    double s = 0;
    for (size_t k = 0; k < x_.size(); ++k) s += (l[k] = w_[k] / (t - x_[k]));
    for (double& v : l) v /= s;
    return l;
  }

  const std::vector<double>& nodes() const { return x_; }

 private:
  std::vector<double> x_, w_;
};

// Unstable modes psi~_alpha and rates lambda~(alpha) at Gauss-Legendre nodes
// alpha~ = alpha0~ + nu^beta u, all on one grid and normalized to 1 at the
// carrier's |psi| maximum so that the family is smooth in alpha.
struct ModeFamily {
  const ShearProfile* profile = nullptr;
  double nu = 0, alpha0 = 0, beta = 0.26;  // alpha0 rescaled
  SpectralPoint carrier;
  Grid grid;
  std::vector<double> u;                  // nodes in [-1, 1]
  std::vector<cplx> lambda;               // rescaled lambda~ at the nodes
  std::vector<std::vector<cplx>> psi;     // psi~ at the nodes
  Barycentric interp;

  double width() const { return std::pow(nu, beta); }
  double alpha_at(double uu) const { return alpha0 + width() * uu; }
  cplx lambda_at(double uu) const {
    const auto l = interp.weights(uu);
    cplx s = 0;
    for (size_t k = 0; k < l.size(); ++k) s += l[k] * lambda[k];
    return s;
  }
};

struct FamilyOptions {
  int nodes = 33;
  ModeOptions mode;
};

inline ModeFamily sample_mode_family(const ShearProfile& p, const SpectralPoint& carrier, double beta = 0.26,
                                     const FamilyOptions& o = {}) {
  if (!(carrier.c.imag() > 0)) throw InvalidCarrier("carrier wavenumber is not in the unstable band");
  if (o.nodes < 33) throw DomainError("mode family needs at least 33 nodes");
  if (!(beta > 0.25 && beta < 0.35)) throw DomainError("beta must lie in (0.25, 0.35)");
  ModeFamily f;
  f.profile = &p;
  f.nu = carrier.nu;
  f.alpha0 = carrier.alpha_tilde();
  f.beta = beta;
  f.carrier = carrier;
  const double q = std::pow(f.nu, 0.25);
  const auto gl = gauss_legendre(o.nodes);
  f.u = gl.nodes;
  f.interp = Barycentric(f.u);
  ModeOptions mo = o.mode;
  const double k = std::isfinite(p.decay_rate()) ? p.decay_rate() : 1.0;
  if (mo.grid.y_max <= 0) mo.grid.y_max = std::max(40.0 / k, 20.0 / (q * f.alpha_at(-1.0)));
  const int n = o.nodes;
  std::vector<std::optional<SpectralPoint>> pts(n);
  // Continue outward from the carrier on both sides.
  for (int dir : {-1, 1}) {
    BranchTracker tr(p, f.nu);
    tr.seed(carrier);
    std::vector<int> side;
    for (int i = 0; i < n; ++i)
      if (f.u[i] * dir >= 0) side.push_back(i);
    std::sort(side.begin(), side.end(), [&](int a, int b) { return std::abs(f.u[a]) < std::abs(f.u[b]); });
    for (int i : side) {
      const auto sp = tr.advance(q * f.alpha_at(f.u[i]));
      if (!sp) throw ContinuationFailure("mode family: branch lost at alpha~ = " + std::to_string(f.alpha_at(f.u[i])));
      pts[i] = sp;
    }
  }
  const Eigenmode c0 = eigenmode(carrier, p, mo);
  f.grid = c0.grid;
  Eigen::Index iref;
  Eigen::Map<const VecC>(c0.psi.data(), c0.psi.size()).cwiseAbs().maxCoeff(&iref);
  for (int i = 0; i < n; ++i) {
    const Eigenmode m = eigenmode(*pts[i], p, mo);
    const cplx s = m.psi[iref];
    std::vector<cplx> v(m.psi.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = m.psi[j] / s;
    f.psi.push_back(std::move(v));
    f.lambda.push_back(pts[i]->lambda_tilde());
  }
  return f;
}

// Rescaled group velocity c_sigma = -nu^{1/4} Im dlambda~/dalpha~ by a
// fourth-order central difference; the stencil is halved up to four times
// when an evaluation fails.
inline double group_velocity(const std::function<cplx(double)>& lambda_tilde, double alpha0, double nu, double h) {
  for (int attempt = 0; attempt < 5; ++attempt, h /= 2) {
    try {
      const cplx d = (lambda_tilde(alpha0 - 2 * h) - 8.0 * lambda_tilde(alpha0 - h) + 8.0 * lambda_tilde(alpha0 + h) -
                      lambda_tilde(alpha0 + 2 * h)) /
                     (12 * h);
      return -std::pow(nu, 0.25) * d.imag();
    } catch (const Error&) {
    }
  }
  throw DomainError("group_velocity: stencil leaves the unstable band");
}

inline double group_velocity(const ModeFamily& f) {
  const double w = f.width();
  return group_velocity([&](double a) { return f.lambda_at((a - f.alpha0) / w); }, f.alpha0, f.nu, 0.25 * w);
}

// Psi_lin(t, x, y) = int chi(u) psi~_alpha(y) e^{i alpha nu^{1/4} x + nu^{1/2} lambda~(alpha) t} du
// over alpha~ = alpha0~ + nu^beta u, by Gauss-Legendre in u with the family
// interpolated in alpha. `field` holds the complex packet (x major); the real
// flow adds the conjugate partner from alpha -> -alpha.
struct WavePacket {
  double alpha0 = 0, beta = 0, t = 0, nu = 0;
  std::vector<double> x, y;
  Eigen::MatrixXcd field;  // rows x, columns y

  Eigen::MatrixXd real_field() const { return (field + field.conjugate()).real(); }
};

namespace detail {

struct PacketRule {
  std::vector<double> alpha;  // rescaled
  std::vector<cplx> weight;   // w_q chi(u_q), time factor applied later
  std::vector<cplx> lambda;
  Eigen::MatrixXcd psi;       // rows quadrature nodes, columns selected y
};

inline PacketRule packet_rule(const ModeFamily& f, const std::vector<int>& yi, int nq) {
  PacketRule r;
  const auto gl = gauss_legendre(nq);
  r.psi.resize(nq, yi.size());
  for (int k = 0; k < nq; ++k) {
    const double u = gl.nodes[k];
    const auto l = f.interp.weights(u);
    r.alpha.push_back(f.alpha_at(u));
    r.weight.push_back(gl.weights[k] * bump(u));
    cplx lam = 0;
    for (size_t j = 0; j < l.size(); ++j) lam += l[j] * f.lambda[j];
    r.lambda.push_back(lam);
    for (size_t c = 0; c < yi.size(); ++c) {
      cplx s = 0;
      for (size_t j = 0; j < l.size(); ++j) s += l[j] * f.psi[j][yi[c]];
      r.psi(k, c) = s;
    }
  }
  return r;
}

}  // namespace detail

struct PacketOptions {
  int quadrature = 96;
};

inline WavePacket build_wavepacket(const ModeFamily& f, double t, const std::vector<double>& x,
                                   const std::vector<int>& y_index, const PacketOptions& o = {}) {
  if (std::sqrt(f.nu) * t > 3 * std::log(1 / f.nu)) throw DomainError("build_wavepacket: t beyond 3 nu^{-1/2} log(1/nu)");
  for (int i : y_index)
    if (i < 0 || i >= f.grid.size()) throw DomainError("build_wavepacket: y index off the grid");
  const double q = std::pow(f.nu, 0.25), s = std::sqrt(f.nu);
  // The u-integrand oscillates with phase up to nu^{1/4+beta} |x| plus the
  // spread of Im lambda t; Gauss-Legendre needs about one node per radian on top
  // of what the bump itself requires.
  double xmax = 0;
  for (double v : x) xmax = std::max(xmax, std::abs(v));
  const double phase = q * f.width() * xmax + 0.5 * s * t * std::abs((f.lambda_at(1.0) - f.lambda_at(-1.0)).imag());
  const int nq = o.quadrature + int(std::ceil(1.2 * phase));
  const auto r = detail::packet_rule(f, y_index, nq);
  Eigen::MatrixXcd field(x.size(), y_index.size());
  constexpr Eigen::Index kChunk = 2048;
  for (Eigen::Index i0 = 0; i0 < Eigen::Index(x.size()); i0 += kChunk) {
    const Eigen::Index m = std::min<Eigen::Index>(kChunk, x.size() - i0);
    Eigen::MatrixXcd E(m, nq);
    for (int k = 0; k < nq; ++k) {
      const cplx w = r.weight[k] * std::exp(s * r.lambda[k] * t);
      for (Eigen::Index i = 0; i < m; ++i) E(i, k) = w * std::exp(I * (r.alpha[k] * q * x[i0 + i]));
    }
    field.middleRows(i0, m) = E * r.psi;
  }
  WavePacket p;
  p.alpha0 = f.alpha0;
  p.beta = f.beta;
  p.t = t;
  p.nu = f.nu;
  p.x = x;
  for (int i : y_index) p.y.push_back(f.grid.y[i]);
  p.field = std::move(field);
  return p;
}

// Single-mode limit of the packet: psi~_alpha0(y) e^{i alpha0 nu^{1/4} x + nu^{1/2} lambda~ t}.
inline WavePacket single_mode_packet(const ModeFamily& f, double t, const std::vector<double>& x,
                                     const std::vector<int>& y_index) {
  const int mid = int(std::min_element(f.u.begin(), f.u.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
                      f.u.begin());
  const double q = std::pow(f.nu, 0.25);
  WavePacket p;
  p.alpha0 = f.alpha0;
  p.beta = INFINITY;
  p.t = t;
  p.nu = f.nu;
  p.x = x;
  p.field.resize(x.size(), y_index.size());
  for (size_t c = 0; c < y_index.size(); ++c) {
    p.y.push_back(f.grid.y[y_index[c]]);
    for (size_t i = 0; i < x.size(); ++i)
      p.field(i, c) = f.psi[mid][y_index[c]] * std::exp(I * f.alpha_at(f.u[mid]) * q * x[i] + std::sqrt(f.nu) * f.lambda[mid] * t);
  }
  return p;
}

struct GrowthSample {
  double t = 0, amplitude = 0, argmax_x = 0;
};

struct PacketGrowth {
  std::vector<GrowthSample> samples;
  double C = 0;  // mean of amplitude / (e^{nu^{1/2} Re lambda~(alpha0) t} / <sqrt(nu^{1/2} t)>)
  double group_velocity = 0;
};

// max over x and y of |Psi_lin(t)| on a window following c_sigma t, for each t.
inline PacketGrowth packet_growth(const ModeFamily& f, const std::vector<double>& t_list, const PacketOptions& o = {}) {
  PacketGrowth g;
  g.group_velocity = group_velocity(f);
  const double q = std::pow(f.nu, 0.25), s = std::sqrt(f.nu);
  const double width = std::pow(f.nu, -f.beta - 0.25);
  const double wave = 2 * M_PI / (f.alpha0 * q);
  std::vector<int> yi;
  for (int i = 0; i < f.grid.size(); i += 4) yi.push_back(i);
  const cplx lam0 = f.lambda_at(0.0);
  double csum = 0;
  for (double t : t_list) {
    const double centre = g.group_velocity * t;
    std::vector<double> x;
    for (double xx = centre - 3 * width; xx <= centre + 3 * width; xx += wave / 8) x.push_back(xx);
    const auto p = build_wavepacket(f, t, x, yi, o);
    const Eigen::VectorXd env = p.field.cwiseAbs().rowwise().maxCoeff();
    Eigen::Index im;
    const double amp = env.maxCoeff(&im);
    // Parabolic refinement of the envelope peak.
    double xm = x[im];
    if (im > 0 && im + 1 < env.size()) {
      const double a = env(im - 1), b = env(im), c = env(im + 1), den = a - 2 * b + c;
      if (den < 0) xm += 0.5 * (a - c) / den * (x[1] - x[0]);
    }
    g.samples.push_back({t, amp, xm});
    const double ts = s * t;
    csum += amp / (std::exp(ts * lam0.real()) / std::sqrt(1 + ts));
  }
  g.C = t_list.empty() ? 0 : csum / t_list.size();
  return g;
}

// Fourier-side L2 mass of Psi_lin(t, ., y_j): with Psi = int g(alpha~) e^{i alpha~ nu^{1/4} x} dalpha~,
// int |Psi|^2 dx = 2 pi nu^{-1/4} int |g|^2 dalpha~.
inline double spectral_mass(const ModeFamily& f, double t, int y_index, int quadrature = 96) {
  const auto gl = gauss_legendre(quadrature);
  const auto r = detail::packet_rule(f, {y_index}, quadrature);
  double m = 0;
  for (int k = 0; k < quadrature; ++k) {
    const cplx v = bump(gl.nodes[k]) * std::exp(std::sqrt(f.nu) * r.lambda[k] * t) * r.psi(k, 0);
    m += gl.weights[k] * std::norm(v);
  }
  // dalpha~ = w du and g = chi psi e^{lambda t} / w.
  return 2 * M_PI / std::pow(f.nu, 0.25) * m / f.width();
}

}  // namespace shearstab
