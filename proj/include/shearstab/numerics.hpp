#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace shearstab {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

struct MullerOptions {
  int max_iter = 50;
  double step_tol = 1e-13;  // relative to max(|x|, scale)
  double f_tol = 0.0;       // absolute; 0 disables
  double scale = 1.0;
  // Noise floor: once steps are below this (relative) and stop shrinking by
  // half, the iterate is as good as the function values allow.
  double stagnation_tol = 0.0;
};

struct MullerResult {
  cplx root;
  cplx value;
  int iterations = 0;
  bool converged = false;
  bool aborted = false;  // the guard rejected an iterate
  std::vector<cplx> trace;
};

// Muller's method. The guard may veto an iterate (e.g. one leaving a search
// disk); the iteration then stops with aborted = true.
template <class F>
MullerResult muller(F&& f, cplx x0, cplx x1, cplx x2, const MullerOptions& opt = {},
                    const std::function<bool(cplx)>& guard = {}) {
  MullerResult r;
  cplx f0 = f(x0), f1 = f(x1), f2 = f(x2);
  r.trace = {x0, x1, x2};
  double prev_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    r.iterations = it;
    const cplx h1 = x1 - x0, h2 = x2 - x1;
    const cplx d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
    const cplx a = (d2 - d1) / (h2 + h1);
    const cplx b = a * h2 + d2;
    const cplx disc = std::sqrt(b * b - 4.0 * a * f2);
    const cplx den = std::abs(b + disc) > std::abs(b - disc) ? b + disc : b - disc;
    cplx dx = den == cplx(0) ? cplx(opt.step_tol * opt.scale) : -2.0 * f2 / den;
    if (!std::isfinite(dx.real()) || !std::isfinite(dx.imag())) break;
    const cplx x3 = x2 + dx;
    if (guard && !guard(x3)) {
      r.root = x3;
      r.value = f2;
      r.aborted = true;
      return r;
    }
    const cplx f3 = f(x3);
    r.trace.push_back(x3);
    x0 = x1; f0 = f1;
    x1 = x2; f1 = f2;
    x2 = x3; f2 = f3;
    const bool small_step = std::abs(dx) <= opt.step_tol * std::max(std::abs(x3), opt.scale);
    const bool small_f = opt.f_tol > 0 && std::abs(f3) < opt.f_tol;
    const double ref = std::max(std::abs(x3), opt.scale);
    const bool stalled = std::abs(dx) < opt.stagnation_tol * ref && std::abs(dx) > 0.5 * prev_step;
    prev_step = std::abs(dx);
    if (small_step || small_f || stalled || f3 == cplx(0)) {
      r.converged = true;
      break;
    }
  }
  r.root = x2;
  r.value = f2;
  return r;
}

// Ordinary least-squares line through (x, y).
struct LineFit {
  double slope = 0, intercept = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace shearstab

namespace shearstab {

// Argument-principle winding number around a closed polygon (vertices in
// counter-clockwise order), from a function returning log f. Each edge is
// sampled uniformly and subdivided wherever the phase jumps by more than pi/4.
template <class LogF>
int winding_number_log(LogF&& logf, const std::vector<cplx>& polygon, int samples_per_edge = 100) {
  auto dphase = [](cplx la, cplx lb) { return std::remainder(lb.imag() - la.imag(), 2 * std::numbers::pi); };
  double total = 0.0;
  std::function<double(cplx, cplx, cplx, cplx, int)> edge = [&](cplx a, cplx b, cplx la, cplx lb, int depth) {
    const double d = dphase(la, lb);
    if (std::abs(d) <= std::numbers::pi / 4 || depth > 30) return d;
    const cplx m = 0.5 * (a + b);
    const cplx lm = logf(m);
    return edge(a, m, la, lm, depth + 1) + edge(m, b, lm, lb, depth + 1);
  };
  for (size_t k = 0; k < polygon.size(); ++k) {
    const cplx a = polygon[k], b = polygon[(k + 1) % polygon.size()];
    cplx prev = a, lprev = logf(a);
    for (int i = 1; i <= samples_per_edge; ++i) {
      const cplx z = a + (b - a) * (double(i) / samples_per_edge);
      const cplx lz = logf(z);
      total += edge(prev, z, lprev, lz, 0);
      prev = z;
      lprev = lz;
    }
  }
  return int(std::lround(total / (2 * std::numbers::pi)));
}

template <class F>
int winding_number(F&& f, const std::vector<cplx>& polygon, int samples_per_edge = 100) {
  return winding_number_log([&](cplx z) { return std::log(f(z)); }, polygon, samples_per_edge);
}

inline std::vector<cplx> rectangle(cplx lo, cplx hi) {
  return {lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag())};
}

}  // namespace shearstab
