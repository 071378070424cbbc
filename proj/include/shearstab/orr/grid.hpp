#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"

namespace shearstab {

// Weights of the finite-difference formulas for derivatives 0..m at x0 from
// nodes x (Fornberg's recursion). Result w[d][j].
inline std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> w(m + 1, std::vector<double>(n, 0.0));
  w[0][0] = 1.0;
  double c1 = 1.0, c4 = x[0] - x0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) w[k][i] = c1 * (k * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
        w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) w[k][j] = (c4 * w[k][j] - k * w[k - 1][j]) / c3;
      w[0][j] = c4 * w[0][j] / c3;
    }
    c1 = c2;
  }
  return w;
}

struct GridOptions {
  int points = 2000;
  double wall_spacing = 0.0;  // 0: nu^{1/4} / 40
  double y_max = 0.0;         // 0: max(40 / decay_rate, 20 / |alpha|)
};

// Nodes y_j = a (e^{kappa j} - 1): spacing grows from the wall value like
// h_wall + kappa y, so the wall layer, the O(1) shear and the 1/alpha tail
// are all resolved with a fixed node count.
struct Grid {
  std::vector<double> y;

  int size() const { return static_cast<int>(y.size()); }
  double y_max() const { return y.back(); }
};

inline Grid stretched_grid(double y_max, double wall_spacing, int points) {
  if (!(y_max > 0 && wall_spacing > 0) || points < 16) throw DomainError("stretched_grid needs y_max, spacing > 0");
  const int n = points - 1;
  if (wall_spacing * n >= y_max) {
    Grid g;
    for (int j = 0; j <= n; ++j) g.y.push_back(y_max * j / n);
    return g;
  }
  // First spacing a kappa = h: fixed point of kappa = ln(1 + kappa y_max / h) / n.
  const double r = y_max / wall_spacing;
  double kappa = std::log(1 + r / n) / n;
  for (int it = 0; it < 200; ++it) {
    const double next = std::log1p(kappa * r) / n;
    if (std::abs(next - kappa) < 1e-15 * kappa) break;
    kappa = next;
  }
  const double a = y_max / std::expm1(kappa * n);
  Grid g;
  g.y.resize(points);
  for (int j = 0; j <= n; ++j) g.y[j] = a * std::expm1(kappa * j);
  g.y[n] = y_max;
  return g;
}

inline Grid stretched_grid(double alpha, double nu, double decay_rate, const GridOptions& o = {}) {
  const double k = std::isfinite(decay_rate) && decay_rate > 0 ? decay_rate : 1.0;
  const double ym = o.y_max > 0 ? o.y_max : std::max(40.0 / k, 20.0 / std::abs(alpha));
  const double h = o.wall_spacing > 0 ? o.wall_spacing : std::pow(nu, 0.25) / 40;
  return stretched_grid(ym, h, o.points);
}

using SpMat = Eigen::SparseMatrix<double>;

// Sparse derivative matrices D1..D4 on a grid: centered stencils of `width`
// nodes, shifted to one-sided ones near the ends.
struct FdOperators {
  SpMat d1, d2, d3, d4;
};

inline FdOperators fd_operators(const Grid& g, int width = 9) {
  const int n = g.size();
  if (n < width) throw DomainError("fd_operators: grid smaller than stencil");
  std::vector<Eigen::Triplet<double>> t[4];
  std::vector<double> xs(width);
  for (int i = 0; i < n; ++i) {
    const int s = std::clamp(i - width / 2, 0, n - width);
    for (int j = 0; j < width; ++j) xs[j] = g.y[s + j];
    const auto w = fornberg_weights(g.y[i], xs, 4);
    for (int d = 0; d < 4; ++d)
      for (int j = 0; j < width; ++j) t[d].emplace_back(i, s + j, w[d + 1][j]);
  }
  FdOperators op;
  SpMat* m[4] = {&op.d1, &op.d2, &op.d3, &op.d4};
  for (int d = 0; d < 4; ++d) {
    m[d]->resize(n, n);
    m[d]->setFromTriplets(t[d].begin(), t[d].end());
  }
  return op;
}

// Quadrature weights exact for piecewise cubics: each cell integrates the
// Lagrange interpolant through its four nearest nodes with 2-point Gauss.
inline std::vector<double> quadrature_weights(const Grid& g) {
  const int n = g.size();
  std::vector<double> q(n, 0.0);
  const double r = 0.5 / std::sqrt(3.0);
  std::vector<double> xs(4);
  for (int i = 0; i + 1 < n; ++i) {
    const int s = std::clamp(i - 1, 0, n - 4);
    for (int j = 0; j < 4; ++j) xs[j] = g.y[s + j];
    const double h = g.y[i + 1] - g.y[i], mid = 0.5 * (g.y[i] + g.y[i + 1]);
    for (double x : {mid - r * h, mid + r * h}) {
      const auto w = fornberg_weights(x, xs, 0);
      for (int j = 0; j < 4; ++j) q[s + j] += 0.5 * h * w[0][j];
    }
  }
  return q;
}

}  // namespace shearstab
