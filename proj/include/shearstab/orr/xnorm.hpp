#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"
#include "grid.hpp"

namespace shearstab {

namespace detail {

// Best C with |d^j f| <= C max(terms_j(y)) at every node, j = 0..n.
template <class Terms>
double xnorm_best(const Grid& g, const std::vector<cplx>& f, int n, Terms terms) {
  if (n < 0 || n > 4) throw DomainError("xnorm_fit supports derivative orders 0..4");
  if (int(f.size()) != g.size()) throw DomainError("xnorm_fit: field not on the grid");
  const Eigen::Map<const Eigen::VectorXcd> v(f.data(), g.size());
  const FdOperators d = n > 0 ? fd_operators(g) : FdOperators{};
  const SpMat* ops[4] = {&d.d1, &d.d2, &d.d3, &d.d4};
  double best = 0;
  for (int j = 0; j <= n; ++j) {
    const Eigen::VectorXcd dj = j == 0 ? Eigen::VectorXcd(v) : Eigen::VectorXcd(ops[j - 1]->cast<cplx>() * v);
    for (int i = 0; i < g.size(); ++i) best = std::max(best, std::abs(dj(i)) / terms(j, g.y[i]));
  }
  return best;
}

}  // namespace detail

// Three-scale template of X^{n,p}:
//   nu^{j/4} e^{-C0 nu^{1/4} y},  e^{-C0 y},  nu^{-(j+p)/4} e^{-C0 y / nu^{1/4}},
// combined by max rather than sum, so a field saturating one term has C = 1.
inline double xnorm_fit(const Grid& g, const std::vector<cplx>& f, int n, int p, double c0, double nu) {
  const double q = std::pow(nu, 0.25);
  return detail::xnorm_best(g, f, n, [&](int j, double y) {
    return std::max({std::pow(q, j) * std::exp(-c0 * q * y), std::exp(-c0 * y),
                     std::pow(q, -(j + p)) * std::exp(-c0 * y / q)});
  });
}

// Template of X^n_omega: e^{-C0 y} and nu^{-(j+1)/4} e^{-C0 y / nu^{1/4}}.
inline double xnorm_omega_fit(const Grid& g, const std::vector<cplx>& f, int n, double c0, double nu) {
  const double q = std::pow(nu, 0.25);
  return detail::xnorm_best(g, f, n, [&](int j, double y) {
    return std::max(std::exp(-c0 * y), std::pow(q, -(j + 1)) * std::exp(-c0 * y / q));
  });
}

}  // namespace shearstab
