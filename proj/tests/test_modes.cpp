#include <catch_amalgamated.hpp>

#include <random>

#include "shearstab/orr/modes.hpp"
#include "shearstab/orr/xnorm.hpp"

using namespace shearstab;

namespace {

const ShearProfile kExp = ShearProfile::exponential();

struct Fixture {
  SpectralPoint pt;
  Eigenmode direct, adjoint;
};

// Unstable point near the most unstable wavenumber at nu = 1e-6.
const Fixture& fixture() {
  static const Fixture f = [] {
    const double nu = 1e-6, q = std::pow(nu, 0.25);
    const auto sp = find_eigenvalue(kExp, 2.66175 * q, nu, cplx(2.5278, 0.1833) * q);
    if (!sp) throw std::runtime_error("fixture eigenvalue");
    return Fixture{*sp, eigenmode(*sp, kExp), adjoint_eigenmode(*sp, kExp)};
  }();
  return f;
}

std::vector<cplx> derivative(const Eigenmode& m, const std::vector<cplx>& v) {
  const auto d = fd_operators(m.grid);
  const Eigen::VectorXcd r = d.d1.cast<cplx>() * Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size());
  return {r.data(), r.data() + r.size()};
}

// Smooth random stream functions vanishing with their slope at the wall.
std::vector<cplx> random_field(const Grid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1), r(0.2, 3.0);
  std::vector<cplx> v(g.size(), 0.0);
  for (int k = 0; k < 4; ++k) {
    const cplx a(u(rng), u(rng));
    const double b = r(rng);
    for (int i = 0; i < g.size(); ++i) v[i] += a * g.y[i] * g.y[i] * std::exp(-b * g.y[i]);
  }
  return v;
}

double sup_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sup(const std::vector<cplx>& a) { return sup_diff(a, std::vector<cplx>(a.size(), 0.0)); }

}  // namespace

TEST_CASE("grid and finite differences") {
  const Grid g = stretched_grid(40.0, 1e-3, 2000);
  CHECK(g.y.front() == 0.0);
  CHECK(std::abs(g.y.back() - 40.0) < 1e-12);
  CHECK(std::abs(g.y[1] - 1e-3) < 1e-5);
  const auto d = fd_operators(g);
  Eigen::VectorXd f(g.size()), d2(g.size());
  for (int i = 0; i < g.size(); ++i) {
    f(i) = std::sin(g.y[i]) * std::exp(-0.05 * g.y[i]);
  }
  const Eigen::VectorXd num = d.d2 * f;
  double err = 0;
  for (int i = 0; i < g.size(); ++i) {
    const double y = g.y[i], e = std::exp(-0.05 * y);
    const double exact = e * (-std::sin(y) - 0.1 * std::cos(y) + 0.0025 * std::sin(y));
    err = std::max(err, std::abs(num(i) - exact));
  }
  CHECK(err < 1e-6);
  const auto q = quadrature_weights(g);
  double s = 0;
  for (int i = 0; i < g.size(); ++i) s += q[i] * std::exp(-g.y[i]);
  CHECK(std::abs(s - (1 - std::exp(-40.0))) < 1e-8);
}

TEST_CASE("eigenmode: boundary conditions, normalization, residual") {
  const auto& m = fixture().direct;
  CHECK(std::abs(m.psi[0]) < 1e-8);
  CHECK(std::abs(derivative(m, m.psi)[0]) < 1e-8);
  CHECK(std::abs(sup(m.psi) - 1.0) < 1e-14);
  CHECK(m.residual < 1e-7);
  CHECK(std::abs(m.c_discrete - m.c) < 1e-6 * std::abs(m.c));
}

TEST_CASE("eigenmode obeys the inviscid vorticity relation away from the wall layer") {
  // Outside the viscous layers omega = U'' psi / (c - U) up to O(nu) terms.
  const auto& m = fixture().direct;
  double err = 0, scale = 0;
  for (int i = 0; i < m.grid.size(); ++i) {
    const double y = m.grid.y[i];
    if (y < 2 || y > 10) continue;
    const auto v = kExp(y);
    const cplx inv = v.d2u * m.psi[i] / (m.c - v.u);
    err = std::max(err, std::abs(m.omega[i] - inv));
    scale = std::max(scale, std::abs(inv));
  }
  CHECK(err < 1e-3 * scale);
}

TEST_CASE("adjoint mode: eigenvalue, boundary conditions and pairing") {
  const auto& f = fixture();
  CHECK(std::abs(f.adjoint.c - f.pt.c) < 1e-7);
  // The two discrete operators are different discretizations of transposed
  // equations, so their eigenvalues agree to truncation error only.
  CHECK(std::abs(f.adjoint.c_discrete - f.direct.c_discrete) < 1e-7 * std::abs(f.pt.c));
  CHECK(std::abs(f.adjoint.psi[0]) < 1e-8);
  CHECK(std::abs(derivative(f.adjoint, f.adjoint.psi)[0]) < 1e-8);
  CHECK(f.adjoint.residual < 1e-7);
  const double p = normalized_pairing(f.direct, f.adjoint);
  CHECK(p > 0.01);
  CHECK(p <= 1.0);
}

TEST_CASE("modes at distinct eigenvalues are biorthogonal") {
  const auto& f = fixture();
  const Eigenmode d2 = nearest_mode(kExp, f.pt.alpha, f.pt.nu, cplx(0.15, -0.025), false);
  const Eigenmode a2 = nearest_mode(kExp, f.pt.alpha, f.pt.nu, d2.c, true);
  REQUIRE(std::abs(d2.c - f.pt.c) > 1e-2);
  REQUIRE(std::abs(a2.c - d2.c) < 1e-8);
  CHECK(normalized_pairing(f.direct, a2) < 1e-6);
  CHECK(normalized_pairing(d2, f.adjoint) < 1e-6);
  CHECK(normalized_pairing(d2, a2) > 1e-3);
}

TEST_CASE("kernel/range projections") {
  const auto& f = fixture();
  std::mt19937 rng(7);
  const auto self = project_kernel_range(f.direct.psi, f.direct, f.adjoint);
  CHECK(sup_diff(self.kernel, f.direct.psi) < 1e-8);
  for (int k = 0; k < 20; ++k) {
    const auto v = random_field(f.direct.grid, rng);
    const auto kr = project_kernel_range(v, f.direct, f.adjoint);
    std::vector<cplx> sum(v.size());
    for (size_t i = 0; i < v.size(); ++i) sum[i] = kr.kernel[i] + kr.range[i];
    CHECK(sup_diff(sum, v) < 1e-14 * sup(v));
    const double pr = std::abs(mode_pairing(f.direct.grid, f.direct.alpha, kr.range, f.adjoint.psi));
    CHECK(pr < 1e-8 * energy_norm(f.direct.grid, f.direct.alpha, v) *
                   energy_norm(f.adjoint.grid, f.adjoint.alpha, f.adjoint.psi));
    const auto kk = project_kernel_range(kr.kernel, f.direct, f.adjoint);
    CHECK(sup_diff(kk.kernel, kr.kernel) < 1e-8 * sup(kr.kernel) + 1e-300);
  }
}

TEST_CASE("pseudo-inverse inverts the operator on its range") {
  const auto& f = fixture();
  std::mt19937 rng(11);
  const auto g = random_field(f.direct.grid, rng);
  const auto d = fd_operators(f.direct.grid);
  const auto P = detail::orr_pencil(kExp, f.pt.alpha, f.pt.nu, f.direct.grid, d, false);
  const Eigen::VectorXcd lg = P.apply(f.direct.c_discrete, Eigen::Map<const Eigen::VectorXcd>(g.data(), g.size()));
  const std::vector<cplx> rhs(lg.data(), lg.data() + lg.size());
  const auto b3 = pseudo_inverse(kExp, f.direct, f.adjoint, rhs);
  const auto range = project_kernel_range(g, f.direct, f.adjoint).range;
  CHECK(sup_diff(b3.psi, range) < 1e-6 * sup(range));
}

TEST_CASE("resolvent: residual, refusal at the eigenvalue, simple pole") {
  const auto& f = fixture();
  auto src = [](double y) { return cplx(std::exp(-y)); };
  const auto r = resolvent_solve(kExp, f.pt.alpha, f.pt.c + 0.01, f.pt.nu, src);
  CHECK(r.residual < 1e-8);
  CHECK(std::abs(r.psi[0]) < 1e-8);
  ResolventOptions o;
  o.eigenvalue = f.pt.c;
  CHECK_THROWS_AS(resolvent_solve(kExp, f.pt.alpha, f.pt.c, f.pt.nu, src, o), NearSingularSolve);
  std::vector<double> x, y;
  for (double del : {1e-4, 1e-5, 1e-6, 1e-7}) {
    const auto s = resolvent_solve(kExp, f.pt.alpha, f.direct.c_discrete + del * cplx(0.6, 0.8), f.pt.nu, src);
    x.push_back(std::log(del));
    y.push_back(std::log(sup(s.psi)));
  }
  CHECK(std::abs(fit_line(x, y).slope + 1.0) < 0.1);
}

TEST_CASE("X-norm templates") {
  const double nu = 1e-6, q = std::pow(nu, 0.25), c0 = 0.7;
  const Grid g = stretched_grid(200.0, q / 400, 4000);
  std::vector<cplx> mid(g.size()), fast(g.size());
  for (int i = 0; i < g.size(); ++i) {
    mid[i] = std::exp(-c0 * g.y[i]);
    fast[i] = std::exp(-c0 * g.y[i] / q) / q;
  }
  CHECK(std::abs(xnorm_fit(g, mid, 0, 0, c0, nu) - 1.0) < 1e-12);
  CHECK(std::abs(xnorm_fit(g, fast, 0, 1, c0, nu) - 1.0) < 1e-12);
  CHECK(std::abs(xnorm_omega_fit(g, fast, 0, c0, nu) - 1.0) < 1e-12);
  // For p > 0 the middle term is dominated near the wall; the supremum sits
  // where the slow and fast terms cross.
  for (int p : {1, 2}) {
    const double ys = p * std::log(1 / q) / (c0 * (1 / q - q));
    const double expect = std::exp(-c0 * ys * (1 - q));
    CHECK(std::abs(xnorm_fit(g, mid, 0, p, c0, nu) - expect) < 2e-3);
  }
  // Derivatives use nu^{j/4} weights on the slow term.
  std::vector<cplx> slow(g.size());
  for (int i = 0; i < g.size(); ++i) slow[i] = std::exp(-c0 * q * g.y[i]);
  CHECK(std::abs(xnorm_fit(g, slow, 2, 0, c0, nu) - 1.0) < 1e-6);
}
