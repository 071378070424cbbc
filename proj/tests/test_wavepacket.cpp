#include <catch_amalgamated.hpp>

#include "shearstab/wavepacket.hpp"

using namespace shearstab;

namespace {

const ShearProfile kExp = ShearProfile::exponential();

// Family around the most unstable wavenumber at nu = 1e-6.
const ModeFamily& family() {
  static const ModeFamily f = [] {
    const double nu = 1e-6, q = std::pow(nu, 0.25);
    const auto sp = find_eigenvalue(kExp, 2.66175 * q, nu, cplx(2.5278, 0.1833) * q);
    if (!sp) throw std::runtime_error("carrier eigenvalue");
    return sample_mode_family(kExp, *sp);
  }();
  return f;
}

std::vector<int> every(int stride) {
  std::vector<int> v;
  for (int i = 0; i < family().grid.size(); i += stride) v.push_back(i);
  return v;
}

int reference_index() {
  int best = 0;
  const auto& p = family().psi[family().u.size() / 2];
  for (size_t i = 0; i < p.size(); ++i)
    if (std::abs(p[i]) > std::abs(p[best])) best = int(i);
  return best;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("bump: nonnegative, compact support, unit integral") {
  const auto gl = gauss_legendre(400);
  double s = 0;
  for (size_t k = 0; k < gl.nodes.size(); ++k) s += gl.weights[k] * bump(gl.nodes[k]);
  CHECK(std::abs(s - 1.0) < 1e-10);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-1.5) == 0.0);
  for (double u = -1; u <= 1; u += 0.01) CHECK(bump(u) >= 0.0);
}

TEST_CASE("group velocity of synthetic dispersions") {
  const double nu = 1e-6, k = 3.7;
  CHECK(std::abs(group_velocity([&](double a) { return cplx(0, k * a); }, 2.0, nu, 0.01) + std::pow(nu, 0.25) * k) <
        1e-12);
  CHECK(std::abs(group_velocity([](double a) { return cplx((a - 2.0) * (a - 2.0), 0); }, 2.0, nu, 0.01)) < 1e-15);
  // A failing evaluation shrinks the stencil; persistent failure is an error.
  CHECK_THROWS_AS(group_velocity([](double) -> cplx { throw ContinuationFailure("x"); }, 2.0, nu, 0.01), DomainError);
}

TEST_CASE("family construction rejects stable carriers and bad widths") {
  SpectralPoint stable{0.1, 1e-6, cplx(0.08, -0.01), 0};
  CHECK_THROWS_AS(sample_mode_family(kExp, stable), InvalidCarrier);
  CHECK_THROWS_AS(sample_mode_family(kExp, family().carrier, 0.4), DomainError);
}

TEST_CASE("packet at t = 0, x = 0 is the carrier mode up to O(nu^beta)") {
  const auto& f = family();
  const auto yi = every(1);
  const auto p = build_wavepacket(f, 0.0, {0.0}, yi);
  const auto s = single_mode_packet(f, 0.0, {0.0}, yi);
  CHECK(max_abs(p.field - s.field) < f.width() * max_abs(s.field));
}

TEST_CASE("single-mode limit grows exactly like e^{nu^{1/2} Re lambda t}") {
  const auto& f = family();
  const std::vector<int> yi{reference_index()};
  const double s = std::sqrt(f.nu);
  const double a0 = std::abs(single_mode_packet(f, 0.0, {0.0}, yi).field(0, 0));
  for (double ts : {1.0, 4.0, 8.0}) {
    const double a = std::abs(single_mode_packet(f, ts / s, {123.0}, yi).field(0, 0));
    CHECK(std::abs(a / a0 / std::exp(ts * f.lambda_at(0.0).real()) - 1) < 1e-12);
  }
}

TEST_CASE("packet envelope is localized on the nu^{-beta-1/4} scale") {
  const auto& f = family();
  const auto yi = every(4);
  const double L = std::pow(f.nu, -f.beta - 0.25);
  const double centre = max_abs(build_wavepacket(f, 0.0, {0.0}, yi).field);
  std::vector<double> x;
  for (double m = 50; m <= 400; m += 2.5) {
    x.push_back(m * L);
    x.push_back(-m * L);
  }
  const auto p = build_wavepacket(f, 0.0, x, yi);
  CHECK(max_abs(p.field) < 1e-3 * centre);
}

TEST_CASE("doubling the packet quadrature changes the field by < 1e-8") {
  const auto& f = family();
  const auto yi = every(8);
  const double L = std::pow(f.nu, -f.beta - 0.25);
  std::vector<double> x;
  for (double m = -30; m <= 30; m += 0.37) x.push_back(m * L);
  const double t = 4 / std::sqrt(f.nu);
  const auto a = build_wavepacket(f, t, x, yi, {96});
  const auto b = build_wavepacket(f, t, x, yi, {192});
  CHECK(max_abs(a.field - b.field) < 1e-8 * max_abs(b.field));
}

TEST_CASE("packet spectrum is confined to the carrier band") {
  const auto& f = family();
  const double q = std::pow(f.nu, 0.25), w = f.width(), L = std::pow(f.nu, -f.beta - 0.25);
  const double klo = q * (f.alpha0 - w), khi = q * (f.alpha0 + w);
  const double dx = M_PI / (2 * q * (f.alpha0 + 3 * w));
  std::vector<double> x;
  for (double xx = -250 * L; xx <= 250 * L; xx += dx) x.push_back(xx);
  const auto p = build_wavepacket(f, 0.0, x, {reference_index()});
  double total = 0;
  for (size_t j = 0; j < x.size(); ++j) total += std::norm(p.field(j, 0)) * dx;
  auto mass = [&](double a, double b) {
    const int n = 200;
    double m = 0;
    for (int i = 0; i <= n; ++i) {
      const double k = a + (b - a) * i / n;
      cplx s = 0;
      for (size_t j = 0; j < x.size(); ++j) s += p.field(j, 0) * std::exp(-I * k * x[j]);
      m += (i == 0 || i == n ? 0.5 : 1.0) * std::norm(s * dx) * (b - a) / n;
    }
    return m / (2 * M_PI);
  };
  const double outside = mass(klo - 2 * w * q, klo) + mass(khi, khi + 2 * w * q);
  const double inside = mass(klo, khi);
  CHECK(std::abs(inside / total - 1) < 1e-6);
  CHECK(outside < 1e-8 * total);
}

TEST_CASE("Parseval: x-space mass equals the weighted alpha-space mass") {
  const auto& f = family();
  const double L = std::pow(f.nu, -f.beta - 0.25);
  const int yr = reference_index();
  for (double ts : {0.0, 3.0}) {
    const double t = ts / std::sqrt(f.nu);
    std::vector<double> x;
    // |Psi|^2 is band-limited to |k| <= 2 nu^{beta+1/4}, so the trapezoid rule
    // is exact up to truncation for steps below pi L.
    for (double m = -400; m <= 400; m += 0.5) x.push_back(group_velocity(f) * t + m * L);
    const auto p = build_wavepacket(f, t, x, {yr});
    double xm = 0;
    for (size_t j = 0; j < x.size(); ++j) xm += std::norm(p.field(j, 0)) * 0.5 * L;
    CHECK(std::abs(xm / spectral_mass(f, t, yr) - 1) < 1e-6);
  }
}

TEST_CASE("real field: the conjugate partner is the packet at -alpha") {
  // The mode at -alpha is computed independently and must equal the
  // conjugate of the mode at alpha. Both eigenvalues are accepted at a 1e-9
  // dispersion residual, which bounds how well the two fields can agree.
  const auto& f = family();
  const auto& c = f.carrier;
  const auto m = find_eigenvalue(kExp, -c.alpha, c.nu, std::conj(c.c));
  REQUIRE(m);
  ModeOptions mo;
  mo.grid.y_max = f.grid.y_max();
  const auto plus = eigenmode(c, kExp, mo), minus = eigenmode(*m, kExp, mo);
  const int yr = reference_index();
  const cplx sp = plus.psi[yr], sm = minus.psi[yr];
  double imag = 0, scale = 0;
  for (double x : {0.0, 17.0, 1234.5}) {
    const cplx e = std::exp(I * c.alpha * x);
    for (size_t i = 0; i < plus.psi.size(); ++i) {
      const cplx v = plus.psi[i] / sp * e + minus.psi[i] / sm / e;
      imag = std::max(imag, std::abs(v.imag()));
      scale = std::max(scale, std::abs(v));
    }
  }
  CHECK(imag < 1e-9 * scale);
  const auto p = build_wavepacket(f, 0.0, {0.0, 500.0}, every(16));
  const Eigen::MatrixXcd sum = p.field + p.field.conjugate();
  CHECK(sum.imag().cwiseAbs().maxCoeff() <= 1e-12 * sum.cwiseAbs().maxCoeff());
  CHECK((p.real_field() - sum.real()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("group velocity scales like nu^{1/4}") {
  std::vector<double> x, y;
  cplx ct(2.3552, 0.0525);
  for (double nu : {1e-5, 1e-6, 1e-7}) {
    const double q = std::pow(nu, 0.25);
    const auto sp = find_eigenvalue(kExp, 2.6 * q, nu, ct * q);
    REQUIRE(sp);
    ct = sp->c_tilde();
    auto lambda = [&](double a) {
      const auto r = find_eigenvalue(kExp, a * q, nu, sp->c);
      if (!r) throw ContinuationFailure("group velocity stencil");
      return r->lambda_tilde();
    };
    x.push_back(std::log(nu));
    y.push_back(std::log(group_velocity(lambda, 2.6, nu, 0.02)));
  }
  CHECK(std::abs(fit_line(x, y).slope - 0.25) < 0.03);
}
