#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "shearstab/rayleigh.hpp"

using namespace shearstab;

namespace {

cplx most_unstable_oracle(const ShearProfile& p, double alpha) {
  const auto ev = oracle::rayleigh_chebyshev([&](double y) { return p(y); }, alpha);
  cplx best = 0;
  for (cplx c : ev)
    if (c.imag() > best.imag()) best = c;
  return best;
}

}  // namespace

TEST_CASE("nearly constant flow: miss is the transported seed") {
  // erf profile with a 1e-4 thick wall layer: U'' vanishes to machine
  // precision for y > 0.01, so psi = e^{-alpha y} is carried down unchanged
  // and only the last step sees the layer.
  const auto flat = ShearProfile::erf(1.0, 1e-8);
  RayleighOptions o;
  o.y_max = 12.0;
  o.step = 0.01;
  const cplx m = rayleigh_miss(flat, 0.7, cplx(0.3, 0.2), o);
  CHECK(std::abs(m - 1.0) < 1e-3);
}

TEST_CASE("miss is linear in the seed and conjugation-symmetric") {
  const auto p = ShearProfile::inflection();
  const cplx c(0.35, 0.1);
  RayleighOptions a, b;
  a.y_max = b.y_max = 15.0;
  const cplx m = rayleigh_miss(p, 0.8, c, a);
  const cplx mc = rayleigh_miss(p, 0.8, std::conj(c), a);
  CHECK(std::abs(mc - std::conj(m)) < 1e-13 * std::abs(m));
  // Homogeneity: the seed e^{-alpha y_max} scales the result; moving y_max by
  // d inside the far field rescales the seed by e^{-alpha d}, the miss by the same.
  b.y_max = 16.0;
  const cplx m2 = rayleigh_miss(p, 0.8, c, b);
  CHECK(std::abs(m2 / m - 1.0) < 1e-8);
  CHECK_THROWS_AS(rayleigh_miss(p, 0.8, 0.3, a), SingularIntegration);
}

TEST_CASE("inflection profile: unstable mode matches the Chebyshev oracle") {
  const auto p = ShearProfile::inflection();
  const cplx oc = most_unstable_oracle(p, 0.8);
  REQUIRE(oc.imag() > 0.05);
  const auto m = find_rayleigh_mode(p, 0.8, cplx(0.4, 0.1));
  REQUIRE(m);
  CHECK(std::abs(m->c - oc) < 1e-4);
  CHECK(std::abs(rayleigh_miss(p, 0.8, m->c)) < 1e-10);
  CHECK(std::abs(m->psi.front()) < 1e-10);
  CHECK(m->y.front() == 0.0);
  // Rayleigh residual with a sixth-order second difference on the RK4 grid.
  const double h = m->y[1] - m->y[0];
  const double w[7] = {1.0 / 90, -3.0 / 20, 1.5, -49.0 / 18, 1.5, -3.0 / 20, 1.0 / 90};
  double res = 0;
  for (size_t i = 3; i + 4 < m->y.size(); ++i) {
    cplx d2 = 0;
    for (int k = 0; k < 7; ++k) d2 += w[k] * m->psi[i + k - 3];
    d2 /= h * h;
    const auto v = p(m->y[i]);
    res = std::max(res, std::abs((v.u - m->c) * (d2 - 0.64 * m->psi[i]) - v.d2u * m->psi[i]));
  }
  CHECK(res < 1e-8);
}

TEST_CASE("halving the step moves c by less than 1e-6") {
  const auto p = ShearProfile::inflection();
  RayleighOptions a, b;
  a.step = 0.005;
  b.step = 0.0025;
  const auto ma = find_rayleigh_mode(p, 0.8, cplx(0.4, 0.1), a);
  const auto mb = find_rayleigh_mode(p, 0.8, cplx(0.4, 0.1), b);
  REQUIRE(ma);
  REQUIRE(mb);
  CHECK(std::abs(ma->c - mb->c) < 1e-6);
}

TEST_CASE("concave profile has no unstable Rayleigh root") {
  const auto p = ShearProfile::exponential();
  int found = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const cplx g(0.05 + 0.9 * i / 19.0, 0.01 + 0.5 * j / 19.0);
      if (find_rayleigh_mode(p, 0.8, g)) ++found;
    }
  CHECK(found == 0);
}

TEST_CASE("winding count of the miss matches the roots found") {
  const auto p = ShearProfile::inflection();
  auto f = [&](cplx c) { return rayleigh_miss(p, 0.8, c); };
  const auto box = rectangle(cplx(0.2, 0.02), cplx(0.6, 0.4));
  const int w = winding_number(f, box, 40);
  const auto m = find_rayleigh_mode(p, 0.8, cplx(0.4, 0.1));
  REQUIRE(m);
  CHECK(w == 1);
  CHECK(winding_number([&](cplx c) { return rayleigh_miss(ShearProfile::exponential(), 0.8, c); }, box, 40) == 0);
}
