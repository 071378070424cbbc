#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "../errors.hpp"
#include "../numerics.hpp"
#include "spectrum.hpp"

namespace shearstab {

struct NeutralOptions {
  EigenSearchOptions search;
  double log_step = 0.04;  // continuation step in log alpha
  double alpha_tol = 1e-7;  // relative, on each neutral wavenumber
  std::vector<double> seed_alpha_tilde{2.6, 2.2, 3.0, 1.8, 3.5};
  cplx seed_c_tilde{2.4, 0.1};
};

struct NeutralSample {
  double nu = 0;
  bool unstable = false;
  double alpha_minus = 0, alpha_plus = 0;
  cplx c_minus, c_plus;
};

struct NeutralCurve {
  std::vector<NeutralSample> samples;
  double e_minus = 0, e_plus = 0;
  double C_minus = 0, C_plus = 0;
};

// One unstable band at fixed nu, with every eigenvalue computed on the way
// (sorted by alpha); the most-unstable search reuses them as guesses.
struct Band {
  NeutralSample sample;
  std::vector<SpectralPoint> track;

  cplx guess(double alpha) const {
    // linear interpolation of c in log alpha between tracked points
    if (track.empty()) return {};
    auto it = std::lower_bound(track.begin(), track.end(), alpha,
                               [](const SpectralPoint& s, double a) { return s.alpha < a; });
    if (it == track.begin()) return track.front().c;
    if (it == track.end()) return track.back().c;
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double t = (std::log(alpha) - std::log(a.alpha)) / (std::log(b.alpha) - std::log(a.alpha));
    return a.c + t * (b.c - a.c);
  }
};

namespace detail {

// Finds an unstable eigenvalue at nu from rescaled guesses.
inline std::optional<SpectralPoint> unstable_seed(const ShearProfile& p, double nu, const NeutralOptions& o,
                                                  std::optional<SpectralPoint> hint = std::nullopt) {
  const double q = std::pow(nu, 0.25);
  std::vector<std::pair<double, cplx>> tries;
  if (hint) tries.push_back({hint->alpha_tilde(), hint->c_tilde()});
  for (double at : o.seed_alpha_tilde) tries.push_back({at, o.seed_c_tilde});
  for (const auto& [at, ct] : tries) {
    const auto sp = find_eigenvalue(p, at * q, nu, ct * q, o.search);
    if (sp && sp->c.imag() > 0) return sp;
  }
  return std::nullopt;
}

// March from the seed in one direction (dir = -1 down, +1 up) until Im c
// changes sign, then refine the crossing by the Illinois variant of regula falsi.
inline std::pair<double, cplx> march_to_neutral(const ShearProfile& p, double nu, const SpectralPoint& seed, int dir,
                                                const NeutralOptions& o, std::vector<SpectralPoint>& out) {
  BranchTracker tr(p, nu, o.search);
  tr.seed(seed);
  double la = std::log(seed.alpha);
  const double la_limit = la + dir * 6.0;
  SpectralPoint inside = seed;
  std::optional<SpectralPoint> outside;
  while (!outside) {
    la += dir * o.log_step;
    if (dir * (la - la_limit) > 0) throw ContinuationFailure("neutral march left the search range");
    const auto sp = tr.advance(std::exp(la));
    if (!sp) throw ContinuationFailure("lost the eigenvalue branch at alpha = " + std::to_string(std::exp(la)));
    la = std::log(sp->alpha);
    for (const auto& q : tr.points()) out.push_back(q);
    if (sp->c.imag() > 0)
      inside = *sp;
    else
      outside = *sp;
  }
  // Regula falsi on Im c(log alpha).
  double xa = std::log(inside.alpha), fa = inside.c.imag();
  double xb = std::log(outside->alpha), fb = outside->c.imag();
  cplx ca = inside.c, cb = outside->c;
  int side = 0;
  for (int it = 0; it < 60 && std::abs(xb - xa) > o.alpha_tol; ++it) {
    const double x = (xa * fb - xb * fa) / (fb - fa);
    const cplx g = ca + (cb - ca) * ((x - xa) / (xb - xa));
    auto so = o.search;
    so.disk_radius = 0.1 * std::abs(g) + std::abs(cb - ca);
    const auto sp = find_eigenvalue(p, std::exp(x), nu, g, so);
    if (!sp) throw ContinuationFailure("neutral refinement lost the branch");
    out.push_back(*sp);
    const double fx = sp->c.imag();
    if ((fx > 0) == (fa > 0)) {
      xa = x; fa = fx; ca = sp->c;
      if (side == -1) fb /= 2;
      side = -1;
    } else {
      xb = x; fb = fx; cb = sp->c;
      if (side == 1) fa /= 2;
      side = 1;
    }
    if (fx == 0.0) { xa = xb = x; ca = cb = sp->c; }
  }
  const double x = std::abs(fb - fa) > 0 ? (xa * fb - xb * fa) / (fb - fa) : xa;
  return {std::exp(x), ca + (cb - ca) * (std::abs(xb - xa) > 0 ? (x - xa) / (xb - xa) : 0.0)};
}

}  // namespace detail

// Lower and upper neutral wavenumbers at one viscosity, continuing from seed.
inline Band neutral_band(const ShearProfile& p, double nu, const SpectralPoint& seed, const NeutralOptions& o = {}) {
  Band b;
  b.sample.nu = nu;
  b.sample.unstable = true;
  std::vector<SpectralPoint> pts{seed};
  const auto lo = detail::march_to_neutral(p, nu, seed, -1, o, pts);
  const auto hi = detail::march_to_neutral(p, nu, seed, +1, o, pts);
  b.sample.alpha_minus = lo.first;
  b.sample.c_minus = lo.second;
  b.sample.alpha_plus = hi.first;
  b.sample.c_plus = hi.second;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& c) { return a.alpha < c.alpha; });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const auto& a, const auto& c) { return a.alpha == c.alpha; }),
            pts.end());
  b.track = std::move(pts);
  return b;
}

inline std::optional<Band> find_band(const ShearProfile& p, double nu, const NeutralOptions& o = {},
                                     std::optional<SpectralPoint> hint = std::nullopt) {
  const auto seed = detail::unstable_seed(p, nu, o, hint);
  if (!seed) return std::nullopt;
  return neutral_band(p, nu, *seed, o);
}

// Neutral wavenumbers over a viscosity sweep (descending), continued in nu
// through the rescaled variables, with power-law fits alpha_pm ~ C nu^e.
inline NeutralCurve neutral_curves(const ShearProfile& p, std::vector<double> nu_list, const NeutralOptions& o = {}) {
  if (nu_list.empty()) throw UsageError("neutral_curves: empty nu_list");
  std::sort(nu_list.begin(), nu_list.end(), std::greater<>());
  if (std::log10(nu_list.front() / nu_list.back()) < 2.0 - 1e-9)
    throw DomainError("neutral_curves: nu_list must span at least two decades");
  NeutralCurve curve;
  std::optional<SpectralPoint> hint;
  for (double nu : nu_list) {
    std::optional<SpectralPoint> h;
    if (hint) {
      // carry the band center over in rescaled variables
      SpectralPoint s = *hint;
      const double r = std::pow(nu / s.nu, 0.25);
      s.alpha *= r;
      s.c *= r;
      s.nu = nu;
      h = s;
    }
    std::optional<Band> band;
    try {
      band = find_band(p, nu, o, h);
    } catch (const ContinuationFailure& e) {
      std::string last = curve.samples.empty() ? "none" : "nu = " + std::to_string(curve.samples.back().nu);
      throw ContinuationFailure(std::string(e.what()) + " at nu = " + std::to_string(nu) + " (last good sample " + last + ")");
    }
    if (!band) {
      curve.samples.push_back({nu, false, 0, 0, {}, {}});
      continue;
    }
    curve.samples.push_back(band->sample);
    const double am = std::sqrt(band->sample.alpha_minus * band->sample.alpha_plus);
    hint = SpectralPoint{am, nu, band->guess(am), 0.0};
  }
  std::vector<double> x, ym, yp;
  for (const auto& s : curve.samples)
    if (s.unstable) {
      x.push_back(std::log(s.nu));
      ym.push_back(std::log(s.alpha_minus));
      yp.push_back(std::log(s.alpha_plus));
    }
  if (x.size() >= 2) {
    const auto fm = fit_line(x, ym), fp = fit_line(x, yp);
    curve.e_minus = fm.slope;
    curve.C_minus = std::exp(fm.intercept);
    curve.e_plus = fp.slope;
    curve.C_plus = std::exp(fp.intercept);
  }
  return curve;
}

// Golden-section maximization of Re lambda = alpha Im c over the band.
inline SpectralPoint most_unstable_in(const ShearProfile& p, const Band& band, const NeutralOptions& o = {},
                                      double tol = 1e-5) {
  const double nu = band.sample.nu;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double a = std::log(band.sample.alpha_minus), b = std::log(band.sample.alpha_plus);
  std::vector<SpectralPoint> seen = band.track;
  auto eval = [&](double la) {
    const double alpha = std::exp(la);
    Band tmp;
    tmp.track = seen;
    std::sort(tmp.track.begin(), tmp.track.end(), [](const auto& u, const auto& v) { return u.alpha < v.alpha; });
    const cplx g = tmp.guess(alpha);
    auto so = o.search;
    so.disk_radius = 0.1 * std::abs(g);
    const auto sp = find_eigenvalue(p, alpha, nu, g, so);
    if (!sp) throw ContinuationFailure("most_unstable: eigenvalue lost at alpha = " + std::to_string(alpha));
    seen.push_back(*sp);
    return *sp;
  };
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  SpectralPoint s1 = eval(x1), s2 = eval(x2);
  while (b - a > tol) {
    if (s1.lambda().real() > s2.lambda().real()) {
      b = x2;
      x2 = x1;
      s2 = s1;
      x1 = b - gr * (b - a);
      s1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      s1 = s2;
      x2 = a + gr * (b - a);
      s2 = eval(x2);
    }
  }
  return s1.lambda().real() > s2.lambda().real() ? s1 : s2;
}

// Most unstable wavenumber at nu; nullopt when no unstable band is found.
inline std::optional<SpectralPoint> most_unstable(const ShearProfile& p, double nu, const NeutralOptions& o = {},
                                                  std::optional<SpectralPoint> hint = std::nullopt) {
  const auto band = find_band(p, nu, o, hint);
  if (!band) return std::nullopt;
  return most_unstable_in(p, *band, o);
}

}  // namespace shearstab
