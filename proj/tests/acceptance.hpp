#pragma once

// Acceptance suite: one PASS/FAIL line per criterion. Shared by the ctest
// binary and `shearstab verify`.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "shearstab/amplitude.hpp"
#include "shearstab/cascade.hpp"
#include "shearstab/orr/neutral.hpp"
#include "shearstab/orr/modes.hpp"
#include "shearstab/viscous_expansion.hpp"
#include "shearstab/wavepacket.hpp"

namespace shearstab::acceptance {

enum class Tier { fast, full };

struct Outcome {
  bool pass = false;
  std::string detail;
};


inline std::string fmt(double v, int digits = 4) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", digits, v);
  return b;
}

inline bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly).slope;
}

inline double sup_abs(const std::vector<cplx>& v) {
  double m = 0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

// Most unstable points on the exponential profile, computed once and reused.
class Context {
 public:
  explicit Context(Tier t) : tier(t), profile(ShearProfile::exponential()) {}

  Tier tier;
  ShearProfile profile;

  std::vector<double> growth_nus() const {
    return tier == Tier::full ? std::vector<double>{1e-5, 1e-6, 1e-7, 1e-8} : std::vector<double>{1e-5, 1e-6, 1e-7};
  }

  const Band& band(double nu) {
    ensure(nu);
    return bands_.at(nu);
  }
  const SpectralPoint& most_unstable(double nu) {
    ensure(nu);
    return peaks_.at(nu);
  }

 private:
  std::map<double, Band> bands_;
  std::map<double, SpectralPoint> peaks_;

  void ensure(double nu) {
    if (peaks_.count(nu)) return;
    std::optional<SpectralPoint> hint;
    if (!peaks_.empty()) {
      // Carry the nearest computed peak over in rescaled variables.
      auto it = peaks_.lower_bound(nu);
      SpectralPoint s = it == peaks_.end() ? std::prev(it)->second : it->second;
      const double r = std::pow(nu / s.nu, 0.25);
      s.alpha *= r;
      s.c *= r;
      s.nu = nu;
      hint = s;
    }
    const auto b = find_band(profile, nu, {}, hint);
    if (!b) throw ContinuationFailure("acceptance: no unstable band at nu = " + fmt(nu));
    bands_[nu] = *b;
    peaks_[nu] = most_unstable_in(profile, *b);
  }
};

inline Outcome neutral_exponents(Context& cx) {
  const std::vector<double> nus = cx.tier == Tier::full
                                      ? std::vector<double>{1e-4, 3.1622776601683795e-5, 1e-5, 3.1622776601683795e-6,
                                                            1e-6, 3.1622776601683795e-7, 1e-7}
                                      : std::vector<double>{1e-5, 1e-6, 1e-7};
  const auto c = neutral_curves(cx.profile, nus);
  int unstable = 0;
  for (const auto& s : c.samples) unstable += s.unstable;
  const bool ok = unstable >= 3 && within(c.e_minus, 0.25, 0.03) && within(c.e_plus, 1.0 / 6, 0.03);
  return {ok, "e_minus = " + fmt(c.e_minus) + " (0.25 +- 0.03), e_plus = " + fmt(c.e_plus) + " (0.1667 +- 0.03), " +
                  std::to_string(unstable) + " unstable nu"};
}

inline Outcome growth_scaling(Context& cx) {
  std::vector<double> nus, re, at;
  for (double nu : cx.growth_nus()) {
    const auto& m = cx.most_unstable(nu);
    nus.push_back(nu);
    re.push_back(m.lambda().real());
    at.push_back(m.alpha_tilde());
  }
  const double slope = log_slope(nus, re);
  const auto [lo, hi] = std::minmax_element(at.begin(), at.end());
  const double spread = *hi / *lo - 1;
  const bool ok = within(slope, 0.5, 0.03) && spread < 0.05;
  return {ok, "slope = " + fmt(slope) + " (0.50 +- 0.03), alpha0/nu^{1/4} spread = " + fmt(100 * spread, 3) +
                  "% (< 5%) over nu = " + fmt(nus.front()) + ".." + fmt(nus.back())};
}

inline Outcome conjugation(Context& cx) {
  double worst = 0;
  int n = 0;
  for (double nu : {1e-5, 1e-6}) {
    const auto& tr = cx.band(nu).track;
    for (int k = 0; k < 10; ++k) {
      const auto& pt = tr[(k * (tr.size() - 1)) / 9];
      const auto m = find_eigenvalue(cx.profile, -pt.alpha, nu, std::conj(pt.c));
      if (!m) return {false, "no root at -alpha = " + fmt(-pt.alpha) + ", nu = " + fmt(nu)};
      worst = std::max(worst, std::abs(m->lambda() - std::conj(pt.lambda())) / std::abs(pt.lambda()));
      ++n;
    }
  }
  return {worst < 1e-8, "max |lambda(-alpha) - conj lambda(alpha)| / |lambda| = " + fmt(worst, 3) + " (< 1e-8) at " +
                            std::to_string(n) + " points"};
}

inline Outcome three_scales(Context& cx) {
  const std::vector<double> nus = {1e-6, 1e-7, 1e-8};
  std::array<std::vector<double>, 3> len;
  double vort = 0;
  for (double nu : nus) {
    const auto m = eigenmode(cx.most_unstable(nu), cx.profile);
    for (int s = 0; s < 3; ++s) len[s].push_back(1 / m.scale_rates[s]);
    vort = std::max(vort, m.outer_vorticity_ratio);
  }
  const double target[3] = {-0.25, 0.0, 0.25};
  bool ok = vort < 1e-6;
  std::string d = "length exponents";
  for (int s = 0; s < 3; ++s) {
    const double e = log_slope(nus, len[s]);  // fitted length ~ nu^e
    ok = ok && within(e, target[s], 0.05);
    d += " " + fmt(e);
  }
  return {ok, d + " ({-1/4, 0, 1/4} +- 0.05) over nu = 1e-6..1e-8; outer |omega|/|psi| = " + fmt(vort, 3) + " (< 1e-6)"};
}

inline Outcome biorthogonality(Context& cx) {
  const auto& pt = cx.most_unstable(1e-6);
  const auto d = eigenmode(pt, cx.profile), a = adjoint_eigenmode(pt, cx.profile);
  const auto d2 = nearest_mode(cx.profile, pt.alpha, pt.nu, cplx(0.15, -0.025), false);
  const auto a2 = nearest_mode(cx.profile, pt.alpha, pt.nu, d2.c, true);
  if (std::abs(d2.c - pt.c) < 1e-2) return {false, "second mode coincides with the unstable one"};
  const double self = normalized_pairing(d, a), self2 = normalized_pairing(d2, a2);
  const double cross = std::max(normalized_pairing(d, a2), normalized_pairing(d2, a));
  const bool ok = self > 1e-2 && self2 > 1e-3 && cross < 1e-6;
  return {ok, "pairings " + fmt(self) + ", " + fmt(self2) + " (O(1)), cross " + fmt(cross, 3) + " (< 1e-6)"};
}

inline Outcome resolvent_exponents(Context& cx) {
  auto f = [](double y) { return cplx(std::exp(-y)); };
  const auto& pt = cx.most_unstable(1e-6);
  const auto m = eigenmode(pt, cx.profile);
  std::vector<double> dist, gain;
  for (double del : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    dist.push_back(del);
    gain.push_back(sup_abs(resolvent_solve(cx.profile, pt.alpha, m.c_discrete + del * cplx(0.6, 0.8), pt.nu, f).psi));
  }
  const double pole = log_slope(dist, gain);
  std::vector<double> nus, g;
  for (double nu : cx.growth_nus()) {
    const auto& p = cx.most_unstable(nu);
    nus.push_back(nu);
    g.push_back(sup_abs(resolvent_solve(cx.profile, p.alpha, p.c + I * std::pow(nu, 0.25), nu, f).psi));
  }
  const double ge = log_slope(nus, g);
  const bool ok = within(pole, -1, 0.1) && within(ge, -0.25, 0.05);
  return {ok, "pole slope " + fmt(pole) + " (-1 +- 0.1), gain exponent at distance nu^{1/4} " + fmt(ge) +
                  " (-0.25 +- 0.05)"};
}

inline Outcome packet_envelope(Context& cx) {
  const double nu = 1e-6, s = std::sqrt(nu);
  const auto fam = sample_mode_family(cx.profile, cx.most_unstable(nu));
  std::vector<double> ts;
  for (int k = 2; k <= 8; ++k) ts.push_back(k / s);
  const auto g = packet_growth(fam, ts);
  const double re = fam.lambda_at(0).real();
  std::vector<double> r;
  double drift = 0;
  for (const auto& smp : g.samples) {
    const double st = s * smp.t;
    r.push_back(smp.amplitude * std::sqrt(st) / std::exp(st * re));
    drift = std::max(drift, std::abs(smp.argmax_x / smp.t / g.group_velocity - 1));
  }
  double mean = 0;
  for (double v : r) mean += v / r.size();
  double env = 0;
  for (double v : r) env = std::max(env, std::abs(v / mean - 1));
  std::string list;
  for (double v : r) list += (list.empty() ? "" : ", ") + fmt(v / mean, 3);
  return {env <= 0.1 && drift <= 0.15, "envelope ratio / mean = [" + list + "] (+- 10%), drift deviation from c_sigma " +
                                           fmt(100 * drift, 3) + "% (<= 15%) at nu = 1e-6"};
}

inline Outcome landau_saturation(Context&) {
  double worst = 0;
  std::vector<double> nus, amp;
  for (double nu : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    const double s = std::sqrt(nu);
    const auto tr = integrate_landau({s, -1.0, nu}, 60 / s, 0.05 / s);
    nus.push_back(nu);
    amp.push_back(tr.modulus.back());
    worst = std::max(worst, std::abs(tr.modulus.back() / std::pow(nu, 0.25) - 1));
  }
  const LandauModel m{cplx(0.02, 0.4), cplx(-0.7, 0.3), cplx(1e-4, 0)};
  const auto tr = integrate_landau(m, 2000.0, 0.2);
  worst = std::max(worst, std::abs(tr.modulus.back() / std::sqrt(0.02 / 0.7) - 1));
  const double e = log_slope(nus, amp);
  return {worst < 1e-3 && within(e, 0.25, 0.01),
          "max relative deviation from sqrt(-Re lambda / Re A) " + fmt(worst, 3) + " (< 0.1%), exponent " + fmt(e) +
              " (0.25 +- 0.01)"};
}

inline Outcome instability_time_ratio(Context& cx) {
  const double nu_mode = cx.growth_nus().back();
  const double R = cx.most_unstable(nu_mode).lambda_tilde().real();
  const double N = 3, theta = 0.1;
  const auto r = instability_time(1e-8, N, theta, R);
  const double target = (N - 0.25 - theta) / R, dev = r.ratio / target - 1;
  return {std::abs(dev) <= 0.05, "T nu^{1/2} / log(1/nu) = " + fmt(r.ratio) + " vs (N - 1/4 - theta)/Re lambda~ = " +
                                     fmt(target) + ", deviation " + fmt(100 * dev, 3) + "% (<= 5%) with N = 3, theta = 0.1, " +
                                     "Re lambda~ = " + fmt(R) + " from nu = " + fmt(nu_mode)};
}

inline Outcome cascade_ledgers(Context&) {
  const std::map<std::string, std::vector<std::string>> expect{{"thm1", {"-1/4", "0", "1/4"}},
                                                               {"thm2", {"0", "3/8", "1/2", "5/8"}},
                                                               {"thm3", {"0", "1/2", "11/16", "3/4", "13/16"}},
                                                               {"thm4", {"0", "3/8", "1/2", "5/8"}}};
  bool ok = true;
  std::string d;
  for (const auto& [name, want] : expect) {
    const auto L = run_scenario(name);
    std::vector<std::string> got;
    for (const auto& r : L.scales) got.push_back(to_string(r));
    ok = ok && got == want;
    d += (d.empty() ? "" : "; ") + name + " {";
    for (size_t i = 0; i < got.size(); ++i) d += (i ? "," : "") + got[i];
    d += "} T ~ nu^" + to_string(L.time_exponent());
  }
  return {ok, d};
}

inline Outcome viscous_expansion(Context&) {
  const auto p = ShearProfile::inflection();
  const auto ray = find_rayleigh_mode(p, 0.8, cplx(0.4, 0.1));
  if (!ray) return {false, "no Rayleigh mode on the inflection profile"};
  ExpansionOptions o;
  o.orders = 3;
  double bc = 0;
  bool ok = true;
  std::string d;
  std::vector<double> r2;
  for (double nu : {1e-4, 1e-5}) {
    const auto e = viscous_mode_from_rayleigh(p, *ray, nu, o);
    std::vector<double> n, lr;
    for (int N = 1; N <= 3; ++N) {
      const auto [v, dv] = e.wall_values(N);
      bc = std::max({bc, std::abs(v), std::abs(dv)});
      const double r = expansion_residual(p, e, N);
      if (N == 2) r2.push_back(r);
      n.push_back(N);
      lr.push_back(std::log(r));
    }
    const double slope = fit_line(n, lr).slope, want = 0.5 * std::log(nu);
    ok = ok && std::abs(slope / want - 1) <= 0.2;
    d += "nu = " + fmt(nu) + ": log-residual slope vs order " + fmt(slope) + " (" + fmt(want) + " +- 20%); ";
  }
  ok = ok && bc < 1e-8;
  return {ok, d + "wall conditions " + fmt(bc, 3) + " (< 1e-8); order-2 residual exponent across nu " +
                  fmt(std::log(r2[1] / r2[0]) / std::log(0.1))};
}

inline Outcome rayleigh_oracle(Context&) {
  const auto p = ShearProfile::inflection();
  cplx best = 0;
  for (cplx c : oracle::rayleigh_chebyshev([&](double y) { return p(y); }, 0.8))
    if (c.imag() > best.imag()) best = c;
  const auto m = find_rayleigh_mode(p, 0.8, cplx(0.4, 0.1));
  if (!m) return {false, "no Rayleigh mode on the inflection profile"};
  const double err = std::abs(m->c - best);
  const auto q = ShearProfile::exponential();
  int found = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      if (find_rayleigh_mode(q, 0.8, cplx(0.05 + 0.9 * i / 19.0, 0.01 + 0.5 * j / 19.0))) ++found;
  return {err < 1e-4 && found == 0, "|c - c_Chebyshev| = " + fmt(err, 3) + " (< 1e-4); concave profile roots from a 20x20 guess grid: " +
                                        std::to_string(found) + " (0)"};
}

struct Criterion {
  int id;
  std::string name;
  double budget;  // seconds
  std::function<Outcome(Context&)> run;
};

inline std::vector<Criterion> criteria() {
  return {{1, "neutral-curve exponents", 600, neutral_exponents},
          {2, "growth-rate scaling", 300, growth_scaling},
          {3, "conjugation symmetry", 60, conjugation},
          {4, "three-scale eigenmode", 300, three_scales},
          {5, "direct/adjoint biorthogonality", 60, biorthogonality},
          {6, "resolvent exponents", 600, resolvent_exponents},
          {7, "wave-packet envelope", 600, packet_envelope},
          {8, "Landau saturation", 60, landau_saturation},
          {9, "instability time", 60, instability_time_ratio},
          {10, "cascade ledgers", 10, cascade_ledgers},
          {11, "Rayleigh-to-viscous expansion", 300, viscous_expansion},
          {12, "Rayleigh oracle", 60, rayleigh_oracle}};
}

// Runs every criterion (or the listed ones) and returns the number of failures.
inline int run(Tier tier, std::ostream& out, const std::vector<int>& only = {}) {
  Context cx(tier);
  int failed = 0, total = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++total;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(cx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sec > c.budget) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.budget) + " s budget";
    }
    failed += !o.pass;
    char head[96];
    std::snprintf(head, sizeof head, "%s [%2d] %s: ", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str());
    out << head << o.detail << " (" << fmt(sec, 3) << " s)" << std::endl;
  }
  out << "acceptance (" << (tier == Tier::full ? "full" : "fast") << "): " << total - failed << "/" << total << " passed"
      << std::endl;
  return failed;
}

}  // namespace shearstab::acceptance
