#pragma once

#include <algorithm>
#include <boost/rational.hpp>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"

namespace shearstab {

using Rational = boost::rational<long long>;

inline std::string to_string(const Rational& r) {
  return r.denominator() == 1 ? std::to_string(r.numerator())
                              : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Parabolic rescaling x -> x / nu^s, t -> t / nu^s turns viscosity nu^e into nu^{e - s}.
inline Rational rescale_flow(const Rational& nu_exponent, const Rational& s) {
  if (s < Rational(0)) throw DomainError("rescale_flow: s must be nonnegative");
  if (s > nu_exponent) throw SuperViscous("rescale_flow: s exceeds the viscosity exponent");
  return nu_exponent - s;
}

// Scale exponents relative to the layer the instability lives in.
struct InstabilityTemplate {
  std::vector<Rational> scales;
  Rational growth;      // Re lambda ~ nu^growth in rescaled units
  Rational wavenumber;  // alpha ~ nu^wavenumber
};

inline InstabilityTemplate slow_instability_template(const Rational& e) {
  if (e <= Rational(0)) throw DomainError("slow template needs a positive viscosity exponent");
  return {{-e / 4, Rational(0), e / 4}, e / 2, e / 4};
}

inline InstabilityTemplate fast_instability_template(const Rational& e) {
  if (e <= Rational(0)) throw DomainError("fast template needs a positive viscosity exponent");
  return {{Rational(0), e / 2}, Rational(0), Rational(0)};
}

enum class StepKind { prandtl, fast, slow };

inline std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::prandtl: return "prandtl";
    case StepKind::fast: return "fast";
    case StepKind::slow: return "slow";
  }
  return "?";
}

struct ScenarioStep {
  Rational attach;  // absolute exponent of the layer the step lives in
  StepKind kind;
};

struct LedgerEntry {
  StepKind kind;
  Rational rescale;    // s
  Rational viscosity;  // exponent after rescaling
  Rational time;       // T ~ nu^time log(1/nu) in original units
};

struct ScaleLedger {
  std::set<Rational> scales{Rational(0)};
  std::vector<LedgerEntry> history;

  // The slowest step sets the instability time.
  Rational time_exponent() const {
    Rational t(0);
    bool any = false;
    for (const auto& h : history)
      if (h.kind != StepKind::prandtl) {
        t = any ? std::min(t, h.time) : h.time;
        any = true;
      }
    return t;
  }
};

// Each step attaches to a scale already in the ledger. Rescaling by that
// scale's exponent s gives viscosity nu^{1-s}; a template whose rate is
// nu^g (g in original-nu exponents) grows over rescaled time nu^{-g} log(1/nu),
// which is nu^{s-g} log(1/nu) in original time. A prandtl step adds the
// nu^{1/2} layer of the flow it attaches to.
inline ScaleLedger run_scenario(const std::vector<ScenarioStep>& steps) {
  ScaleLedger L;
  for (const auto& st : steps) {
    if (!L.scales.count(st.attach))
      throw InconsistentScenario("run_scenario: no scale nu^" + to_string(st.attach) + " to attach to");
    const Rational e = rescale_flow(Rational(1), st.attach);
    LedgerEntry h{st.kind, st.attach, e, st.attach};
    if (st.kind == StepKind::prandtl) {
      L.scales.insert(st.attach + Rational(1, 2));
    } else {
      const auto t = st.kind == StepKind::slow ? slow_instability_template(e) : fast_instability_template(e);
      for (const auto& r : t.scales) L.scales.insert(st.attach + r);
      h.time = st.attach - t.growth;
    }
    L.history.push_back(h);
  }
  return L;
}

inline std::vector<std::string> scenario_names() { return {"thm1", "thm2", "thm3", "thm4"}; }

inline std::vector<ScenarioStep> named_scenario(const std::string& name) {
  const Rational z(0), half(1, 2), three_q(3, 4);
  if (name == "thm1") return {{z, StepKind::slow}};
  if (name == "thm2") return {{z, StepKind::fast}, {half, StepKind::slow}};
  if (name == "thm3") return {{z, StepKind::prandtl}, {half, StepKind::fast}, {three_q, StepKind::slow}};
  if (name == "thm4") return {{z, StepKind::prandtl}, {half, StepKind::slow}};
  throw DomainError("unknown scenario '" + name + "'");
}

inline ScaleLedger run_scenario(const std::string& name) { return run_scenario(named_scenario(name)); }

}  // namespace shearstab
