#include <CLI11.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <iostream>
#include <thread>

#include "acceptance.hpp"
#include "shearstab/amplitude.hpp"
#include "shearstab/cascade.hpp"
#include "shearstab/io.hpp"
#include "shearstab/orr/modes.hpp"
#include "shearstab/orr/neutral.hpp"
#include "shearstab/rayleigh.hpp"
#include "shearstab/wavepacket.hpp"

using namespace shearstab;
namespace fs = std::filesystem;
using io::Json;

namespace {

struct Flags {
  std::string config, out = ".", scenario, tier = "fast";
  int workers = 1;
};

// Runs fn(i) for i < n on up to `workers` threads; results stay in index
// order and the first failure by index is rethrown, so output never depends
// on the worker count.
template <class T, class F>
std::vector<T> parallel_map(size_t n, int workers, F fn) {
  std::vector<std::optional<T>> res(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next++) < n;) {
      try {
        res[i] = fn(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min<int>(workers, int(n)); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::vector<T> out;
  for (size_t i = 0; i < n; ++i) {
    if (err[i]) std::rethrow_exception(err[i]);
    out.push_back(std::move(*res[i]));
  }
  return out;
}

Json config_of(const Flags& f) {
  if (f.config.empty()) throw UsageError("--config is required");
  return io::load_config(f.config);
}

std::string out_path(const Flags& f, const std::string& name) {
  fs::create_directories(f.out);
  return (fs::path(f.out) / name).string();
}

std::vector<double> alpha_grid(const Json& j) {
  if (io::find_field(j, "alpha_list")) return io::number_list(j, "alpha_list");
  const double lo = io::number(j, "alpha.min"), hi = io::number(j, "alpha.max");
  const int n = io::integer_or(j, "alpha.count", 11);
  if (!(lo > 0 && hi >= lo) || n < 1) throw UsageError("config field 'alpha': need 0 < min <= max and count >= 1");
  std::vector<double> a;
  for (int i = 0; i < n; ++i) a.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return a;
}

}  // namespace

namespace cmd {

void rayleigh_scan(const Flags& f) {
  const Json j = config_of(f);
  const auto p = io::profile_from_config(j);
  const auto alphas = alpha_grid(j);
  const cplx guess = io::find_field(j, "c_guess") ? io::complex_number(j, "c_guess") : cplx(0.4, 0.1);
  const auto modes = parallel_map<std::optional<RayleighMode>>(
      alphas.size(), f.workers, [&](size_t i) { return find_rayleigh_mode(p, alphas[i], guess); });
  io::CsvTable t{{"alpha", "c_re", "c_im", "converged"}, {}};
  for (size_t i = 0; i < alphas.size(); ++i) {
    const cplx c = modes[i] ? modes[i]->c : cplx(NAN, NAN);
    t.add(alphas[i], c.real(), c.imag(), bool(modes[i]));
  }
  io::write_text(out_path(f, "rayleigh_scan.csv"), t.str());
}

// Point list for os eig: rescaled (alpha~, c~ guess) or raw (alpha, c guess).
struct EigJob {
  double nu, alpha;
  cplx guess;
};

void os_eig(const Flags& f) {
  const Json j = config_of(f);
  const auto p = io::profile_from_config(j);
  const auto nus = io::nu_list(j);
  std::vector<EigJob> jobs;
  const bool rescaled = io::find_field(j, "alpha_tilde_list") != nullptr;
  const auto alist = io::number_list(j, rescaled ? "alpha_tilde_list" : "alpha_list");
  const cplx g = rescaled ? (io::find_field(j, "c_tilde_guess") ? io::complex_number(j, "c_tilde_guess") : cplx(2.4, 0.1))
                          : io::complex_number(j, "c_guess");
  for (double nu : nus)
    for (double a : alist) {
      const double q = rescaled ? std::pow(nu, 0.25) : 1.0;
      jobs.push_back({nu, a * q, g * q});
    }
  const auto pts = parallel_map<std::optional<SpectralPoint>>(
      jobs.size(), f.workers, [&](size_t i) { return find_eigenvalue(p, jobs[i].alpha, jobs[i].nu, jobs[i].guess); });
  io::CsvTable t{{"nu", "alpha", "c_re", "c_im", "lambda_re", "lambda_im", "residual", "converged"}, {}};
  for (size_t i = 0; i < jobs.size(); ++i) {
    const auto& s = pts[i];
    const cplx c = s ? s->c : cplx(NAN, NAN), l = s ? s->lambda() : cplx(NAN, NAN);
    t.add(jobs[i].nu, jobs[i].alpha, c.real(), c.imag(), l.real(), l.imag(), s ? s->residual : NAN, bool(s));
  }
  io::write_text(out_path(f, "os_eig.csv"), t.str());
}

void os_neutral(const Flags& f) {
  const Json j = config_of(f);
  const auto c = neutral_curves(io::profile_from_config(j), io::nu_list(j));
  io::CsvTable t{{"nu", "unstable", "alpha_minus", "alpha_plus", "c_minus_re", "c_minus_im", "c_plus_re", "c_plus_im"}, {}};
  for (const auto& s : c.samples)
    t.add(s.nu, s.unstable, s.alpha_minus, s.alpha_plus, s.c_minus.real(), s.c_minus.imag(), s.c_plus.real(),
          s.c_plus.imag());
  io::write_text(out_path(f, "neutral.csv"), t.str());
  io::CsvTable fit{{"e_minus", "C_minus", "e_plus", "C_plus"}, {}};
  fit.add(c.e_minus, c.C_minus, c.e_plus, c.C_plus);
  io::write_text(out_path(f, "neutral_fit.csv"), fit.str());
}

SpectralPoint point_from(const Json& j, const ShearProfile& p) {
  const double nu = io::number(j, "nu");
  if (!(nu > 0 && nu < 1)) throw UsageError("config field 'nu': must lie in (0, 1)");
  const double q = std::pow(nu, 0.25);
  const bool rescaled = io::find_field(j, "alpha_tilde") != nullptr;
  const double alpha = rescaled ? io::number(j, "alpha_tilde") * q : io::number(j, "alpha");
  const cplx g = rescaled ? (io::find_field(j, "c_tilde_guess") ? io::complex_number(j, "c_tilde_guess") : cplx(2.4, 0.1)) * q
                          : io::complex_number(j, "c_guess");
  const auto sp = find_eigenvalue(p, alpha, nu, g);
  if (!sp) throw RootNotFound("find_eigenvalue: no eigenvalue near the configured guess", g);
  return *sp;
}

void os_mode(const Flags& f) {
  const Json j = config_of(f);
  const auto p = io::profile_from_config(j);
  const auto sp = point_from(j, p);
  const bool adj = io::find_field(j, "adjoint") && io::field(j, "adjoint").is_boolean() && io::field(j, "adjoint").get<bool>();
  const auto m = adj ? adjoint_eigenmode(sp, p) : eigenmode(sp, p);
  io::BinaryTable b;
  b.meta = {{"kind", adj ? "adjoint" : "direct"},
            {"profile", p.label()},
            {"alpha", io::format_double(sp.alpha)},
            {"nu", io::format_double(sp.nu)},
            {"c_re", io::format_double(sp.c.real())},
            {"c_im", io::format_double(sp.c.imag())}};
  std::vector<double> pr, pi, wr, wi;
  for (size_t i = 0; i < m.psi.size(); ++i) {
    pr.push_back(m.psi[i].real());
    pi.push_back(m.psi[i].imag());
    wr.push_back(m.omega[i].real());
    wi.push_back(m.omega[i].imag());
  }
  b.add_column("y", m.grid.y);
  b.add_column("psi_re", pr);
  b.add_column("psi_im", pi);
  b.add_column("omega_re", wr);
  b.add_column("omega_im", wi);
  io::write_osm1(out_path(f, "mode.osm1"), b);
  io::CsvTable t{{"alpha", "nu", "c_re", "c_im", "residual", "outer_rate", "middle_rate", "wall_rate", "outer_vorticity_ratio"},
                 {}};
  t.add(sp.alpha, sp.nu, sp.c.real(), sp.c.imag(), m.residual, m.scale_rates[0], m.scale_rates[1], m.scale_rates[2],
        m.outer_vorticity_ratio);
  io::write_text(out_path(f, "mode_summary.csv"), t.str());
}


std::vector<double> range_of(const Json& j, const std::string& path) {
  const double lo = io::number(j, path + ".min"), hi = io::number(j, path + ".max");
  const int n = io::integer_or(j, path + ".count", 201);
  if (!(hi >= lo) || n < 1) throw UsageError("config field '" + path + "': need min <= max and count >= 1");
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

void packet_grow(const Flags& f) {
  const Json j = config_of(f);
  const auto p = io::profile_from_config(j);
  const auto carrier = point_from(j, p);
  const auto fam = sample_mode_family(p, carrier, io::number_or(j, "beta", 0.26));
  const PacketOptions po{io::integer_or(j, "quadrature", 96)};
  const auto ts = io::number_list(j, "t_list");
  if (ts.empty()) throw UsageError("config field 't_list': must not be empty");
  const auto s = parallel_map<GrowthSample>(ts.size(), f.workers,
                                            [&](size_t i) { return packet_growth(fam, {ts[i]}, po).samples.at(0); });
  io::CsvTable t{{"t", "max_amp", "argmax_x"}, {}};
  for (const auto& g : s) t.add(g.t, g.amplitude, g.argmax_x);
  io::write_text(out_path(f, "packet_growth.csv"), t.str());
  if (!io::find_field(j, "snapshot")) return;
  const double ts0 = io::number(j, "snapshot.t");
  const auto x = range_of(j, "snapshot.x");
  std::vector<int> yi;
  for (double v : io::number_list(j, "snapshot.y_index")) {
    if (v != std::floor(v) || v < 0 || v >= double(fam.grid.y.size()))
      throw UsageError("config field 'snapshot.y_index': entries must be grid indices");
    yi.push_back(int(v));
  }
  const auto w = build_wavepacket(fam, ts0, x, yi, po);
  io::BinaryTable b;
  b.meta = {{"t", io::format_double(ts0)},
            {"nu", io::format_double(fam.nu)},
            {"alpha0_tilde", io::format_double(fam.alpha0)},
            {"beta", io::format_double(fam.beta)}};
  b.add_column("x", x);
  for (size_t k = 0; k < yi.size(); ++k) {
    std::vector<double> re(x.size()), im(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      re[i] = w.field(i, k).real();
      im[i] = w.field(i, k).imag();
    }
    const std::string tag = "y" + std::to_string(yi[k]);
    b.meta[tag] = io::format_double(fam.grid.y[yi[k]]);
    b.add_column(tag + "_re", re);
    b.add_column(tag + "_im", im);
  }
  io::write_osm1(out_path(f, "packet_snapshot.osm1"), b);
}

std::string kind_name(SaturationKind k) {
  switch (k) {
    case SaturationKind::saturates: return "saturates";
    case SaturationKind::escapes: return "escapes";
    case SaturationKind::stable: return "stable";
  }
  return "?";
}

void landau_run(const Flags& f) {
  const Json j = config_of(f);
  const LandauModel m{io::complex_number(j, "lambda"), io::complex_number(j, "A"), io::complex_number(j, "phi0")};
  const double T = io::number(j, "T");
  const double dt = io::number_or(j, "dt", 0.05 / std::max(std::abs(m.lambda), 1e-300));
  const auto tr = integrate_landau(m, T, dt);
  io::CsvTable t{{"t", "phi_re", "phi_im", "modulus", "phase"}, {}};
  for (size_t i = 0; i < tr.t.size(); ++i) t.add(tr.t[i], tr.phi[i].real(), tr.phi[i].imag(), tr.modulus[i], tr.phase[i]);
  io::write_text(out_path(f, "landau.csv"), t.str());
  const auto sat = classify_saturation(m);
  Json s = {{"kind", kind_name(sat.kind)},
            {"amplitude", sat.amplitude},
            {"escape_time", sat.time},
            {"blow_up", tr.blow_up},
            {"final_modulus", tr.modulus.back()}};
  if (std::isfinite(tr.validity_exceeded_at)) s["validity_exceeded_at"] = tr.validity_exceeded_at;
  if (io::find_field(j, "nu")) {
    const double nu = io::number(j, "nu");
    const auto it = instability_time(nu, io::number(j, "N"), io::number_or(j, "theta", 0.0), m.lambda.real() / std::sqrt(nu));
    s["instability_time"] = {{"T", it.T}, {"ratio", it.ratio}, {"residual", it.residual}};
  }
  io::write_text(out_path(f, "landau_summary.json"), s.dump(2) + "\n");
}

void cascade_run(const Flags& f) {
  const auto names = scenario_names();
  if (std::find(names.begin(), names.end(), f.scenario) == names.end())
    throw UsageError("--scenario must be one of thm1, thm2, thm3, thm4");
  const auto L = run_scenario(f.scenario);
  Json s = {{"scenario", f.scenario}, {"scales", Json::array()}, {"time_exponent", to_string(L.time_exponent())}};
  for (const auto& r : L.scales) s["scales"].push_back(to_string(r));
  const std::string text = s.dump() + "\n";
  std::cout << text;
  io::write_text(out_path(f, "cascade_" + f.scenario + ".json"), text);
}

int verify(const Flags& f) {
  if (f.tier != "fast" && f.tier != "full") throw UsageError("--tier must be fast or full");
  return acceptance::run(f.tier == "full" ? acceptance::Tier::full : acceptance::Tier::fast, std::cout);
}

}  // namespace cmd

int main(int argc, char** argv) {
  CLI::App app{"shearstab: hydrodynamic stability of shear layers"};
  app.require_subcommand(1);
  Flags f;
  std::string op;
  std::function<int()> action;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, const std::string& opname,
                  std::function<int()> fn) {
    auto* c = parent->add_subcommand(name, desc);
    c->add_option("--config", f.config, "JSON config file");
    c->add_option("--out", f.out, "output directory");
    c->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1, 256));
    c->callback([&, opname, fn] {
      op = opname;
      action = fn;
    });
    return c;
  };
  auto unit = [](void (*g)(const Flags&), const Flags& fl) { return [g, &fl] { return g(fl), 0; }; };

  auto* ray = app.add_subcommand("rayleigh", "inviscid spectra")->require_subcommand(1);
  leaf(ray, "scan", "Rayleigh eigenvalue scan over alpha", "rayleigh scan", unit(cmd::rayleigh_scan, f));
  auto* os = app.add_subcommand("os", "Orr-Sommerfeld spectra and modes")->require_subcommand(1);
  leaf(os, "eig", "eigenvalues over alpha and nu", "os eig", unit(cmd::os_eig, f));
  leaf(os, "neutral", "unstable bands and neutral-curve fit", "os neutral", unit(cmd::os_neutral, f));
  leaf(os, "mode", "eigenfunction or adjoint", "os mode", unit(cmd::os_mode, f));
  auto* pk = app.add_subcommand("packet", "wave packets")->require_subcommand(1);
  leaf(pk, "grow", "packet amplitude history and snapshot", "packet grow", unit(cmd::packet_grow, f));
  auto* la = app.add_subcommand("landau", "amplitude equation")->require_subcommand(1);
  leaf(la, "run", "integrate the Landau equation", "landau run", unit(cmd::landau_run, f));
  auto* ca = app.add_subcommand("cascade", "exact scale ledgers")->require_subcommand(1);
  leaf(ca, "run", "run a named cascade scenario", "cascade run", unit(cmd::cascade_run, f))
      ->add_option("--scenario", f.scenario, "thm1, thm2, thm3 or thm4");
  leaf(&app, "verify", "acceptance criteria", "verify", [&] { return cmd::verify(f) == 0 ? 0 : 1; })
      ->add_option("--tier", f.tier, "fast or full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error in " << op << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error in " << op << ": " << e.what() << "\n";
    return 1;
  }
}
