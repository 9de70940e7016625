#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

#include "rbk/rbk.hpp"

namespace rbk::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Maps the library's exception taxonomy onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const InvalidInput& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

RunConfig config_from(const Options& opt) {
  RunConfig rc = load_config(opt.config);
  if (!opt.chart.empty()) {
    rc.chart = parse_chart(opt.chart);
    if (rc.chart == Chart::log_t && !(rc.t_end > 1.0)) throw ConfigError("log-t chart needs t_end > 1");
  }
  if (opt.cap) {
    if (!(*opt.cap > 0.0)) throw ConfigError("--cap must be positive");
    rc.cap = *opt.cap;
  }
  return rc;
}

void write_file(const std::string& path, const std::string& content) {
  if (path.empty()) throw UsageError("--out is required");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + path + "'");
  os << content;
  if (!os) throw UsageError("write to '" + path + "' failed");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

Trajectory run_trajectory(const RunConfig& rc) {
  switch (rc.chart) {
    case Chart::t:
      return integrate_t_chart(rc.system.c0, rc.t_end, rc.settings, make_time_grid(rc.t_end, rc.points_per_decade));
    case Chart::log_t:
      return integrate_logtime(rc.system.c0, rc.t_end, rc.settings, rc.points_per_decade);
    case Chart::phi_y:
      return integrate_phi_to_blowup(rc.blowup_start(), rc.cap, rc.settings, rc.points_per_decade).trajectory;
    case Chart::psi_tau:
      break;
  }
  throw ConfigError("chart not supported for simulation");
}

Json laws_json(const std::vector<AsymptoticLaw>& laws) {
  Json a = Json::array();
  for (std::size_t i = 0; i < laws.size(); ++i)
    a.push_back({{"j", i + 1}, {"exponent", laws[i].exponent}, {"prefactor", laws[i].prefactor}});
  return a;
}

Json theorem_json(const TheoremConstants& tc) {
  Json a = Json::array();
  for (const auto& ll : tc.laws)
    a.push_back({{"j", ll.index}, {"log_exponent", ll.law.exponent}, {"prefactor", ll.law.prefactor}});
  return a;
}

Json blowup_report(const BlowupRun& run, double cap) {
  const int n = static_cast<int>(run.trajectory.dimension()) + 1;
  const Lemma2Report l2 = lemma2_diagnostic(run.trajectory, run.omega);
  Json rep;
  rep["N"] = n;
  rep["cap"] = cap;
  rep["samples"] = run.trajectory.size();
  rep["y_last"] = run.trajectory.back().x;
  rep["omega"] = {{"value", run.omega.omega},
                  {"uncertainty", run.omega.uncertainty},
                  {"method", to_string(run.omega.method)}};
  rep["window_too_short"] = l2.window_too_short;
  rep["theoretical_laws"] = laws_json(l2.theory);
  Json fitted = Json::array();
  for (std::size_t i = 0; i < l2.fitted.size(); ++i)
    fitted.push_back({{"j", i + 1},
                      {"exponent", l2.fitted[i].exponent},
                      {"prefactor", l2.fitted[i].prefactor},
                      {"log_rms_residual", l2.fitted[i].residual}});
  rep["fitted_laws"] = fitted;
  Json rho = Json::array();
  for (const auto& d : l2.residuals)
    rho.push_back({{"label", d.label}, {"window_start", d.residuals[l2.window_begin]}, {"final", d.residuals.back()}});
  rep["rho"] = rho;
  Json psi = Json::array();
  for (const auto& d : psi_diagnostic(run.trajectory))
    psi.push_back({{"label", d.label}, {"tau", d.empty() ? 0.0 : d.abscissae.back()},
                   {"final", d.empty() ? 0.0 : d.residuals.back()}});
  rep["rho_hat"] = psi;
  Json ratios = Json::array();
  for (const auto& r : ratio_divergence(run.trajectory))
    ratios.push_back({{"j", r.j}, {"final_ratio", r.final_ratio}, {"increasing_last_decade", r.increasing_last_decade}});
  rep["ratio_divergence"] = ratios;
  return rep;
}

// ---- verify --------------------------------------------------------------

struct Checklist {
  std::ostream& out;
  bool all = true;

  void check(bool ok, const std::string& name, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    all = all && ok;
  }
  void info(const std::string& name, const std::string& detail) { out << "INFO " << name << ": " << detail << '\n'; }
};

RunConfig verify_config(const Options& opt, int default_n) {
  if (!opt.config.empty()) return config_from(opt);
  Json doc = {{"N", default_n}, {"c0", {{"random", {{"low", 0.1}, {"high", 1.0}}}}}, {"seed", 0}};
  RunConfig rc = parse_config(doc);
  if (opt.cap) rc.cap = *opt.cap;
  return rc;
}

int verify_identities(const Options& opt, std::ostream& out) {
  RunConfig rc = verify_config(opt, 5);
  if (rc.chart == Chart::phi_y) rc.chart = Chart::t;
  const Trajectory tr = run_trajectory(rc);
  const IdentityReport rep = identity_suite(tr);
  Checklist cl{out};
  for (const IdentityCheck* c : {&rep.nu_odd, &rep.c_n, &rep.dissipation})
    cl.check(c->pass, c->name,
             "max rel err " + fmt(c->max_error) + " at t=" + fmt(c->worst_x) + " over " + std::to_string(c->checked) +
                 " samples (threshold " + fmt(c->threshold) +
                 (c == &rep.dissipation ? " + 2 h1 h2 nu^2 per sample" : "") + ")");
  return cl.all ? kOk : kNumerical;
}

int verify_support(const Options& opt, std::ostream& out) {
  RunConfig rc = verify_config(opt, 6);
  if (rc.chart == Chart::phi_y) rc.chart = Chart::t;
  const SupportProfile sp = support_profile(rc.system.c0, 0.0);
  Checklist cl{out};
  cl.info("support", "m=" + std::to_string(sp.m) + " p=" + std::to_string(sp.p) + " n_eff=" + std::to_string(sp.n_eff));
  const Trajectory tr = run_trajectory(rc);

  bool off_zero = true, odd_zero = true;
  for (const auto& s : tr.samples())
    for (std::size_t i = 0; i < s.state.size(); ++i) {
      const int j = static_cast<int>(i + 1);
      const bool bit_zero = s.state[i] == 0.0 && !std::signbit(s.state[i]);
      if (!sp.on_lattice(j) && !bit_zero) off_zero = false;
      if (j % 2 == 1 && !bit_zero) odd_zero = false;
    }
  cl.check(off_zero, "off-lattice components bitwise zero", std::to_string(tr.size()) + " samples to t=" + fmt(tr.back().x));
  if (sp.m % 2 == 0) cl.check(odd_zero, "odd components bitwise zero (parity closure)", "all samples");

  const ReducedSystem red = gcd_reduce(rc.system);
  const Vector back = embed_reduced(red.config.c0, red.m, rc.system.n);
  cl.check(back == rc.system.c0, "gcd_reduce/embed_reduced round trip", "exact equality");

  bool commutes = true;
  for (const auto* s : {&tr.front(), &tr.back()}) {
    Vector reduced(static_cast<std::size_t>(sp.n_eff));
    for (int j = 1; j <= sp.n_eff; ++j) reduced[static_cast<std::size_t>(j - 1)] = s->state[static_cast<std::size_t>(j * sp.m - 1)];
    commutes = commutes && rbk_field(s->state) == embed_reduced(rbk_field(reduced), sp.m, rc.system.n);
  }
  cl.check(commutes, "field commutes with embedding", "bitwise at first and last sample");

  const SupportProfile end = support_profile(tr.back().state, evolved_zero_tol(densities(rc.system.c0).total));
  cl.check(end.m == sp.m && end.p == sp.p, "support lattice preserved",
           "final m=" + std::to_string(end.m) + " p=" + std::to_string(end.p));
  return cl.all ? kOk : kNumerical;
}

/// Decade checkpoints 1e4, 1e6, ... up to t_end.
Vector theorem_checkpoints(double t_end) {
  Vector cp;
  for (double t = 1e4; t <= t_end * (1.0 + 1e-12); t *= 100.0) cp.push_back(t);
  return cp;
}

int verify_asymptotics(const Options& opt, std::ostream& out) {
  RunConfig rc = verify_config(opt, 4);
  if (rc.system.n < 3) throw ConfigError("blowup constants undefined for N = 2; asymptotics suite needs N >= 3");
  const Vector phi0 = rc.blowup_start();
  const BlowupRun run = integrate_phi_to_blowup(phi0, rc.cap, rc.settings, rc.points_per_decade);
  const Lemma2Report l2 = lemma2_diagnostic(run.trajectory, run.omega);
  const int n = rc.system.n;
  Checklist cl{out};
  cl.info("omega", fmt(run.omega.omega) + " +- " + fmt(run.omega.uncertainty) + " (" + to_string(run.omega.method) + ")");
  if (l2.window_too_short) {
    cl.check(false, "blowup window", "window too short (phi_1 reached " + fmt(run.trajectory.back().state[0]) + ")");
    return kNumerical;
  }
  for (int j = 1; j < n; ++j) {
    const auto& th = l2.theory[static_cast<std::size_t>(j - 1)];
    const auto& fit = l2.fitted[static_cast<std::size_t>(j - 1)];
    const double de = std::abs(fit.exponent - th.exponent) / th.exponent;
    const double dp = std::abs(fit.prefactor - th.prefactor) / th.prefactor;
    cl.check(de < 0.05, "alpha_" + std::to_string(j), "fitted " + fmt(fit.exponent) + " vs " + fmt(th.exponent));
    cl.check(dp < 0.20, "A_" + std::to_string(j), "fitted " + fmt(fit.prefactor) + " vs " + fmt(th.prefactor));
    const auto& rho = l2.residuals[static_cast<std::size_t>(j - 1)];
    const double r0 = std::abs(rho.residuals[l2.window_begin]), r1 = std::abs(rho.residuals.back());
    cl.check(r1 < r0, "rho_" + std::to_string(j) + " shrinking", fmt(r0) + " -> " + fmt(r1));
  }
  const auto psi = psi_diagnostic(run.trajectory);
  for (const auto& d : psi)
    cl.check(std::abs(d.residuals.back()) < 0.1, d.label, "final " + fmt(d.residuals.back()) + " at tau=" + fmt(d.abscissae.back()));
  {
    const auto& d = psi.back();
    const double expected = phi0.back() / d.abscissae.back();
    const double rel = std::abs(d.residuals.back() - expected) / expected;
    cl.check(rel < 1e-9, "psi_{N-1} - tau constant", "residual " + fmt(d.residuals.back()) + " vs psi_{N-1}(0)/tau " + fmt(expected));
  }
  for (const auto& r : ratio_divergence(run.trajectory))
    cl.check(r.increasing_last_decade, "phi_" + std::to_string(r.j) + "/phi_" + std::to_string(r.j + 1) + " diverging",
             "final " + fmt(r.final_ratio));

  const bool ones = std::all_of(phi0.begin(), phi0.end(), [](double v) { return v == 1.0; });
  if (ones && n <= 5) {
    try {
      const Json fx = load_fixtures();
      const Json& f = fixture(fx, omega_fixture_id(n));
      const double ref = f.at("extrapolated").get<double>();
      const double rel = std::abs(run.omega.omega - ref) / ref;
      cl.check(rel < f.at("tolerance").get<double>(), "omega vs oracle fixture", "rel diff " + fmt(rel));
    } catch (const std::exception& e) {
      cl.info("omega vs oracle fixture", std::string("skipped: ") + e.what());
    }
  }

  if (rc.chart == Chart::log_t && rc.t_end >= 1e6) {
    const SupportProfile sp = support_profile(rc.system.c0, 0.0);
    if (sp.n_eff >= 3) {
      const Trajectory lt = integrate_logtime(rc.system.c0, rc.t_end, rc.settings, rc.points_per_decade);
      const Vector cp = theorem_checkpoints(rc.t_end);
      const ConstantsProbe probe = probe_theorem_constants(lt, sp, cp);
      cl.check(probe.reduced.matches, "long-time law trend", "e_j shrinking across " + list(cp));
    }
  }
  return cl.all ? kOk : kNumerical;
}

int verify_theorem_constants(const Options& opt, std::ostream& out) {
  if (!opt.n || !opt.m) throw UsageError("theorem-constants needs --N and --m");
  const int n = *opt.n, m = *opt.m;
  if (n < 2 || m < 1 || m > n) throw UsageError("need N >= 2 and 1 <= m <= N");
  const int p = opt.p ? *opt.p : (n / m) * m;
  if (p < m || p > n || p % m != 0) throw UsageError("need m | p and p <= N");
  if (n > kMaxConstantDimension) throw UsageError("N above " + std::to_string(kMaxConstantDimension) + " overflows the factorial table");
  const int n_eff = p / m;
  if (n_eff < 2)
    throw ConfigError("n_eff = 1 is the single-component case: c_p(t) = 1/(c_p(0)^-1 + t) in closed form");

  Vector c0;
  double t_end = 1e8;
  IntegratorSettings settings;
  int ppd = 64;
  if (!opt.config.empty()) {
    const RunConfig rc = config_from(opt);
    if (rc.system.n != n) throw ConfigError("config N differs from --N");
    c0 = rc.system.c0;
    if (rc.t_end >= 1e6) t_end = rc.t_end;
    settings = rc.settings;
    ppd = rc.points_per_decade;
  } else {
    c0.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = m; j <= p; j += m) c0[static_cast<std::size_t>(j - 1)] = 1.0;
  }
  const SupportProfile sp = support_profile(c0, 0.0);
  if (sp.m != m || sp.p != p)
    throw ConfigError("initial data support (m=" + std::to_string(sp.m) + ", p=" + std::to_string(sp.p) +
                      ") does not match --m/--p");

  const TheoremConstants red = theorem_constants(n_eff, m, PrefactorVariant::reduced);
  const TheoremConstants asp = theorem_constants(n_eff, m, PrefactorVariant::as_printed, n);
  auto prefactors = [](const TheoremConstants& tc) {
    Vector v;
    for (const auto& ll : tc.laws) v.push_back(ll.law.prefactor);
    return v;
  };
  Checklist cl{out};
  cl.info("lattice", "N=" + std::to_string(n) + " m=" + std::to_string(m) + " p=" + std::to_string(p) +
                         " n_eff=" + std::to_string(n_eff));
  cl.info("reduction prefactors", list(prefactors(red)));
  cl.info("as-printed prefactors", list(prefactors(asp)));

  const Trajectory lt = integrate_logtime(c0, t_end, settings, ppd);
  const Vector cp = theorem_checkpoints(t_end);
  const ConstantsProbe probe = probe_theorem_constants(lt, sp, cp);
  for (const auto* vv : {&probe.reduced, &probe.as_printed}) {
    const char* name = to_string(vv->diagnostic.constants.variant);
    for (const auto& d : vv->diagnostic.residuals) {
      Vector vals;
      for (double t : cp) vals.push_back(value_near(d, t));
      cl.info(std::string(name) + " " + d.label, "at t=" + list(cp) + ": " + list(vals));
    }
  }
  const std::string rule = "|e_j| strictly decreasing and |e_j(" + fmt(cp.back()) + ")| < " + fmt(probe.threshold);
  out << "VERDICT reduction " << list(prefactors(red)) << ": " << (probe.reduced.matches ? "MATCH" : "NO MATCH")
      << " (" << rule << ")\n";
  out << "VERDICT as-printed " << list(prefactors(asp)) << ": " << (probe.as_printed.matches ? "MATCH" : "NO MATCH")
      << '\n';
  if (!red.established) {
    cl.info("n_eff = 2", "long-time law not established for reduced dimension 2; verdict is a probe only");
    return kOk;
  }
  cl.check(probe.reduced.matches, "reduction prefactors match simulation", rule);
  return cl.all ? kOk : kNumerical;
}

// ---- sweep ---------------------------------------------------------------

struct Cell {
  Json config;
  Json params;
};

std::vector<Cell> expand_grid(const Json& base, const Json& grid) {
  std::vector<Cell> cells{{base, Json::object()}};
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) return {};
    std::vector<Cell> next;
    for (const auto& c : cells)
      for (const auto& v : values) {
        Cell nc = c;
        nc.config[key] = v;
        nc.params[key] = v;
        next.push_back(std::move(nc));
      }
    cells = std::move(next);
  }
  return cells;
}

struct CellResult {
  bool ok = false;
  std::string status;
  std::string error;
};

std::string cell_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cell_%03zu", i);
  return buf;
}

CellResult run_cell(const Cell& cell, const fs::path& dir, std::size_t idx) {
  CellResult res;
  const std::string stem = cell_name(idx);
  try {
    const RunConfig rc = parse_config(cell.config);
    Json rep;
    rep["id"] = stem;
    rep["params"] = cell.params;
    rep["config"] = cell.config;
    rep["chart"] = to_string(rc.chart);
    std::string csv;
    if (rc.chart == Chart::phi_y) {
      const BlowupRun run = integrate_phi_to_blowup(rc.blowup_start(), rc.cap, rc.settings, rc.points_per_decade);
      csv = to_csv(run.trajectory);
      rep["diagnostics"] = blowup_report(run, rc.cap);
    } else {
      const Trajectory tr = run_trajectory(rc);
      csv = to_csv(tr);
      const IdentityReport ir = identity_suite(tr);
      Json id = Json::object();
      for (const IdentityCheck* c : {&ir.nu_odd, &ir.c_n, &ir.dissipation})
        id[c->name] = {{"max_rel_error", c->max_error}, {"threshold", c->threshold}, {"pass", c->pass}};
      rep["diagnostics"]["identities"] = id;
      rep["diagnostics"]["samples"] = tr.size();
      rep["diagnostics"]["final"] = {{"t", tr.back().x}, {"c", tr.back().state}};
      const double nu0 = densities(rc.system.c0).total;
      if (nu0 > 0.0) {
        const SupportProfile sp = support_profile(tr.back().state, evolved_zero_tol(nu0));
        rep["diagnostics"]["support"] = {{"m", sp.m}, {"p", sp.p}, {"n_eff", sp.n_eff}};
      }
    }
    write_file((dir / (stem + ".csv")).string(), csv);
    write_file((dir / (stem + ".json")).string(), rep.dump(2) + "\n");
    res.ok = true;
    res.status = "ok";
  } catch (const ConfigError& e) {
    res.status = "invalid_config";
    res.error = e.what();
  } catch (const InvalidInput& e) {
    res.status = "invalid_config";
    res.error = e.what();
  } catch (const std::exception& e) {
    res.status = "numerical_failure";
    res.error = e.what();
  }
  return res;
}

}  // namespace

std::string report_path(const std::string& csv_path) {
  fs::path p(csv_path);
  if (p.extension() == ".csv") return p.replace_extension(".json").string();
  return csv_path + ".json";
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.config.empty()) throw UsageError("--config is required");
    if (opt.out.empty()) throw UsageError("--out is required");
    const RunConfig rc = config_from(opt);
    if (rc.theorem_check) {
      const SupportProfile sp = support_profile(rc.system.c0, 0.0);
      if (sp.n_eff < 2)
        throw ConfigError("theorem check on a single-component (n_eff = 1) system: c_p(t) = 1/(c_p(0)^-1 + t) "
                          "in closed form, no long-time law to verify");
    }
    const Trajectory tr = run_trajectory(rc);
    write_file(opt.out, to_csv(tr));
    out << "wrote " << tr.size() << " samples (" << to_string(tr.chart()) << " chart) to " << opt.out << '\n';
    if (rc.theorem_check && rc.chart != Chart::phi_y && tr.back().x > 1.0) {
      const SupportProfile sp = support_profile(rc.system.c0, 0.0);
      const TheoremDiagnostic td = theorem_diagnostic(tr, sp);
      for (const auto& d : td.residuals)
        out << d.label << "(t=" << fmt(d.abscissae.back()) << ") = " << fmt(d.residuals.back()) << '\n';
    }
    return kOk;
  });
}

int cmd_blowup(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.config.empty()) throw UsageError("--config is required");
    if (opt.out.empty()) throw UsageError("--out is required");
    const RunConfig rc = config_from(opt);
    if (rc.system.n < 3) throw ConfigError("blowup constants undefined for N = 2 (alpha_j has N-2 in the denominator)");
    const BlowupRun run = integrate_phi_to_blowup(rc.blowup_start(), rc.cap, rc.settings, rc.points_per_decade);
    const Json rep = blowup_report(run, rc.cap);
    write_file(opt.out, to_csv(run.trajectory, {"tau"}));
    const std::string rp = report_path(opt.out);
    write_file(rp, rep.dump(2) + "\n");
    out << "omega = " << format_double(run.omega.omega) << " +- " << fmt(run.omega.uncertainty) << " ("
        << to_string(run.omega.method) << "); report " << rp << '\n';
    if (rep.at("window_too_short").get<bool>()) out << "warning: window too short for the terminal-window fit\n";
    return kOk;
  });
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.suite == "identities") return verify_identities(opt, out);
    if (opt.suite == "support") return verify_support(opt, out);
    if (opt.suite == "asymptotics") return verify_asymptotics(opt, out);
    if (opt.suite == "theorem-constants") return verify_theorem_constants(opt, out);
    throw UsageError("unknown suite '" + opt.suite + "' (identities, support, asymptotics, theorem-constants)");
  });
}

int cmd_constants(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!opt.n) throw UsageError("--N is required");
    const int n = *opt.n;
    const int m = opt.m.value_or(1);
    const int p = opt.p.value_or((n / std::max(m, 1)) * std::max(m, 1));
    if (n < 2) throw UsageError("N must be >= 2");
    if (n > kMaxConstantDimension)
      throw UsageError("N = " + std::to_string(n) + " overflows the exact factorial table (max " +
                       std::to_string(kMaxConstantDimension) + ")");
    if (m < 1 || p < m || p > n || p % m != 0) throw UsageError("invalid N/m/p: need 1 <= m, m | p, p <= N");
    const int n_eff = p / m;
    if (n_eff < 2) throw UsageError("n_eff = p/m = 1: single-component closed form, no constants table");
    Json doc;
    doc["N"] = n;
    doc["m"] = m;
    doc["p"] = p;
    doc["n_eff"] = n_eff;
    const TheoremConstants red = theorem_constants(n_eff, m, PrefactorVariant::reduced);
    const TheoremConstants asp = theorem_constants(n_eff, m, PrefactorVariant::as_printed, n);
    doc["theorem"] = {{"established", red.established},
                      {"reduction", theorem_json(red)},
                      {"as_printed", theorem_json(asp)}};
    if (n >= 3)
      doc["lemma2"] = laws_json(lemma2_constants(n));
    else
      doc["lemma2"] = nullptr;
    out << doc.dump(2) << '\n';
    return kOk;
  });
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.config.empty()) throw UsageError("--config is required");
    if (opt.out.empty()) throw UsageError("--out (output directory) is required");
    const Json doc = read_json_file(opt.config);
    if (!doc.is_object() || !doc.contains("base") || !doc.contains("grid") || !doc.at("grid").is_object())
      throw ConfigError("sweep config needs {\"base\": {...}, \"grid\": {...}}");
    const Json& grid = doc.at("grid");
    if (grid.empty()) throw UsageError("empty parameter grid");
    const std::vector<Cell> cells = expand_grid(doc.at("base"), grid);
    if (cells.empty()) throw UsageError("empty parameter grid");
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    std::vector<CellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min<std::size_t>(cells.size(), std::max(1u, std::thread::hardware_concurrency()));
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(cells[i], dir, i);
        });
    }

    Json manifest;
    manifest["cells"] = Json::array();
    std::size_t failed = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string stem = cell_name(i);
      Json e = {{"id", stem}, {"params", cells[i].params}, {"status", results[i].status}};
      if (results[i].ok) {
        e["csv"] = stem + ".csv";
        e["report"] = stem + ".json";
      } else {
        e["error"] = results[i].error;
        ++failed;
      }
      manifest["cells"].push_back(std::move(e));
    }
    manifest["failed"] = failed;
    write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    out << cells.size() << " cells, " << failed << " failed; manifest " << (dir / "manifest.json").string() << '\n';
    return failed == 0 ? kOk : kNumerical;
  });
}

}  // namespace rbk::cli
