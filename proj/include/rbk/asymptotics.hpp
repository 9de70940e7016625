#pragma once

// Empirical exponents and residual series against the asymptotic laws:
// blowup-chart power laws phi_j ~ A_j (omega - y)^{-alpha_j}, the polynomial
// psi law, and the long-time log-corrected decay c_j ~ A~_j / (t (log t)^{j/m-1}).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbk/core.hpp"
#include "rbk/error.hpp"
#include "rbk/integrate.hpp"

namespace rbk {

struct PowerLawFit {
  double exponent = 0.0;   // v ~ prefactor * x^{-exponent}
  double prefactor = 0.0;
  double residual = 0.0;   // RMS misfit in log space
};

/// Unweighted least squares on (log x, log v).
inline PowerLawFit fit_power_law(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw InvalidInput("fit_power_law: need at least 3 points");
  bool inc = true, dec = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [x, v] = pairs[i];
    if (!(x > 0.0) || !(v > 0.0) || !std::isfinite(x) || !std::isfinite(v))
      throw InvalidInput("fit_power_law: data must be positive and finite");
    if (i > 0) {
      inc = inc && x > pairs[i - 1].first;
      dec = dec && x < pairs[i - 1].first;
    }
  }
  if (!inc && !dec) throw InvalidInput("fit_power_law: abscissae must be strictly monotone");

  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, v] : pairs) {
    mx += std::log(x);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, v] : pairs) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  PowerLawFit fit;
  fit.exponent = -slope;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [x, v] : pairs) {
    const double r = std::log(v) - (intercept + slope * std::log(x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

/// phi_1 below which a blowup run is too short for the terminal-window fit.
inline constexpr double kMinBlowupPhi1 = 1e6;

struct Lemma2Report {
  std::vector<ConvergenceDiagnostic> residuals;  // rho_j(y), j = 1..N-1
  std::vector<AsymptoticLaw> theory;
  std::vector<PowerLawFit> fitted;               // empty when the window is degenerate
  std::size_t window_begin = 0;                  // first sample of the fit window
  bool window_too_short = false;
};

namespace detail {

inline std::size_t window_start(const Trajectory& traj, double decades) {
  const double top = traj.back().state[0];
  const double floor_value = top * std::pow(10.0, -decades);
  std::size_t i = 0;
  while (i < traj.size() && traj[i].state[0] < floor_value) ++i;
  return i;
}

inline void require_phi(const Trajectory& traj, const char* who) {
  if (traj.chart() != Chart::phi_y) throw InvalidInput(std::string(who) + ": need a phi-y trajectory");
  if (traj.empty()) throw InvalidInput(std::string(who) + ": empty trajectory");
}

}  // namespace detail

inline Lemma2Report lemma2_diagnostic(const Trajectory& traj, const BlowupEstimate& omega) {
  detail::require_phi(traj, "lemma2_diagnostic");
  const int n = static_cast<int>(traj.dimension()) + 1;
  if (!(omega.omega > traj.back().x))
    throw InvalidInput("lemma2_diagnostic: omega must exceed every sampled y");
  Lemma2Report rep;
  rep.theory = lemma2_constants(n);
  for (int j = 1; j < n; ++j) {
    ConvergenceDiagnostic d;
    d.label = "rho_" + std::to_string(j);
    const auto& law = rep.theory[static_cast<std::size_t>(j - 1)];
    for (const auto& s : traj.samples()) {
      d.abscissae.push_back(s.x);
      d.residuals.push_back(s.state[static_cast<std::size_t>(j - 1)] *
                                std::pow(omega.omega - s.x, law.exponent) / law.prefactor -
                            1.0);
    }
    rep.residuals.push_back(std::move(d));
  }

  rep.window_begin = detail::window_start(traj, 2.0);
  rep.window_too_short = traj.back().state[0] < kMinBlowupPhi1 || traj.size() - rep.window_begin < 3;
  if (traj.size() - rep.window_begin >= 3) {
    for (int j = 1; j < n; ++j) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = rep.window_begin; i < traj.size(); ++i)
        pts.emplace_back(omega.omega - traj[i].x, traj[i].state[static_cast<std::size_t>(j - 1)]);
      rep.fitted.push_back(fit_power_law(pts));
    }
  }
  return rep;
}

/// rho-hat_j(tau) = psi_j(tau) (N-j)! / tau^{N-j} - 1 with psi_j(tau(y)) = phi_j(y).
inline std::vector<ConvergenceDiagnostic> psi_diagnostic(const Trajectory& traj) {
  detail::require_phi(traj, "psi_diagnostic");
  const auto tau_idx = traj.aux_index("tau");
  if (!tau_idx) throw InvalidInput("psi_diagnostic: tau accumulator missing");
  const int n = static_cast<int>(traj.dimension()) + 1;
  if (n > kMaxConstantDimension + 1) throw InvalidInput("psi_diagnostic: N too large");
  std::vector<ConvergenceDiagnostic> out;
  for (int j = 1; j < n; ++j) {
    ConvergenceDiagnostic d;
    d.label = "rho_hat_" + std::to_string(j);
    const double fact = static_cast<double>(factorial(n - j));
    for (const auto& s : traj.samples()) {
      const double tau = s.aux[*tau_idx];
      if (!(tau > 0.0)) continue;
      d.abscissae.push_back(tau);
      d.residuals.push_back(s.state[static_cast<std::size_t>(j - 1)] * fact / std::pow(tau, n - j) - 1.0);
    }
    out.push_back(std::move(d));
  }
  return out;
}

struct TheoremDiagnostic {
  TheoremConstants constants;
  std::vector<ConvergenceDiagnostic> residuals;  // e_j(t), one per lattice index, t > 1
};

/// e_j(t) = c_j(t) t (log t)^{j/m-1} / A~_j - 1 over the support lattice.
inline TheoremDiagnostic theorem_diagnostic(const Trajectory& traj, const SupportProfile& profile,
                                            PrefactorVariant variant = PrefactorVariant::reduced) {
  if (traj.chart() != Chart::t && traj.chart() != Chart::log_t)
    throw InvalidInput("theorem_diagnostic: need a t or log-t trajectory");
  const int n = static_cast<int>(traj.dimension());
  if (profile.p > n) throw InvalidInput("theorem_diagnostic: support exceeds the trajectory dimension");
  for (const auto& s : traj.samples())
    for (int j = 1; j <= n; ++j)
      if (!profile.on_lattice(j) && s.state[static_cast<std::size_t>(j - 1)] != 0.0)
        throw InvalidInput("theorem_diagnostic: lattice mismatch, c_" + std::to_string(j) +
                           " nonzero off m*N cap [1,p] at t = " + std::to_string(s.x));

  TheoremDiagnostic out;
  out.constants = theorem_constants(profile.n_eff, profile.m, variant, n);
  for (const auto& ll : out.constants.laws) {
    ConvergenceDiagnostic d;
    d.label = "e_" + std::to_string(ll.index);
    for (const auto& s : traj.samples()) {
      if (!(s.x > 1.0)) continue;
      const double lt = std::log(s.x);
      d.abscissae.push_back(s.x);
      d.residuals.push_back(s.state[static_cast<std::size_t>(ll.index - 1)] * s.x *
                                std::pow(lt, ll.law.exponent) / ll.law.prefactor -
                            1.0);
    }
    out.residuals.push_back(std::move(d));
  }
  return out;
}

struct RatioTrend {
  int j = 0;                        // ratio phi_j / phi_{j+1}, phi_N = 1
  ConvergenceDiagnostic ratios;     // against y
  bool increasing_last_decade = false;
  double final_ratio = 0.0;
  bool exceeds_threshold = false;
};

/// Ratio series phi_j/phi_{j+1} for j = 1..N-1. The trend flag requires
/// strict increase at every sample in the last decade of phi_1.
inline std::vector<RatioTrend> ratio_divergence(const Trajectory& traj, double threshold = 10.0) {
  detail::require_phi(traj, "ratio_divergence");
  const std::size_t m = traj.dimension();
  const std::size_t begin = detail::window_start(traj, 1.0);
  std::vector<RatioTrend> out;
  for (std::size_t j = 1; j <= m; ++j) {
    RatioTrend r;
    r.j = static_cast<int>(j);
    r.ratios.label = "phi_" + std::to_string(j) + "/phi_" + std::to_string(j + 1);
    for (const auto& s : traj.samples()) {
      const double next = j == m ? 1.0 : s.state[j];
      r.ratios.abscissae.push_back(s.x);
      r.ratios.residuals.push_back(s.state[j - 1] / next);
    }
    r.final_ratio = r.ratios.residuals.back();
    r.exceeds_threshold = r.final_ratio > threshold;
    bool inc = traj.size() >= 10 && traj.size() - begin >= 2;
    for (std::size_t i = begin + 1; inc && i < traj.size(); ++i)
      inc = r.ratios.residuals[i] > r.ratios.residuals[i - 1];
    r.increasing_last_decade = inc;
    out.push_back(std::move(r));
  }
  return out;
}

/// (omega - y(t)) (N-2) / ((N-1)! (log t)^{2-N}) - 1 over samples with t > 1.
inline ConvergenceDiagnostic omega_logt_map(const Trajectory& traj, int n, double omega) {
  if (traj.chart() != Chart::t && traj.chart() != Chart::log_t)
    throw InvalidInput("omega_logt_map: need a t or log-t trajectory");
  if (n != static_cast<int>(traj.dimension())) throw InvalidInput("omega_logt_map: N mismatch");
  if (n < 3) throw InvalidInput("omega_logt_map: N must be >= 3");
  if (!std::isfinite(omega) || !(omega > 0.0)) throw InvalidInput("omega_logt_map: missing companion omega");
  const auto y_idx = traj.aux_index("y");
  if (!y_idx) throw InvalidInput("omega_logt_map: y accumulator missing");
  const double scale = static_cast<double>(factorial(n - 1)) / (n - 2);
  ConvergenceDiagnostic d;
  d.label = "omega_minus_y";
  for (const auto& s : traj.samples()) {
    if (!(s.x > 1.0)) continue;
    d.abscissae.push_back(s.x);
    d.residuals.push_back((omega - s.aux[*y_idx]) / (scale * std::pow(std::log(s.x), 2.0 - n)) - 1.0);
  }
  return d;
}

/// Companion blowup run for a t-chart trajectory: phi(0) = c(0)/c_N(0).
inline BlowupRun companion_blowup(std::span<const double> c0, double cap = 1e10,
                                  const IntegratorSettings& settings = {}) {
  if (c0.size() < 3) throw InvalidInput("companion_blowup: N must be >= 3");
  const double cn = c0.back();
  if (!(cn > 0.0)) throw InvalidInput("companion_blowup: c_N(0) must be positive");
  Vector phi0(c0.size() - 1);
  for (std::size_t j = 0; j + 1 < c0.size(); ++j) phi0[j] = c0[j] / cn;
  return integrate_phi_to_blowup(phi0, cap, settings);
}

/// Residual value at the abscissa closest to x.
inline double value_near(const ConvergenceDiagnostic& d, double x) {
  if (d.empty()) throw InvalidInput("value_near: empty diagnostic '" + d.label + "'");
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (std::abs(d.abscissae[i] - x) < std::abs(d.abscissae[best] - x)) best = i;
  return d.residuals[best];
}

/// |residual| strictly decreasing across the given checkpoints (ascending).
inline bool magnitude_decreasing(const ConvergenceDiagnostic& d, std::span<const double> checkpoints) {
  double prev = std::numeric_limits<double>::infinity();
  for (double x : checkpoints) {
    const double v = std::abs(value_near(d, x));
    if (!(v < prev)) return false;
    prev = v;
  }
  return true;
}

struct VariantVerdict {
  TheoremDiagnostic diagnostic;
  bool matches = false;  // every lattice residual shrinks across checkpoints and ends below threshold
};

struct ConstantsProbe {
  SupportProfile profile;
  Vector checkpoints;
  double threshold = 0.35;
  VariantVerdict reduced;
  VariantVerdict as_printed;
};

/// Confronts both prefactor tables with a long-time trajectory. A variant
/// matches when, for every lattice index, |e_j| strictly decreases across the
/// checkpoints and |e_j| at the last checkpoint is below `threshold`.
inline ConstantsProbe probe_theorem_constants(const Trajectory& traj, const SupportProfile& profile,
                                              std::span<const double> checkpoints, double threshold = 0.35) {
  if (checkpoints.size() < 2) throw InvalidInput("probe_theorem_constants: need at least two checkpoints");
  if (checkpoints.back() > traj.back().x * (1.0 + 1e-12))
    throw InvalidInput("probe_theorem_constants: checkpoints beyond the trajectory");
  ConstantsProbe probe;
  probe.profile = profile;
  probe.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  probe.threshold = threshold;
  auto judge = [&](PrefactorVariant v) {
    VariantVerdict vv;
    vv.diagnostic = theorem_diagnostic(traj, profile, v);
    vv.matches = true;
    for (const auto& d : vv.diagnostic.residuals)
      vv.matches = vv.matches && magnitude_decreasing(d, checkpoints) &&
                   std::abs(value_near(d, checkpoints.back())) < threshold;
    return vv;
  };
  probe.reduced = judge(PrefactorVariant::reduced);
  probe.as_printed = judge(PrefactorVariant::as_printed);
  return probe;
}

}  // namespace rbk
