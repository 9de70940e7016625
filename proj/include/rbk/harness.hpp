#pragma once

// Independent oracles: fixed-step classical RK4 with h-halving Richardson
// extrapolation, a psi-chart route to the blowup point, the closed-form
// identity suite, and the truncated self-similar profile check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rbk/core.hpp"
#include "rbk/error.hpp"
#include "rbk/integrate.hpp"

namespace rbk {

/// Fixed-step RK4 on [span.first, span.second]. Records every
/// `record_stride`-th step (0: endpoints only); the endpoint is always kept.
template <class Field>
Trajectory rk4_reference(Field&& field, std::span<const double> x0, double h, std::pair<double, double> span,
                         Chart chart = Chart::t, std::vector<std::string> aux_names = {},
                         std::size_t record_stride = 0) {
  const auto [a, b] = span;
  if (!(h > 0.0)) throw InvalidInput("rk4_reference: h must be positive");
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) throw InvalidInput("rk4_reference: bad span");
  const double steps_real = (b - a) / h;
  const auto steps = static_cast<std::int64_t>(std::ceil(steps_real - 1e-9));
  const std::size_t n = x0.size();
  const std::size_t dim = n - aux_names.size();
  Vector u(x0.begin(), x0.end()), k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto eval = [&](double x, const Vector& v, Vector& out) { field(x, std::span<const double>(v), std::span<double>(out)); };

  std::vector<Sample> samples;
  auto record = [&](double x) {
    Sample s;
    s.x = x;
    s.state.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(dim));
    s.aux.assign(u.begin() + static_cast<std::ptrdiff_t>(dim), u.end());
    samples.push_back(std::move(s));
  };
  record(a);
  for (std::int64_t k = 0; k < steps; ++k) {
    const double x = a + static_cast<double>(k) * h;
    const double hk = (k + 1 == steps) ? b - x : h;
    eval(x, u, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * hk * k1[i];
    eval(x + 0.5 * hk, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * hk * k2[i];
    eval(x + 0.5 * hk, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + hk * k3[i];
    eval(x + hk, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) u[i] += hk / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!detail::all_finite(u)) throw NumericalError("rk4_reference: non-finite state at x = " + std::to_string(x + hk));
    const bool last = k + 1 == steps;
    if (last || (record_stride > 0 && (k + 1) % static_cast<std::int64_t>(record_stride) == 0))
      record(last ? b : x + hk);
  }
  return Trajectory(chart, IntegratorSettings{}, std::move(aux_names), std::move(samples));
}

struct RichardsonResult {
  Vector h_sequence;
  std::vector<Vector> values;  // endpoint value for each h
  Vector extrapolated;
  Vector error_estimate;       // |last tableau entry - previous diagonal|
};

/// Richardson tableau for a method of order 4 with step ratio 2; column k
/// removes the h^{3+k} error term.
inline RichardsonResult richardson_rk4(const Vector& h_sequence, const std::vector<Vector>& values) {
  if (h_sequence.size() != values.size() || values.empty()) throw InvalidInput("richardson_rk4: bad input");
  const std::size_t levels = values.size();
  const std::size_t n = values[0].size();
  std::vector<std::vector<Vector>> t(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    t[i].push_back(values[i]);
    for (std::size_t k = 1; k <= i; ++k) {
      const double denom = std::pow(2.0, 3.0 + static_cast<double>(k)) - 1.0;
      Vector v(n);
      for (std::size_t c = 0; c < n; ++c) v[c] = t[i][k - 1][c] + (t[i][k - 1][c] - t[i - 1][k - 1][c]) / denom;
      t[i].push_back(std::move(v));
    }
  }
  RichardsonResult r;
  r.h_sequence = h_sequence;
  r.values = values;
  r.extrapolated = t[levels - 1][levels - 1];
  r.error_estimate.assign(n, 0.0);
  if (levels > 1)
    for (std::size_t c = 0; c < n; ++c)
      r.error_estimate[c] = std::abs(r.extrapolated[c] - t[levels - 2][levels - 2][c]);
  return r;
}

/// RK4 at h, h/2, ..., h/2^halvings; Richardson-extrapolated endpoint state.
template <class Field>
RichardsonResult rk4_richardson(Field&& field, std::span<const double> x0, double h, std::pair<double, double> span,
                                int halvings = 4) {
  Vector hs;
  std::vector<Vector> vals;
  for (int k = 0; k <= halvings; ++k) {
    const double hk = h / std::pow(2.0, k);
    const Trajectory tr = rk4_reference(field, x0, hk, span);
    Vector v = tr.back().state;
    hs.push_back(hk);
    vals.push_back(std::move(v));
  }
  return richardson_rk4(hs, vals);
}

/// RBK rate in physical time, usable by both oracle and adaptive routes.
inline auto rbk_rhs() {
  return [](double, std::span<const double> c, std::span<double> dc) { detail::rbk_rate(c, dc); };
}

struct OmegaOracle {
  double omega = 0.0;           // Richardson-extrapolated over h
  double error_estimate = 0.0;  // tableau error estimate
  double tau_end = 0.0;
  Vector h_sequence;
  Vector per_h;                 // estimate at each h
};

/// Blowup point through the psi chart: psi grows polynomially in tau, so a
/// fixed-step RK4 in tau with dy/dtau = 1/psi_1 is well conditioned. The
/// remaining tail is closed with the tau(y) law at tau_end.
inline OmegaOracle omega_reference(std::span<const double> phi0, double tau_end, double h, int halvings = 4) {
  (void)phi_field(phi0);
  const int n = static_cast<int>(phi0.size()) + 1;
  if (n < 3) throw InvalidInput("omega_reference: N must be >= 3");
  const std::size_t m = phi0.size();
  Vector u0(phi0.begin(), phi0.end());
  u0.push_back(0.0);
  auto rhs = [m](double, std::span<const double> u, std::span<double> du) {
    detail::psi_rate(u.first(m), du.first(m));
    du[m] = 1.0 / u[0];
  };
  OmegaOracle out;
  out.tau_end = tau_end;
  std::vector<Vector> vals;
  for (int k = 0; k <= halvings; ++k) {
    const double hk = h / std::pow(2.0, k);
    const Trajectory tr = rk4_reference(rhs, u0, hk, {0.0, tau_end}, Chart::psi_tau, {"y"});
    const double w = omega_from_tau(tr.back().aux[0], tau_end, n);
    out.h_sequence.push_back(hk);
    out.per_h.push_back(w);
    vals.push_back({w});
  }
  const RichardsonResult r = richardson_rk4(out.h_sequence, vals);
  out.omega = r.extrapolated[0];
  out.error_estimate = r.error_estimate[0];
  return out;
}

struct IdentityCheck {
  std::string name;
  double max_error = 0.0;   // worst relative error over the checked samples
  double threshold = 0.0;
  double worst_x = 0.0;
  std::size_t checked = 0;
  bool pass = true;
};

struct IdentityThresholds {
  double nu_odd = -1.0;        // negative: 100 * rtol of the trajectory
  double c_n = -1.0;           // negative: 100 * rtol of the trajectory
  double dissipation = 1e-4;   // base tolerance for the finite-difference check
  double spacing_factor = 2.0; // allowance K h1 h2 nu^2 added per sample
};

struct IdentityReport {
  IdentityCheck nu_odd;       // (a) nu_odd against 1/(nu_odd(0)^-1 + t)
  IdentityCheck c_n;          // (b) c_N against c_N(0) exp(-int nu)
  IdentityCheck dissipation;  // (c) d nu/dt against -(nu^2 + sum c^2)/2
  bool pass() const { return nu_odd.pass && c_n.pass && dissipation.pass; }
};

namespace detail {

inline double rel_err(double measured, double expected) {
  if (expected == 0.0) return std::abs(measured);
  return std::abs(measured - expected) / std::abs(expected);
}

}  // namespace detail

/// Closed-form identities along a t or log-t trajectory. The
/// finite-difference check uses the second-order three-point formula on the
/// (possibly nonuniform) sample grid; its truncation error scales like
/// h1 h2 |nu'''| ~ h1 h2 nu^2 |nu'|, which is added to the base tolerance.
inline IdentityReport identity_suite(const Trajectory& traj, IdentityThresholds th = {}) {
  if (traj.chart() != Chart::t && traj.chart() != Chart::log_t)
    throw InvalidInput("identity_suite: need a t or log-t trajectory");
  const auto nu_idx = traj.aux_index("nu_integral");
  if (!nu_idx) throw InvalidInput("identity_suite: nu accumulator missing");
  if (traj.empty()) throw InvalidInput("identity_suite: empty trajectory");
  const double rtol = traj.settings().rtol;
  IdentityReport rep;
  rep.nu_odd.name = "nu_odd closed form";
  rep.nu_odd.threshold = th.nu_odd < 0.0 ? 100.0 * rtol : th.nu_odd;
  rep.c_n.name = "c_N integrating factor";
  rep.c_n.threshold = th.c_n < 0.0 ? 100.0 * rtol : th.c_n;
  rep.dissipation.name = "total-density dissipation";
  rep.dissipation.threshold = th.dissipation;

  const auto& s0 = traj.front();
  const double t0 = s0.x;
  const double nu_odd0 = densities(s0.state).odd;
  const double cn0 = s0.state.back();
  const double int0 = s0.aux[*nu_idx];

  auto note = [](IdentityCheck& chk, double err, double tol, double x) {
    ++chk.checked;
    if (err > chk.max_error) {
      chk.max_error = err;
      chk.worst_x = x;
    }
    if (!(err <= tol)) chk.pass = false;
  };

  for (const auto& s : traj.samples()) {
    const auto d = densities(s.state);
    note(rep.nu_odd, detail::rel_err(d.odd, nu_odd_closed(nu_odd0, s.x - t0)), rep.nu_odd.threshold, s.x);
    note(rep.c_n, detail::rel_err(s.state.back(), cn0 * std::exp(-(s.aux[*nu_idx] - int0))), rep.c_n.threshold, s.x);
  }

  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double h1 = traj[i].x - traj[i - 1].x;
    const double h2 = traj[i + 1].x - traj[i].x;
    const double f0 = densities(traj[i - 1].state).total;
    const double f1 = densities(traj[i].state).total;
    const double f2 = densities(traj[i + 1].state).total;
    const double fd = -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
    double sq = 0.0;
    for (double c : traj[i].state) sq += c * c;
    const double expected = -0.5 * (f1 * f1 + sq);
    if (expected == 0.0 && fd == 0.0) {
      note(rep.dissipation, 0.0, th.dissipation, traj[i].x);
      continue;
    }
    const double tol = th.dissipation + th.spacing_factor * h1 * h2 * f1 * f1;
    note(rep.dissipation, detail::rel_err(fd, expected), tol, traj[i].x);
  }
  return rep;
}

struct SelfSimilarReport {
  int n = 0;
  int j_max = 0;                  // components checked: j <= N/3
  double max_deviation = 0.0;     // relative, over t in [0, t_end], j <= j_max
  double worst_t = 0.0;
  int worst_j = 0;
  double truncation_scale = 0.0;  // alpha^N
};

/// Integrates the N-truncated system from the truncated self-similar
/// profile and measures the relative deviation from the infinite-system
/// profile for the first N/3 components.
inline SelfSimilarReport self_similar_residual(int n, double alpha, double kappa, double t_end,
                                               IntegratorSettings settings = {1e-12, 1e-20, 5'000'000, -1.0}) {
  if (n < 3) throw InvalidInput("self_similar_residual: N must be >= 3");
  const double trunc = std::pow(alpha, n);
  if (!(trunc < 1e-8)) throw InvalidInput("self_similar_residual: guard violated (alpha^N must be < 1e-8)");
  const Vector c0 = self_similar(alpha, kappa, 0.0, n);
  const Trajectory tr = integrate_t_chart(c0, t_end, settings);
  SelfSimilarReport rep;
  rep.n = n;
  rep.j_max = n / 3;
  rep.truncation_scale = trunc;
  for (const auto& s : tr.samples()) {
    const Vector prof = self_similar(alpha, kappa, s.x, n);
    for (int j = 1; j <= rep.j_max; ++j) {
      const double dev = detail::rel_err(s.state[static_cast<std::size_t>(j - 1)], prof[static_cast<std::size_t>(j - 1)]);
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_t = s.x;
        rep.worst_j = j;
      }
    }
  }
  return rep;
}

/// Seed-fixed positive densities in [lo, hi). Uses the raw 53-bit mantissa
/// draw so values are identical across standard library implementations.
inline Vector random_positive(int n, std::uint64_t seed, double lo = 0.1, double hi = 1.0) {
  if (n < 1) throw InvalidInput("random_positive: n must be >= 1");
  std::mt19937_64 gen(seed);
  Vector c(static_cast<std::size_t>(n));
  for (auto& v : c) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    v = lo + (hi - lo) * u;
  }
  return c;
}

}  // namespace rbk
