#pragma once

// Adaptive integration of the RBK charts.
//
// The stepper is the Dormand-Prince 5(4) embedded pair with the PI step
// controller of Hairer & Wanner (DOPRI5). Auxiliary accumulators (y = int c_N,
// int nu, tau = int c_1 in the t-charts; tau = int phi_1 in the phi-chart) are
// appended to the state and share its error control. Samples land exactly on
// a caller-supplied grid by shortening the step; there is no dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbk/core.hpp"
#include "rbk/error.hpp"

namespace rbk {

enum class Chart { t, log_t, phi_y, psi_tau };

inline const char* to_string(Chart c) {
  switch (c) {
    case Chart::t: return "t";
    case Chart::log_t: return "log-t";
    case Chart::phi_y: return "phi-y";
    case Chart::psi_tau: return "psi-tau";
  }
  return "?";
}

struct IntegratorSettings {
  double rtol = 1e-9;
  double atol = 1e-12;
  long max_steps = 5'000'000;
  // Negative means "same as atol".
  double negativity_guard = -1.0;

  double guard() const { return negativity_guard < 0.0 ? atol : negativity_guard; }

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidInput("integrator tolerances must be positive");
    if (max_steps <= 0) throw InvalidInput("max_steps must be positive");
  }
};

struct Sample {
  double x = 0.0;
  Vector state;
  Vector aux;
};

/// Ordered samples of one chart. Immutable once built.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(Chart chart, IntegratorSettings settings, std::vector<std::string> aux_names,
             std::vector<Sample> samples)
      : chart_(chart), settings_(settings), aux_names_(std::move(aux_names)),
        samples_(std::move(samples)) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (s.aux.size() != aux_names_.size())
        throw InvalidInput("trajectory: accumulator count mismatch");
      if (i > 0) {
        if (s.state.size() != samples_[0].state.size())
          throw InvalidInput("trajectory: state dimension changed between samples");
        if (!(s.x > samples_[i - 1].x))
          throw InvalidInput("trajectory: abscissae must be strictly increasing");
      }
    }
  }

  Chart chart() const { return chart_; }
  const IntegratorSettings& settings() const { return settings_; }
  const std::vector<std::string>& aux_names() const { return aux_names_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& front() const { return samples_.front(); }
  const Sample& back() const { return samples_.back(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t dimension() const { return samples_.empty() ? 0 : samples_[0].state.size(); }

  std::optional<std::size_t> aux_index(const std::string& name) const {
    for (std::size_t i = 0; i < aux_names_.size(); ++i)
      if (aux_names_[i] == name) return i;
    return std::nullopt;
  }

  /// Index of the sample whose abscissa is closest to x.
  std::size_t nearest(double x) const {
    if (samples_.empty()) throw InvalidInput("trajectory: empty");
    auto it = std::lower_bound(samples_.begin(), samples_.end(), x,
                               [](const Sample& s, double v) { return s.x < v; });
    if (it == samples_.end()) return samples_.size() - 1;
    std::size_t i = static_cast<std::size_t>(it - samples_.begin());
    if (i > 0 && std::abs(samples_[i - 1].x - x) <= std::abs(samples_[i].x - x)) return i - 1;
    return i;
  }

 private:
  Chart chart_ = Chart::t;
  IntegratorSettings settings_;
  std::vector<std::string> aux_names_;
  std::vector<Sample> samples_;
};

struct IntegrationOptions {
  Chart chart = Chart::t;
  std::vector<std::string> aux_names;  // trailing components of x0 treated as accumulators
  Vector grid;                         // abscissae landed on exactly and recorded
  bool record_steps = false;           // also record every accepted step
  bool nonnegative = false;            // apply the negativity guard to state components
  // Checked after every accepted step; true ends the run with that step recorded.
  std::function<bool(double, std::span<const double>)> stop;
};

namespace detail {

struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double error_norm(std::span<const double> err, std::span<const double> y0,
                         std::span<const double> y1, const IntegratorSettings& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sc = s.atol + s.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates u' = field(x, u) over span = (start, end); end may be +inf when
/// a stop predicate terminates the run. `field` has the signature
/// void(double x, std::span<const double> u, std::span<double> du) and is
/// applied to the full vector [state..., accumulators...].
template <class Field>
Trajectory integrate_adaptive(Field&& field, std::span<const double> x0, std::pair<double, double> span,
                              const IntegratorSettings& settings, const IntegrationOptions& opts = {}) {
  using detail::Dopri5;
  settings.validate();
  const auto [x_start, x_end] = span;
  if (!(x_start < x_end)) throw InvalidInput("integrate_adaptive: span.start must be < span.end");
  if (!std::isfinite(x_start)) throw InvalidInput("integrate_adaptive: span.start must be finite");
  if (x0.empty()) throw InvalidInput("integrate_adaptive: empty state");
  if (!detail::all_finite(x0)) throw NumericalError("integrate_adaptive: non-finite initial state");
  const std::size_t n = x0.size();
  const std::size_t n_aux = opts.aux_names.size();
  if (n_aux >= n) throw InvalidInput("integrate_adaptive: accumulators leave no state components");
  const std::size_t dim = n - n_aux;
  const double guard = settings.guard();

  Vector grid;
  for (double g : opts.grid)
    if (g > x_start && g < x_end) grid.push_back(g);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (std::isfinite(x_end)) grid.push_back(x_end);
  std::size_t next_grid = 0;

  std::vector<Sample> samples;
  auto record = [&](double x, std::span<const double> u) {
    Sample s;
    s.x = x;
    s.state.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(dim));
    s.aux.assign(u.begin() + static_cast<std::ptrdiff_t>(dim), u.end());
    samples.push_back(std::move(s));
  };

  Vector u(x0.begin(), x0.end());
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), unew(n), err(n);
  auto eval = [&](double x, const Vector& v, Vector& out) { field(x, std::span<const double>(v), std::span<double>(out)); };

  double x = x_start;
  record(x, u);
  if (opts.stop && opts.stop(x, u))
    return Trajectory(opts.chart, settings, opts.aux_names, std::move(samples));

  eval(x, u, k1);
  if (!detail::all_finite(k1)) throw NumericalError("integrate_adaptive: non-finite rate at initial state");

  // Initial step (Hairer's heuristic).
  const double h_max = std::isfinite(x_end) ? x_end - x_start : std::numeric_limits<double>::max();
  double h;
  {
    Vector zero(n, 0.0);
    const double d0 = detail::error_norm(u, u, zero, settings);
    const double d1 = detail::error_norm(k1, u, zero, settings);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, h_max);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h0 * k1[i];
    eval(x + h0, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) err[i] = k2[i] - k1[i];
    const double d2 = detail::all_finite(k2) ? detail::error_norm(err, u, zero, settings) / h0 : 1e300;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, h_max});
  }

  constexpr double kBeta = 0.04;
  constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  constexpr double kFacMin = 1.0 / 0.2;  // inverse bounds on the step ratio
  constexpr double kFacMax = 1.0 / 10.0;
  constexpr double kSafe = 0.9;
  double fac_old = 1e-4;
  bool last_rejected = false;
  long steps = 0;

  while (true) {
    if (++steps > settings.max_steps)
      throw NumericalError("integrate_adaptive: max_steps (" + std::to_string(settings.max_steps) +
                           ") exceeded at x = " + std::to_string(x));
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) || !(h > 0.0))
      throw NumericalError("integrate_adaptive: step size underflow at x = " + std::to_string(x));

    // Land on the next grid point if this step would reach it.
    double h_step = h;
    bool landing = false;
    if (next_grid < grid.size() && x + h >= grid[next_grid]) {
      h_step = grid[next_grid] - x;
      landing = true;
    }

    auto stage = [&](std::initializer_list<std::pair<double, const Vector*>> terms) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const auto& [a, k] : terms) acc += a * (*k)[i];
        tmp[i] = u[i] + h_step * acc;
      }
    };
    stage({{Dopri5::a21, &k1}});
    eval(x + Dopri5::c2 * h_step, tmp, k2);
    stage({{Dopri5::a31, &k1}, {Dopri5::a32, &k2}});
    eval(x + Dopri5::c3 * h_step, tmp, k3);
    stage({{Dopri5::a41, &k1}, {Dopri5::a42, &k2}, {Dopri5::a43, &k3}});
    eval(x + Dopri5::c4 * h_step, tmp, k4);
    stage({{Dopri5::a51, &k1}, {Dopri5::a52, &k2}, {Dopri5::a53, &k3}, {Dopri5::a54, &k4}});
    eval(x + Dopri5::c5 * h_step, tmp, k5);
    stage({{Dopri5::a61, &k1}, {Dopri5::a62, &k2}, {Dopri5::a63, &k3}, {Dopri5::a64, &k4},
           {Dopri5::a65, &k5}});
    eval(x + h_step, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      unew[i] = u[i] + h_step * (Dopri5::a71 * k1[i] + Dopri5::a73 * k3[i] + Dopri5::a74 * k4[i] +
                                 Dopri5::a75 * k5[i] + Dopri5::a76 * k6[i]);
    const double x_new = landing ? grid[next_grid] : x + h_step;
    eval(x_new, unew, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = h_step * (Dopri5::e1 * k1[i] + Dopri5::e3 * k3[i] + Dopri5::e4 * k4[i] +
                         Dopri5::e5 * k5[i] + Dopri5::e6 * k6[i] + Dopri5::e7 * k7[i]);

    double e = detail::all_finite(unew) && detail::all_finite(k7)
                   ? detail::error_norm(err, u, unew, settings)
                   : std::numeric_limits<double>::infinity();
    if (!std::isfinite(e)) {
      h = h_step * 0.2;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(e, kExpo1);
    if (e > 1.0) {
      h = h_step / std::min(kFacMin, fac11 / kSafe);
      last_rejected = true;
      continue;
    }

    bool clamped = false;
    if (opts.nonnegative) {
      bool too_negative = false;
      for (std::size_t i = 0; i < dim; ++i) {
        if (unew[i] < -guard) too_negative = true;
      }
      if (too_negative) {
        h = h_step * 0.5;
        last_rejected = true;
        continue;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        if (unew[i] < 0.0) {
          unew[i] = 0.0;
          clamped = true;
        }
      }
    }

    // Accepted.
    double fac = fac11 / std::pow(fac_old, kBeta);
    fac = std::max(kFacMax, std::min(kFacMin, fac / kSafe));
    double h_new = h_step / fac;
    fac_old = std::max(e, 1e-4);
    if (last_rejected) h_new = std::min(h_new, h_step);
    last_rejected = false;
    if (landing) h_new = std::max(h_new, std::min(h, h_new * 10.0));

    x = x_new;
    u.swap(unew);
    if (clamped) {
      eval(x, u, k1);
    } else {
      k1.swap(k7);
    }

    const bool stop_now = opts.stop && opts.stop(x, u);
    if (landing || opts.record_steps || stop_now) record(x, u);
    if (landing) ++next_grid;
    if (stop_now) break;
    if (std::isfinite(x_end) && x >= x_end) break;
    h = std::min(h_new, h_max);
  }
  return Trajectory(opts.chart, settings, opts.aux_names, std::move(samples));
}

/// Geometric grid 10^{k/ppd} on [t_first, t_end], plus t_end. Decade points
/// are exact powers of ten.
inline Vector make_time_grid(double t_end, int points_per_decade = 64, double t_first = 1e-3) {
  if (!(t_end > 0.0)) throw InvalidInput("make_time_grid: t_end must be positive");
  if (points_per_decade < 1) throw InvalidInput("make_time_grid: points_per_decade must be >= 1");
  Vector g;
  const long k0 = static_cast<long>(std::floor(std::log10(t_first) * points_per_decade));
  for (long k = k0;; ++k) {
    const long dec = k >= 0 ? k / points_per_decade : -((-k + points_per_decade - 1) / points_per_decade);
    const long rem = k - dec * points_per_decade;
    const double v = std::pow(10.0, static_cast<double>(dec)) *
                     (rem == 0 ? 1.0 : std::pow(10.0, static_cast<double>(rem) / points_per_decade));
    if (v >= t_end) break;
    if (v >= t_first) g.push_back(v);
  }
  g.push_back(t_end);
  return g;
}

/// Accumulators carried by the t and log-t charts.
inline const std::vector<std::string>& t_chart_aux_names() {
  static const std::vector<std::string> names{"y", "nu_integral", "tau"};
  return names;
}

namespace detail {

// [c_1..c_N, y, int nu, tau] rates in physical time, scaled by `scale`.
inline void t_chart_rate(std::span<const double> u, std::span<double> du, std::size_t n, double scale) {
  rbk_rate(u.first(n), du.first(n));
  double nu = 0.0;
  for (std::size_t i = 0; i < n; ++i) nu += u[i];
  if (scale != 1.0)
    for (std::size_t i = 0; i < n; ++i) du[i] *= scale;
  du[n] = scale * u[n - 1];
  du[n + 1] = scale * nu;
  du[n + 2] = scale * u[0];
}

}  // namespace detail

/// Physical-time integration of the RBK system with the y, int nu and tau
/// accumulators, sampled on `grid` (defaults to a geometric grid).
inline Trajectory integrate_t_chart(std::span<const double> c0, double t_end, const IntegratorSettings& settings,
                                    Vector grid = {}, bool record_steps = false) {
  if (c0.size() < 2) throw InvalidInput("integrate_t_chart: N must be >= 2");
  detail::require_finite(c0, "integrate_t_chart");
  for (double v : c0)
    if (v < 0.0) throw InvalidInput("integrate_t_chart: negative initial density");
  if (!(t_end > 0.0)) throw InvalidInput("integrate_t_chart: t_end must be positive");
  const std::size_t n = c0.size();
  Vector u0(c0.begin(), c0.end());
  u0.insert(u0.end(), {0.0, 0.0, 0.0});
  IntegrationOptions opts;
  opts.chart = Chart::t;
  opts.aux_names = t_chart_aux_names();
  opts.grid = grid.empty() ? make_time_grid(t_end) : std::move(grid);
  opts.record_steps = record_steps;
  opts.nonnegative = true;
  return integrate_adaptive(
      [n](double, std::span<const double> u, std::span<double> du) { detail::t_chart_rate(u, du, n, 1.0); },
      u0, {0.0, t_end}, settings, opts);
}

/// t-chart on [0, 1], then s = log t with dc/ds = e^s rbk_field(c) up to
/// log(t_end). Abscissae are reported in t; grid landings report the grid
/// value exactly.
inline Trajectory integrate_logtime(std::span<const double> c0, double t_end, const IntegratorSettings& settings,
                                    int points_per_decade = 64) {
  if (!(t_end > 1.0)) throw InvalidInput("integrate_logtime: t_end must exceed 1");
  const std::size_t n = c0.size();
  const Vector grid = make_time_grid(t_end, points_per_decade);
  Vector early;
  Vector late_t;
  for (double g : grid) (g <= 1.0 ? early : late_t).push_back(g);
  if (early.empty() || early.back() != 1.0) early.push_back(1.0);

  const Trajectory head = integrate_t_chart(c0, 1.0, settings, early);

  Vector s_grid;
  for (double g : late_t) s_grid.push_back(std::log(g));
  Vector u0 = head.back().state;
  u0.insert(u0.end(), head.back().aux.begin(), head.back().aux.end());
  IntegrationOptions opts;
  opts.chart = Chart::log_t;
  opts.aux_names = t_chart_aux_names();
  opts.grid = s_grid;
  opts.nonnegative = true;
  const double s_end = std::log(t_end);
  const Trajectory tail = integrate_adaptive(
      [n](double s, std::span<const double> u, std::span<double> du) {
        detail::t_chart_rate(u, du, n, std::exp(s));
      },
      u0, {0.0, s_end}, settings, opts);

  std::vector<Sample> out(head.samples().begin(), head.samples().end());
  for (std::size_t i = 1; i < tail.size(); ++i) {
    Sample smp = tail[i];
    const double s = smp.x;
    double t = std::exp(s);
    for (std::size_t k = 0; k < s_grid.size(); ++k)
      if (s_grid[k] == s) {
        t = late_t[k];
        break;
      }
    smp.x = t;
    out.push_back(std::move(smp));
  }
  return Trajectory(Chart::log_t, settings, t_chart_aux_names(), std::move(out));
}

enum class OmegaMethod { tauy_extrapolation, richardson };

inline const char* to_string(OmegaMethod m) {
  return m == OmegaMethod::richardson ? "richardson" : "tauy-extrapolation";
}

struct BlowupEstimate {
  double omega = 0.0;
  double uncertainty = 0.0;
  OmegaMethod method = OmegaMethod::tauy_extrapolation;
};

/// Per-sample blowup estimate from tau(y) ~ [(N-2)/(N-1)! (omega - y)]^{-1/(N-2)}.
inline double omega_from_tau(double y, double tau, int n) {
  return y + static_cast<double>(factorial(n - 1)) / (n - 2) * std::pow(tau, 2.0 - n);
}

/// Extrapolates the per-sample estimates. The refinement models
/// w(d) = omega + C d^q in the estimated distance d = w - y and solves for
/// (omega, C, q) through three samples spread over the last decade of d.
/// Uncertainty is the spread of those three per-sample estimates.
inline BlowupEstimate estimate_omega(std::span<const std::pair<double, double>> samples, int n) {
  if (n < 3) throw InvalidInput("estimate_omega: N must be >= 3");
  if (n > kMaxConstantDimension) throw InvalidInput("estimate_omega: N too large");
  std::vector<double> ys, ws, ds;
  double prev_tau = -std::numeric_limits<double>::infinity();
  for (const auto& [y, tau] : samples) {
    if (!(tau > prev_tau)) throw InvalidInput("estimate_omega: tau must be strictly increasing");
    prev_tau = tau;
    if (!(tau > 0.0)) continue;
    const double w = omega_from_tau(y, tau, n);
    ys.push_back(y);
    ws.push_back(w);
    ds.push_back(w - y);
  }
  if (ws.size() < 3) throw InvalidInput("estimate_omega: need at least 3 samples with tau > 0");

  const std::size_t i3 = ws.size() - 1;
  std::size_t i1 = i3 - 2, i2 = i3 - 1;
  bool decade = false;
  for (std::size_t i = i3; i-- > 0;) {
    if (ds[i] >= 10.0 * ds[i3]) {
      i1 = i;
      decade = true;
      break;
    }
  }
  if (decade) {
    const double target = std::log(std::sqrt(ds[i1] * ds[i3]));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = i1 + 1; i < i3; ++i) {
      const double dist = std::abs(std::log(ds[i]) - target);
      if (dist < best) {
        best = dist;
        i2 = i;
      }
    }
    if (!(i2 > i1 && i2 < i3)) {
      decade = false;
      i1 = i3 - 2;
      i2 = i3 - 1;
    }
  }

  BlowupEstimate est;
  est.omega = ws[i3];
  est.uncertainty = std::max({ws[i1], ws[i2], ws[i3]}) - std::min({ws[i1], ws[i2], ws[i3]});
  est.method = OmegaMethod::tauy_extrapolation;

  const double d1 = ds[i1], d2 = ds[i2], d3 = ds[i3];
  const double delta12 = ws[i1] - ws[i2];
  const double delta23 = ws[i2] - ws[i3];
  if (delta12 != 0.0 && delta23 != 0.0 && (delta12 > 0.0) == (delta23 > 0.0) && d1 > d2 && d2 > d3) {
    const double target = delta12 / delta23;
    auto ratio = [&](double q) {
      // (d1^q - d2^q) / (d2^q - d3^q), evaluated relative to d2 for range safety
      const double a = std::pow(d1 / d2, q), c = std::pow(d3 / d2, q);
      return (a - 1.0) / (1.0 - c);
    };
    double lo = 1e-3, hi = 20.0;
    if ((ratio(lo) - target) * (ratio(hi) - target) < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((ratio(lo) - target) * (ratio(mid) - target) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      const double q = 0.5 * (lo + hi);
      const double coeff = delta23 / (std::pow(d2, q) - std::pow(d3, q));
      const double refined = ws[i3] - coeff * std::pow(d3, q);
      // The correction must stay within the observed spread and ahead of the data.
      if (std::isfinite(refined) && refined > ys[i3] &&
          std::abs(refined - ws[i3]) <= std::abs(ws[i1] - ws[i3])) {
        est.omega = refined;
        est.method = OmegaMethod::richardson;
      }
    }
  }
  return est;
}

inline BlowupEstimate estimate_omega(const Trajectory& phi_traj) {
  if (phi_traj.chart() != Chart::phi_y) throw InvalidInput("estimate_omega: need a phi-y trajectory");
  const auto tau_idx = phi_traj.aux_index("tau");
  if (!tau_idx) throw InvalidInput("estimate_omega: tau accumulator missing");
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : phi_traj.samples()) pts.emplace_back(s.x, s.aux[*tau_idx]);
  return estimate_omega(pts, static_cast<int>(phi_traj.dimension()) + 1);
}

/// Integrates the phi-system (with tau = int phi_1) on an explicit y grid.
inline Trajectory integrate_phi_chart(std::span<const double> phi0, double y_end, const IntegratorSettings& settings,
                                      Vector grid = {}, bool record_steps = false) {
  (void)phi_field(phi0);  // validates positivity
  Vector u0(phi0.begin(), phi0.end());
  u0.push_back(0.0);
  const std::size_t m = phi0.size();
  IntegrationOptions opts;
  opts.chart = Chart::phi_y;
  opts.aux_names = {"tau"};
  opts.grid = std::move(grid);
  opts.record_steps = record_steps;
  return integrate_adaptive(
      [m](double, std::span<const double> u, std::span<double> du) {
        detail::phi_rate(u.first(m), du.first(m));
        du[m] = u[0];
      },
      u0, {0.0, y_end}, settings, opts);
}

struct BlowupRun {
  Trajectory trajectory;
  BlowupEstimate omega;
};

/// Integrates the phi-system until phi_1 >= cap, thinned to a geometric
/// grid in phi_1 (points_per_decade below cap), and estimates omega.
inline BlowupRun integrate_phi_to_blowup(std::span<const double> phi0, double cap = 1e10,
                                         const IntegratorSettings& settings = {}, int points_per_decade = 64) {
  (void)phi_field(phi0);
  if (phi0.size() < 2) throw InvalidInput("integrate_phi_to_blowup: N must be >= 3");
  if (!(cap > phi0[0])) throw InvalidInput("integrate_phi_to_blowup: cap must exceed phi_1(0)");
  const std::size_t m = phi0.size();
  Vector u0(phi0.begin(), phi0.end());
  u0.push_back(0.0);
  IntegrationOptions opts;
  opts.chart = Chart::phi_y;
  opts.aux_names = {"tau"};
  opts.record_steps = true;
  opts.stop = [cap](double, std::span<const double> u) { return u[0] >= cap; };
  Trajectory raw;
  try {
    raw = integrate_adaptive(
        [m](double, std::span<const double> u, std::span<double> du) {
          detail::phi_rate(u.first(m), du.first(m));
          du[m] = u[0];
        },
        u0, {0.0, std::numeric_limits<double>::infinity()}, settings, opts);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("cap not reached: ") + e.what());
  }

  std::vector<Sample> kept;
  long last_level = std::numeric_limits<long>::min();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double phi1 = raw[i].state[0];
    const long level = static_cast<long>(std::floor(points_per_decade * std::log10(phi1 / cap)));
    if (i == 0 || i + 1 == raw.size() || level > last_level) {
      kept.push_back(raw[i]);
      last_level = level;
    }
  }
  BlowupRun run{Trajectory(Chart::phi_y, settings, {"tau"}, std::move(kept)), {}};
  run.omega = estimate_omega(run.trajectory);
  return run;
}

/// phi_j = c_j / c_N against y = int c_N; tau = int c_1 carried over.
inline Trajectory chart_map_t_to_phi(const Trajectory& traj) {
  if (traj.chart() != Chart::t && traj.chart() != Chart::log_t)
    throw InvalidInput("chart_map_t_to_phi: need a t or log-t trajectory");
  const auto y_idx = traj.aux_index("y");
  if (!y_idx) throw InvalidInput("chart_map_t_to_phi: y accumulator missing");
  const auto tau_idx = traj.aux_index("tau");
  std::vector<Sample> out;
  for (const auto& s : traj.samples()) {
    const double cn = s.state.back();
    if (!(cn > 0.0)) throw InvalidInput("chart_map_t_to_phi: c_N = 0 (chart breakdown) at t = " + std::to_string(s.x));
    Sample p;
    p.x = s.aux[*y_idx];
    p.state.resize(s.state.size() - 1);
    for (std::size_t j = 0; j + 1 < s.state.size(); ++j) p.state[j] = s.state[j] / cn;
    if (tau_idx) p.aux.push_back(s.aux[*tau_idx]);
    out.push_back(std::move(p));
  }
  std::vector<std::string> names;
  if (tau_idx) names.push_back("tau");
  return Trajectory(Chart::phi_y, traj.settings(), std::move(names), std::move(out));
}

}  // namespace rbk
