#pragma once

// Constant-kernel RBK coagulation system: the vector field in the three
// coordinate charts (t, phi-y, psi-tau), the closed-form solutions used as
// oracles, the asymptotic constants, and the support/gcd reduction.
//
// Densities are 1-based in all documentation and file formats; in memory
// c_j lives at c[j - 1].

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rbk/error.hpp"

namespace rbk {

using Vector = std::vector<double>;

/// Largest dimension for which the factorial tables stay exact in 64-bit
/// integers (20! < 2^63).
inline constexpr int kMaxConstantDimension = 20;

struct SystemConfig {
  int n = 0;
  Vector c0;

  /// Structural checks only. The reduced system may legitimately have
  /// n = 1 (single-cluster support), so n >= 2 is enforced by callers that
  /// simulate.
  void validate() const {
    if (n < 1) throw InvalidInput("system dimension must be >= 1");
    if (static_cast<int>(c0.size()) != n)
      throw InvalidInput("initial density vector has length " + std::to_string(c0.size()) +
                         ", expected " + std::to_string(n));
    for (std::size_t i = 0; i < c0.size(); ++i) {
      if (!std::isfinite(c0[i]) || c0[i] < 0.0)
        throw InvalidInput("initial density c_" + std::to_string(i + 1) +
                           " must be finite and nonnegative");
    }
  }
};

struct ClusterState {
  double t = 0.0;
  Vector c;
};

struct SupportProfile {
  std::vector<int> indices;  // P, 1-based, ascending
  int m = 0;                 // gcd(P)
  int p = 0;                 // max(P)
  int n_eff = 0;             // p / m

  bool on_lattice(int j) const { return j >= 1 && j <= p && j % m == 0; }
};

/// phi_1..phi_{N-1}; phi_N == 1 is implicit.
struct PhiState {
  double y = 0.0;
  Vector phi;
};

/// psi_1..psi_{N-1}; psi_N == 1 is implicit.
struct PsiState {
  double tau = 0.0;
  Vector psi;
};

struct AsymptoticLaw {
  double exponent = 0.0;
  double prefactor = 1.0;
};

/// A measured residual series e_j, rho_j, rho-hat_j, r_j or R_0 against its
/// independent variable.
struct ConvergenceDiagnostic {
  std::string label;
  Vector abscissae;
  Vector residuals;

  void validate() const {
    if (abscissae.size() != residuals.size())
      throw InvalidInput("diagnostic '" + label + "': length mismatch");
    for (std::size_t i = 1; i < abscissae.size(); ++i)
      if (!(abscissae[i] > abscissae[i - 1]))
        throw InvalidInput("diagnostic '" + label + "': abscissae not strictly increasing");
  }
  bool empty() const { return residuals.empty(); }
  std::size_t size() const { return residuals.size(); }
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite component");
}

// Unchecked kernels shared by the public fields and the integrators. The
// integrators evaluate trial stages that may leave the valid chart; there a
// non-finite result means "reject the step", not "throw".

inline void rbk_rate(std::span<const double> c, std::span<double> dc) {
  const std::size_t n = c.size();
  double nu = 0.0;
  for (double x : c) nu += x;
  for (std::size_t j = 0; j < n; ++j) {
    // production: sum_{k=1}^{N-j} c_{j+k} c_k (1-based), empty at j = N
    double prod = 0.0;
    for (std::size_t k = 0; j + k + 1 < n; ++k) prod += c[j + k + 1] * c[k];
    dc[j] = prod - c[j] * nu;
  }
}

inline void phi_rate(std::span<const double> phi, std::span<double> dphi) {
  const std::size_t m = phi.size();  // N - 1
  const std::size_t n = m + 1;
  auto at = [&](std::size_t idx1) { return idx1 == n ? 1.0 : phi[idx1 - 1]; };
  for (std::size_t j = 1; j <= m; ++j) {
    double s = 0.0;
    for (std::size_t k = 1; k <= n - j; ++k) s += at(j + k) * at(k);
    dphi[j - 1] = s;
  }
}

inline void psi_rate(std::span<const double> psi, std::span<double> dpsi) {
  phi_rate(psi, dpsi);
  const double psi1 = psi[0];
  for (double& v : dpsi) v /= psi1;
}

}  // namespace detail

/// dc_j/dt = sum_{k=1}^{N-j} c_{j+k} c_k - c_j sum_{k=1}^N c_k.
inline Vector rbk_field(std::span<const double> c) {
  if (c.empty()) throw InvalidInput("rbk_field: empty state");
  detail::require_finite(c, "rbk_field");
  Vector dc(c.size());
  detail::rbk_rate(c, dc);
  return dc;
}

struct DensitySums {
  double total = 0.0;
  double odd = 0.0;   // indices 1, 3, 5, ...
  double even = 0.0;  // indices 2, 4, 6, ...
};

inline DensitySums densities(std::span<const double> c) {
  detail::require_finite(c, "densities");
  DensitySums s;
  for (std::size_t i = 0; i < c.size(); ++i) (i % 2 == 0 ? s.odd : s.even) += c[i];
  s.total = s.odd + s.even;
  return s;
}

inline Vector phi_field(std::span<const double> phi) {
  if (phi.empty()) throw InvalidInput("phi_field: need N >= 2");
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (!(phi[i] > 0.0) || !std::isfinite(phi[i]))
      throw InvalidInput("phi_field: phi_" + std::to_string(i + 1) + " must be positive and finite");
  Vector d(phi.size());
  detail::phi_rate(phi, d);
  return d;
}

/// dpsi_j/dtau = (sum_{k=1}^{N-j} psi_{j+k} psi_k) / psi_1. The last
/// component is exactly 1.
inline Vector psi_field(std::span<const double> psi) {
  if (psi.empty()) throw InvalidInput("psi_field: need N >= 2");
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (!(psi[i] > 0.0) || !std::isfinite(psi[i]))
      throw InvalidInput("psi_field: psi_" + std::to_string(i + 1) + " must be positive and finite");
  Vector d(psi.size());
  detail::psi_rate(psi, d);
  return d;
}

inline SupportProfile support_profile(std::span<const double> c, double zero_tol = 0.0) {
  if (!(zero_tol >= 0.0)) throw InvalidInput("support_profile: zero_tol must be nonnegative");
  detail::require_finite(c, "support_profile");
  SupportProfile sp;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] > zero_tol) sp.indices.push_back(static_cast<int>(i + 1));
  if (sp.indices.empty()) throw InvalidInput("empty support");
  sp.m = 0;
  for (int j : sp.indices) sp.m = std::gcd(sp.m, j);
  sp.p = sp.indices.back();
  sp.n_eff = sp.p / sp.m;
  return sp;
}

/// Support threshold for evolved states; exact zeros of initial data are
/// meaningful so initial data use 0.
inline double evolved_zero_tol(double nu0) { return 1e-13 * nu0; }

struct ReducedSystem {
  SystemConfig config;  // dimension p/m, c~_j = c_{jm}
  int m = 1;
  int p = 1;
  int ambient_n = 1;
};

inline ReducedSystem gcd_reduce(const SystemConfig& cfg) {
  cfg.validate();
  const SupportProfile sp = support_profile(cfg.c0, 0.0);
  ReducedSystem r;
  r.m = sp.m;
  r.p = sp.p;
  r.ambient_n = cfg.n;
  r.config.n = sp.n_eff;
  r.config.c0.resize(sp.n_eff);
  for (int j = 1; j <= sp.n_eff; ++j) r.config.c0[j - 1] = cfg.c0[j * sp.m - 1];
  return r;
}

inline Vector embed_reduced(std::span<const double> reduced, int m, int n) {
  if (m < 1) throw InvalidInput("embed_reduced: m must be >= 1");
  if (static_cast<long long>(reduced.size()) * m > n)
    throw InvalidInput("embed_reduced: index overflow (reduced length * m > N)");
  Vector c(static_cast<std::size_t>(n), 0.0);
  for (std::size_t j = 1; j <= reduced.size(); ++j) c[j * m - 1] = reduced[j - 1];
  return c;
}

inline std::int64_t factorial(int k) {
  if (k < 0) throw InvalidInput("factorial of negative integer");
  if (k > 20) throw InvalidInput("factorial overflow: " + std::to_string(k) + "! exceeds 64-bit range");
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

enum class PrefactorVariant {
  reduced,     // (n_eff-1)!/(n_eff-j/m)!, n_eff = p/m
  as_printed,  // (N-1)!/(N-j/m)! with the ambient dimension N
};

inline const char* to_string(PrefactorVariant v) {
  return v == PrefactorVariant::reduced ? "reduction" : "as-printed";
}

struct LatticeLaw {
  int index = 0;  // j in {m, 2m, ..., p}
  AsymptoticLaw law;  // exponent of log t is j/m - 1
};

struct TheoremConstants {
  PrefactorVariant variant = PrefactorVariant::reduced;
  int n_eff = 0;
  int m = 1;
  int ambient_n = 0;
  // The long-time law is established for reduced dimension >= 3 only;
  // n_eff = 2 tables are provided for numerical probing.
  bool established = true;
  std::vector<LatticeLaw> laws;
};

/// Long-time constants c_j(t) ~ A~_j / (t (log t)^{j/m-1}) over the support
/// lattice. `ambient_n` is only read for the as-printed variant.
inline TheoremConstants theorem_constants(int n_eff, int m,
                                          PrefactorVariant variant = PrefactorVariant::reduced,
                                          int ambient_n = 0) {
  if (n_eff < 2)
    throw InvalidInput("theorem_constants: effective dimension " + std::to_string(n_eff) +
                       " < 2; the single-component case decays as 1/(c(0)^-1 + t)");
  if (m < 1) throw InvalidInput("theorem_constants: m must be >= 1");
  if (n_eff > kMaxConstantDimension)
    throw InvalidInput("theorem_constants: dimension above " + std::to_string(kMaxConstantDimension) +
                       " overflows the factorial table");
  const int dim = variant == PrefactorVariant::reduced ? n_eff : ambient_n;
  if (variant == PrefactorVariant::as_printed) {
    if (ambient_n < n_eff * m)
      throw InvalidInput("theorem_constants: ambient N must be >= p = n_eff * m");
    if (ambient_n > kMaxConstantDimension)
      throw InvalidInput("theorem_constants: ambient N above " +
                         std::to_string(kMaxConstantDimension) + " overflows the factorial table");
  }
  TheoremConstants tc;
  tc.variant = variant;
  tc.n_eff = n_eff;
  tc.m = m;
  tc.ambient_n = variant == PrefactorVariant::as_printed ? ambient_n : n_eff * m;
  tc.established = n_eff >= 3;
  const double top = static_cast<double>(factorial(dim - 1));
  for (int i = 1; i <= n_eff; ++i) {
    LatticeLaw ll;
    ll.index = i * m;
    ll.law.exponent = static_cast<double>(i - 1);
    ll.law.prefactor = top / static_cast<double>(factorial(dim - i));
    tc.laws.push_back(ll);
  }
  return tc;
}

/// Blowup-chart constants phi_j(y) ~ A_j / (omega - y)^{alpha_j},
/// alpha_j = (N-j)/(N-2), A_j = ((N-1)!/(N-2))^{alpha_j} / (N-j)!.
inline std::vector<AsymptoticLaw> lemma2_constants(int n) {
  if (n < 3) throw InvalidInput("blowup constants undefined for N < 3 (alpha_j has N-2 in the denominator)");
  if (n > kMaxConstantDimension)
    throw InvalidInput("lemma2_constants: N above " + std::to_string(kMaxConstantDimension) +
                       " overflows the factorial table");
  const double base = static_cast<double>(factorial(n - 1)) / (n - 2);
  std::vector<AsymptoticLaw> out;
  for (int j = 1; j <= n - 1; ++j) {
    AsymptoticLaw law;
    law.exponent = static_cast<double>(n - j) / (n - 2);
    law.prefactor = std::pow(base, law.exponent) / static_cast<double>(factorial(n - j));
    out.push_back(law);
  }
  return out;
}

/// Odd-index density: it obeys d(nu_odd)/dt = -nu_odd^2 for every N.
inline double nu_odd_closed(double nu0, double t) {
  if (!(nu0 >= 0.0) || !(t >= 0.0)) throw InvalidInput("nu_odd_closed: negative input");
  if (nu0 == 0.0) return 0.0;
  return nu0 / (1.0 + nu0 * t);
}

/// Truncation to j = 1..N of the infinite-system self-similar profile
/// c_j(t) = (1 - alpha^2) alpha^{j-1} / (kappa + t).
inline Vector self_similar(double alpha, double kappa, double t, int n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("self_similar: alpha must lie in (0, 1)");
  if (!(kappa > 0.0)) throw InvalidInput("self_similar: kappa must be positive");
  if (!(t >= 0.0)) throw InvalidInput("self_similar: t must be nonnegative");
  if (n < 1) throw InvalidInput("self_similar: N must be >= 1");
  Vector c(static_cast<std::size_t>(n));
  const double scale = (1.0 - alpha * alpha) / (kappa + t);
  double power = 1.0;
  for (auto& v : c) {
    v = scale * power;
    power *= alpha;
  }
  return c;
}

}  // namespace rbk
