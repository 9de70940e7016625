#pragma once

// JSON run configuration.
//
//   {
//     "N": 4,
//     "c0": [1, 1, 1, 1]                       explicit densities, or a family:
//           {"uniform": {"value": 1}}
//           {"monodisperse": {"value": 1, "index": N}}
//           {"self_similar": {"alpha": 0.5, "kappa": 1}}
//           {"lattice": {"m": 2, "p": 6, "value": 1}}
//           {"random": {"low": 0.1, "high": 1}}   (uses "seed")
//     "phi0": [..]          optional blowup start (default c0[j]/c0[N])
//     "chart": "t" | "log-t" | "phi",
//     "t_end": 100, "cap": 1e10,
//     "rtol": 1e-9, "atol": 1e-12, "max_steps": 5000000,
//     "sampling": {"points_per_decade": 64},
//     "seed": 0,
//     "theorem_check": false
//   }

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"
#include "rbk/core.hpp"
#include "rbk/error.hpp"
#include "rbk/harness.hpp"
#include "rbk/integrate.hpp"

namespace rbk {

using Json = nlohmann::json;

struct RunConfig {
  SystemConfig system;
  Chart chart = Chart::t;
  double t_end = 100.0;
  double cap = 1e10;
  IntegratorSettings settings;
  int points_per_decade = 64;
  std::uint64_t seed = 0;
  bool theorem_check = false;
  std::optional<Vector> phi0;

  /// phi(0): explicit, or c(0)/c_N(0) when every density is positive.
  Vector blowup_start() const {
    if (phi0) return *phi0;
    const auto& c = system.c0;
    if (c.size() < 2 || !(c.back() > 0.0))
      throw ConfigError("phi chart needs c_N(0) > 0 (or an explicit phi0)");
    Vector p(c.size() - 1);
    for (std::size_t j = 0; j + 1 < c.size(); ++j) {
      if (!(c[j] > 0.0)) throw ConfigError("phi chart needs strictly positive densities (or an explicit phi0)");
      p[j] = c[j] / c.back();
    }
    return p;
  }
};

inline Chart parse_chart(const std::string& s) {
  if (s == "t") return Chart::t;
  if (s == "log-t") return Chart::log_t;
  if (s == "phi" || s == "phi-y") return Chart::phi_y;
  throw ConfigError("unknown chart '" + s + "' (expected t, log-t or phi)");
}

namespace detail {

inline double number(const Json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

inline Vector density_family(const Json& spec, int n, std::uint64_t seed) {
  if (spec.is_array()) {
    Vector c;
    for (const auto& v : spec) c.push_back(number(v, "c0[]"));
    return c;
  }
  if (!spec.is_object() || spec.size() != 1) throw ConfigError("'c0' must be an array or a single-family object");
  const auto& [name, p] = *spec.items().begin();
  auto get = [&](const char* k, double def) { return p.contains(k) ? number(p.at(k), k) : def; };
  const auto nz = static_cast<std::size_t>(n);
  if (name == "uniform") return Vector(nz, get("value", 1.0));
  if (name == "monodisperse") {
    const int idx = static_cast<int>(get("index", n));
    if (idx < 1 || idx > n) throw ConfigError("monodisperse index out of range");
    Vector c(nz, 0.0);
    c[static_cast<std::size_t>(idx - 1)] = get("value", 1.0);
    return c;
  }
  if (name == "self_similar") {
    try {
      return self_similar(get("alpha", 0.5), get("kappa", 1.0), 0.0, n);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  if (name == "lattice") {
    const int m = static_cast<int>(get("m", 1));
    const int p_max = static_cast<int>(get("p", n));
    if (m < 1 || p_max < m || p_max > n || p_max % m != 0) throw ConfigError("lattice family needs 1 <= m, m | p, p <= N");
    Vector c(nz, 0.0);
    for (int j = m; j <= p_max; j += m) c[static_cast<std::size_t>(j - 1)] = get("value", 1.0);
    return c;
  }
  if (name == "random") {
    const double lo = get("low", 0.1), hi = get("high", 1.0);
    if (!(lo > 0.0 && hi > lo)) throw ConfigError("random family needs 0 < low < high");
    return random_positive(n, seed, lo, hi);
  }
  throw ConfigError("unknown c0 family '" + name + "'");
}

}  // namespace detail

inline RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const char* const known[] = {"N", "c0", "phi0", "chart", "t_end", "cap", "rtol", "atol",
                                      "max_steps", "sampling", "seed", "theorem_check"};
  for (const auto& [k, v] : doc.items()) {
    bool ok = false;
    for (const char* kk : known) ok = ok || k == kk;
    if (!ok) throw ConfigError("unknown config key '" + k + "'");
  }
  RunConfig rc;
  if (!doc.contains("N") || !doc.at("N").is_number_integer()) throw ConfigError("'N' must be an integer");
  const int n = doc.at("N").get<int>();
  if (n == 1)
    throw ConfigError("N = 1 is the single-component system: c_1(t) = 1/(c_1(0)^-1 + t) in closed form, "
                      "there is nothing to simulate or verify");
  if (n < 2) throw ConfigError("'N' must be >= 2");
  if (doc.contains("seed")) {
    const Json& sd = doc.at("seed");
    if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<std::int64_t>() < 0))
      throw ConfigError("'seed' must be a nonnegative integer");
    rc.seed = doc.at("seed").get<std::uint64_t>();
  }
  rc.system.n = n;
  rc.system.c0 = doc.contains("c0") ? detail::density_family(doc.at("c0"), n, rc.seed) : Vector(static_cast<std::size_t>(n), 1.0);
  try {
    rc.system.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("phi0")) {
    Vector p = detail::density_family(doc.at("phi0"), n - 1, rc.seed);
    if (static_cast<int>(p.size()) != n - 1) throw ConfigError("'phi0' must have N-1 entries");
    for (double v : p)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("'phi0' entries must be positive");
    rc.phi0 = std::move(p);
  }
  if (doc.contains("chart")) {
    if (!doc.at("chart").is_string()) throw ConfigError("'chart' must be a string");
    rc.chart = parse_chart(doc.at("chart").get<std::string>());
  }
  if (doc.contains("t_end")) rc.t_end = detail::number(doc.at("t_end"), "t_end");
  if (!(rc.t_end > 0.0) || !std::isfinite(rc.t_end)) throw ConfigError("'t_end' must be positive");
  if (rc.chart == Chart::log_t && !(rc.t_end > 1.0)) throw ConfigError("log-t chart needs t_end > 1");
  if (doc.contains("cap")) rc.cap = detail::number(doc.at("cap"), "cap");
  if (!(rc.cap > 0.0) || !std::isfinite(rc.cap)) throw ConfigError("'cap' must be positive");
  if (doc.contains("rtol")) rc.settings.rtol = detail::number(doc.at("rtol"), "rtol");
  if (doc.contains("atol")) rc.settings.atol = detail::number(doc.at("atol"), "atol");
  if (doc.contains("max_steps")) {
    if (!doc.at("max_steps").is_number_integer()) throw ConfigError("'max_steps' must be an integer");
    rc.settings.max_steps = doc.at("max_steps").get<long>();
  }
  try {
    rc.settings.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("sampling")) {
    const auto& s = doc.at("sampling");
    if (!s.is_object()) throw ConfigError("'sampling' must be an object");
    if (s.contains("points_per_decade")) {
      if (!s.at("points_per_decade").is_number_integer()) throw ConfigError("points_per_decade must be an integer");
      rc.points_per_decade = s.at("points_per_decade").get<int>();
    }
    if (rc.points_per_decade < 1) throw ConfigError("points_per_decade must be >= 1");
  }
  if (doc.contains("theorem_check")) {
    if (!doc.at("theorem_check").is_boolean()) throw ConfigError("'theorem_check' must be a boolean");
    rc.theorem_check = doc.at("theorem_check").get<bool>();
  }
  return rc;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace rbk
