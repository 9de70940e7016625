#pragma once

// Versioned oracle fixtures. Every entry is produced by the fixed-step RK4
// oracle (h-halving + Richardson) or by a tightened-tolerance calibration
// run, and records its generation parameters:
//
//   { "version": 1,
//     "fixtures": { "<id>": { "kind": ..., "inputs": {...}, "h_sequence": [...],
//                             "oracle_outputs": [...], "extrapolated": ...,
//                             "tolerance": ... } } }
//
// The path defaults to the repository copy and can be overridden with the
// RBK_FIXTURES environment variable.

#include <cstdlib>
#include <string>
#include <vector>

#include "json.hpp"
#include "rbk/config.hpp"
#include "rbk/core.hpp"
#include "rbk/harness.hpp"

#ifndef RBK_DEFAULT_FIXTURES
#define RBK_DEFAULT_FIXTURES "tests/fixtures/fixtures.json"
#endif

namespace rbk {

inline constexpr int kFixturesVersion = 1;

inline std::string fixtures_path() {
  if (const char* env = std::getenv("RBK_FIXTURES"); env && *env) return env;
  return RBK_DEFAULT_FIXTURES;
}

inline Json load_fixtures(const std::string& path = fixtures_path()) {
  Json doc = read_json_file(path);
  if (!doc.contains("version") || doc.at("version") != kFixturesVersion || !doc.contains("fixtures"))
    throw ConfigError("'" + path + "' is not a version-" + std::to_string(kFixturesVersion) + " fixtures file");
  return doc;
}

inline const Json& fixture(const Json& doc, const std::string& id) {
  const auto& f = doc.at("fixtures");
  if (!f.contains(id)) throw ConfigError("fixture '" + id + "' not found");
  return f.at(id);
}

/// Seeds used for the randomized oracle-equivalence fixtures.
inline const std::vector<std::uint64_t>& oracle_seeds() {
  static const std::vector<std::uint64_t> seeds{101, 202};
  return seeds;
}

inline std::string oracle_fixture_id(int n, std::uint64_t seed) {
  return "rk4_N" + std::to_string(n) + "_seed" + std::to_string(seed) + "_t10";
}

inline std::string omega_fixture_id(int n) { return "omega_N" + std::to_string(n) + "_ones"; }

/// psi-chart horizon for the omega oracle: the tail bias (omega - y) R_0
/// shrinks like tau_end^{-(N-1)}, so smaller N need a longer horizon.
inline double omega_oracle_tau_end(int n) { return n == 3 ? 1e4 : (n == 4 ? 3e3 : 1e3); }

inline Json generate_fixtures() {
  Json doc;
  doc["version"] = kFixturesVersion;
  Json& fx = doc["fixtures"];

  {
    const Vector c0{1.0, 1.0, 1.0};
    const double h = 1e-4;
    const Trajectory tr = rk4_reference(rbk_rhs(), c0, h, {0.0, 1.0});
    const RichardsonResult rr = rk4_richardson(rbk_rhs(), c0, h, {0.0, 1.0}, 4);
    fx["rk4_N3_ones_t1"] = {
        {"kind", "rk4_fixed_step"},
        {"inputs", {{"N", 3}, {"c0", c0}, {"t", 1.0}}},
        {"h_sequence", rr.h_sequence},
        {"oracle_outputs", rr.values},
        {"fixed_h_value", tr.back().state},
        {"extrapolated", rr.extrapolated},
        {"error_estimate", rr.error_estimate},
        {"tolerance", 0.0},
    };
  }

  for (int n : {3, 4, 5}) {
    for (std::uint64_t seed : oracle_seeds()) {
      const Vector c0 = random_positive(n, seed);
      const RichardsonResult rr = rk4_richardson(rbk_rhs(), c0, 1e-4, {0.0, 10.0}, 4);
      fx[oracle_fixture_id(n, seed)] = {
          {"kind", "rk4_richardson"},
          {"inputs", {{"N", n}, {"seed", seed}, {"c0", c0}, {"t", 10.0}}},
          {"h_sequence", rr.h_sequence},
          {"oracle_outputs", rr.values},
          {"extrapolated", rr.extrapolated},
          {"error_estimate", rr.error_estimate},
          {"tolerance", 1e-6},
      };
    }
  }

  for (int n : {3, 4, 5}) {
    const Vector phi0(static_cast<std::size_t>(n - 1), 1.0);
    const double tau_end = omega_oracle_tau_end(n);
    const OmegaOracle om = omega_reference(phi0, tau_end, 0.02, 4);
    fx[omega_fixture_id(n)] = {
        {"kind", "omega_psi_chart_rk4"},
        {"inputs", {{"N", n}, {"phi0", phi0}, {"tau_end", tau_end}}},
        {"h_sequence", om.h_sequence},
        {"oracle_outputs", om.per_h},
        {"extrapolated", om.omega},
        {"error_estimate", om.error_estimate},
        {"tolerance", 1e-6},
    };
  }

  {
    const IntegratorSettings tight{1e-12, 1e-20, 5'000'000, -1.0};
    const SelfSimilarReport rep = self_similar_residual(40, 0.5, 1.0, 100.0, tight);
    fx["self_similar_N40_a0.5"] = {
        {"kind", "calibration_run"},
        {"inputs", {{"N", 40}, {"alpha", 0.5}, {"kappa", 1.0}, {"t_end", 100.0}, {"rtol", tight.rtol}, {"atol", tight.atol}}},
        {"oracle_outputs", {{"max_deviation", rep.max_deviation}, {"worst_t", rep.worst_t}, {"worst_j", rep.worst_j}}},
        {"tolerance", 1e-6},
    };
  }
  return doc;
}

}  // namespace rbk
