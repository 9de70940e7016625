#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbk/fixtures.hpp"
#include "rbk/harness.hpp"

namespace rbk {
namespace {

TEST(Rk4Reference, ExponentialConvergesAtFourthOrder) {
  auto rhs = [](double, std::span<const double> u, std::span<double> d) { d[0] = u[0]; };
  const double e1 = std::abs(rk4_reference(rhs, Vector{1.0}, 0.02, {0.0, 1.0}).back().state[0] - std::exp(1.0));
  const double e2 = std::abs(rk4_reference(rhs, Vector{1.0}, 0.01, {0.0, 1.0}).back().state[0] - std::exp(1.0));
  EXPECT_NEAR(e1 / e2, 16.0, 0.2);
}

TEST(Rk4Reference, RecordsStrideAndEndpoint) {
  const Trajectory tr = rk4_reference(rbk_rhs(), Vector{1, 1}, 0.1, {0.0, 1.05}, Chart::t, {}, 2);
  EXPECT_EQ(tr.front().x, 0.0);
  EXPECT_EQ(tr.back().x, 1.05);
  EXPECT_EQ(tr.size(), 1u + 5u + 1u);
  EXPECT_THROW(rk4_reference(rbk_rhs(), Vector{1, 1}, 0.0, {0.0, 1.0}), InvalidInput);
  EXPECT_THROW(rk4_reference(rbk_rhs(), Vector{1, 1}, 0.1, {1.0, 1.0}), InvalidInput);
}

TEST(Richardson, RemovesLeadingErrorTerms) {
  // values v(h) = 1 + a h^4 + b h^5 are extrapolated exactly
  Vector hs;
  std::vector<Vector> vals;
  for (int k = 0; k < 3; ++k) {
    const double h = 0.1 / std::pow(2.0, k);
    hs.push_back(h);
    vals.push_back({1.0 + 3.0 * std::pow(h, 4) - 2.0 * std::pow(h, 5)});
  }
  const RichardsonResult r = richardson_rk4(hs, vals);
  EXPECT_NEAR(r.extrapolated[0], 1.0, 1e-15);
  EXPECT_THROW(richardson_rk4(hs, {}), InvalidInput);
}

TEST(OracleEquivalence, AdaptiveMatchesRk4Richardson) {
  for (int n : {3, 4, 5}) {
    const Vector c0 = random_positive(n, 404);
    const RichardsonResult rr = rk4_richardson(rbk_rhs(), c0, 1e-3, {0.0, 10.0}, 3);
    const Trajectory tr = integrate_t_chart(c0, 10.0, {});
    for (int j = 0; j < n; ++j)
      EXPECT_NEAR(tr.back().state[j], rr.extrapolated[j], 1e-6 * rr.extrapolated[j]) << "N=" << n << " j=" << j;
  }
}

TEST(OmegaReference, AgreesWithAdaptiveBlowup) {
  const OmegaOracle om = omega_reference(Vector{1, 1, 1}, omega_oracle_tau_end(4), 0.05, 3);
  const BlowupRun run = integrate_phi_to_blowup(Vector{1, 1, 1}, 1e10);
  EXPECT_NEAR(run.omega.omega, om.omega, 1e-6 * om.omega);
  EXPECT_EQ(om.per_h.size(), 4u);
  EXPECT_THROW(omega_reference(Vector{1}, 100.0, 0.1), InvalidInput);
}

TEST(IdentitySuite, RandomInitialData) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Vector c0 = random_positive(5, seed);
    const Trajectory tr = integrate_t_chart(c0, 100.0, {});
    const IdentityReport rep = identity_suite(tr);
    EXPECT_TRUE(rep.pass()) << "seed " << seed;
    EXPECT_LT(rep.nu_odd.max_error, 1e-7);
    EXPECT_EQ(rep.nu_odd.checked, tr.size());
    EXPECT_EQ(rep.dissipation.checked, tr.size() - 2);
  }
}

TEST(IdentitySuite, DetectsCorruptedTrajectory) {
  const Trajectory tr = integrate_t_chart(Vector{1, 1, 1}, 10.0, {});
  std::vector<Sample> s = tr.samples();
  s[s.size() / 2].state[0] *= 1.01;
  const Trajectory bad(Chart::t, tr.settings(), tr.aux_names(), s);
  const IdentityReport rep = identity_suite(bad);
  EXPECT_FALSE(rep.nu_odd.pass);
  EXPECT_FALSE(rep.pass());
  EXPECT_EQ(rep.nu_odd.worst_x, s[s.size() / 2].x);
}

TEST(IdentitySuite, RequiresTChart) {
  const BlowupRun run = integrate_phi_to_blowup(Vector{1, 1}, 1e3);
  EXPECT_THROW(identity_suite(run.trajectory), InvalidInput);
}

TEST(SelfSimilar, TruncatedSystemTracksProfile) {
  const SelfSimilarReport rep = self_similar_residual(40, 0.5, 1.0, 100.0);
  EXPECT_EQ(rep.j_max, 13);
  EXPECT_LT(rep.max_deviation, 1e-6);
  EXPECT_THROW(self_similar_residual(10, 0.5, 1.0, 1.0), InvalidInput);
}

TEST(RandomPositive, SeededAndInRange) {
  const Vector a = random_positive(10, 7), b = random_positive(10, 7), c = random_positive(10, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double v : a) {
    EXPECT_GE(v, 0.1);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_THROW(random_positive(0, 1), InvalidInput);
}

class Fixtures : public ::testing::Test {
 protected:
  void SetUp() override {
    try {
      doc_ = load_fixtures();
    } catch (const ConfigError& e) {
      GTEST_SKIP() << e.what();
    }
  }
  Json doc_;
};

TEST_F(Fixtures, Rk4FixedStepIsBitExact) {
  const Json& f = fixture(doc_, "rk4_N3_ones_t1");
  const Vector c0 = f.at("inputs").at("c0").get<Vector>();
  const double h = f.at("h_sequence").at(0).get<double>();
  const Trajectory tr = rk4_reference(rbk_rhs(), c0, h, {0.0, 1.0});
  EXPECT_EQ(tr.back().state, f.at("fixed_h_value").get<Vector>());
}

TEST_F(Fixtures, AdaptiveMatchesOracleFixtures) {
  for (int n : {3, 4, 5})
    for (std::uint64_t seed : oracle_seeds()) {
      const Json& f = fixture(doc_, oracle_fixture_id(n, seed));
      const Vector c0 = f.at("inputs").at("c0").get<Vector>();
      EXPECT_EQ(c0, random_positive(n, seed));
      const Vector ref = f.at("extrapolated").get<Vector>();
      const double tol = f.at("tolerance").get<double>();
      const Trajectory tr = integrate_t_chart(c0, 10.0, {});
      for (int j = 0; j < n; ++j) EXPECT_LT(std::abs(tr.back().state[j] - ref[j]) / ref[j], tol);
    }
}

TEST_F(Fixtures, UnknownIdIsConfigError) { EXPECT_THROW(fixture(doc_, "nope"), ConfigError); }

TEST(FixturesFile, MissingFileIsConfigError) { EXPECT_THROW(load_fixtures("/nonexistent/fixtures.json"), ConfigError); }

}  // namespace
}  // namespace rbk
