#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbk/core.hpp"
#include "rbk/harness.hpp"

namespace rbk {
namespace {

// Direct double-sum evaluation, written independently of the library kernel.
Vector field_by_definition(const Vector& c) {
  const int n = static_cast<int>(c.size());
  Vector out(c.size());
  for (int j = 1; j <= n; ++j) {
    double gain = 0.0, loss = 0.0;
    for (int k = 1; k <= n - j; ++k) gain += c[j + k - 1] * c[k - 1];
    for (int k = 1; k <= n; ++k) loss += c[k - 1];
    out[j - 1] = gain - c[j - 1] * loss;
  }
  return out;
}

Vector random_state(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Vector c(static_cast<std::size_t>(n));
  for (auto& v : c) v = u(gen);
  return c;
}

TEST(RbkField, HandExpansions) {
  EXPECT_EQ(rbk_field(Vector{1, 1, 1}), (Vector{-1, -2, -3}));
  EXPECT_EQ(rbk_field(Vector{0, 0, 0, 0}), (Vector{0, 0, 0, 0}));
  // the (4,1) pair produces a 3-cluster
  EXPECT_EQ(rbk_field(Vector{1, 0, 0, 1}), (Vector{-2, 0, 1, -2}));
}

TEST(RbkField, RejectsNonFinite) {
  EXPECT_THROW(rbk_field(Vector{1, NAN, 1}), InvalidInput);
  EXPECT_THROW(rbk_field(Vector{1, INFINITY}), InvalidInput);
}

TEST(RbkField, MatchesDefinitionOnRandomStates) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 12;
    const Vector c = random_state(gen, n);
    const Vector a = rbk_field(c), b = field_by_definition(c);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(a[j], b[j], 1e-13 * (1.0 + std::abs(b[j])));
  }
}

TEST(RbkField, PropertiesOnRandomStates) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 15;
    Vector c = random_state(gen, n);
    const Vector dc = rbk_field(c);
    const auto d = densities(c);

    // last component: -c_N nu
    EXPECT_NEAR(dc.back(), -c.back() * d.total, 1e-14 * c.back() * d.total);

    // odd-index sum evolves as -nu_odd^2
    double odd_rate = 0.0, total_rate = 0.0, sq = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j % 2 == 0) odd_rate += dc[j];
      total_rate += dc[j];
      sq += c[j] * c[j];
    }
    const double want_odd = -d.odd * d.odd;
    EXPECT_NEAR(odd_rate, want_odd, 1e-12 * (1.0 + std::abs(want_odd)) * n);

    // dissipation identity from symmetrizing the double sum
    const double want_total = -0.5 * (d.total * d.total + sq);
    EXPECT_NEAR(total_rate, want_total, 1e-12 * std::abs(want_total) * n);
  }
}

TEST(RbkField, ParityClosureIsBitExact) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 14;
    Vector c = random_state(gen, n);
    for (int j = 0; j < n; j += 2) c[j] = 0.0;
    const Vector dc = rbk_field(c);
    for (int j = 0; j < n; j += 2) {
      EXPECT_EQ(dc[j], 0.0);
      EXPECT_FALSE(std::signbit(dc[j]));
    }
  }
}

TEST(RbkField, SupportLatticeClosureAndEmbeddingCommute) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 4;
    const int n_eff = 2 + trial % 5;
    const int n = n_eff * m + trial % 3;
    const Vector reduced = random_state(gen, n_eff);
    const Vector c = embed_reduced(reduced, m, n);
    const Vector dc = rbk_field(c);
    for (int j = 1; j <= n; ++j) {
      if (j % m != 0 || j > n_eff * m) {
        EXPECT_EQ(dc[j - 1], 0.0) << "j=" << j << " m=" << m;
      }
    }
    EXPECT_EQ(dc, embed_reduced(rbk_field(reduced), m, n));
  }
}

TEST(Densities, Examples) {
  const auto a = densities(Vector{1, 2, 3, 4});
  EXPECT_EQ(a.total, 10);
  EXPECT_EQ(a.odd, 4);
  EXPECT_EQ(a.even, 6);
  const auto b = densities(Vector{0, 0});
  EXPECT_EQ(b.total, 0);
  EXPECT_EQ(b.odd, 0);
  const auto c = densities(Vector{5});
  EXPECT_EQ(c.total, 5);
  EXPECT_EQ(c.odd, 5);
  EXPECT_EQ(c.even, 0);
}

TEST(PhiField, Examples) {
  EXPECT_EQ(phi_field(Vector{1, 1}), (Vector{2, 1}));
  EXPECT_EQ(phi_field(Vector{1, 1, 1}), (Vector{3, 2, 1}));
  EXPECT_EQ(phi_field(Vector{2, 1, 1}), (Vector{4, 3, 2}));
}

TEST(PhiField, RejectsNonPositive) {
  EXPECT_THROW(phi_field(Vector{1, 0}), InvalidInput);
  EXPECT_THROW(phi_field(Vector{-1, 1}), InvalidInput);
  EXPECT_THROW(phi_field(Vector{}), InvalidInput);
}

TEST(PhiField, DominatesLeadingProduct) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 10;
    Vector phi(static_cast<std::size_t>(n - 1));
    for (auto& v : phi) v = u(gen);
    const Vector d = phi_field(phi);
    for (int j = 1; j < n; ++j) {
      const double next = j == n - 1 ? 1.0 : phi[j];
      EXPECT_GE(d[j - 1], next * phi[0]);
      EXPECT_GT(d[j - 1], 0.0);
    }
  }
}

TEST(PsiField, Examples) {
  EXPECT_EQ(psi_field(Vector{1, 1, 1}), (Vector{3, 2, 1}));
  EXPECT_EQ(psi_field(Vector{2, 1, 1}), (Vector{2, 1.5, 1}));
  EXPECT_THROW(psi_field(Vector{0, 1, 1}), InvalidInput);
}

TEST(PsiField, LastComponentIsExactlyOne) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(1e-3, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    Vector psi(static_cast<std::size_t>(2 + trial % 9));
    for (auto& v : psi) v = u(gen);
    EXPECT_EQ(psi_field(psi).back(), 1.0);
  }
}

TEST(SupportProfile, Examples) {
  const auto a = support_profile(Vector{0, 0.5, 0, 0.25, 0, 0});
  EXPECT_EQ(a.indices, (std::vector<int>{2, 4}));
  EXPECT_EQ(a.m, 2);
  EXPECT_EQ(a.p, 4);
  EXPECT_EQ(a.n_eff, 2);

  const auto b = support_profile(Vector{1, 1, 1});
  EXPECT_EQ(b.indices, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(b.m, 1);
  EXPECT_EQ(b.n_eff, 3);

  EXPECT_THROW(support_profile(Vector{0, 0, 1e-20}, 1e-12), InvalidInput);
  const auto c = support_profile(Vector{0, 0, 1e-20}, 0.0);
  EXPECT_EQ(c.indices, (std::vector<int>{3}));
  EXPECT_EQ(c.m, 3);
  EXPECT_EQ(c.n_eff, 1);
}

TEST(GcdReduce, Examples) {
  const double a = 0.3, b = 0.7, d = 1.9;
  const auto r = gcd_reduce({6, {0, a, 0, b, 0, d}});
  EXPECT_EQ(r.config.n, 3);
  EXPECT_EQ(r.config.c0, (Vector{a, b, d}));
  EXPECT_EQ(r.m, 2);
  EXPECT_EQ(r.p, 6);

  const auto id = gcd_reduce({3, {1, 2, 3}});
  EXPECT_EQ(id.config.c0, (Vector{1, 2, 3}));
  EXPECT_EQ(id.m, 1);

  const auto single = gcd_reduce({4, {0, 0, 0, 5}});
  EXPECT_EQ(single.config.n, 1);
  EXPECT_EQ(single.config.c0, (Vector{5}));

  EXPECT_THROW(gcd_reduce({3, {0, 0, 0}}), InvalidInput);
}

TEST(EmbedReduced, ExamplesAndErrors) {
  EXPECT_EQ(embed_reduced(Vector{1, 2, 3}, 2, 6), (Vector{0, 1, 0, 2, 0, 3}));
  EXPECT_EQ(embed_reduced(Vector{1, 2, 3}, 1, 3), (Vector{1, 2, 3}));
  EXPECT_EQ(embed_reduced(Vector{7}, 4, 4), (Vector{0, 0, 0, 7}));
  EXPECT_THROW(embed_reduced(Vector{1, 2}, 3, 5), InvalidInput);
}

TEST(GcdReduce, RoundTripIsExact) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 5;
    const int n_eff = 1 + trial % 6;
    const int n = n_eff * m + trial % 4;
    Vector reduced = random_state(gen, n_eff);
    reduced.back() += 0.1;  // p = n_eff * m
    reduced[0] += 0.1;      // gcd = m
    const Vector c = embed_reduced(reduced, m, n);
    const auto r = gcd_reduce({n, c});
    EXPECT_EQ(r.config.c0, reduced);
    EXPECT_EQ(embed_reduced(r.config.c0, r.m, n), c);
  }
}

TEST(TheoremConstants, Examples) {
  auto prefactors = [](const TheoremConstants& tc) {
    Vector v;
    for (const auto& l : tc.laws) v.push_back(l.law.prefactor);
    return v;
  };
  auto exponents = [](const TheoremConstants& tc) {
    Vector v;
    for (const auto& l : tc.laws) v.push_back(l.law.exponent);
    return v;
  };
  const auto a = theorem_constants(3, 1);
  EXPECT_EQ(prefactors(a), (Vector{1, 2, 2}));
  EXPECT_EQ(exponents(a), (Vector{0, 1, 2}));
  EXPECT_TRUE(a.established);

  EXPECT_EQ(prefactors(theorem_constants(4, 1)), (Vector{1, 3, 6, 6}));

  const auto b = theorem_constants(3, 2);
  EXPECT_EQ(prefactors(b), (Vector{1, 2, 2}));
  EXPECT_EQ(exponents(b), (Vector{0, 1, 2}));
  EXPECT_EQ(b.laws[1].index, 4);
  const auto printed = theorem_constants(3, 2, PrefactorVariant::as_printed, 6);
  EXPECT_EQ(prefactors(printed), (Vector{1, 5, 20}));

  EXPECT_FALSE(theorem_constants(2, 1).established);
  EXPECT_THROW(theorem_constants(1, 1), InvalidInput);
  EXPECT_THROW(theorem_constants(21, 1), InvalidInput);
}

TEST(TheoremConstants, FullSupportMatchesLongTimeCn) {
  // m = 1, p = N: the c_N prefactor is (N-1)! and both variants agree
  for (int n = 3; n <= 12; ++n) {
    const auto red = theorem_constants(n, 1);
    const auto asp = theorem_constants(n, 1, PrefactorVariant::as_printed, n);
    EXPECT_EQ(red.laws.back().law.prefactor, static_cast<double>(factorial(n - 1)));
    for (std::size_t i = 0; i < red.laws.size(); ++i) EXPECT_EQ(red.laws[i].law.prefactor, asp.laws[i].law.prefactor);
  }
}

TEST(Lemma2Constants, Examples) {
  const auto a = lemma2_constants(3);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_DOUBLE_EQ(a[0].exponent, 2.0);
  EXPECT_DOUBLE_EQ(a[1].exponent, 1.0);
  EXPECT_DOUBLE_EQ(a[0].prefactor, 2.0);
  EXPECT_DOUBLE_EQ(a[1].prefactor, 2.0);

  const auto b = lemma2_constants(4);
  EXPECT_DOUBLE_EQ(b[0].exponent, 1.5);
  EXPECT_DOUBLE_EQ(b[1].exponent, 1.0);
  EXPECT_DOUBLE_EQ(b[2].exponent, 0.5);
  EXPECT_DOUBLE_EQ(b[0].prefactor, std::pow(3.0, 1.5) / 6.0);
  EXPECT_DOUBLE_EQ(b[1].prefactor, 1.5);
  EXPECT_DOUBLE_EQ(b[2].prefactor, std::sqrt(3.0));

  EXPECT_THROW(lemma2_constants(2), InvalidInput);
}

TEST(Lemma2Constants, LeadingConstantCombinesToFactorial) {
  // A_1 ((N-2)/(N-1)!)^{(N-1)/(N-2)} = 1/(N-1)!
  for (int n = 3; n <= 15; ++n) {
    const auto l = lemma2_constants(n);
    const double f = static_cast<double>(factorial(n - 1));
    const double combined = l[0].prefactor * std::pow((n - 2) / f, (n - 1.0) / (n - 2.0));
    EXPECT_NEAR(combined * f, 1.0, 1e-12);
  }
}

TEST(Factorial, OverflowGuard) {
  EXPECT_EQ(factorial(0), 1);
  EXPECT_EQ(factorial(20), 2432902008176640000LL);
  EXPECT_THROW(factorial(21), InvalidInput);
}

TEST(NuOddClosed, Examples) {
  EXPECT_EQ(nu_odd_closed(2.0, 0.0), 2.0);
  EXPECT_EQ(nu_odd_closed(1.0, 3.0), 0.25);
  EXPECT_EQ(nu_odd_closed(0.0, 17.0), 0.0);
  EXPECT_THROW(nu_odd_closed(-1.0, 1.0), InvalidInput);
  EXPECT_THROW(nu_odd_closed(1.0, -1.0), InvalidInput);
}

TEST(SelfSimilar, Examples) {
  const Vector a = self_similar(0.5, 1.0, 0.0, 4);
  EXPECT_DOUBLE_EQ(a[0], 0.75);
  EXPECT_DOUBLE_EQ(a[1], 0.375);
  EXPECT_DOUBLE_EQ(self_similar(0.5, 1.0, 1.0, 4)[0], 0.375);
  for (double t : {1e3, 1e6, 1e9}) {
    const Vector c = self_similar(0.3, 2.0, t, 5);
    EXPECT_NEAR(t * c[2], (1 - 0.09) * 0.09, 3e-3 * 2.0 / t * 1e3);
  }
  EXPECT_THROW(self_similar(1.0, 1.0, 0.0, 3), InvalidInput);
  EXPECT_THROW(self_similar(0.0, 1.0, 0.0, 3), InvalidInput);
  EXPECT_THROW(self_similar(0.5, 0.0, 0.0, 3), InvalidInput);
}

TEST(SystemConfig, Validation) {
  EXPECT_NO_THROW((SystemConfig{3, {0, 1, 2}}.validate()));
  EXPECT_THROW((SystemConfig{3, {0, 1}}.validate()), InvalidInput);
  EXPECT_THROW((SystemConfig{2, {0, -1}}.validate()), InvalidInput);
  EXPECT_THROW((SystemConfig{0, {}}.validate()), InvalidInput);
}

TEST(ConvergenceDiagnostic, Validation) {
  ConvergenceDiagnostic d{"x", {1, 2, 3}, {0, 0, 0}};
  EXPECT_NO_THROW(d.validate());
  d.abscissae = {1, 1, 2};
  EXPECT_THROW(d.validate(), InvalidInput);
  d.abscissae = {1, 2};
  EXPECT_THROW(d.validate(), InvalidInput);
}

}  // namespace
}  // namespace rbk
