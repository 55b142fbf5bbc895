#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "xtend/points_metrics.hpp"
#include "xtend/sampling.hpp"
#include "xtend/section_algebra.hpp"

using namespace xtend;

namespace {

GradedSection S(const char* text, std::size_t nvars) { return parse_section(text, nvars); }

DiagonalMetric metric(long p, std::initializer_list<long> radii) {
  return DiagonalMetric(Prime(p), std::vector<GammaValue>(radii.begin(), radii.end()));
}

DiagonalMetric random_metric(Rng& rng, const Prime& p, std::size_t nvars) {
  std::vector<GammaValue> r;
  for (std::size_t i = 0; i < nvars; ++i) r.emplace_back(Rational(rng.uniform(-4, 4), rng.uniform(1, 3)));
  return DiagonalMetric(p, r);
}

}  // namespace

TEST(GaussNorm, Examples) {
  EXPECT_EQ(gauss_norm(metric(2, {0, 0}), S("T0 + 2*T1", 2)), GammaValue(0));
  EXPECT_EQ(gauss_norm(metric(2, {0, 1}), S("T0^2 T1", 2)), GammaValue(1));
  EXPECT_EQ(gauss_norm(metric(2, {0, 1}), S("4*T0^3 + T0 T1^2", 2)), GammaValue(2));
  EXPECT_EQ(gauss_norm(metric(3, {0, 5}), GradedSection(2, 4)), GammaValue::infinity());
}

TEST(Multiply, Examples) {
  EXPECT_EQ(multiply(S("T0", 2), S("T1", 2)), S("T0 T1", 2));
  auto s = S("T0 + T1", 2);
  EXPECT_EQ(multiply(s, s), S("T0^2 + 2*T0 T1 + T1^2", 2));
  EXPECT_EQ(multiply(S("T0 - T1", 2), S("T0 + T1", 2)), S("T0^2 - T1^2", 2));
  EXPECT_EQ(power(s, 3), S("T0^3 + 3*T0^2 T1 + 3*T0 T1^2 + T1^3", 2));
  EXPECT_EQ(power(s, 0), GradedSection::constant(2, 1));
}

TEST(AlgebraNorm, Examples) {
  auto phi = metric(2, {0, 1});
  GradedElement one(2);
  one.add(GradedSection::constant(2, 1));
  EXPECT_EQ(algebra_norm(phi, one), GammaValue(0));
  GradedElement s(2);
  s.add(S("T0", 2));
  s.add(S("T1^2", 2));
  EXPECT_EQ(algebra_norm(phi, s), GammaValue(0));
  EXPECT_EQ(algebra_norm(phi, GradedElement(2)), GammaValue::infinity());
}

TEST(SpectralSeminorm, ConstantForGaussNorms) {
  auto phi = metric(3, {0, 2, -1});
  auto normf = [&](const GradedSection& s) { return gauss_norm(phi, s); };
  auto mono = spectral_seminorm(normf, S("9*T1^2 T2", 3), 4);
  for (const auto& v : mono) EXPECT_EQ(v, mono.front());
  auto gen = spectral_seminorm(normf, S("T0^2 - 3*T1 T2 + 1/3*T2^2", 3), 4);
  ASSERT_EQ(gen.size(), 5u);
  for (const auto& v : gen) EXPECT_EQ(v, gen.front());
  EXPECT_THROW(spectral_seminorm(normf, S("T0", 3), 0), Error);
}

TEST(GaussNorm, MultiplicativeOnRandomSections) {
  for (long pv : {2L, 3L, 5L}) {
    Prime p(pv);
    Rng rng(pv * 13);
    for (int i = 0; i < 80; ++i) {
      const std::size_t nv = static_cast<std::size_t>(rng.uniform(2, 4));
      auto phi = random_metric(rng, p, nv);
      auto a = random_section(rng, p, nv, static_cast<int>(rng.uniform(0, 3)));
      auto b = random_section(rng, p, nv, static_cast<int>(rng.uniform(0, 3)));
      EXPECT_EQ(gauss_norm(phi, multiply(a, b)), gauss_norm(phi, a) + gauss_norm(phi, b));
    }
  }
}

TEST(AlgebraNorm, PowerMultiplicativeOnInhomogeneousElements) {
  Prime p(2);
  Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    auto phi = random_metric(rng, p, 3);
    GradedElement s(3);
    for (int n = 0; n <= 2; ++n) {
      if (rng.chance(2, 3)) s.add(random_section(rng, p, 3, n));
    }
    if (s.is_zero()) continue;
    GammaValue base = algebra_norm(phi, s);
    for (unsigned m = 2; m <= 3; ++m) EXPECT_EQ(algebra_norm(phi, power(s, m)), base.scaled(Rational(m)));
  }
}

TEST(AlgebraNorm, ZeroNormOnlyForZero) {
  Prime p(5);
  Rng rng(3);
  auto phi = random_metric(rng, p, 2);
  GradedElement s(2);
  s.add(S("T0 T1", 2));
  s.add(S("-1*T0 T1", 2));
  EXPECT_TRUE(s.is_zero());
  EXPECT_TRUE(algebra_norm(phi, s).is_infinite());
  s.add(S("1/25*T1", 2));
  EXPECT_FALSE(algebra_norm(phi, s).is_infinite());
}

// With unit perturbations the monomial weights in each degree are pairwise
// distinct, and the norm of a combination is read off at the Gauss point.
TEST(GaussNorm, MonomialOrthogonalityWithIndependentRadii) {
  Prime p(3);
  Rng rng(19);
  auto phi = random_metric(rng, p, 3).perturbed();
  for (int n = 1; n <= 4; ++n) {
    std::set<std::vector<Rational>> seen;
    for (const auto& j : monomials_of_degree(3, n)) {
      GammaValue w = phi.monomial_weight(j);
      std::vector<Rational> key{w.primary()};
      for (const auto& q : w.perturbation()) key.push_back(q);
      EXPECT_TRUE(seen.insert(key).second);
    }
    for (int t = 0; t < 10; ++t) {
      auto s = random_section(rng, p, 3, n);
      MonomialPoint gauss(phi.radii());
      EXPECT_EQ(gauss_norm(phi, s), section_value(s, gauss, p));
    }
  }
}

TEST(GaussNorm, PerturbationKeepsPrimary) {
  Prime p(2);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    auto phi = random_metric(rng, p, 3);
    auto s = random_section(rng, p, 3, static_cast<int>(rng.uniform(1, 4)));
    EXPECT_EQ(gauss_norm(phi.perturbed(), s).primary(), gauss_norm(phi, s).primary());
  }
}

TEST(GradedSection, InvariantsAndErrors) {
  GradedSection s(2, 2);
  s.add_term({1, 1}, 3);
  s.add_term({1, 1}, -3);
  EXPECT_TRUE(s.is_zero());
  EXPECT_THROW(s.add_term({1, 0}, 1), Error);
  EXPECT_THROW(s.add_term({1, 1, 0}, 1), Error);
  EXPECT_THROW(S("T0 + T1^2", 2), Error);
  EXPECT_THROW(S("T3", 2), Error);
  EXPECT_THROW(S("T0 T1 *", 2), Error);
  EXPECT_THROW(S("", 2), Error);
  EXPECT_THROW(S("T0 T1", 2) + S("T0", 2), Error);
}

TEST(ParseSection, RoundTrip) {
  auto s = S("3/4*T0^2 T1 - T2^3 + 5*T0 T1 T2", 3);
  EXPECT_EQ(s.to_string(), "3/4*T0^2 T1 + 5*T0 T1 T2 - T2^3");
  EXPECT_EQ(S(s.to_string().c_str(), 3), s);
  EXPECT_EQ(S("-T0", 1).to_string(), "-T0");
  EXPECT_EQ(S("2*T0*T0", 1), S("2*T0^2", 1));
  Prime p(7);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    auto r = random_section(rng, p, 3, static_cast<int>(rng.uniform(0, 4)));
    EXPECT_EQ(S(r.to_string().c_str(), 3), r);
  }
}

TEST(SubstituteLinear, AgreesWithEvaluation) {
  Prime p(3);
  Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    auto s = random_section(rng, p, 3, 3);
    Matrix images(3, KVector(2));
    for (auto& row : images) {
      for (auto& x : row) x = Rational(rng.uniform(-3, 3));
    }
    auto pulled = substitute_linear(s, images);
    KVector u{Rational(rng.uniform(-5, 5)), Rational(rng.uniform(-5, 5), 2)};
    KVector x(3);
    for (std::size_t k = 0; k < 3; ++k) x[k] = images[k][0] * u[0] + images[k][1] * u[1];
    EXPECT_EQ(evaluate(pulled, u), evaluate(s, x));
  }
}

TEST(Monomials, CountAndOrder) {
  auto m = monomials_of_degree(3, 4);
  EXPECT_EQ(m.size(), 15u);
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_LT(m[i - 1], m[i]);
  EXPECT_EQ(monomials_of_degree(2, 0).size(), 1u);
}
