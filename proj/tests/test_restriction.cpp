#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "xtend/restriction.hpp"
#include "xtend/sampling.hpp"

using namespace xtend;

namespace {

GradedSection S(const char* text, std::size_t nvars) { return parse_section(text, nvars); }

DiagonalMetric metric(long p, std::initializer_list<long> radii) {
  return DiagonalMetric(Prime(p), std::vector<GammaValue>(radii.begin(), radii.end()));
}

KVector V(std::initializer_list<long> xs) {
  KVector v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

Subvariety point(std::initializer_list<long> xs) { return Subvariety::rational_point(V(xs)); }

Subvariety line_p2() { return Subvariety::from_linear_forms({S("T0 + T1 + T2", 3)}, 3); }

// Row spaces compared through reduced echelon forms.
bool same_span(const std::vector<GradedSection>& a, const std::vector<GradedSection>& b, std::size_t nvars, int n) {
  auto mons = monomials_of_degree(nvars, n);
  Matrix ma, mb;
  for (const auto& s : a) ma.push_back(s.coordinates(mons));
  for (const auto& s : b) mb.push_back(s.coordinates(mons));
  return rref(ma, mons.size()).rows == rref(mb, mons.size()).rows;
}

long binom(long n, long k) {
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(Subvariety, Construction) {
  auto y = point({1, 1});
  EXPECT_EQ(y.kind(), SubvarietyKind::rational_point);
  ASSERT_EQ(y.generators().size(), 1u);
  EXPECT_EQ(evaluate(y.generators()[0], V({1, 1})), 0);

  auto l = line_p2();
  EXPECT_EQ(l.kind(), SubvarietyKind::linear);
  EXPECT_EQ(l.parametrization().size(), 2u);
  for (const auto& row : l.parametrization()) EXPECT_EQ(evaluate(S("T0 + T1 + T2", 3), row), 0);

  EXPECT_THROW(Subvariety::linear({V({1, 0}), V({2, 0})}, 2), Error);
  EXPECT_THROW(Subvariety::linear({V({1, 0}), V({0, 1})}, 2), Error);
  EXPECT_THROW(Subvariety::from_linear_forms({S("T0", 2), S("T1", 2)}, 2), Error);
  EXPECT_THROW(Subvariety::general({}), Error);
  EXPECT_THROW(Subvariety::from_linear_forms({S("T0^2", 2)}, 2), Error);
}

TEST(IdealDegreePart, Examples) {
  auto y0 = Subvariety::from_linear_forms({S("T0", 2)}, 2);
  auto i0 = ideal_degree_part(y0, 2);
  EXPECT_TRUE(same_span(i0.basis, {S("T0^2", 2), S("T0 T1", 2)}, 2, 2));
  EXPECT_TRUE(i0.certified);

  auto y1 = point({1, 1});
  auto i1 = ideal_degree_part(y1, 2);
  EXPECT_TRUE(same_span(i1.basis, {S("T0^2 - T0 T1", 2), S("T0 T1 - T1^2", 2)}, 2, 2));

  auto l = line_p2();
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(static_cast<long>(ideal_degree_part(l, n).basis.size()), binom(n + 2, 2) - (n + 1));
  }
  auto conic = Subvariety::general({S("T0^2 - T1 T2", 3)});
  EXPECT_THROW(ideal_degree_part(conic, 1), Error);
  EXPECT_FALSE(ideal_degree_part(conic, 2).certified);
}

TEST(IdealDegreePart, HilbertStabilization) {
  auto conic = Subvariety::general({S("T0^2 - T1 T2", 3)});
  // h(n) = 2n + 1 for a smooth conic
  for (int n = 2; n <= 6; ++n) EXPECT_EQ(generated_hilbert_function(conic, n), static_cast<std::size_t>(2 * n + 1));
  EXPECT_TRUE(hilbert_stabilized(conic, 2));
  EXPECT_TRUE(hilbert_stabilized(conic, 3, std::vector<Rational>{1, 2}));
  EXPECT_FALSE(hilbert_stabilized(conic, 3, std::vector<Rational>{2, 2}));
  // two points cut out by T0 T1 and T2 in P^2: the generated ideal is
  // saturated, Hilbert function constant 2 from degree 1
  auto pts = Subvariety::general({S("T0 T1", 3), S("T2", 3)});
  EXPECT_EQ(generated_hilbert_function(pts, 2), 2u);
  EXPECT_TRUE(hilbert_stabilized(pts, 2));
}

TEST(QuotientNormN, Examples) {
  auto y0 = Subvariety::from_linear_forms({S("T0", 2)}, 2);
  auto y1 = point({1, 1});
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> tn{0, n}, t0{n, 0};
    RestrictedDegree a(metric(2, {0, 0}), y0, n);
    EXPECT_EQ(a.quotient_norm(GradedSection::monomial(tn)), GammaValue(0));
    RestrictedDegree b(metric(2, {0, 1}), y1, n);
    EXPECT_EQ(b.quotient_norm(GradedSection::monomial(t0)), GammaValue(n));
    RestrictedDegree c(metric(2, {0, 0}), y1, n);
    EXPECT_EQ(c.quotient_norm(GradedSection::monomial(t0)), GammaValue(0));
    EXPECT_EQ(b.dim_quotient() + b.ideal_basis().size(), b.dim_ambient());
  }
  // brute force for the second example at small n
  for (int n = 1; n <= 2; ++n) {
    auto phi = metric(2, {0, 1});
    RestrictedDegree b(phi, y1, n);
    std::vector<GammaValue> w;
    for (const auto& m : b.monomials()) w.push_back(phi.monomial_weight(m));
    KVector lift = GradedSection::monomial(Exponent{n, 0}).coordinates(b.monomials());
    std::vector<KVector> kernel = b.ideal().echelon.rows;
    long B = oracle::window_bound(Prime(2), w, lift, kernel);
    EXPECT_EQ(oracle::coset_minimum_grid(Prime(2), w, lift, kernel, B), GammaValue(n));
    EXPECT_EQ(oracle::coset_minimum_exact(Prime(2), w, lift, kernel), GammaValue(n));
  }
}

TEST(QuotientNormN, MinimumOverLiftsOracle) {
  Prime p(3);
  Rng rng(23);
  auto phi = DiagonalMetric(p, {GammaValue(0), GammaValue(1), GammaValue(-1)});
  auto y = Subvariety::from_linear_forms({S("T0 - 3*T1 + T2", 3), S("T1 - 9*T2", 3)}, 3);
  for (int n = 1; n <= 3; ++n) {
    RestrictedDegree rd(phi, y, n);
    for (int t = 0; t < 5; ++t) {
      auto s = random_section(rng, p, 3, n);
      std::vector<GammaValue> w;
      for (const auto& m : rd.monomials()) w.push_back(phi.monomial_weight(m));
      KVector lift = s.coordinates(rd.monomials());
      if (rd.ideal().echelon.rows.size() > 3) break;
      EXPECT_EQ(rd.quotient_norm(s), oracle::coset_minimum_exact(p, w, lift, rd.ideal().echelon.rows));
    }
  }
}

TEST(SupNormExact, Examples) {
  auto y1 = point({1, 1});
  for (int n = 1; n <= 6; ++n) {
    EXPECT_EQ(sup_norm_exact(metric(2, {0, 1}), y1, GradedSection::monomial(Exponent{n, 0})), GammaValue(n));
  }
  // coordinate line T0 = 0 in P^2: Gauss norm of the restriction
  auto line = Subvariety::from_linear_forms({S("T0", 3)}, 3);
  Prime p(2);
  Rng rng(3);
  auto phi = metric(2, {0, 0, 0});
  for (int t = 0; t < 20; ++t) {
    auto s = random_section(rng, p, 3, static_cast<int>(rng.uniform(1, 4)));
    GradedSection restricted(3, s.degree());
    for (const auto& [j, f] : s.terms()) {
      if (j[0] == 0) restricted.add_term(j, f);
    }
    EXPECT_EQ(sup_norm_exact(phi, line, s), gauss_norm(phi, restricted));
  }
  auto conic = Subvariety::general({S("T0^2 - T1 T2", 3)});
  EXPECT_THROW(sup_norm_exact(phi, conic, S("T0^2", 3)), Error);
}

// FS metrics at rational points: quotient norm = sup norm in every degree.
TEST(SupNormExact, RationalPointMatchesQuotient) {
  for (long pv : {2L, 3L, 5L}) {
    Prime p(pv);
    Rng rng(pv + 40);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<GammaValue> radii;
      KVector a;
      for (int i = 0; i < 3; ++i) {
        radii.emplace_back(Rational(rng.uniform(-3, 3), rng.uniform(1, 2)));
        a.push_back(rng.chance(4, 5) ? random_element(rng, p) : Rational(0));
      }
      if (is_zero(a)) a[1] = 1;
      DiagonalMetric phi(p, radii);
      auto y = Subvariety::rational_point(a);
      for (int n = 1; n <= 4; ++n) {
        RestrictedDegree rd(phi, y, n);
        for (int t = 0; t < 4; ++t) {
          auto s = random_section(rng, p, 3, n);
          EXPECT_EQ(sup_norm_exact(phi, y, s), rd.quotient_norm(s));
        }
      }
    }
  }
}

TEST(SupNormExact, QuotientDominatesSupOnLines) {
  Prime p(2);
  Rng rng(44);
  auto phi = metric(2, {0, 1, 2});
  for (const auto& y : {line_p2(), Subvariety::linear({V({1, 2, 0}), V({0, 1, 4})}, 3)}) {
    for (int n = 1; n <= 5; ++n) {
      RestrictedDegree rd(phi, y, n);
      for (int t = 0; t < 5; ++t) {
        auto s = random_section(rng, p, 3, n);
        EXPECT_LE(sup_norm_exact(phi, y, s), rd.quotient_norm(s));
      }
    }
  }
}

TEST(LinearReduction, MatchesGenericQuotient) {
  Prime p(3);
  Rng rng(51);
  auto phi = DiagonalMetric(p, {GammaValue(0), GammaValue(Rational(1, 2)), GammaValue(2), GammaValue(-1)});
  std::vector<Subvariety> ys{Subvariety::from_linear_forms({S("T0 + T1 + T2 + T3", 4)}, 4),
                             Subvariety::from_linear_forms({S("T0 - 3*T2", 4), S("T1 + 9*T3 - T0", 4)}, 4),
                             Subvariety::rational_point(V({1, 3, -2, 9}))};
  for (const auto& y : ys) {
    LinearReduction red(phi, y);
    for (int n = 1; n <= 3; ++n) {
      RestrictedDegree rd(phi, y, n);
      for (int t = 0; t < 6; ++t) {
        auto s = random_section(rng, p, 4, n);
        EXPECT_EQ(red.quotient_norm(s), rd.quotient_norm(s));
        EXPECT_EQ(rd.class_of(red.reduce(s)), rd.class_of(s));
      }
    }
  }
}

TEST(SupNormSpectral, ConvergesToExactValue) {
  Prime p(2);
  Rng rng(61);
  auto phi = metric(2, {0, 1, 2});
  for (const auto& y : {point({1, 2, 4}), line_p2()}) {
    for (int t = 0; t < 5; ++t) {
      auto s = random_section(rng, p, 3, 2);
      auto seq = sup_norm_spectral(phi, y, s, 4);
      GammaValue exact = sup_norm_exact(phi, y, s);
      ASSERT_EQ(seq.size(), 5u);
      Rational c = exact.primary() - seq.front().primary();
      for (unsigned k = 0; k < seq.size(); ++k) {
        EXPECT_LE(seq[k].primary(), exact.primary());
        EXPECT_LE(exact.primary() - seq[k].primary(), c / (1 << k));
        if (k > 0) {
          EXPECT_GE(seq[k].primary(), seq[k - 1].primary());
        }
      }
    }
  }
}

// The generic path (full quotient in every degree) agrees with the linear
// fast path at small depth.
TEST(SupNormSpectral, GenericPathAgrees) {
  Prime p(3);
  Rng rng(62);
  auto phi = metric(3, {0, 1, 1});
  auto y = line_p2();
  auto vm = VeroneseMetric::from_radii(phi, 1);  // same weights, generic code path
  for (int t = 0; t < 3; ++t) {
    auto s = random_section(rng, p, 3, 2);
    auto fast = sup_norm_spectral(phi, y, s, 2);
    auto generic = sup_norm_spectral(AmbientMetric(vm), y, s, 2);
    EXPECT_EQ(fast, generic);
  }
}

TEST(SupNormSpectral, Errors) {
  auto phi = metric(2, {0, 1});
  auto y = point({1, 1});
  EXPECT_THROW(sup_norm_spectral(phi, y, S("T0", 2), 0), Error);
  EXPECT_THROW(sup_norm_spectral(phi, y, S("T0", 2), 7), Error);  // 2^7 > 64
  EXPECT_NO_THROW(sup_norm_spectral(phi, y, S("T0", 2), 7, 128));
  for (const auto& v : sup_norm_spectral(phi, y, S("T0 - T1", 2), 3)) EXPECT_TRUE(v.is_infinite());
}

TEST(SupNormSpectral, GeneralSubvarietyBoundsGapBelow) {
  Prime p(2);
  Rng rng(63);
  auto phi = metric(2, {0, 1, 2});
  auto conic = Subvariety::general({S("T0^2 - T1 T2", 3)});
  RestrictionCache cache(phi, conic);
  for (int t = 0; t < 3; ++t) {
    auto s = random_section(rng, p, 3, 2);
    auto seq = sup_norm_spectral(phi, conic, s, 3, std::nullopt, &cache);
    EXPECT_EQ(seq.front(), RestrictedDegree(phi, conic, 2).quotient_norm(s));
    for (std::size_t k = 1; k < seq.size(); ++k) EXPECT_GE(seq[k].primary(), seq[k - 1].primary());
  }
}

TEST(ExtensionLift, Examples) {
  auto y0 = Subvariety::from_linear_forms({S("T0", 2)}, 2);
  for (int n = 1; n <= 5; ++n) {
    auto t = GradedSection::monomial(Exponent{0, n});
    EXPECT_EQ(extension_lift(metric(2, {0, 0}), y0, t), t);
    auto phi = metric(2, {0, 1});
    auto lift = extension_lift(phi, point({1, 1}), GradedSection::monomial(Exponent{n, 0}));
    EXPECT_EQ(gauss_norm(phi, lift), GammaValue(n));
    EXPECT_EQ(lift, GradedSection::monomial(Exponent{0, n}));
  }
}

TEST(ExtensionLift, RoundTripAndMinimality) {
  Prime p(5);
  Rng rng(71);
  auto phi = DiagonalMetric(p, {GammaValue(1), GammaValue(0), GammaValue(Rational(-1, 2))});
  std::vector<Subvariety> ys{line_p2(), point({1, 5, 25}), Subvariety::general({S("T0^2 - T1 T2", 3)})};
  for (const auto& y : ys) {
    for (int n = 2; n <= 4; ++n) {
      RestrictedDegree rd(phi, y, n);
      for (int t = 0; t < 4; ++t) {
        auto s = random_section(rng, p, 3, n);
        auto lift = extension_lift(phi, y, s);
        EXPECT_EQ(rd.class_of(lift), rd.class_of(s));
        EXPECT_EQ(gauss_norm(phi, lift), rd.quotient_norm(s));
        EXPECT_LE(gauss_norm(phi, s), gauss_norm(phi, lift));
      }
    }
  }
}

TEST(RestrictedDegree, PivotInvarianceAndSubmultiplicativity) {
  Prime p(2);
  Rng rng(81);
  auto phi = metric(2, {0, 1, 3});
  auto y = Subvariety::general({S("T0 T1 - T2^2", 3)});
  std::vector<std::pair<GradedSection, GammaValue>> samples;
  for (int n = 2; n <= 3; ++n) {
    RestrictedDegree lo(phi, y, n, PivotOrder::lowest_index_first);
    RestrictedDegree hi(phi, y, n, PivotOrder::highest_index_first);
    for (int t = 0; t < 5; ++t) {
      auto s = random_section(rng, p, 3, n);
      EXPECT_EQ(lo.quotient_norm(s), hi.quotient_norm(s));
      samples.emplace_back(s, lo.quotient_norm(s));
    }
  }
  for (const auto& [a, qa] : samples) {
    for (const auto& [b, qb] : samples) {
      auto prod = multiply(a, b);
      EXPECT_GE(RestrictedDegree(phi, y, prod.degree()).quotient_norm(prod), qa + qb);
    }
  }
}

TEST(VeroneseMetric, ReducesToDiagonalWithoutOverrides) {
  Prime p(3);
  auto phi = DiagonalMetric(p, {GammaValue(0), GammaValue(Rational(2, 3)), GammaValue(-1)});
  for (int M = 1; M <= 3; ++M) {
    auto vm = VeroneseMetric::from_radii(phi, M);
    for (int n = 1; n <= 4; ++n) {
      for (const auto& j : monomials_of_degree(3, n)) EXPECT_EQ(vm.monomial_weight(j), phi.monomial_weight(j));
    }
  }
}

TEST(VeroneseMetric, EnvelopeOnTheProjectiveLine) {
  // P^1, M = 2, weights w(T0^2)=0, w(T0T1)=3, w(T1^2)=2: the concave envelope
  // at the midpoint is 3, so ||T0 T1||_{2 phi} has value 3 and
  // ||T0^2 T1^2||_{4 phi} value 6; at T0^3 T1 it is 2 * 3/2 = 3.
  Prime p(2);
  auto vm = VeroneseMetric::from_radii(metric(2, {0, 1}), 2, {{Exponent{1, 1}, GammaValue(3)}});
  EXPECT_EQ(vm.monomial_weight(Exponent{1, 1}), GammaValue(3));
  EXPECT_EQ(vm.monomial_weight(Exponent{2, 2}), GammaValue(6));
  EXPECT_EQ(vm.monomial_weight(Exponent{3, 1}), GammaValue(3));
  EXPECT_EQ(vm.monomial_weight(Exponent{1, 0}), GammaValue(Rational(0)));
  EXPECT_EQ(vm.monomial_weight(Exponent{0, 1}), GammaValue(1));
  // T0 T1^2: (3/2) * (3 + (1/3)(2 - 3)) = 4
  EXPECT_EQ(vm.monomial_weight(Exponent{1, 2}), GammaValue(4));
}

TEST(VeroneseMetric, RationalPointGapVanishesInMultiplesOfTheDegree) {
  Prime p(2);
  auto phi = metric(2, {0, 1, 2});
  AmbientMetric am(VeroneseMetric::from_radii(phi, 2, {{Exponent{1, 1, 0}, GammaValue(3)}}));
  auto y = point({1, 2, 4});
  Rng rng(91);
  for (int n = 2; n <= 6; n += 2) {
    RestrictedDegree rd(am, y, n);
    for (std::size_t l = 0; l < rd.dim_quotient(); ++l) {
      auto t = rd.representative(rd.basis_class(l));
      EXPECT_EQ(sup_norm_exact(am, y, t), rd.quotient_norm(t));
    }
    for (int t = 0; t < 3; ++t) {
      auto s = random_section(rng, p, 3, n);
      EXPECT_EQ(sup_norm_exact(am, y, s), rd.quotient_norm(s));
    }
  }
  for (int n = 1; n <= 5; n += 2) {
    RestrictedDegree rd(am, y, n);
    auto t = rd.representative(rd.basis_class(0));
    EXPECT_LE(sup_norm_exact(am, y, t).primary() - rd.quotient_norm(t).primary(), Rational(1));
    EXPECT_GE(sup_norm_exact(am, y, t), rd.quotient_norm(t));
  }
}

TEST(RestrictionCache, ReturnsSharedInstances) {
  RestrictionCache cache(metric(2, {0, 1, 2}), line_p2());
  auto a = cache.get(3);
  auto b = cache.get(3);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(a->degree(), 3);
}

// The closed form at rational points against the full degree-n quotient.
TEST(PointQuotientOffset, MatchesRestrictedDegree) {
  Prime p(3);
  Rng rng(101);
  auto phi = DiagonalMetric(p, {GammaValue(0), GammaValue(Rational(1, 2)), GammaValue(-1)});
  std::vector<AmbientMetric> metrics{AmbientMetric(phi),
                                     AmbientMetric(VeroneseMetric::from_radii(phi, 2, {{Exponent{0, 1, 1}, GammaValue(2)}})),
                                     AmbientMetric(VeroneseMetric::from_radii(phi, 3, {{Exponent{1, 1, 1}, GammaValue(3)}}))};
  for (const auto& am : metrics) {
    for (const auto& a : {V({1, 3, 9}), V({0, 1, 2}), V({5, 0, 0})}) {
      auto y = Subvariety::rational_point(a);
      for (int n = 1; n <= 5; ++n) {
        RestrictedDegree rd(am, y, n);
        for (int t = 0; t < 3; ++t) {
          auto s = random_section(rng, p, 3, n);
          FieldElem value = evaluate(s, a);
          GammaValue expect = value == 0 ? GammaValue::infinity()
                                         : gamma_of(value, p) + point_quotient_offset(am, a, n);
          EXPECT_EQ(rd.quotient_norm(s), expect);
        }
      }
    }
  }
}
