#include <gtest/gtest.h>

#include <vector>

#include "xtend/points_metrics.hpp"
#include "xtend/sampling.hpp"

using namespace xtend;

namespace {

DiagonalMetric metric(long p, std::initializer_list<long> radii) {
  return DiagonalMetric(Prime(p), std::vector<GammaValue>(radii.begin(), radii.end()));
}

Point rational(long p, std::initializer_list<long> xs) {
  KVector v;
  for (long x : xs) v.emplace_back(x);
  return RationalPoint(Prime(p), v);
}

Point random_monomial_point(Rng& rng, std::size_t nvars) {
  std::vector<GammaValue> rho;
  for (std::size_t i = 0; i < nvars; ++i) rho.emplace_back(Rational(rng.uniform(-6, 6), rng.uniform(1, 3)));
  return MonomialPoint(rho);
}

Point random_rational_point(Rng& rng, const Prime& p, std::size_t nvars) {
  KVector v(nvars);
  for (auto& x : v) {
    if (rng.chance(4, 5)) x = random_element(rng, p);
  }
  if (is_zero(v)) v[0] = 1;
  return RationalPoint(p, v);
}

Exponent E(std::initializer_list<int> j) { return Exponent(j); }

}  // namespace

TEST(EvalMetric, Examples) {
  auto phi = metric(2, {0, 1});
  auto b = monomial_basis(phi, 1);
  EXPECT_EQ(eval_metric(b.sections, b.weights, rational(2, {1, 1}), E({1, 0}), Prime(2)), GammaValue(1));

  // the e-term alone bounds the result
  Rng rng(1);
  auto phi3 = metric(3, {0, 2, -1});
  auto b3 = monomial_basis(phi3, 2);
  for (int i = 0; i < 20; ++i) {
    Point x = random_monomial_point(rng, 3);
    Exponent e = default_frame(x, 2, Prime(3));
    EXPECT_GE(eval_metric(b3.sections, b3.weights, x, e, Prime(3)), phi3.monomial_weight(e));
  }

  auto unit = monomial_basis(metric(2, {0, 0}), 1);
  EXPECT_EQ(eval_metric(unit.sections, unit.weights, MonomialPoint({GammaValue(0), GammaValue(0)}), E({1, 0}),
                        Prime(2)),
            GammaValue(0));
}

TEST(EvalMetric, AllSectionsVanish) {
  std::vector<GradedSection> basis{GradedSection::monomial(E({0, 1}))};
  EXPECT_THROW(eval_metric(basis, {GammaValue(0)}, rational(2, {1, 0}), E({1, 0}), Prime(2)), Error);
  EXPECT_THROW(frame_value(E({0, 1}), rational(2, {1, 0}), Prime(2)), Error);
}

TEST(EvalDualMetric, Examples) {
  auto phi = metric(2, {0, 1});
  auto b = monomial_basis(phi, 1);
  EXPECT_EQ(eval_dual_metric(b.sections, b.weights, rational(2, {1, 1}), E({1, 0}), Prime(2)), GammaValue(-1));
  // only T_1 survives at [0:1]
  EXPECT_EQ(eval_dual_metric(b.sections, b.weights, rational(2, {0, 1}), E({0, 1}), Prime(2)), GammaValue(-1));

  Rng rng(2);
  auto phi3 = metric(5, {1, 0, 3});
  for (int n = 1; n <= 3; ++n) {
    auto bn = monomial_basis(phi3, n);
    for (int i = 0; i < 10; ++i) {
      Point x = i % 2 ? random_monomial_point(rng, 3) : random_rational_point(rng, Prime(5), 3);
      Exponent e = default_frame(x, n, Prime(5));
      EXPECT_EQ(eval_metric(bn.sections, bn.weights, x, e, Prime(5)) +
                    eval_dual_metric(bn.sections, bn.weights, x, e, Prime(5)),
                GammaValue(0));
    }
  }
}

TEST(EvalMetric, FrameIndependence) {
  Prime p(3);
  Rng rng(5);
  auto phi = metric(3, {0, 1, -2});
  auto b = monomial_basis(phi, 2);
  for (int i = 0; i < 30; ++i) {
    Point x = random_monomial_point(rng, 3);
    for (const auto& e : monomials_of_degree(3, 2)) {
      for (const auto& e2 : monomials_of_degree(3, 2)) {
        GammaValue lhs = eval_metric(b.sections, b.weights, x, e, p) - frame_value(e, x, p) + frame_value(e2, x, p);
        EXPECT_EQ(lhs, eval_metric(b.sections, b.weights, x, e2, p));
      }
    }
  }
}

TEST(MetricDistance, Examples) {
  Rng rng(6);
  std::vector<Point> sample;
  for (int i = 0; i < 30; ++i) sample.push_back(random_monomial_point(rng, 3));
  sample.push_back(rational(2, {0, 1, 0}));
  auto a = metric(2, {0, 1, 2});
  auto same = metric_distance(a, a, sample);
  EXPECT_EQ(same.sampled_lower_bound, GammaValue(0));
  EXPECT_EQ(*same.exact, GammaValue(0));

  auto b = metric(2, {0, 2, 2});
  auto d = metric_distance(a, b, sample);
  EXPECT_EQ(*d.exact, GammaValue(1));
  // attained at the coordinate point [0:1:0]
  EXPECT_EQ(d.sampled_lower_bound, GammaValue(1));
}

TEST(MetricDistance, SampledBoundNeverExceedsExact) {
  Prime p(3);
  Rng rng(7);
  for (int t = 0; t < 40; ++t) {
    std::vector<GammaValue> ra, rb;
    for (int i = 0; i < 3; ++i) {
      ra.emplace_back(rng.uniform(-3, 3));
      rb.emplace_back(rng.uniform(-3, 3));
    }
    DiagonalMetric a(p, ra), b(p, rb);
    std::vector<Point> sample;
    for (int i = 0; i < 10; ++i) sample.push_back(random_monomial_point(rng, 3));
    for (int i = 0; i < 10; ++i) sample.push_back(random_rational_point(rng, p, 3));
    auto d = metric_distance(a, b, sample);
    EXPECT_LE(d.sampled_lower_bound, *d.exact);

    // FS of the degree-n sup norms is no farther apart than the metrics.
    const int n = static_cast<int>(rng.uniform(1, 3));
    auto ba = monomial_basis(a, n), bb = monomial_basis(b, n);
    for (const auto& x : sample) {
      Exponent e = default_frame(x, n, p);
      GammaValue fa = eval_metric(ba.sections, ba.weights, x, e, p);
      GammaValue fb = eval_metric(bb.sections, bb.weights, x, e, p);
      EXPECT_LE(gamma_abs(fa - fb), d.exact->scaled(Rational(n)));
    }
    // sup-norm contractivity
    for (int i = 0; i < 10; ++i) {
      auto s = random_section(rng, p, 3, n);
      EXPECT_LE(gamma_abs(gauss_norm(a, s) - gauss_norm(b, s)), d.exact->scaled(Rational(n)));
    }
  }
}

TEST(FsIdempotence, Examples) {
  auto coords = std::vector<Point>{rational(2, {1, 0, 0}), rational(2, {0, 1, 0}), rational(2, {0, 0, 1})};
  EXPECT_TRUE(fs_idempotence_check(metric(2, {0, 1, 2}), 1, coords));
  for (long pv : {2L, 3L}) {
    Rng rng(pv);
    std::vector<Point> sample;
    for (int i = 0; i < 25; ++i) sample.push_back(random_monomial_point(rng, 3));
    for (int i = 0; i < 25; ++i) sample.push_back(random_rational_point(rng, Prime(pv), 3));
    auto phi = DiagonalMetric(Prime(pv), {GammaValue(Rational(1, 2)), GammaValue(-1), GammaValue(3)});
    EXPECT_TRUE(fs_idempotence_check(phi, 3, sample));

    auto w = monomial_basis(phi, 3).weights;
    w.back() = w.back() - GammaValue(1);  // T_2^3 claims a larger norm
    sample.push_back(rational(pv, {0, 0, 1}));
    EXPECT_FALSE(fs_idempotence_check(phi, 3, sample, w));
  }
  EXPECT_THROW(fs_idempotence_check(metric(2, {0, 0}), 0, coords), Error);
}

// gauss_norm is the sup over monomial points, attained at the Gauss point.
TEST(SupNorm, AttainedAtGaussPoint) {
  Prime p(2);
  Rng rng(9);
  auto phi = metric(2, {0, 1, 3});
  for (int n = 1; n <= 3; ++n) {
    for (int t = 0; t < 10; ++t) {
      auto s = random_section(rng, p, 3, n);
      std::vector<Point> grid{MonomialPoint(phi.radii())};
      for (int a = -2; a <= 4; ++a) {
        for (int b = -2; b <= 5; ++b) grid.push_back(MonomialPoint({GammaValue(0), GammaValue(a), GammaValue(b)}));
      }
      std::optional<GammaValue> best;
      for (const auto& x : grid) {
        Exponent e = default_frame(x, n, p);
        Exponent lin(3, 0);
        for (int i = 0; i < 3; ++i) lin[i] = e[i] / n;
        GammaValue v = section_value(s, x, p) - frame_value(e, x, p) + metric_value(phi, x, lin).scaled(Rational(n));
        if (!best || v < *best) best = v;
        EXPECT_GE(v, gauss_norm(phi, s));
      }
      EXPECT_EQ(*best, gauss_norm(phi, s));
    }
  }
}

TEST(DiscMembership, Examples) {
  auto phi = metric(2, {0, 1, 2});
  MonomialPoint boundary(phi.radii());
  EXPECT_TRUE(disc_membership(phi, 2, boundary, Rational(0)));
  MonomialPoint bigger({GammaValue(0), GammaValue(0), GammaValue(2)});
  EXPECT_FALSE(disc_membership(phi, 2, bigger, Rational(0)));
  EXPECT_TRUE(disc_membership(phi, 2, bigger, Rational(1)));
  EXPECT_FALSE(disc_membership(phi, 2, bigger, Rational(1, 2) - Rational(1, 100)));
  // monotone in eps
  bool seen_true = false;
  for (int k = 0; k <= 8; ++k) {
    bool in = disc_membership(phi, 3, bigger, Rational(k, 4));
    if (seen_true) {
      EXPECT_TRUE(in);
    }
    seen_true = seen_true || in;
  }
  EXPECT_TRUE(seen_true);
}

TEST(Points, LiteralsAndNormalization) {
  Prime p(2);
  Point x = parse_point("[4:2:1/2]", p);
  EXPECT_EQ(point_to_string(x), "[8:4:1]");
  Point y = parse_point("[2:1]", p);
  EXPECT_EQ(point_to_string(y), "[2:1]");
  Point m = parse_point("rho=(0,1/2,inf)", p);
  EXPECT_EQ(point_to_string(m), "rho=(0,1/2,inf)");
  Point q = parse_point("rho=(0,1);pert=((1,0),(0,1))", p);
  EXPECT_EQ(std::get<MonomialPoint>(q).rho()[1], GammaValue(Rational(1), {Rational(0), Rational(1)}));
  EXPECT_EQ(point_to_string(q), "rho=(0,1);pert=((1,0),(0,1))");
  EXPECT_THROW(parse_point("[0:0]", p), Error);
  EXPECT_THROW(parse_point("rho=(inf,inf)", p), Error);
  EXPECT_THROW(parse_point("(1,2)", p), Error);
}
