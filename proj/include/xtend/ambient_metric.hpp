#pragma once

// Ambient metrics on O(1) over P^d whose sup norms are diagonal in the
// monomial basis: diagonal Fubini-Study metrics, and metrics (1/M) FS(N_M)
// built from a monomially-weighted norm N_M on V_M (asymptotically FS).
//
// For the latter the sup norm of T^K in degree n is
//
//     value(T^K) = (n/M) * max { sum_J mu_J w_J : mu >= 0, sum mu_J = 1,
//                                sum_J mu_J J = (M/n) K }
//
// (the upper concave envelope of the weights at (M/n)K), obtained from the
// LP dual of inf over monomial points of |T^K|_{n phi}; the metric only
// depends on |T_i(x)|, so the supremum over the analytic space is reached on
// monomial points and sup norms stay diagonal in the monomial basis.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "xtend/linalg.hpp"
#include "xtend/section_algebra.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

class VeroneseMetric {
 public:
  VeroneseMetric(Prime p, std::size_t nvars, int degree, std::map<Exponent, GammaValue> weights)
      : p_(p), nvars_(nvars), degree_(degree), cache_(std::make_shared<Cache>()) {
    if (degree < 1) throw Error("Veronese degree must be >= 1");
    points_ = monomials_of_degree(nvars, degree);
    for (const auto& j : points_) {
      auto it = weights.find(j);
      if (it == weights.end()) throw Error("Veronese weight missing for a degree-" + std::to_string(degree) + " monomial");
      if (it->second.is_infinite()) throw Error("Veronese weights must be finite");
      weights_.push_back(it->second);
    }
    if (weights.size() != points_.size()) throw Error("Veronese weights given for monomials of the wrong degree");
  }

  /// Weights w_J = <J, radii> + overrides.
  static VeroneseMetric from_radii(const DiagonalMetric& base, int degree,
                                   const std::map<Exponent, GammaValue>& overrides = {}) {
    std::map<Exponent, GammaValue> w;
    for (const auto& j : monomials_of_degree(base.nvars(), degree)) {
      auto it = overrides.find(j);
      w.emplace(j, it != overrides.end() ? it->second : base.monomial_weight(j));
    }
    for (const auto& [j, g] : overrides) {
      if (!w.count(j)) throw Error("Veronese override for a monomial of the wrong degree");
    }
    return VeroneseMetric(base.prime(), base.nvars(), degree, std::move(w));
  }

  const Prime& prime() const { return p_; }
  std::size_t nvars() const { return nvars_; }
  int degree() const { return degree_; }
  const std::vector<Exponent>& points() const { return points_; }
  const std::vector<GammaValue>& weights() const { return weights_; }

  GammaValue monomial_weight(const Exponent& k) const {
    const int n = total_degree(k);
    if (n == 0) return GammaValue(0);
    {
      std::lock_guard<std::mutex> lock(cache_->mu);
      auto it = cache_->values.find(k);
      if (it != cache_->values.end()) return it->second;
    }
    GammaValue v = envelope(k).scaled(Rational(n, degree_));
    std::lock_guard<std::mutex> lock(cache_->mu);
    cache_->values.emplace(k, v);
    return v;
  }

  /// max_J (w_J - v_p(a^J)) over J with a^J != 0; the degree-M FS value at a.
  GammaValue fs_offset(const KVector& a) const {
    std::optional<GammaValue> best;
    for (std::size_t s = 0; s < points_.size(); ++s) {
      GammaValue val(0);
      bool vanishes = false;
      for (std::size_t i = 0; i < nvars_; ++i) {
        if (points_[s][i] == 0) continue;
        auto v = valuation(a[i], p_);
        if (!v) {
          vanishes = true;
          break;
        }
        val += GammaValue(Rational(*v * points_[s][i]));
      }
      if (vanishes) continue;
      GammaValue cand = weights_[s] - val;
      if (!best || *best < cand) best = cand;
    }
    if (!best) throw Error("point is the origin");
    return *best;
  }

  VeroneseMetric perturbed() const {
    std::map<Exponent, GammaValue> w;
    for (std::size_t s = 0; s < points_.size(); ++s) {
      std::vector<Rational> pert(nvars_);
      for (std::size_t k = 0; k < nvars_; ++k) pert[k] = weights_[s].perturbation_at(k) + points_[s][k];
      w.emplace(points_[s], GammaValue(weights_[s].primary(), std::move(pert)));
    }
    return VeroneseMetric(p_, nvars_, degree_, std::move(w));
  }

 private:
  struct Cache {
    std::mutex mu;
    std::map<Exponent, GammaValue> values;
  };

  // max sum mu_J w_J over mu >= 0 with sum mu_J = 1 and sum mu_J J = (M/n) K.
  // Vertices of the feasible polytope have affinely independent supports of
  // size <= d+1, so those supports are enumerated.
  GammaValue envelope(const Exponent& k) const {
    const int n = total_degree(k);
    const std::size_t d = nvars_ - 1;
    KVector target(d);
    for (std::size_t i = 0; i < d; ++i) target[i] = Rational(k[i + 1] * degree_, n);

    std::optional<GammaValue> best;
    std::vector<std::size_t> subset;
    auto consider = [&]() {
      const std::size_t s = subset.size();
      Matrix aug(d + 1, KVector(s + 1));
      for (std::size_t c = 0; c < s; ++c) {
        aug[0][c] = 1;
        for (std::size_t i = 0; i < d; ++i) aug[i + 1][c] = points_[subset[c]][i + 1];
      }
      aug[0][s] = 1;
      for (std::size_t i = 0; i < d; ++i) aug[i + 1][s] = target[i];
      Echelon e = rref(std::move(aug), s + 1);
      if (!e.pivots.empty() && e.pivots.back() == s) return;  // inconsistent
      if (e.pivots.size() != s) return;                       // not affinely independent
      GammaValue value(0);
      for (std::size_t r = 0; r < s; ++r) {
        const FieldElem& mu = e.rows[r][s];
        if (mu < 0) return;
        if (mu != 0) value += weights_[subset[e.pivots[r]]].scaled(mu);
      }
      if (!best || *best < value) best = value;
    };
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
      if (!subset.empty()) consider();
      if (subset.size() == d + 1) return;
      for (std::size_t i = start; i < points_.size(); ++i) {
        subset.push_back(i);
        rec(i + 1);
        subset.pop_back();
      }
    };
    rec(0);
    if (!best) throw Error("Veronese envelope: target outside the simplex");
    return *best;
  }

  Prime p_;
  std::size_t nvars_;
  int degree_;
  std::vector<Exponent> points_;
  std::vector<GammaValue> weights_;
  std::shared_ptr<Cache> cache_;
};

/// Either a diagonal FS metric or a (1/M) FS(N_M) metric.
class AmbientMetric {
 public:
  AmbientMetric(DiagonalMetric phi) : impl_(std::move(phi)) {}  // NOLINT: implicit by intent
  AmbientMetric(VeroneseMetric phi) : impl_(std::move(phi)) {}  // NOLINT

  bool is_diagonal() const { return std::holds_alternative<DiagonalMetric>(impl_); }
  const DiagonalMetric& diagonal() const {
    if (!is_diagonal()) throw Error("ambient metric is not diagonal");
    return std::get<DiagonalMetric>(impl_);
  }
  const VeroneseMetric* veronese() const { return std::get_if<VeroneseMetric>(&impl_); }

  const Prime& prime() const {
    return std::visit([](const auto& m) -> const Prime& { return m.prime(); }, impl_);
  }
  std::size_t nvars() const {
    return std::visit([](const auto& m) { return m.nvars(); }, impl_);
  }

  GammaValue monomial_weight(const Exponent& k) const {
    return std::visit([&](const auto& m) { return m.monomial_weight(k); }, impl_);
  }

  std::vector<GammaValue> monomial_weights(const std::vector<Exponent>& monomials) const {
    std::vector<GammaValue> w;
    w.reserve(monomials.size());
    for (const auto& k : monomials) w.push_back(monomial_weight(k));
    return w;
  }

  /// ||s||_{n phi} = max_K |f_K| ||T^K||_{n phi}.
  GammaValue sup_norm(const GradedSection& s) const {
    GammaValue best = GammaValue::infinity();
    for (const auto& [k, f] : s.terms()) {
      GammaValue term = gamma_of(f, prime()) + monomial_weight(k);
      if (term < best) best = std::move(term);
    }
    return best;
  }

  /// C with value(|t(y)|_{n phi}) = v_p(t(a)) + C for the rational point y = [a].
  GammaValue fiber_offset(const KVector& a, int n) const {
    if (const auto* d = std::get_if<DiagonalMetric>(&impl_)) {
      std::optional<GammaValue> best;
      for (std::size_t i = 0; i < a.size(); ++i) {
        auto v = valuation(a[i], d->prime());
        if (!v) continue;
        GammaValue cand = d->radii()[i] - GammaValue(Rational(*v));
        if (!best || *best < cand) best = cand;
      }
      if (!best) throw Error("point is the origin");
      return best->scaled(Rational(n));
    }
    const auto& v = std::get<VeroneseMetric>(impl_);
    return v.fs_offset(a).scaled(Rational(n, v.degree()));
  }

  AmbientMetric perturbed() const {
    return std::visit([](const auto& m) { return AmbientMetric(m.perturbed()); }, impl_);
  }

 private:
  std::variant<DiagonalMetric, VeroneseMetric> impl_;
};

}  // namespace xtend
