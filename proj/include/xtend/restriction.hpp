#pragma once

// Subvarieties Y of P^d, the quotient norms ||.||_{n phi, X|Y} on
// V_n / I_n, exact restricted sup norms for points and linear subspaces,
// spectral approximation of the restricted sup norm, and minimizing lifts.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xtend/ambient_metric.hpp"
#include "xtend/linalg.hpp"
#include "xtend/normed_space.hpp"
#include "xtend/section_algebra.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

enum class SubvarietyKind { rational_point, linear, general };

inline std::string to_string(SubvarietyKind k) {
  switch (k) {
    case SubvarietyKind::rational_point: return "rational_point";
    case SubvarietyKind::linear: return "linear";
    case SubvarietyKind::general: return "general";
  }
  return "?";
}

inline SubvarietyKind parse_kind(const std::string& s) {
  if (s == "rational_point") return SubvarietyKind::rational_point;
  if (s == "linear") return SubvarietyKind::linear;
  if (s == "general") return SubvarietyKind::general;
  throw Error("unknown subvariety kind '" + s + "'");
}

class Subvariety {
 public:
  /// The linear subspace spanned by the rows (points of k^{d+1}).
  static Subvariety linear(Matrix spanning_points, std::size_t nvars) {
    if (spanning_points.empty()) throw Error("a linear subvariety needs at least one spanning point");
    for (const auto& r : spanning_points) {
      if (r.size() != nvars) throw Error("spanning point of wrong dimension");
    }
    if (rank(spanning_points, nvars) != spanning_points.size()) throw Error("spanning points are linearly dependent");
    if (spanning_points.size() == nvars) throw Error("a linear subvariety must be proper");
    Subvariety y;
    y.nvars_ = nvars;
    y.kind_ = spanning_points.size() == 1 ? SubvarietyKind::rational_point : SubvarietyKind::linear;
    y.parametrization_ = std::move(spanning_points);
    for (const auto& c : nullspace(y.parametrization_, nvars)) y.generators_.push_back(linear_form(c));
    return y;
  }

  static Subvariety rational_point(KVector coords) {
    const std::size_t n = coords.size();
    return linear(Matrix{std::move(coords)}, n);
  }

  /// A linear subvariety cut out by degree-1 generators.
  static Subvariety from_linear_forms(const std::vector<GradedSection>& forms, std::size_t nvars) {
    Matrix g;
    for (const auto& f : forms) {
      if (f.degree() != 1) throw Error("linear subvarieties need degree-1 generators");
      g.push_back(f.coordinates(degree_one(nvars)));
    }
    Matrix param = nullspace(g, nvars);
    if (param.empty()) throw Error("the generators cut out the empty set");
    Subvariety y = linear(std::move(param), nvars);
    y.generators_ = forms;
    return y;
  }

  static Subvariety general(std::vector<GradedSection> generators) {
    if (generators.empty()) throw Error("a subvariety needs at least one generator");
    Subvariety y;
    y.nvars_ = generators.front().nvars();
    for (const auto& g : generators) {
      if (g.nvars() != y.nvars_) throw Error("generators in different numbers of variables");
      if (g.is_zero()) throw Error("zero generator");
      if (g.degree() < 1) throw Error("generators must have positive degree");
    }
    y.kind_ = SubvarietyKind::general;
    y.generators_ = std::move(generators);
    return y;
  }

  SubvarietyKind kind() const { return kind_; }
  std::size_t nvars() const { return nvars_; }
  const std::vector<GradedSection>& generators() const { return generators_; }
  /// Rows span the affine cone of Y (linear kinds only).
  const Matrix& parametrization() const { return parametrization_; }
  bool is_linear() const { return kind_ != SubvarietyKind::general; }

  const KVector& point() const {
    if (kind_ != SubvarietyKind::rational_point) throw Error("subvariety is not a rational point");
    return parametrization_.front();
  }

  int max_generator_degree() const {
    int m = 0;
    for (const auto& g : generators_) m = std::max(m, g.degree());
    return m;
  }

  // T_0, ..., T_d in variable order (not the lex order of monomials_of_degree),
  // so that coordinate i of a linear form is its T_i coefficient.
  static std::vector<Exponent> degree_one(std::size_t nvars) {
    std::vector<Exponent> out(nvars, Exponent(nvars, 0));
    for (std::size_t i = 0; i < nvars; ++i) out[i][i] = 1;
    return out;
  }

 private:
  static GradedSection linear_form(const KVector& c) {
    GradedSection f(c.size(), 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      Exponent e(c.size(), 0);
      e[i] = 1;
      f.add_term(e, c[i]);
    }
    return f;
  }

  std::size_t nvars_ = 0;
  SubvarietyKind kind_ = SubvarietyKind::general;
  std::vector<GradedSection> generators_;
  Matrix parametrization_;
};

/// Degree-n part of the ideal generated by Y's generators.
struct IdealDegreePart {
  int degree = 0;
  std::vector<Exponent> monomials;   // coordinate system, monomials_of_degree order
  Echelon echelon;                   // reduced row echelon basis in those coordinates
  std::vector<GradedSection> basis;  // the same rows as sections
  /// True when the generated degree part is known to equal I_n (linear
  /// kinds); for general ideals it may be smaller below the saturation degree.
  bool certified = false;
};

inline IdealDegreePart ideal_degree_part(const Subvariety& y, int n) {
  if (n < y.max_generator_degree()) {
    throw Error("ideal_degree_part: degree " + std::to_string(n) + " below the generator degree " +
                std::to_string(y.max_generator_degree()));
  }
  IdealDegreePart out;
  out.degree = n;
  out.monomials = monomials_of_degree(y.nvars(), n);
  std::map<Exponent, std::size_t> index;
  for (std::size_t i = 0; i < out.monomials.size(); ++i) index.emplace(out.monomials[i], i);

  Matrix rows;
  for (const auto& g : y.generators()) {
    for (const auto& m : monomials_of_degree(y.nvars(), n - g.degree())) {
      KVector v(out.monomials.size());
      for (const auto& [j, f] : g.terms()) {
        Exponent e = j;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += m[i];
        v[index.at(e)] = f;
      }
      rows.push_back(std::move(v));
    }
  }
  out.echelon = rref(std::move(rows), out.monomials.size());
  for (const auto& r : out.echelon.rows) {
    out.basis.push_back(GradedSection::from_coordinates(y.nvars(), n, out.monomials, r));
  }
  out.certified = y.is_linear();
  return out;
}

/// dim V_n - dim (generated ideal)_n.
inline std::size_t generated_hilbert_function(const Subvariety& y, int n) {
  IdealDegreePart part = ideal_degree_part(y, n);
  return part.monomials.size() - part.echelon.rows.size();
}

/// Rank-stabilization heuristic: the generated Hilbert function agrees with
/// a polynomial of degree < d on [n, n + d + 1] (d-th differences vanish).
/// With an explicit Hilbert polynomial (coefficients of n^0, n^1, ...) it is
/// compared instead.
inline bool hilbert_stabilized(const Subvariety& y, int n,
                               const std::optional<std::vector<Rational>>& hilbert_polynomial = std::nullopt) {
  if (y.is_linear()) return true;
  if (hilbert_polynomial) {
    Rational value = 0, power = 1;
    for (const auto& c : *hilbert_polynomial) {
      value += c * power;
      power *= n;
    }
    return value == Rational(static_cast<long>(generated_hilbert_function(y, n)));
  }
  const int d = static_cast<int>(y.nvars()) - 1;
  std::vector<Rational> h;
  for (int m = n; m <= n + 2 * d; ++m) h.emplace_back(static_cast<long>(generated_hilbert_function(y, m)));
  for (int shift = 0; shift <= d; ++shift) {
    // d-th forward difference at n + shift.
    std::vector<Rational> diff(h.begin() + shift, h.begin() + shift + d + 1);
    for (int k = 0; k < d; ++k) {
      for (std::size_t i = 0; i + 1 < diff.size() - static_cast<std::size_t>(k); ++i) diff[i] = diff[i + 1] - diff[i];
    }
    if (diff[0] != 0) return false;
  }
  return true;
}

/// V_n / I_n with the quotient of the ambient sup norm, coordinates taken on
/// the greedy monomial complement of the ideal (non-leading monomials of its
/// reduced echelon form in increasing lexicographic order).
class RestrictedDegree {
 public:
  RestrictedDegree(const AmbientMetric& metric, const Subvariety& y, int n,
                   PivotOrder order = PivotOrder::lowest_index_first)
      : n_(n), ideal_(ideal_degree_part(y, n)) {
    if (metric.nvars() != y.nvars()) throw Error("metric and subvariety live on different spaces");
    const auto& mons = ideal_.monomials;
    const std::size_t m = mons.size();
    std::vector<bool> leading(m, false);
    for (auto c : ideal_.echelon.pivots) leading[c] = true;
    std::vector<KVector> targets;
    for (std::size_t i = 0; i < m; ++i) {
      if (leading[i]) continue;
      transversal_index_.push_back(i);
      transversal_.push_back(mons[i]);
      KVector e(m);
      e[i] = 1;
      targets.push_back(std::move(e));
    }
    ambient_ = WeightedNorm::diagonal(metric.prime(), metric.monomial_weights(mons));
    space_ = std::make_shared<QuotientSpace>(ambient_, ideal_.echelon.rows, targets, order);
    for (const auto& b : space_->kernel_orthogonalization().norm.basis()) {
      ideal_basis_.push_back(GradedSection::from_coordinates(y.nvars(), n, mons, b));
    }
  }

  int degree() const { return n_; }
  std::size_t dim_ambient() const { return ideal_.monomials.size(); }
  std::size_t dim_quotient() const { return transversal_.size(); }
  bool certified() const { return ideal_.certified; }

  const std::vector<Exponent>& monomials() const { return ideal_.monomials; }
  const std::vector<Exponent>& transversal() const { return transversal_; }
  const IdealDegreePart& ideal() const { return ideal_; }
  /// Orthogonalized basis of I_n inside (V_n, ||.||_{n phi}).
  const std::vector<GradedSection>& ideal_basis() const { return ideal_basis_; }
  const std::vector<GammaValue>& ideal_weights() const { return space_->kernel_orthogonalization().norm.weights(); }
  const WeightedNorm& ambient() const { return ambient_; }
  const WeightedNorm& quotient() const { return space_->quotient(); }

  std::size_t max_denominator_bits() const {
    return std::max({xtend::max_denominator_bits(ideal_.echelon.rows),
                     xtend::max_denominator_bits(space_->kernel_orthogonalization().norm.basis()),
                     xtend::max_denominator_bits(space_->quotient().basis())});
  }

  /// Transversal coordinates of the class of s (normal form modulo I_n).
  KVector class_of(const GradedSection& s) const {
    if (s.degree() != n_) throw Error("class_of: section of degree " + std::to_string(s.degree()) + ", expected " + std::to_string(n_));
    KVector v = s.coordinates(ideal_.monomials);
    for (std::size_t r = 0; r < ideal_.echelon.rows.size(); ++r) {
      FieldElem c = v[ideal_.echelon.pivots[r]];
      if (c != 0) axpy(v, -c, ideal_.echelon.rows[r]);
    }
    KVector cls;
    cls.reserve(transversal_index_.size());
    for (auto i : transversal_index_) cls.push_back(v[i]);
    return cls;
  }

  /// The class whose only nonzero transversal coordinate is `index`.
  KVector basis_class(std::size_t index) const {
    KVector cls(dim_quotient());
    cls.at(index) = 1;
    return cls;
  }

  /// sum_l cls_l * t_l over the transversal monomials.
  GradedSection representative(const KVector& cls) const {
    GradedSection s(ideal_.monomials.front().size(), n_);
    for (std::size_t l = 0; l < cls.size(); ++l) s.add_term(transversal_[l], cls[l]);
    return s;
  }

  GammaValue quotient_norm(const KVector& cls) const { return space_->norm(cls); }
  GammaValue quotient_norm(const GradedSection& s) const { return quotient_norm(class_of(s)); }

  /// A lift of minimal sup norm (the infimum over lifts is attained).
  GradedSection minimal_lift(const KVector& cls) const {
    return GradedSection::from_coordinates(ideal_.monomials.front().size(), n_, ideal_.monomials,
                                           space_->minimal_lift(cls));
  }

 private:
  int n_;
  IdealDegreePart ideal_;
  std::vector<Exponent> transversal_;
  std::vector<std::size_t> transversal_index_;
  std::vector<GradedSection> ideal_basis_;
  WeightedNorm ambient_;
  std::shared_ptr<const QuotientSpace> space_;
};

inline RestrictedDegree quotient_norm_n(const AmbientMetric& metric, const Subvariety& y, int n) {
  return RestrictedDegree(metric, y, n);
}

/// Reduction modulo the ideal of a linear subvariety for a diagonal metric.
///
/// The degree-1 ideal is orthogonalized for phi and fully reduced, so every
/// pivot variable T_i is congruent to a combination of the complementary
/// variables.  Substituting yields the normal form in the complementary
/// variables; with phi diagonal FS, that normal form is the minimal lift and
/// its Gauss norm the quotient norm in every degree.
class LinearReduction {
 public:
  LinearReduction(const DiagonalMetric& phi, const Subvariety& y) : phi_(phi) {
    if (!y.is_linear()) throw Error("LinearReduction needs a linear subvariety");
    if (phi.nvars() != y.nvars()) throw Error("metric and subvariety live on different spaces");
    const std::size_t nv = y.nvars();
    Matrix forms;
    for (const auto& g : y.generators()) forms.push_back(g.coordinates(Subvariety::degree_one(nv)));
    Echelon e = rref(std::move(forms), nv);
    Orthogonalization o = orthogonalize_detailed(WeightedNorm::diagonal(phi.prime(), phi.radii()), e.rows);
    // Back-substitute so every pivot vector vanishes at the other pivots.
    for (std::size_t a = o.coords.size(); a-- > 0;) {
      for (std::size_t b = a + 1; b < o.coords.size(); ++b) {
        FieldElem c = o.coords[a][o.pivots[b]];
        if (c != 0) axpy(o.coords[a], -c, o.coords[b]);
      }
    }
    std::vector<bool> pivot(nv, false);
    for (auto i : o.pivots) pivot[i] = true;
    images_.assign(nv, KVector(nv));
    for (std::size_t i = 0; i < nv; ++i) {
      if (!pivot[i]) images_[i][i] = 1;
    }
    for (std::size_t a = 0; a < o.coords.size(); ++a) {
      for (std::size_t j = 0; j < nv; ++j) {
        if (!pivot[j]) images_[o.pivots[a]][j] = -o.coords[a][j];
      }
    }
    for (std::size_t j = 0; j < nv; ++j) {
      if (!pivot[j]) complement_.push_back(j);
    }
  }

  /// Normal form of s modulo the ideal, supported on complementary variables.
  GradedSection reduce(const GradedSection& s) const { return substitute_linear(s, images_); }

  GammaValue quotient_norm(const GradedSection& s) const { return gauss_norm(phi_, reduce(s)); }

  const std::vector<std::size_t>& complement() const { return complement_; }

 private:
  DiagonalMetric phi_;
  Matrix images_;
  std::vector<std::size_t> complement_;
};

/// ||t||_{n phi|_Y} for rational points (any ambient metric) and linear
/// subvarieties (diagonal metrics).
inline GammaValue sup_norm_exact(const AmbientMetric& metric, const Subvariety& y, const GradedSection& t) {
  if (t.nvars() != y.nvars()) throw Error("sup_norm_exact: section in the wrong number of variables");
  switch (y.kind()) {
    case SubvarietyKind::rational_point: {
      const KVector& a = y.point();
      FieldElem value = evaluate(t, a);
      if (value == 0) return GammaValue::infinity();
      return gamma_of(value, metric.prime()) + metric.fiber_offset(a, t.degree());
    }
    case SubvarietyKind::linear: {
      const DiagonalMetric& phi = metric.diagonal();
      const std::size_t nv = y.nvars();
      const Matrix& rows = y.parametrization();  // (e+1) x (d+1)
      const std::size_t e1 = rows.size();
      // Pullback of a linear form c is (rows * c); lift each coordinate form u_k.
      std::vector<KVector> lifts;
      for (std::size_t k = 0; k < e1; ++k) {
        // rows has full rank, so rows * c = e_k is solvable.
        Matrix aug = rows;
        for (std::size_t r = 0; r < e1; ++r) aug[r].push_back(Rational(r == k ? 1 : 0));
        Echelon ea = rref(std::move(aug), nv + 1);
        KVector c(nv);
        for (std::size_t r = 0; r < ea.rows.size(); ++r) c[ea.pivots[r]] = ea.rows[r][nv];
        lifts.push_back(std::move(c));
      }
      std::vector<KVector> kernel;
      for (const auto& g : y.generators()) kernel.push_back(g.coordinates(Subvariety::degree_one(nv)));
      kernel = rref(std::move(kernel), nv).rows;
      WeightedNorm on_y = quotient_norm(WeightedNorm::diagonal(phi.prime(), phi.radii()), kernel, lifts);
      // on_y: orthogonal basis of V_1(Y) in u-coordinates.  New variables
      // S_j = b_j(u); then u = B^{-1} S and T_i|_Y = sum_k rows[k][i] u_k.
      Matrix b = on_y.basis();
      Matrix binv = inverse(b);
      Matrix images(nv, KVector(e1));
      for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t l = 0; l < e1; ++l) {
          FieldElem s = 0;
          for (std::size_t k = 0; k < e1; ++k) s += rows[k][i] * binv[k][l];
          images[i][l] = s;
        }
      }
      GradedSection pulled = substitute_linear(t, images);
      return gauss_norm(DiagonalMetric(phi.prime(), on_y.weights()), pulled);
    }
    case SubvarietyKind::general:
      break;
  }
  throw Error("sup_norm_exact: general subvarieties are not supported (use sup_norm_spectral)");
}

/// Thread-safe per-(metric, Y) cache of RestrictedDegree objects.  Concurrent
/// builders of the same degree may duplicate work; the first insert wins.
class RestrictionCache {
 public:
  RestrictionCache(AmbientMetric metric, Subvariety y) : metric_(std::move(metric)), y_(std::move(y)) {}

  std::shared_ptr<const RestrictedDegree> get(int n) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(n);
      if (it != cache_.end()) return it->second;
    }
    auto built = std::make_shared<const RestrictedDegree>(metric_, y_, n);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(n, std::move(built)).first->second;
  }

  const AmbientMetric& metric() const { return metric_; }
  const Subvariety& subvariety() const { return y_; }

 private:
  AmbientMetric metric_;
  Subvariety y_;
  std::mutex mu_;
  std::map<int, std::shared_ptr<const RestrictedDegree>> cache_;
};

/// ||class(s)||_{n phi, X|Y}, through the linear normal form when it applies
/// and through the full degree-n quotient otherwise.
inline GammaValue quotient_norm_of(const AmbientMetric& metric, const Subvariety& y, const GradedSection& s) {
  if (metric.is_diagonal() && y.is_linear()) return LinearReduction(metric.diagonal(), y).quotient_norm(s);
  return RestrictedDegree(metric, y, s.degree()).quotient_norm(s);
}

/// max_J (w_J - v_p(a^J)) over degree-n monomials with a^J != 0.  At a
/// rational point a the quotient V_n / I_n is the line of values at a, so
/// class(t) has quotient value v_p(t(a)) plus this offset (the monomial
/// basis is orthogonal for every ambient metric here).
inline GammaValue point_quotient_offset(const AmbientMetric& metric, const KVector& a, int n) {
  if (metric.is_diagonal()) return metric.fiber_offset(a, n);
  // Concave weights minus a linear term peak at a data point of the
  // envelope, and those are degree-n monomials once M divides n.
  if (n % metric.veronese()->degree() == 0) return metric.fiber_offset(a, n);
  std::optional<GammaValue> best;
  for (const auto& j : monomials_of_degree(a.size(), n)) {
    GammaValue val(0);
    bool vanishes = false;
    for (std::size_t i = 0; i < a.size() && !vanishes; ++i) {
      if (j[i] == 0) continue;
      auto v = valuation(a[i], metric.prime());
      if (!v) vanishes = true;
      else val += GammaValue(Rational(*v * j[i]));
    }
    if (vanishes) continue;
    GammaValue cand = metric.monomial_weight(j) - val;
    if (!best || *best < cand) best = cand;
  }
  if (!best) throw Error("point is the origin");
  return *best;
}

/// (1/2^k) ||class(t^{2^k})||_{2^k n phi, X|Y} for k = 0..depth.  Each step
/// squares a lift of the previous class.
inline std::vector<GammaValue> sup_norm_spectral(const AmbientMetric& metric, const Subvariety& y,
                                                 const GradedSection& t, unsigned depth,
                                                 std::optional<int> degree_cap = std::nullopt,
                                                 RestrictionCache* cache = nullptr) {
  if (depth < 1) throw Error("sup_norm_spectral: depth must be at least 1");
  const int cap = degree_cap.value_or(t.degree() * 64);
  if (static_cast<long>(t.degree()) << depth > cap) {
    throw Error("sup_norm_spectral: degree " + std::to_string(static_cast<long>(t.degree()) << depth) +
                " exceeds the cap " + std::to_string(cap));
  }
  std::vector<GammaValue> seq;
  Rational scale = 1;
  if (metric.is_diagonal() && y.is_linear()) {
    LinearReduction red(metric.diagonal(), y);
    GradedSection cur = red.reduce(t);
    for (unsigned k = 0; k <= depth; ++k) {
      GammaValue v = gauss_norm(metric.diagonal(), cur);
      seq.push_back(v.is_infinite() ? v : v.scaled(scale));
      if (k < depth) {
        cur = red.reduce(multiply(cur, cur));
        scale /= 2;
      }
    }
    return seq;
  }
  if (y.kind() == SubvarietyKind::rational_point) {
    const FieldElem value = evaluate(t, y.point());
    if (value == 0) return std::vector<GammaValue>(depth + 1, GammaValue::infinity());
    const GammaValue base = gamma_of(value, metric.prime());
    for (unsigned k = 0; k <= depth; ++k) {
      const int deg = t.degree() << k;
      seq.push_back(base + point_quotient_offset(metric, y.point(), deg).scaled(scale));
      scale /= 2;
    }
    return seq;
  }
  GradedSection cur = t;
  for (unsigned k = 0; k <= depth; ++k) {
    std::shared_ptr<const RestrictedDegree> rd =
        cache ? cache->get(cur.degree()) : std::make_shared<const RestrictedDegree>(metric, y, cur.degree());
    KVector cls = rd->class_of(cur);
    GammaValue v = rd->quotient_norm(cls);
    seq.push_back(v.is_infinite() ? v : v.scaled(scale));
    if (k < depth) {
      GradedSection lift = rd->minimal_lift(cls);
      cur = multiply(lift, lift);
      scale /= 2;
    }
  }
  return seq;
}

/// A lift s of class(t) with ||s||_{n phi} equal to the quotient norm.
inline GradedSection extension_lift(const AmbientMetric& metric, const Subvariety& y, const GradedSection& t) {
  RestrictedDegree rd(metric, y, t.degree());
  return rd.minimal_lift(rd.class_of(t));
}

}  // namespace xtend
