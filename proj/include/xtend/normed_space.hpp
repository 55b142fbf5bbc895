#pragma once

// Finite-dimensional ultrametric normed spaces over (Q, |.|_p), presented by
// orthogonal bases with GammaValue weights.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "xtend/linalg.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

/// A norm given by an orthogonal basis: ||sum c_i e_i|| = max_i |c_i| * ||e_i||,
/// i.e. value(sum c_i e_i) = min_i (v_p(c_i) + weights[i]).
class WeightedNorm {
 public:
  WeightedNorm() = default;

  WeightedNorm(Prime p, std::size_t ambient_dim, std::vector<KVector> basis, std::vector<GammaValue> weights)
      : p_(p), ambient_dim_(ambient_dim), basis_(std::move(basis)), weights_(std::move(weights)) {
    if (basis_.size() != weights_.size()) throw Error("WeightedNorm: basis and weights differ in length");
    for (const auto& b : basis_) {
      if (b.size() != ambient_dim_) throw Error("WeightedNorm: basis vector of wrong length");
    }
    for (const auto& w : weights_) {
      if (w.is_infinite()) throw Error("WeightedNorm: basis vectors must have nonzero norm");
    }
    if (rank(basis_, ambient_dim_) != basis_.size()) throw Error("WeightedNorm: basis is linearly dependent");
  }

  /// Standard basis of k^n with the given weights.
  static WeightedNorm diagonal(Prime p, std::vector<GammaValue> weights) {
    const std::size_t n = weights.size();
    std::vector<KVector> basis(n, KVector(n));
    for (std::size_t i = 0; i < n; ++i) basis[i][i] = 1;
    WeightedNorm w;
    w.p_ = p;
    w.ambient_dim_ = n;
    w.basis_ = std::move(basis);
    w.weights_ = std::move(weights);
    w.identity_ = true;
    return w;
  }

  const Prime& prime() const { return p_; }
  std::size_t dim() const { return basis_.size(); }
  std::size_t ambient_dim() const { return ambient_dim_; }
  const std::vector<KVector>& basis() const { return basis_; }
  const std::vector<GammaValue>& weights() const { return weights_; }
  bool is_identity_basis() const { return identity_; }

  /// Coordinates of v in this basis; throws if v is outside the span.
  KVector coordinates(const KVector& v) const {
    if (v.size() != ambient_dim_) throw Error("vector of wrong length for this norm");
    if (identity_) return v;
    auto c = solve_in_span(basis_, v);
    if (!c) throw Error("vector lies outside the span of the basis");
    return *c;
  }

  /// sum_i c_i e_i in ambient coordinates.
  KVector combine(const KVector& coords) const {
    if (identity_) return coords;
    KVector v(ambient_dim_);
    for (std::size_t i = 0; i < basis_.size(); ++i) axpy(v, coords[i], basis_[i]);
    return v;
  }

 private:
  Prime p_{2};
  std::size_t ambient_dim_ = 0;
  std::vector<KVector> basis_;
  std::vector<GammaValue> weights_;
  bool identity_ = false;
};

/// min_i (v_p(c_i) + weights_i); infinite iff all c_i vanish.
inline GammaValue coordinate_norm(const Prime& p, std::span<const GammaValue> weights, const KVector& coords) {
  GammaValue best = GammaValue::infinity();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] == 0) continue;
    GammaValue term = gamma_of(coords[i], p) + weights[i];
    if (term < best) best = std::move(term);
  }
  return best;
}

inline GammaValue vector_norm(const WeightedNorm& n, const KVector& v) {
  return coordinate_norm(n.prime(), n.weights(), n.coordinates(v));
}

/// Raised when a spanning list is linearly dependent; carries the relation
/// sum_i relation[i] * span[i] = 0 (indices refer to the input list).
class DependentSpanError : public Error {
 public:
  explicit DependentSpanError(KVector relation)
      : Error("spanning vectors are linearly dependent"), relation_(std::move(relation)) {}
  const KVector& relation() const { return relation_; }

 private:
  KVector relation_;
};

enum class PivotOrder { lowest_index_first, highest_index_first };

/// Result of valuation-aware elimination.  Each pivot vector has coordinate 1
/// at its pivot, coordinate 0 at every earlier pivot, and its norm equals the
/// ambient weight of the pivot coordinate.
struct Orthogonalization {
  WeightedNorm norm;                   // orthogonal presentation of the span
  std::vector<KVector> coords;         // pivot vectors in ambient-basis coordinates
  std::vector<std::size_t> pivots;     // pivot coordinate of each vector
  std::vector<std::size_t> source;     // input index the pivot vector was normalized from
};

inline Orthogonalization orthogonalize_detailed(const WeightedNorm& ambient, const std::vector<KVector>& span,
                                                PivotOrder order = PivotOrder::lowest_index_first) {
  const Prime& p = ambient.prime();
  const std::size_t m = ambient.dim();
  const auto& w = ambient.weights();

  struct Row {
    KVector u;         // ambient-basis coordinates
    KVector relation;  // as a combination of the input list
    std::size_t input;
  };
  std::vector<Row> active;
  for (std::size_t a = 0; a < span.size(); ++a) {
    KVector c = ambient.coordinates(span[a]);
    if (is_zero(c)) continue;
    KVector rel(span.size());
    rel[a] = 1;
    active.push_back(Row{std::move(c), std::move(rel), a});
  }
  if (order == PivotOrder::highest_index_first) std::reverse(active.begin(), active.end());

  Orthogonalization out;
  std::vector<KVector> reduced;
  std::vector<GammaValue> reduced_weights;
  std::vector<bool> used(m, false);
  // Best entry of each active row (value and coordinate), refreshed after an
  // elimination touches the row; ties go to the earlier coordinate in index
  // order.
  auto rank_of = [&](std::size_t i) { return order == PivotOrder::lowest_index_first ? i : m - 1 - i; };
  std::vector<std::size_t> row_best(active.size(), m);
  std::vector<GammaValue> row_key(active.size(), GammaValue::infinity());
  auto rescan = [&](std::size_t a) {
    row_best[a] = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i] || active[a].u[i] == 0) continue;
      GammaValue k = gamma_of(active[a].u[i], p) + w[i];
      if (row_best[a] == m || k < row_key[a] || (k == row_key[a] && rank_of(i) < rank_of(row_best[a]))) {
        row_best[a] = i;
        row_key[a] = std::move(k);
      }
    }
  };
  for (std::size_t a = 0; a < active.size(); ++a) rescan(a);
  std::vector<bool> done(active.size(), false);

  for (std::size_t step = 0; step < active.size(); ++step) {
    std::size_t best_a = active.size(), best_i = m;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (done[a] || row_best[a] == m) continue;
      const std::size_t i = row_best[a];
      if (best_a == active.size() || row_key[a] < row_key[best_a] ||
          (row_key[a] == row_key[best_a] && rank_of(i) < rank_of(best_i))) {
        best_a = a;
        best_i = i;
      }
    }
    if (best_a == active.size()) {
      // Unreachable for independent input: zero rows are caught on reduction.
      throw Error("orthogonalize: no pivot available");
    }
    Row& piv = active[best_a];
    // The returned basis keeps the reduced vector itself; coords holds it
    // scaled to a unit pivot for the eliminations.
    reduced.push_back(piv.u);
    reduced_weights.push_back(row_key[best_a]);
    FieldElem inv = 1 / piv.u[best_i];
    for (auto& x : piv.u) x *= inv;
    for (auto& x : piv.relation) x *= inv;
    done[best_a] = true;
    used[best_i] = true;
    for (std::size_t b = 0; b < active.size(); ++b) {
      if (done[b]) continue;
      FieldElem f = active[b].u[best_i];
      if (f != 0) {
        axpy(active[b].u, -f, piv.u);
        axpy(active[b].relation, -f, piv.relation);
        if (is_zero(active[b].u)) throw DependentSpanError(active[b].relation);
        rescan(b);
      }
    }
    out.coords.push_back(piv.u);
    out.pivots.push_back(best_i);
    out.source.push_back(piv.input);
  }

  std::vector<KVector> basis;
  for (const auto& u : reduced) basis.push_back(ambient.combine(u));
  out.norm = WeightedNorm(p, ambient.ambient_dim(), std::move(basis), std::move(reduced_weights));
  return out;
}

/// Orthogonal presentation of span(vectors) with the restricted norm.
/// Zero vectors are dropped; a dependent list raises DependentSpanError.
inline WeightedNorm orthogonalize(const WeightedNorm& ambient, const std::vector<KVector>& span,
                                  PivotOrder order = PivotOrder::lowest_index_first) {
  return orthogonalize_detailed(ambient, span, order).norm;
}

/// The quotient of an orthogonally presented space by span(kernel).
///
/// After orthogonalizing the kernel, the kernel pivot vectors together with
/// the ambient basis vectors at non-pivot coordinates form an orthogonal
/// basis of the whole space, so the classes of those ambient vectors form an
/// orthogonal basis of the quotient and the infimum over lifts is attained
/// by the component along them.
class QuotientSpace {
 public:
  QuotientSpace(const WeightedNorm& ambient, const std::vector<KVector>& kernel,
                const std::vector<KVector>& target_basis, PivotOrder order = PivotOrder::lowest_index_first)
      : ambient_(ambient), targets_(target_basis) {
    for (const auto& k : kernel) {
      if (is_zero(k)) throw Error("quotient_norm: kernel vectors must be independent (zero vector)");
    }
    try {
      ortho_ = orthogonalize_detailed(ambient, kernel, order);
    } catch (const DependentSpanError&) {
      throw Error("quotient_norm: kernel vectors are not independent");
    }
    const std::size_t m = ambient.dim();
    if (kernel.size() + targets_.size() != m) throw Error("quotient_norm: target basis is not complementary");

    std::vector<bool> pivot(m, false);
    for (auto i : ortho_.pivots) pivot[i] = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (!pivot[j]) complement_.push_back(j);
    }

    // Class coordinates: reduce modulo the kernel's echelon form, then solve
    // on the free coordinates, where the reduced targets must be a basis.
    Matrix kc;
    for (const auto& k : kernel) kc.push_back(ambient.coordinates(k));
    kernel_echelon_ = rref(std::move(kc), m);
    std::vector<bool> bound(m, false);
    for (auto c : kernel_echelon_.pivots) bound[c] = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (!bound[j]) free_.push_back(j);
    }
    target_coords_.reserve(targets_.size());
    for (const auto& t : targets_) target_coords_.push_back(ambient.coordinates(t));
    const std::size_t r = targets_.size();
    Matrix f(r, KVector(r));
    for (std::size_t l = 0; l < r; ++l) {
      KVector red = reduce(target_coords_[l]);
      for (std::size_t i = 0; i < r; ++i) f[i][l] = red[free_[i]];
    }
    if (r > 0 && rank(f, r) != r) throw Error("quotient_norm: target basis is not complementary");
    if (r > 0) change_ = inverse(f);

    std::vector<KVector> qbasis;
    std::vector<GammaValue> qweights;
    for (auto j : complement_) {
      KVector e(m);
      e[j] = 1;
      qbasis.push_back(class_coordinates_from_ambient_coords(e));
      qweights.push_back(ambient.weights()[j]);
    }
    quotient_ = WeightedNorm(ambient.prime(), targets_.size(), std::move(qbasis), std::move(qweights));
  }

  const WeightedNorm& quotient() const { return quotient_; }
  const Orthogonalization& kernel_orthogonalization() const { return ortho_; }
  const std::vector<std::size_t>& complement() const { return complement_; }

  /// Coordinates (w.r.t. the target basis) of the class of an ambient vector.
  KVector class_of(const KVector& v) const { return class_coordinates_from_ambient_coords(ambient_.coordinates(v)); }

  /// The lift of minimal norm, in ambient coordinates.
  KVector minimal_lift(const KVector& class_coords) const { return ambient_.combine(minimal_lift_coords(class_coords)); }

  GammaValue norm(const KVector& class_coords) const {
    return coordinate_norm(ambient_.prime(), ambient_.weights(), minimal_lift_coords(class_coords));
  }

 private:
  KVector reduce(KVector v) const {
    for (std::size_t r = 0; r < kernel_echelon_.rows.size(); ++r) {
      const FieldElem c = v[kernel_echelon_.pivots[r]];
      if (c != 0) axpy(v, -c, kernel_echelon_.rows[r]);
    }
    return v;
  }

  KVector class_coordinates_from_ambient_coords(const KVector& c) const {
    const KVector red = reduce(c);
    KVector on_free(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) on_free[i] = red[free_[i]];
    return mat_vec(change_, on_free);
  }

  KVector minimal_lift_coords(const KVector& class_coords) const {
    if (class_coords.size() != targets_.size()) throw Error("class coordinates of wrong length");
    KVector v(ambient_.dim());
    for (std::size_t l = 0; l < targets_.size(); ++l) axpy(v, class_coords[l], target_coords_[l]);
    for (std::size_t a = 0; a < ortho_.coords.size(); ++a) {
      FieldElem c = v[ortho_.pivots[a]];
      if (c != 0) axpy(v, -c, ortho_.coords[a]);
    }
    return v;
  }

  WeightedNorm ambient_;
  std::vector<KVector> targets_;
  std::vector<KVector> target_coords_;
  Orthogonalization ortho_;
  std::vector<std::size_t> complement_;
  Echelon kernel_echelon_;
  std::vector<std::size_t> free_;  // coordinates not bound by the kernel echelon form
  Matrix change_;                  // free coordinates of reduced vectors -> class coordinates
  WeightedNorm quotient_;
};

/// Orthogonal presentation of the quotient norm on ambient / span(kernel),
/// in coordinates relative to target_basis.
inline WeightedNorm quotient_norm(const WeightedNorm& ambient, const std::vector<KVector>& kernel,
                                  const std::vector<KVector>& target_basis) {
  return QuotientSpace(ambient, kernel, target_basis).quotient();
}

/// Dual basis with negated weights, in the coordinates dual to the ambient ones.
inline WeightedNorm dual_norm(const WeightedNorm& n) {
  if (n.dim() != n.ambient_dim()) throw Error("dual_norm: the basis must span the ambient space");
  const std::size_t d = n.dim();
  std::vector<GammaValue> weights;
  for (const auto& w : n.weights()) weights.push_back(-w);
  if (n.is_identity_basis()) return WeightedNorm::diagonal(n.prime(), std::move(weights));
  Matrix b(d, KVector(d));  // columns are basis vectors
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) b[r][c] = n.basis()[c][r];
  }
  Matrix inv = inverse(b);  // row i is the dual functional e_i^*
  return WeightedNorm(n.prime(), d, std::move(inv), std::move(weights));
}

/// l(v) for a functional given in dual coordinates.
inline FieldElem pair(const KVector& functional, const KVector& v) {
  FieldElem s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (functional[i] != 0 && v[i] != 0) s += functional[i] * v[i];
  }
  return s;
}

inline bool operator==(const WeightedNorm& a, const WeightedNorm& b) {
  return a.prime() == b.prime() && a.ambient_dim() == b.ambient_dim() && a.basis() == b.basis() &&
         a.weights() == b.weights();
}

}  // namespace xtend
