#pragma once

// Fubini-Study metrics and their duals evaluated at rational points and at
// monomial (Gauss) points of P^d.

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "xtend/section_algebra.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

/// [a_0 : ... : a_d], normalized so that the first coordinate of maximal
/// absolute value equals 1.
class RationalPoint {
 public:
  RationalPoint(const Prime& p, KVector coords) : coords_(std::move(coords)) {
    std::optional<std::size_t> lead;
    long best = 0;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      auto v = valuation(coords_[i], p);
      if (v && (!lead || *v < best)) {
        lead = i;
        best = *v;
      }
    }
    if (!lead) throw Error("a projective point needs a nonzero coordinate");
    FieldElem inv = 1 / coords_[*lead];
    for (auto& x : coords_) x *= inv;
  }

  const KVector& coords() const { return coords_; }
  std::size_t nvars() const { return coords_.size(); }

 private:
  KVector coords_;
};

/// The Gauss point with |T_i|(x) = p^{-rho_i}; an infinite rho_i is a
/// vanishing coordinate.
class MonomialPoint {
 public:
  explicit MonomialPoint(std::vector<GammaValue> rho) : rho_(std::move(rho)) {
    bool finite = false;
    for (const auto& r : rho_) finite = finite || r.is_finite();
    if (!finite) throw Error("a monomial point needs at least one finite radius");
  }

  const std::vector<GammaValue>& rho() const { return rho_; }
  std::size_t nvars() const { return rho_.size(); }

  /// sum_i j_i rho_i (infinite if a used coordinate vanishes).
  GammaValue monomial_value(const Exponent& j) const {
    GammaValue v(0);
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i] == 0) continue;
      if (rho_[i].is_infinite()) return GammaValue::infinity();
      v += rho_[i].scaled(Rational(j[i]));
    }
    return v;
  }

 private:
  std::vector<GammaValue> rho_;
};

using Point = std::variant<RationalPoint, MonomialPoint>;

inline std::size_t point_nvars(const Point& x) {
  return std::visit([](const auto& pt) { return pt.nvars(); }, x);
}

/// value(|s|(x)) for a section s.
inline GammaValue section_value(const GradedSection& s, const Point& x, const Prime& p) {
  if (point_nvars(x) != s.nvars()) throw Error("point and section disagree on the number of variables");
  if (const auto* r = std::get_if<RationalPoint>(&x)) return gamma_of(evaluate(s, r->coords()), p);
  const auto& m = std::get<MonomialPoint>(x);
  GammaValue best = GammaValue::infinity();
  for (const auto& [j, f] : s.terms()) {
    GammaValue term = m.monomial_value(j);
    if (term.is_infinite()) continue;
    term = gamma_of(f, p) + term;
    if (term < best) best = std::move(term);
  }
  return best;
}

/// A local frame: a monomial T^J that does not vanish at the point.
inline GammaValue frame_value(const Exponent& frame, const Point& x, const Prime& p) {
  GammaValue v = section_value(GradedSection::monomial(frame), x, p);
  if (v.is_infinite()) throw Error("frame vanishes at the point");
  return v;
}

/// The first monomial T_a^n that does not vanish at x.
inline Exponent default_frame(const Point& x, int n, const Prime& p) {
  const std::size_t nv = point_nvars(x);
  for (std::size_t a = 0; a < nv; ++a) {
    Exponent j(nv, 0);
    j[a] = n;
    if (section_value(GradedSection::monomial(j), x, p).is_finite()) return j;
  }
  throw Error("no nonvanishing coordinate frame");
}

/// |e(x)|_{FS} for the norm in which `basis` is orthogonal with `weights`:
/// max_j (value(e(x)) - value(s_j(x)) + w_j) over the s_j not vanishing at x.
inline GammaValue eval_metric(const std::vector<GradedSection>& basis, const std::vector<GammaValue>& weights,
                              const Point& x, const Exponent& frame, const Prime& p) {
  if (basis.size() != weights.size()) throw Error("eval_metric: basis and weights differ in length");
  GammaValue e = frame_value(frame, x, p);
  std::optional<GammaValue> best;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].degree() != total_degree(frame)) throw Error("eval_metric: frame and basis differ in degree");
    GammaValue sj = section_value(basis[j], x, p);
    if (sj.is_infinite()) continue;
    GammaValue cand = e - sj + weights[j];
    if (!best || *best < cand) best = std::move(cand);
  }
  if (!best) throw Error("eval_metric: every basis section vanishes at the point");
  return *best;
}

/// |e^v(x)| in the dual metric: min_j (value(s_j(x)) - value(e(x)) - w_j).
inline GammaValue eval_dual_metric(const std::vector<GradedSection>& basis, const std::vector<GammaValue>& weights,
                                   const Point& x, const Exponent& frame, const Prime& p) {
  if (basis.size() != weights.size()) throw Error("eval_dual_metric: basis and weights differ in length");
  GammaValue e = frame_value(frame, x, p);
  std::optional<GammaValue> best;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    GammaValue sj = section_value(basis[j], x, p);
    if (sj.is_infinite()) continue;
    GammaValue cand = sj - e - weights[j];
    if (!best || cand < *best) best = std::move(cand);
  }
  if (!best) throw Error("eval_dual_metric: every basis section vanishes at the point");
  return *best;
}

/// Degree-n monomial basis with its Gauss-norm weights.
struct MonomialBasis {
  std::vector<GradedSection> sections;
  std::vector<GammaValue> weights;
};

inline MonomialBasis monomial_basis(const DiagonalMetric& phi, int n) {
  MonomialBasis b;
  for (const auto& j : monomials_of_degree(phi.nvars(), n)) {
    b.sections.push_back(GradedSection::monomial(j));
    b.weights.push_back(phi.monomial_weight(j));
  }
  return b;
}

/// value of |e(x)|_phi for the degree-1 FS metric itself.
inline GammaValue metric_value(const DiagonalMetric& phi, const Point& x, const Exponent& frame) {
  MonomialBasis b = monomial_basis(phi, 1);
  return eval_metric(b.sections, b.weights, x, frame, phi.prime());
}

struct MetricDistance {
  GammaValue sampled_lower_bound;   // max over the sample of |log ratio|
  std::optional<GammaValue> exact;  // available for two diagonal metrics in one basis
};

/// Distances are reported in the GammaValue group (units of log p for the
/// primary coordinate).
inline MetricDistance metric_distance(const DiagonalMetric& a, const DiagonalMetric& b,
                                      const std::vector<Point>& sample) {
  if (a.nvars() != b.nvars()) throw Error("metric_distance: metrics on different spaces");
  MetricDistance out{GammaValue(0), std::nullopt};
  for (const auto& x : sample) {
    Exponent frame = default_frame(x, 1, a.prime());
    GammaValue d = gamma_abs(metric_value(a, x, frame) - metric_value(b, x, frame));
    if (out.sampled_lower_bound < d) out.sampled_lower_bound = d;
  }
  GammaValue exact(0);
  for (std::size_t i = 0; i < a.nvars(); ++i) {
    GammaValue d = gamma_abs(a.radii()[i] - b.radii()[i]);
    if (exact < d) exact = d;
  }
  out.exact = exact;
  return out;
}

/// Checks FS(||.||_{n phi}) = n phi at every sample point.  The sup norm on
/// V_n is the Gauss norm (monomials orthogonal with weights sum j_i w_i)
/// unless degree_n_weights overrides them.
inline bool fs_idempotence_check(const DiagonalMetric& phi, int n, const std::vector<Point>& sample,
                                 const std::optional<std::vector<GammaValue>>& degree_n_weights = std::nullopt) {
  if (n < 1) throw Error("fs_idempotence_check: n must be >= 1");
  MonomialBasis b = monomial_basis(phi, n);
  if (degree_n_weights) {
    if (degree_n_weights->size() != b.weights.size()) throw Error("fs_idempotence_check: wrong number of weights");
    b.weights = *degree_n_weights;
  }
  for (const auto& x : sample) {
    Exponent frame = default_frame(x, n, phi.prime());
    Exponent lin(frame.size(), 0);
    for (std::size_t i = 0; i < frame.size(); ++i) lin[i] = frame[i] / n;
    GammaValue fs_of_sup = eval_metric(b.sections, b.weights, x, frame, phi.prime());
    GammaValue n_phi = metric_value(phi, x, lin).scaled(Rational(n));
    if (fs_of_sup != n_phi) return false;
  }
  return true;
}

/// Closed dual disc bundle of radius e^{n eps} (eps in units of log p):
/// |s_{n,J}(z)| <= p^{n eps} ||s_{n,J}|| for every degree-n monomial.
inline bool disc_membership(const DiagonalMetric& phi, int n, const MonomialPoint& z, const Rational& eps) {
  if (z.nvars() != phi.nvars()) throw Error("disc_membership: point has wrong dimension");
  GammaValue slack(eps * n);
  for (const auto& j : monomials_of_degree(phi.nvars(), n)) {
    GammaValue lhs = z.monomial_value(j);
    if (lhs < phi.monomial_weight(j) - slack) return false;
  }
  return true;
}

// Literals: "[a0:a1:...:ad]" for rational points, "rho=(q0,...,qd)" for
// monomial points with "inf" allowed, optionally followed by
// ";pert=((x,y,...),(x,y,...),...)" giving one perturbation tuple per entry.

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

inline Point parse_point(std::string_view text, const Prime& p) {
  std::string s = detail::trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw Error("rational point literal must end with ']': " + s);
    KVector coords;
    for (const auto& part : detail::split(std::string_view(s).substr(1, s.size() - 2), ':')) {
      coords.push_back(parse_rational(part));
    }
    return RationalPoint(p, std::move(coords));
  }
  if (s.rfind("rho=(", 0) == 0) {
    auto close = s.find(')');
    if (close == std::string::npos) throw Error("monomial point literal missing ')': " + s);
    std::vector<std::string> entries = detail::split(std::string_view(s).substr(5, close - 5), ',');
    std::vector<std::vector<Rational>> perts(entries.size());
    std::string rest = detail::trim(std::string_view(s).substr(close + 1));
    if (!rest.empty()) {
      if (rest.rfind(";pert=(", 0) != 0 || rest.back() != ')') throw Error("malformed perturbation suffix: " + rest);
      std::string body = rest.substr(7, rest.size() - 8);
      std::size_t idx = 0, pos = 0;
      while (pos < body.size()) {
        auto open = body.find('(', pos);
        if (open == std::string::npos) break;
        auto shut = body.find(')', open);
        if (shut == std::string::npos) throw Error("malformed perturbation tuple: " + rest);
        if (idx >= perts.size()) throw Error("more perturbation tuples than entries: " + rest);
        for (const auto& q : detail::split(std::string_view(body).substr(open + 1, shut - open - 1), ',')) {
          perts[idx].push_back(parse_rational(q));
        }
        ++idx;
        pos = shut + 1;
      }
      if (idx != perts.size()) throw Error("one perturbation tuple per entry required: " + rest);
    }
    std::vector<GammaValue> rho;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i] == "inf") {
        rho.push_back(GammaValue::infinity());
      } else {
        rho.emplace_back(parse_rational(entries[i]), perts[i]);
      }
    }
    return MonomialPoint(std::move(rho));
  }
  throw Error("unrecognized point literal: " + s);
}

inline std::string point_to_string(const Point& x) {
  std::ostringstream os;
  if (const auto* r = std::get_if<RationalPoint>(&x)) {
    os << "[";
    for (std::size_t i = 0; i < r->coords().size(); ++i) os << (i ? ":" : "") << rational_short(r->coords()[i]);
    os << "]";
    return os.str();
  }
  const auto& m = std::get<MonomialPoint>(x);
  os << "rho=(";
  bool any_pert = false;
  for (std::size_t i = 0; i < m.rho().size(); ++i) {
    os << (i ? "," : "") << (m.rho()[i].is_infinite() ? std::string("inf") : rational_short(m.rho()[i].primary()));
    any_pert = any_pert || m.rho()[i].arity() > 0;
  }
  os << ")";
  if (any_pert) {
    os << ";pert=(";
    for (std::size_t i = 0; i < m.rho().size(); ++i) {
      os << (i ? "," : "") << "(";
      const auto& pv = m.rho()[i].perturbation();
      for (std::size_t k = 0; k < pv.size(); ++k) os << (k ? "," : "") << rational_short(pv[k]);
      os << ")";
    }
    os << ")";
  }
  return os.str();
}

}  // namespace xtend
