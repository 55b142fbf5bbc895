#pragma once

// The graded algebra k[T_0, ..., T_d] = V_*(O(1)) on P^d: sparse homogeneous
// sections, Gauss norms for diagonal metrics, and spectral iteration.

#include <cctype>
#include <cstddef>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xtend/linalg.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

/// Exponent multi-index J in N^{d+1}.
using Exponent = std::vector<int>;

inline int total_degree(const Exponent& j) {
  int s = 0;
  for (int e : j) s += e;
  return s;
}

/// All exponents of total degree n in nvars variables, in increasing
/// lexicographic order (T_d^n first, T_0^n last).
inline std::vector<Exponent> monomials_of_degree(std::size_t nvars, int n) {
  std::vector<Exponent> out;
  if (nvars == 0) return out;
  Exponent cur(nvars, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == nvars) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[i] = e;
      rec(i + 1, left - e);
    }
  };
  rec(0, n);
  return out;
}

/// A homogeneous polynomial of fixed degree; stored coefficients are nonzero.
class GradedSection {
 public:
  using Terms = std::map<Exponent, FieldElem>;

  GradedSection() = default;
  GradedSection(std::size_t nvars, int degree) : nvars_(nvars), degree_(degree) {
    if (nvars == 0) throw Error("a section needs at least one variable");
    if (degree < 0) throw Error("negative degree");
  }

  static GradedSection monomial(Exponent j, FieldElem c = 1) {
    GradedSection s(j.size(), total_degree(j));
    s.add_term(j, c);
    return s;
  }

  /// T_i as a degree-1 section.
  static GradedSection variable(std::size_t nvars, std::size_t i) {
    Exponent j(nvars, 0);
    j.at(i) = 1;
    return monomial(std::move(j));
  }

  static GradedSection constant(std::size_t nvars, FieldElem c) { return monomial(Exponent(nvars, 0), std::move(c)); }

  /// From coefficients over monomials_of_degree(nvars, degree).
  static GradedSection from_coordinates(std::size_t nvars, int degree, const std::vector<Exponent>& monomials,
                                        const KVector& coords) {
    GradedSection s(nvars, degree);
    for (std::size_t i = 0; i < monomials.size(); ++i) {
      if (coords[i] != 0) s.terms_.emplace(monomials[i], coords[i]);
    }
    return s;
  }

  void add_term(const Exponent& j, const FieldElem& c) {
    if (j.size() != nvars_) throw Error("exponent has wrong number of variables");
    if (total_degree(j) != degree_) throw Error("inhomogeneous term added to a section of degree " + std::to_string(degree_));
    for (int e : j) {
      if (e < 0) throw Error("negative exponent");
    }
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(j, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  std::size_t nvars() const { return nvars_; }
  int degree() const { return degree_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  FieldElem coefficient(const Exponent& j) const {
    auto it = terms_.find(j);
    return it == terms_.end() ? FieldElem(0) : it->second;
  }

  /// Coefficients over the given monomial list (which must cover the support).
  KVector coordinates(const std::vector<Exponent>& monomials) const {
    KVector v(monomials.size());
    std::size_t found = 0;
    for (std::size_t i = 0; i < monomials.size(); ++i) {
      auto it = terms_.find(monomials[i]);
      if (it != terms_.end()) {
        v[i] = it->second;
        ++found;
      }
    }
    if (found != terms_.size()) throw Error("section has terms outside the monomial list");
    return v;
  }

  GradedSection scaled(const FieldElem& c) const {
    GradedSection s(nvars_, degree_);
    if (c == 0) return s;
    for (const auto& [j, f] : terms_) s.terms_.emplace(j, f * c);
    return s;
  }

  friend GradedSection operator+(const GradedSection& a, const GradedSection& b) {
    check_compatible(a, b);
    GradedSection s = a;
    for (const auto& [j, f] : b.terms_) s.add_term(j, f);
    return s;
  }

  friend GradedSection operator-(const GradedSection& a, const GradedSection& b) { return a + b.scaled(-1); }

  friend bool operator==(const GradedSection& a, const GradedSection& b) {
    return a.nvars_ == b.nvars_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

  std::string to_string() const;

 private:
  static void check_compatible(const GradedSection& a, const GradedSection& b) {
    if (a.nvars_ != b.nvars_ || a.degree_ != b.degree_) throw Error("sections of different degree or arity");
  }

  std::size_t nvars_ = 1;
  int degree_ = 0;
  Terms terms_;
};

/// Degree-additive product.
inline GradedSection multiply(const GradedSection& a, const GradedSection& b) {
  if (a.nvars() != b.nvars()) throw Error("multiply: sections in different numbers of variables");
  GradedSection out(a.nvars(), a.degree() + b.degree());
  Exponent j(a.nvars());
  for (const auto& [ja, fa] : a.terms()) {
    for (const auto& [jb, fb] : b.terms()) {
      for (std::size_t i = 0; i < j.size(); ++i) j[i] = ja[i] + jb[i];
      out.add_term(j, fa * fb);
    }
  }
  return out;
}

inline GradedSection power(const GradedSection& s, unsigned m) {
  GradedSection result = GradedSection::constant(s.nvars(), 1);
  GradedSection base = s;
  while (m > 0) {
    if (m & 1U) result = multiply(result, base);
    m >>= 1U;
    if (m > 0) base = multiply(base, base);
  }
  return result;
}

/// Substitutes T_i -> sum_k images[i][k] S_k.  images has one row per old
/// variable and one column per new variable.
inline GradedSection substitute_linear(const GradedSection& s, const Matrix& images) {
  if (images.size() != s.nvars()) throw Error("substitute_linear: one image per variable required");
  const std::size_t new_vars = images.empty() ? 0 : images[0].size();
  std::vector<GradedSection> lin;
  for (const auto& row : images) {
    GradedSection l(new_vars, 1);
    for (std::size_t k = 0; k < new_vars; ++k) {
      Exponent e(new_vars, 0);
      e[k] = 1;
      l.add_term(e, row[k]);
    }
    lin.push_back(std::move(l));
  }
  // Powers of each image are shared across terms.
  std::vector<std::vector<GradedSection>> powers(s.nvars());
  auto power_of = [&](std::size_t i, int e) -> const GradedSection& {
    auto& ps = powers[i];
    if (ps.empty()) ps.push_back(GradedSection::constant(new_vars, 1));
    while (static_cast<int>(ps.size()) <= e) ps.push_back(multiply(ps.back(), lin[i]));
    return ps[static_cast<std::size_t>(e)];
  };
  GradedSection out(new_vars, s.degree());
  for (const auto& [j, f] : s.terms()) {
    GradedSection term = GradedSection::constant(new_vars, f);
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i] > 0) term = multiply(term, power_of(i, j[i]));
    }
    out = out + term;
  }
  return out;
}

/// Value of the section at a point of k^{d+1}.
inline FieldElem evaluate(const GradedSection& s, const KVector& point) {
  if (point.size() != s.nvars()) throw Error("evaluate: point has wrong dimension");
  FieldElem total = 0;
  for (const auto& [j, f] : s.terms()) {
    FieldElem t = f;
    for (std::size_t i = 0; i < j.size() && t != 0; ++i) {
      for (int e = 0; e < j[i]; ++e) t *= point[i];
    }
    total += t;
  }
  return total;
}

/// A diagonal Fubini-Study metric on O(1): T_0..T_d orthogonal with
/// ||T_i|| encoded by radii[i] (a GammaValue, so ||T_i|| = p^{-radii[i]}).
class DiagonalMetric {
 public:
  DiagonalMetric(Prime p, std::vector<GammaValue> radii) : p_(p), radii_(std::move(radii)) {
    if (radii_.empty()) throw Error("DiagonalMetric needs at least one radius");
    for (const auto& r : radii_) {
      if (r.is_infinite()) throw Error("DiagonalMetric radii must be finite");
    }
  }

  const Prime& prime() const { return p_; }
  std::size_t nvars() const { return radii_.size(); }
  std::size_t dim() const { return radii_.size() - 1; }
  const std::vector<GammaValue>& radii() const { return radii_; }

  /// sum_i j_i * radii[i], the value of ||T^J||.
  GammaValue monomial_weight(const Exponent& j) const {
    GammaValue w;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i] != 0) w += radii_[i].scaled(Rational(j[i]));
    }
    return w;
  }

  /// Adds the unit perturbation vector e_i to radius i (arity d+1).
  DiagonalMetric perturbed() const {
    std::vector<GammaValue> r;
    const std::size_t m = radii_.size();
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<Rational> pert(m);
      for (std::size_t k = 0; k < m; ++k) pert[k] = radii_[i].perturbation_at(k);
      pert[i] += 1;
      r.emplace_back(radii_[i].primary(), std::move(pert));
    }
    return DiagonalMetric(p_, std::move(r));
  }

  DiagonalMetric projected() const {
    std::vector<GammaValue> r;
    for (const auto& x : radii_) r.push_back(x.projected());
    return DiagonalMetric(p_, std::move(r));
  }

 private:
  Prime p_;
  std::vector<GammaValue> radii_;
};

/// max_J |f_J| * prod_i ||T_i||^{j_i}, as a GammaValue.
inline GammaValue gauss_norm(const DiagonalMetric& phi, const GradedSection& s) {
  if (s.nvars() != phi.nvars()) throw Error("gauss_norm: section and metric disagree on the number of variables");
  GammaValue best = GammaValue::infinity();
  for (const auto& [j, f] : s.terms()) {
    GammaValue term = gamma_of(f, phi.prime()) + phi.monomial_weight(j);
    if (term < best) best = std::move(term);
  }
  return best;
}

/// A finite sum of homogeneous components.
class GradedElement {
 public:
  GradedElement() = default;
  explicit GradedElement(std::size_t nvars) : nvars_(nvars) {}

  void add(const GradedSection& s) {
    if (s.nvars() != nvars_) throw Error("GradedElement: component in wrong number of variables");
    auto it = components_.find(s.degree());
    if (it == components_.end()) {
      if (!s.is_zero()) components_.emplace(s.degree(), s);
      return;
    }
    it->second = it->second + s;
    if (it->second.is_zero()) components_.erase(it);
  }

  std::size_t nvars() const { return nvars_; }
  const std::map<int, GradedSection>& components() const { return components_; }
  bool is_zero() const { return components_.empty(); }

  friend GradedElement multiply(const GradedElement& a, const GradedElement& b) {
    if (a.nvars_ != b.nvars_) throw Error("GradedElement: multiply in different numbers of variables");
    GradedElement out(a.nvars_);
    for (const auto& [na, sa] : a.components_) {
      for (const auto& [nb, sb] : b.components_) out.add(multiply(sa, sb));
    }
    return out;
  }

  friend GradedElement power(const GradedElement& s, unsigned m) {
    GradedElement result(s.nvars_);
    result.add(GradedSection::constant(s.nvars_, 1));
    for (unsigned i = 0; i < m; ++i) result = multiply(result, s);
    return result;
  }

 private:
  std::size_t nvars_ = 1;
  std::map<int, GradedSection> components_;
};

/// sup_n ||s_n||_{n phi}.
inline GammaValue algebra_norm(const DiagonalMetric& phi, const GradedElement& s) {
  GammaValue best = GammaValue::infinity();
  for (const auto& [n, sn] : s.components()) {
    GammaValue g = gauss_norm(phi, sn);
    if (g < best) best = std::move(g);
  }
  return best;
}

/// The doubling sequence (1/2^k) * normf(s^{2^k}) for k = 0..depth.
template <typename NormFn>
std::vector<GammaValue> spectral_seminorm(NormFn&& normf, const GradedSection& s, unsigned depth) {
  if (depth < 1) throw Error("spectral_seminorm: depth must be at least 1");
  std::vector<GammaValue> seq;
  GradedSection cur = s;
  Rational scale = 1;
  for (unsigned k = 0; k <= depth; ++k) {
    GammaValue v = normf(cur);
    seq.push_back(v.is_infinite() ? v : v.scaled(scale));
    if (k < depth) {
      cur = multiply(cur, cur);
      scale /= 2;
    }
  }
  return seq;
}

// Literal format: terms joined by '+' / '-', each "c*T0^a0 T1^a1 ..." where
// c is an optional rational "num/den", '*' between factors is optional and a
// bare "Ti" means exponent 1.  Example: "3/4*T0^2 T1 - T2^3".

inline GradedSection parse_section(std::string_view text, std::size_t nvars) {
  struct Term {
    FieldElem coef;
    Exponent exp;
  };
  std::vector<Term> terms;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& why) -> Error {
    return Error("section literal '" + std::string(text) + "': " + why + " at offset " + std::to_string(pos));
  };
  auto read_int = [&]() -> std::string {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    return std::string(text.substr(start, pos - start));
  };

  skip_ws();
  if (pos == text.size()) throw fail("empty literal");
  bool first = true;
  while (true) {
    skip_ws();
    if (pos == text.size()) break;
    int sign = 1;
    if (text[pos] == '+' || text[pos] == '-') {
      sign = text[pos] == '-' ? -1 : 1;
      ++pos;
      skip_ws();
    } else if (!first) {
      throw fail("expected '+' or '-'");
    }
    first = false;
    Term t{FieldElem(sign), Exponent(nvars, 0)};
    bool saw_factor = false;
    bool star = false;  // a '*' still waiting for its right-hand factor
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      std::string num = read_int();
      std::string lit = num;
      if (pos < text.size() && text[pos] == '/') {
        ++pos;
        std::string den = read_int();
        if (den.empty()) throw fail("missing denominator");
        lit += "/" + den;
      }
      t.coef *= parse_rational(lit);
      saw_factor = true;
      skip_ws();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        skip_ws();
        star = true;
      }
    }
    while (pos < text.size() && (text[pos] == 'T' || text[pos] == 't')) {
      ++pos;
      star = false;
      std::string idx = read_int();
      if (idx.empty()) throw fail("variable index expected after 'T'");
      std::size_t i = std::stoul(idx);
      if (i >= nvars) throw fail("variable T" + idx + " out of range");
      int e = 1;
      skip_ws();
      if (pos < text.size() && text[pos] == '^') {
        ++pos;
        skip_ws();
        std::string es = read_int();
        if (es.empty()) throw fail("exponent expected after '^'");
        e = std::stoi(es);
      }
      t.exp[i] += e;
      saw_factor = true;
      star = false;
      skip_ws();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        skip_ws();
        star = true;
      }
    }
    if (star) throw fail("factor expected after '*'");
    if (!saw_factor) throw fail("empty term");
    terms.push_back(std::move(t));
  }
  int degree = total_degree(terms.front().exp);
  GradedSection s(nvars, degree);
  for (const auto& t : terms) {
    if (total_degree(t.exp) != degree) throw Error("section literal '" + std::string(text) + "' is not homogeneous");
    s.add_term(t.exp, t.coef);
  }
  return s;
}

inline std::string GradedSection::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // Highest monomial in lex order first (T0-heavy terms lead).
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [j, f] = *it;
    FieldElem c = f;
    if (first) {
      if (c < 0) {
        os << "-";
        c = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    first = false;
    bool has_var = total_degree(j) > 0;
    if (c != 1 || !has_var) {
      os << rational_short(c);
      if (has_var) os << "*";
    }
    bool first_var = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i] == 0) continue;
      if (!first_var) os << " ";
      first_var = false;
      os << "T" << i;
      if (j[i] != 1) os << "^" << j[i];
    }
  }
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const GradedSection& s) { return os << s.to_string(); }

}  // namespace xtend
