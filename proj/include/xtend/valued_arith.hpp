#pragma once

// Exact arithmetic in (Q, |.|_p) and in the ordered value group used for
// every norm value in the library.
//
// Convention: a GammaValue stores -log_p of a norm.  The norm it encodes is
//
//     p^{-primary} * exp(-(pert_1 * l_1 + ... + pert_m * l_m))
//
// where l_1..l_m are positive infinitesimals that are Q-independent of log p
// and of each other.  A larger GammaValue is therefore a *smaller* norm, and
// the infinite value is the norm of the zero vector.  The total order is
// lexicographic (primary first, then perturbations in index order).

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace xtend {

using Rational = mpq_class;
using Integer = mpz_class;

/// An element of k = Q, viewed inside Q_p.
using FieldElem = Rational;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "num/den", "num" or "-num/den" into a canonical rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto first = s.find_first_not_of(" \t");
  auto last = s.find_last_not_of(" \t");
  if (first == std::string::npos) throw Error("empty rational literal");
  s = s.substr(first, last - first + 1);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  Rational q;
  try {
    q = Rational(s, 10);
  } catch (const std::invalid_argument&) {
    throw Error("malformed rational literal '" + std::string(text) + "'");
  }
  if (q.get_den() == 0) throw Error("zero denominator in '" + std::string(text) + "'");
  q.canonicalize();
  return q;
}

/// Always "num/den", also for integers.
inline std::string rational_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Short form: "num" for integers, "num/den" otherwise.
inline std::string rational_short(const Rational& q) { return q.get_str(); }

class Prime {
 public:
  explicit Prime(long p) : p_(p) {
    if (p < 2) throw Error("prime must be >= 2, got " + std::to_string(p));
    for (long q = 2; q * q <= p; ++q) {
      if (p % q == 0) throw Error(std::to_string(p) + " is not prime");
    }
  }

  long value() const { return p_; }
  Integer as_integer() const { return Integer(p_); }

  friend bool operator==(const Prime&, const Prime&) = default;

 private:
  long p_;
};

namespace detail {

inline long remove_factor(Integer& n, const Prime& p) {
  if (n == 0) return 0;
  Integer pz = p.as_integer();
  return static_cast<long>(mpz_remove(n.get_mpz_t(), n.get_mpz_t(), pz.get_mpz_t()));
}

}  // namespace detail

/// v_p(a); std::nullopt stands for +infinity (a = 0).
inline std::optional<long> valuation(const FieldElem& a, const Prime& p) {
  if (a == 0) return std::nullopt;
  Integer num = a.get_num();
  Integer den = a.get_den();
  return detail::remove_factor(num, p) - detail::remove_factor(den, p);
}

/// p^e as an exact rational, e of either sign.
inline Rational prime_power(const Prime& p, long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p.value()),
                static_cast<unsigned long>(e < 0 ? -e : e));
  if (e >= 0) return Rational(r);
  return Rational(Integer(1), r);
}

class GammaValue {
 public:
  GammaValue() = default;

  explicit GammaValue(Rational primary, std::vector<Rational> perturbation = {})
      : primary_(std::move(primary)), pert_(std::move(perturbation)) {
    primary_.canonicalize();
  }

  GammaValue(long primary) : primary_(primary) {}  // NOLINT: integer literals are handy in tests

  /// The value of the zero vector (norm 0).
  static GammaValue infinity() {
    GammaValue g;
    g.infinite_ = true;
    return g;
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  const Rational& primary() const {
    if (infinite_) throw Error("primary coordinate of the infinite GammaValue");
    return primary_;
  }

  /// Perturbation coordinates; arity 0 means "unperturbed" and is compatible
  /// with every arity (missing coordinates read as 0).
  const std::vector<Rational>& perturbation() const { return pert_; }
  std::size_t arity() const { return pert_.size(); }

  Rational perturbation_at(std::size_t i) const { return i < pert_.size() ? pert_[i] : Rational(0); }

  /// Drops perturbation coordinates; monotone non-decreasing.
  GammaValue projected() const {
    if (infinite_) return infinity();
    return GammaValue(primary_);
  }

  GammaValue scaled(const Rational& factor) const {
    if (infinite_) {
      if (factor < 0) throw Error("negative scaling of the infinite GammaValue");
      if (factor == 0) throw Error("zero scaling of the infinite GammaValue");
      return infinity();
    }
    std::vector<Rational> pert(pert_.size());
    for (std::size_t i = 0; i < pert_.size(); ++i) pert[i] = pert_[i] * factor;
    return GammaValue(primary_ * factor, std::move(pert));
  }

  friend GammaValue operator+(const GammaValue& a, const GammaValue& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    check_arity(a, b);
    std::size_t m = std::max(a.arity(), b.arity());
    std::vector<Rational> pert(m);
    for (std::size_t i = 0; i < m; ++i) pert[i] = a.perturbation_at(i) + b.perturbation_at(i);
    return GammaValue(a.primary_ + b.primary_, std::move(pert));
  }

  friend GammaValue operator-(const GammaValue& a) {
    if (a.infinite_) throw Error("negation of the infinite GammaValue");
    return a.scaled(Rational(-1));
  }

  friend GammaValue operator-(const GammaValue& a, const GammaValue& b) {
    if (b.infinite_) throw Error("subtraction of the infinite GammaValue");
    return a + (-b);
  }

  GammaValue& operator+=(const GammaValue& other) { return *this = *this + other; }

  friend bool operator==(const GammaValue& a, const GammaValue& b) {
    return compare(a, b) == std::strong_ordering::equal;
  }

  friend std::strong_ordering operator<=>(const GammaValue& a, const GammaValue& b) {
    return compare(a, b);
  }

  /// Lexicographic comparison; throws on incompatible arities.
  static std::strong_ordering compare(const GammaValue& a, const GammaValue& b) {
    if (a.infinite_ || b.infinite_) {
      if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
      return a.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    check_arity(a, b);
    if (int c = cmp(a.primary_, b.primary_); c != 0) {
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    std::size_t m = std::max(a.arity(), b.arity());
    for (std::size_t i = 0; i < m; ++i) {
      if (int c = cmp(a.perturbation_at(i), b.perturbation_at(i)); c != 0) {
        return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
      }
    }
    return std::strong_ordering::equal;
  }

  std::string to_string() const {
    if (infinite_) return "inf";
    std::ostringstream os;
    os << "(" << rational_short(primary_) << ";";
    for (std::size_t i = 0; i < pert_.size(); ++i) os << (i ? "," : "") << rational_short(pert_[i]);
    os << ")";
    return os.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const GammaValue& g) { return os << g.to_string(); }

 private:
  static void check_arity(const GammaValue& a, const GammaValue& b) {
    if (a.arity() != 0 && b.arity() != 0 && a.arity() != b.arity()) {
      throw Error("GammaValue arity mismatch: " + std::to_string(a.arity()) + " vs " +
                  std::to_string(b.arity()));
    }
  }

  Rational primary_{0};
  std::vector<Rational> pert_;
  bool infinite_ = false;
};

inline std::strong_ordering gamma_compare(const GammaValue& x, const GammaValue& y) {
  if (x.is_finite() && y.is_finite() && x.arity() != y.arity()) {
    throw Error("gamma_compare: arity mismatch");
  }
  return GammaValue::compare(x, y);
}

/// The GammaValue of the larger of two norms (i.e. the smaller value).
inline const GammaValue& larger_norm(const GammaValue& a, const GammaValue& b) { return b < a ? b : a; }

/// |x| for a GammaValue: max(x, -x).
inline GammaValue gamma_abs(const GammaValue& x) {
  GammaValue neg = -x;
  return x < neg ? neg : x;
}

/// log-norm of a field element: v_p(a) as a GammaValue (infinite for a = 0).
inline GammaValue gamma_of(const FieldElem& a, const Prime& p) {
  auto v = valuation(a, p);
  if (!v) return GammaValue::infinity();
  return GammaValue(Rational(*v));
}

/// True iff the perturbation vectors are Q-linearly independent.
inline bool q_independent(std::span<const GammaValue> values) {
  if (values.empty()) return true;
  std::size_t m = 0;
  for (const auto& g : values) {
    if (g.is_infinite()) return false;
    if (g.arity() != 0 && m != 0 && g.arity() != m) throw Error("q_independent: arity mismatch");
    m = std::max(m, g.arity());
  }
  if (values.size() > m) return false;
  std::vector<std::vector<Rational>> rows;
  rows.reserve(values.size());
  for (const auto& g : values) {
    std::vector<Rational> r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = g.perturbation_at(i);
    rows.push_back(std::move(r));
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m && rank < rows.size(); ++col) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][col] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][col] == 0) continue;
      Rational f = rows[r][col] / rows[rank][col];
      for (std::size_t c = col; c < m; ++c) rows[r][c] -= f * rows[rank][c];
    }
    ++rank;
  }
  return rank == rows.size();
}

// JSON form: [primary, [pert_1, ..., pert_m]] with "num/den" strings; the
// infinite value is ["inf", []].

inline nlohmann::json gamma_to_json(const GammaValue& g) {
  nlohmann::json pert = nlohmann::json::array();
  if (g.is_infinite()) return nlohmann::json::array({"inf", pert});
  for (const auto& q : g.perturbation()) pert.push_back(rational_string(q));
  return nlohmann::json::array({rational_string(g.primary()), pert});
}

/// Accepts the array form, or a bare rational string / integer for an
/// unperturbed value.
inline GammaValue gamma_from_json(const nlohmann::json& j) {
  auto scalar = [](const nlohmann::json& e) -> std::optional<Rational> {
    if (e.is_string()) {
      if (e.get<std::string>() == "inf") return std::nullopt;
      return parse_rational(e.get<std::string>());
    }
    if (e.is_number_integer()) return Rational(e.get<long>());
    throw Error("GammaValue entry must be a rational string, got " + e.dump());
  };
  if (!j.is_array()) {
    auto q = scalar(j);
    return q ? GammaValue(*q) : GammaValue::infinity();
  }
  if (j.size() != 2 || !j[1].is_array()) throw Error("GammaValue must be [primary, [perturbations]]: " + j.dump());
  auto primary = scalar(j[0]);
  if (!primary) return GammaValue::infinity();
  std::vector<Rational> pert;
  for (const auto& e : j[1]) {
    auto q = scalar(e);
    if (!q) throw Error("perturbation coordinates must be finite");
    pert.push_back(*q);
  }
  return GammaValue(*primary, std::move(pert));
}

}  // namespace xtend
