#pragma once

// Seeded sampling of field elements and sections.  mt19937_64 has a fixed
// output sequence; the std distributions do not, so the mapping to ranges is
// done here to keep reports reproducible across standard libraries.

#include <cstdint>
#include <random>
#include <vector>

#include "xtend/section_algebra.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [lo, hi] (modulo bias is negligible for the small ranges used).
  long uniform(long lo, long hi) {
    if (hi < lo) throw Error("Rng::uniform: empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(gen_() % span);
  }

  bool chance(unsigned num, unsigned den) { return gen_() % den < num; }

 private:
  std::mt19937_64 gen_;
};

/// +-a/b with 1 <= a, b <= 9 both prime to p.
inline Rational random_unit(Rng& rng, const Prime& p) {
  auto draw = [&] {
    for (;;) {
      long a = rng.uniform(1, 9);
      if (a % p.value() != 0) return a;
    }
  };
  Rational u(draw(), draw());
  u.canonicalize();
  return rng.chance(1, 2) ? u : Rational(-u);
}

/// A nonzero element with valuation uniform in [vmin, vmax].
inline Rational random_element(Rng& rng, const Prime& p, long vmin = -3, long vmax = 3) {
  return random_unit(rng, p) * prime_power(p, rng.uniform(vmin, vmax));
}

/// Degree-n section; each monomial gets a coefficient with probability 1/2,
/// at least one always does.
inline GradedSection random_section(Rng& rng, const Prime& p, std::size_t nvars, int n, long vmin = -3,
                                    long vmax = 3) {
  const auto mons = monomials_of_degree(nvars, n);
  GradedSection s(nvars, n);
  for (const auto& j : mons) {
    if (rng.chance(1, 2)) s.add_term(j, random_element(rng, p, vmin, vmax));
  }
  if (s.is_zero()) s.add_term(mons[static_cast<std::size_t>(rng.uniform(0, static_cast<long>(mons.size()) - 1))],
                              random_element(rng, p, vmin, vmax));
  return s;
}

/// Combination of the given sections with random coefficients (some zero).
inline GradedSection random_combination(Rng& rng, const Prime& p, const std::vector<GradedSection>& basis) {
  if (basis.empty()) throw Error("random_combination: empty basis");
  GradedSection s(basis.front().nvars(), basis.front().degree());
  for (const auto& b : basis) {
    if (rng.chance(2, 3)) s = s + b.scaled(random_element(rng, p));
  }
  if (s.is_zero()) s = basis.front().scaled(random_element(rng, p));
  return s;
}

}  // namespace xtend
