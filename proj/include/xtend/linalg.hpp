#pragma once

// Dense exact linear algebra over Q.  Row-major, vectors are std::vector.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "xtend/valued_arith.hpp"

namespace xtend {

using KVector = std::vector<FieldElem>;
using Matrix = std::vector<KVector>;

inline bool is_zero(const KVector& v) {
  for (const auto& x : v) {
    if (x != 0) return false;
  }
  return true;
}

inline void axpy(KVector& y, const FieldElem& a, const KVector& x) {
  if (a == 0) return;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (x[i] != 0) y[i] += a * x[i];
  }
}

inline Matrix transpose(const Matrix& m, std::size_t cols) {
  Matrix t(cols, KVector(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c][r] = m[r][c];
  }
  return t;
}

struct Echelon {
  Matrix rows;                      // reduced row echelon form, nonzero rows only
  std::vector<std::size_t> pivots;  // pivot column of each row
};

/// Reduced row echelon form; pivots are chosen in increasing column order.
inline Echelon rref(Matrix m, std::size_t cols) {
  Echelon e;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < m.size(); ++col) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][col] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    FieldElem inv = 1 / m[rank][col];
    for (auto& x : m[rank]) x *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][col] == 0) continue;
      FieldElem f = -m[r][col];
      axpy(m[r], f, m[rank]);
    }
    e.pivots.push_back(col);
    ++rank;
  }
  m.resize(rank);
  e.rows = std::move(m);
  return e;
}

inline std::size_t rank(const Matrix& m, std::size_t cols) { return rref(m, cols).pivots.size(); }

/// Basis of {x : m x = 0}.
inline Matrix nullspace(const Matrix& m, std::size_t cols) {
  Echelon e = rref(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto c : e.pivots) is_pivot[c] = true;
  Matrix basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    KVector x(cols);
    x[free] = 1;
    for (std::size_t r = 0; r < e.rows.size(); ++r) x[e.pivots[r]] = -e.rows[r][free];
    basis.push_back(std::move(x));
  }
  return basis;
}

/// Solves sum_i c_i * columns[i] = target; nullopt when target is outside the
/// span.  Columns must be linearly independent.
inline std::optional<KVector> solve_in_span(const std::vector<KVector>& columns, const KVector& target) {
  const std::size_t n = target.size();
  const std::size_t k = columns.size();
  Matrix aug(n, KVector(k + 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) aug[r][c] = columns[c][r];
    aug[r][k] = target[r];
  }
  Echelon e = rref(std::move(aug), k + 1);
  if (!e.pivots.empty() && e.pivots.back() == k) return std::nullopt;
  if (e.pivots.size() != k) throw Error("solve_in_span: columns are linearly dependent");
  KVector c(k);
  for (std::size_t r = 0; r < e.rows.size(); ++r) c[e.pivots[r]] = e.rows[r][k];
  return c;
}

/// Inverse of a square matrix; throws if singular.
inline Matrix inverse(const Matrix& m) {
  const std::size_t n = m.size();
  Matrix aug(n, KVector(2 * n));
  for (std::size_t r = 0; r < n; ++r) {
    if (m[r].size() != n) throw Error("inverse: matrix is not square");
    for (std::size_t c = 0; c < n; ++c) aug[r][c] = m[r][c];
    aug[r][n + r] = 1;
  }
  Echelon e = rref(std::move(aug), 2 * n);
  if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) throw Error("inverse: matrix is singular");
  Matrix inv(n, KVector(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) inv[r][c] = e.rows[r][n + c];
  }
  return inv;
}

inline KVector mat_vec(const Matrix& m, const KVector& v) {
  KVector out(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (m[r][c] != 0 && v[c] != 0) out[r] += m[r][c] * v[c];
    }
  }
  return out;
}

/// Largest denominator, in bits, over all entries; tracks coefficient growth.
inline std::size_t max_denominator_bits(const Matrix& rows) {
  std::size_t bits = 0;
  for (const auto& r : rows) {
    for (const auto& e : r) bits = std::max(bits, mpz_sizeinbase(e.get_den_mpz_t(), 2));
  }
  return bits;
}

inline nlohmann::json vector_to_json(const KVector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& x : v) j.push_back(rational_string(x));
  return j;
}

inline KVector vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("expected an array of rational strings: " + j.dump());
  KVector v;
  for (const auto& e : j) {
    if (e.is_string()) {
      v.push_back(parse_rational(e.get<std::string>()));
    } else if (e.is_number_integer()) {
      v.push_back(FieldElem(e.get<long>()));
    } else {
      throw Error("expected a rational string, got " + e.dump());
    }
  }
  return v;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("expected a matrix (array of rows): " + j.dump());
  Matrix m;
  for (const auto& row : j) m.push_back(vector_from_json(row));
  return m;
}

}  // namespace xtend
