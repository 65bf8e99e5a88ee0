#include "homocut/rational.hpp"

namespace homocut {

std::optional<std::vector<Rational>> solve_left(const std::vector<std::vector<Rational>>& a,
                                                const std::vector<Rational>& b) {
  // x^T A = b  <=>  A^T x = b.
  const std::size_t n = a.size();
  if (b.size() != n) return std::nullopt;
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) return std::nullopt;
    for (std::size_t j = 0; j < n; ++j) m[j][i] = a[i][j];
  }
  for (std::size_t i = 0; i < n; ++i) m[i][n] = b[i];
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && sgn(m[piv][col]) == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(m[piv], m[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || sgn(m[r][col]) == 0) continue;
      const Rational f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

}  // namespace homocut
