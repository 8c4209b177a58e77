#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "swipt/model.hpp"

namespace swipt::detail {

// Solves a x = b by Gaussian elimination with partial pivoting. Returns
// nullopt when a pivot falls below `singular_tol` times the largest entry.
inline std::optional<Vector> solve_dense(Matrix a, Vector b, double singular_tol = 1e-14) {
  const std::size_t n = b.size();
  double largest = 0.0;
  for (const auto& row : a)
    for (double v : row) largest = std::max(largest, std::abs(v));
  if (largest == 0.0) return std::nullopt;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    if (std::abs(a[pivot][c]) <= singular_tol * largest) return std::nullopt;
    std::swap(a[c], a[pivot]);
    std::swap(b[c], b[pivot]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r][c] / a[c][c];
      if (m == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a[r][j] -= m * a[c][j];
      b[r] -= m * b[c];
    }
  }
  Vector x(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t j = c + 1; j < n; ++j) s -= a[c][j] * x[j];
    x[c] = s / a[c][c];
  }
  return x;
}

}  // namespace swipt::detail
