#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace enopt::detail {

/// Gaussian elimination with partial pivoting for tiny dense systems.
/// Returns false when the matrix is numerically rank deficient.
template <std::size_t N>
bool solve_linear(std::array<std::array<double, N>, N> a,
                  std::array<double, N> b, std::array<double, N>& x) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < N; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  // Rough conditioning guard: a pivot collapsing many orders of magnitude
  // below the largest one signals a rank-deficient design matrix.
  double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    max_piv = std::max(max_piv, std::abs(a[i][i]));
    min_piv = std::min(min_piv, std::abs(a[i][i]));
  }
  if (min_piv < max_piv * 1e-13) return false;
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return true;
}

}  // namespace enopt::detail
