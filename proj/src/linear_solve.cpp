#include "assortment_auction/linear_solve.hpp"

#include <stdexcept>
#include <utility>

namespace aauction {

std::vector<Rational> solve_exact(ExactSystem system) {
  auto& a = system.matrix;
  auto& b = system.rhs;
  const std::size_t dim = b.size();
  if (a.size() != dim) throw std::invalid_argument("solve_exact: matrix/rhs size mismatch");
  for (const auto& row : a) {
    if (row.size() != dim) throw std::invalid_argument("solve_exact: matrix is not square");
  }

  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t pivot = col;
    while (pivot < dim && sgn(a[pivot][col]) == 0) ++pivot;
    if (pivot == dim) throw std::domain_error("solve_exact: singular system");
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(b[pivot], b[col]);
    }

    const Rational inv = 1 / a[col][col];
    for (std::size_t k = col; k < dim; ++k) a[col][k] *= inv;
    b[col] *= inv;

    for (std::size_t row = 0; row < dim; ++row) {
      if (row == col || sgn(a[row][col]) == 0) continue;
      const Rational factor = a[row][col];
      for (std::size_t k = col; k < dim; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  return b;
}

}  // namespace aauction
