#pragma once

#include "assortment_auction/rational.hpp"

#include <vector>

namespace aauction {

/// Dense square system over the rationals, row-major.
struct ExactSystem {
  std::vector<std::vector<Rational>> matrix;
  std::vector<Rational> rhs;
};

/// Gauss-Jordan elimination with exact pivoting (first nonzero entry in the
/// column). Throws std::domain_error when the matrix is singular.
std::vector<Rational> solve_exact(ExactSystem system);

}  // namespace aauction
