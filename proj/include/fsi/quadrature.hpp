#pragma once

#include <utility>
#include <vector>

#include "fsi/types.hpp"

namespace fsi {

/// Gauss-Legendre nodes and weights on [-1, 1].
std::vector<std::pair<double, double>> gauss_legendre(int n);

/// Quadrature rule on the reference tetrahedron {x, y, z >= 0, x + y + z <= 1}.
/// Weights sum to the reference volume 1/6.
struct TetRule {
  std::vector<std::array<double, 4>> bary;  // barycentric coordinates (l0, l1, l2, l3)
  std::vector<double> weight;
  int degree = 0;
  std::size_t size() const { return weight.size(); }
};

/// Symmetric 14-point rule, exact for polynomials of degree 5.
const TetRule& tet_rule_degree5();

/// The degree-5 rule applied on the eight children of a regular (red) refinement.
const TetRule& tet_rule_degree5_refined();

/// A rule applied on the 8^levels descendants of repeated red refinement.
TetRule refine_rule(const TetRule& base, int levels);

}  // namespace fsi
