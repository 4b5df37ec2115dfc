#pragma once

#include <vector>

namespace fsi {

/// Weights w_j with f^{(order)}(x0) ~ sum_j w_j f(nodes[j]) (Fornberg's recursion).
std::vector<double> fd_weights(int order, const std::vector<double>& nodes, double x0 = 0.0);

/// Sixth-order stencils at unit spacing. Weights multiply f(offset) - f(0); the center
/// weight is implied, so constant fields differentiate to exactly zero.
inline constexpr int kArm = 6;
inline constexpr int kCentralOffsets[kArm] = {-3, -2, -1, 1, 2, 3};
inline constexpr double kCentralD1[kArm] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 3.0 / 4, -3.0 / 20, 1.0 / 60};
inline constexpr double kCentralD2[kArm] = {1.0 / 90, -3.0 / 20, 3.0 / 2, 3.0 / 2, -3.0 / 20, 1.0 / 90};
/// Offsets 1..6; mirror the offsets and negate the result for the backward variant.
inline constexpr double kForwardD1[kArm] = {6.0, -15.0 / 2, 20.0 / 3, -15.0 / 4, 6.0 / 5, -1.0 / 6};

}  // namespace fsi
