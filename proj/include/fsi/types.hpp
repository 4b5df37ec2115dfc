#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fsi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Christoffel symbols of the second kind, stored as gamma[k](i, j) = Gamma^k_ij.
using Christoffel = std::array<Mat3, 3>;

inline Christoffel zero_christoffel() {
  Christoffel c;
  for (auto& m : c) m.setZero();
  return c;
}

/// Fluid domain: ball of radius r_out minus the concentric body ball of radius r_in.
struct ShellGeometry {
  double r_in = 0.5;
  double r_out = 2.0;
  Vec3 center = Vec3::Zero();
};

enum class ErrorKind { InvalidInput, GapViolation, SolverFailure, Io };

/// Single exception type; the CLI maps the kind onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(ErrorKind::InvalidInput, msg);
}

}  // namespace fsi
