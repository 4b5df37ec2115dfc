#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "fsi/types.hpp"

namespace fsi {

/// Kinematic state of the body at one instant (physical frame).
struct RigidState {
  double t = 0.0;
  Vec3 q = Vec3::Zero();
  Mat3 Q = Mat3::Identity();
  Vec3 a = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

/// Ball-shaped body of unit density.
struct BodyGeometry {
  double radius = 1.0;
  Vec3 q0 = Vec3::Zero();
};

Mat3 skew(const Vec3& omega);

/// Rodrigues form of exp(skew(phi)).
Mat3 rotation_exp(const Vec3& phi);

/// Frobenius norm of Q^T Q - I.
double orthogonality_defect(const Mat3& Q);

bool is_rotation(const Mat3& Q, double tol = 1e-12);

/// Q_{n+1} = exp(skew(omega(t_n + dt/2) dt)) Q_n. Returns Q at t = 0, dt, ..., covering t_end
/// (the last step is shortened to land on t_end exactly).
std::vector<Mat3> integrate_rotation(const Mat3& Q0, const std::function<Vec3(double)>& omega,
                                     double t_end, double dt);

/// B(t, y) = q(t) + Q(t)(y - q0).
Vec3 body_map(const Vec3& y, const RigidState& state, const Vec3& q0);

/// a(t) + omega(t) x (x - q(t)).
Vec3 rigid_velocity(const Vec3& x, const RigidState& state);

/// Inertia tensor of the body at its current placement, by a spherical product Gauss rule
/// with `resolution` nodes per coordinate.
Mat3 inertia_tensor(const BodyGeometry& geometry, const RigidState& state, int resolution = 8);

/// Q^T J Q.
Mat3 transformed_inertia(const Mat3& Q, const Mat3& J);

/// CSV export: t, q(3), Q row-major(9), a(3), omega(3).
void write_trajectory_csv(std::ostream& os, const std::vector<RigidState>& traj);
std::vector<RigidState> read_trajectory_csv(std::istream& is);

}  // namespace fsi
