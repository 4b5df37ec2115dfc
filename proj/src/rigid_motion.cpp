#include "fsi/rigid_motion.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fsi/quadrature.hpp"

namespace fsi {

Mat3 skew(const Vec3& w) {
  Mat3 P;
  P << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return P;
}

Mat3 rotation_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 K = skew(phi);
  if (theta < 1e-8) {
    // Taylor series; the truncation is below rounding for theta < 1e-8.
    return Mat3::Identity() + K + 0.5 * K * K;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + s * K + c * K * K;
}

double orthogonality_defect(const Mat3& Q) {
  return (Q.transpose() * Q - Mat3::Identity()).norm();
}

bool is_rotation(const Mat3& Q, double tol) {
  return orthogonality_defect(Q) < tol && std::abs(Q.determinant() - 1.0) < tol;
}

std::vector<Mat3> integrate_rotation(const Mat3& Q0, const std::function<Vec3(double)>& omega,
                                     double t_end, double dt) {
  require(dt > 0.0, "integrate_rotation: dt must be positive");
  require(t_end >= 0.0, "integrate_rotation: t_end must be non-negative");
  require(is_rotation(Q0, 1e-10), "integrate_rotation: Q0 is not a rotation");
  std::vector<Mat3> out{Q0};
  double t = 0.0;
  Mat3 Q = Q0;
  while (t < t_end - 1e-14 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - t);
    Q = rotation_exp(omega(t + 0.5 * h) * h) * Q;
    t += h;
    out.push_back(Q);
  }
  return out;
}

Vec3 body_map(const Vec3& y, const RigidState& s, const Vec3& q0) {
  return s.q + s.Q * (y - q0);
}

Vec3 rigid_velocity(const Vec3& x, const RigidState& s) {
  return s.a + s.omega.cross(x - s.q);
}

Mat3 inertia_tensor(const BodyGeometry& geometry, const RigidState& state, int resolution) {
  require(geometry.radius > 0.0, "inertia_tensor: radius must be positive");
  require(resolution >= 2, "inertia_tensor: resolution too small");
  const double R = geometry.radius;
  const auto radial = gauss_legendre(resolution);
  const auto polar = gauss_legendre(resolution);
  const int nphi = 2 * resolution;
  Mat3 J = Mat3::Zero();
  for (const auto& [xr, wr] : radial) {
    const double r = 0.5 * R * (xr + 1.0);
    const double jr = 0.5 * R * r * r;
    for (const auto& [mu, wm] : polar) {
      const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      for (int k = 0; k < nphi; ++k) {
        const double phi = 2.0 * M_PI * (k + 0.5) / nphi;
        // Body-frame offset, then placed by the current rotation.
        const Vec3 d0(r * st * std::cos(phi), r * st * std::sin(phi), r * mu);
        const Vec3 d = state.Q * d0;
        const double w = wr * wm * (2.0 * M_PI / nphi) * jr;
        J += w * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
      }
    }
  }
  return J;
}

Mat3 transformed_inertia(const Mat3& Q, const Mat3& J) { return Q.transpose() * J * Q; }

void write_trajectory_csv(std::ostream& os, const std::vector<RigidState>& traj) {
  os << "# fsi-trajectory v1\n";
  os << "t,q0,q1,q2,Q00,Q01,Q02,Q10,Q11,Q12,Q20,Q21,Q22,a0,a1,a2,w0,w1,w2\n";
  os << std::setprecision(17);
  for (const auto& s : traj) {
    os << s.t;
    for (int i = 0; i < 3; ++i) os << ',' << s.q[i];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << ',' << s.Q(i, j);
    for (int i = 0; i < 3; ++i) os << ',' << s.a[i];
    for (int i = 0; i < 3; ++i) os << ',' << s.omega[i];
    os << '\n';
  }
}

std::vector<RigidState> read_trajectory_csv(std::istream& is) {
  std::vector<RigidState> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 19) throw Error(ErrorKind::Io, "trajectory csv: expected 19 columns");
    RigidState s;
    s.t = v[0];
    for (int i = 0; i < 3; ++i) s.q[i] = v[1 + i];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s.Q(i, j) = v[4 + 3 * i + j];
    for (int i = 0; i < 3; ++i) s.a[i] = v[13 + i];
    for (int i = 0; i < 3; ++i) s.omega[i] = v[16 + i];
    out.push_back(s);
  }
  return out;
}

}  // namespace fsi
