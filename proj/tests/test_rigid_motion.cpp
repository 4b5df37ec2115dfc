#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fsi/rigid_motion.hpp"

using namespace fsi;

TEST_CASE("rotation_exp matches the matrix exponential series") {
  const Vec3 phi(0.3, -0.7, 1.1);
  const Mat3 K = skew(phi);
  Mat3 series = Mat3::Identity(), term = Mat3::Identity();
  for (int n = 1; n < 40; ++n) {
    term = term * K / n;
    series += term;
  }
  CHECK((rotation_exp(phi) - series).norm() < 1e-13);
  CHECK(is_rotation(rotation_exp(phi)));
  CHECK((rotation_exp(Vec3(1e-10, 0, 0)) - Mat3::Identity()).norm() < 1e-9);
}

TEST_CASE("integrate_rotation stays orthogonal and is exact for constant axis") {
  const Vec3 w(0.0, 0.0, 2.0);
  const auto Qs = integrate_rotation(Mat3::Identity(), [&](double) { return w; }, 1.0, 0.01);
  REQUIRE(Qs.size() == 101);
  CHECK((Qs.back() - rotation_exp(w * 1.0)).norm() < 1e-12);
  for (const auto& Q : Qs) CHECK(orthogonality_defect(Q) < 1e-13);

  // Time-varying axis: second-order convergence.
  auto omega = [](double t) { return Vec3(std::sin(t), std::cos(2 * t), 0.5 + t); };
  const Mat3 ref = integrate_rotation(Mat3::Identity(), omega, 1.0, 1e-4).back();
  const double e1 = (integrate_rotation(Mat3::Identity(), omega, 1.0, 0.02).back() - ref).norm();
  const double e2 = (integrate_rotation(Mat3::Identity(), omega, 1.0, 0.01).back() - ref).norm();
  CHECK(e1 / e2 > 3.5);

  CHECK_THROWS_AS(integrate_rotation(Mat3::Identity(), omega, 1.0, 0.0), Error);
  CHECK_THROWS_AS(integrate_rotation(2.0 * Mat3::Identity(), omega, 1.0, 0.1), Error);
}

TEST_CASE("inertia tensor of a ball matches the closed form and a Monte-Carlo estimate") {
  BodyGeometry geo{0.5, Vec3(0.1, 0.2, -0.3)};
  RigidState st;
  st.q = Vec3(0.4, -0.2, 0.1);
  st.Q = rotation_exp(Vec3(0.2, 0.5, -0.4));
  const Mat3 J = inertia_tensor(geo, st);
  const double mass = 4.0 / 3.0 * M_PI * std::pow(geo.radius, 3);
  const double closed = 0.4 * mass * geo.radius * geo.radius;
  CHECK((J - closed * Mat3::Identity()).norm() < 1e-12);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-geo.radius, geo.radius);
  Mat3 mc = Mat3::Zero();
  int hits = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    Vec3 r(u(rng), u(rng), u(rng));
    if (r.norm() > geo.radius) continue;
    ++hits;
    mc += r.squaredNorm() * Mat3::Identity() - r * r.transpose();
  }
  mc *= std::pow(2 * geo.radius, 3) / n;
  CHECK((mc - J).norm() / J.norm() < 0.02);
  CHECK((transformed_inertia(st.Q, J) - J).norm() < 1e-12);
}

TEST_CASE("body map and rigid velocity") {
  RigidState st;
  st.q = Vec3(1, 0, 0);
  st.Q = rotation_exp(Vec3(0, 0, M_PI / 2));
  st.a = Vec3(0, 1, 0);
  st.omega = Vec3(0, 0, 3);
  CHECK((body_map(Vec3(1, 0, 0), st, Vec3::Zero()) - Vec3(1, 1, 0)).norm() < 1e-14);
  CHECK((rigid_velocity(Vec3(2, 0, 0), st) - Vec3(0, 4, 0)).norm() < 1e-14);
}

TEST_CASE("trajectory CSV round trip") {
  std::vector<RigidState> traj(3);
  for (int k = 0; k < 3; ++k) {
    traj[k].t = 0.1 * k;
    traj[k].q = Vec3(k, 2.0 * k, 1.0 / 3.0);
    traj[k].Q = rotation_exp(Vec3(0.1 * k, 0.2, 0.3));
    traj[k].a = Vec3(1e-17, -k, 0.5);
    traj[k].omega = Vec3(M_PI, 0, k);
  }
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const auto back = read_trajectory_csv(ss);
  REQUIRE(back.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(back[k].t == traj[k].t);
    CHECK(back[k].q == traj[k].q);
    CHECK(back[k].Q == traj[k].Q);
    CHECK(back[k].a == traj[k].a);
    CHECK(back[k].omega == traj[k].omega);
  }
}
