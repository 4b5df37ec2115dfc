#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>

#include "doctest.h"
#include "fsi/assembly.hpp"
#include "fsi/rigid_motion.hpp"

using namespace fsi;

namespace {

const ShellGeometry kShell{0.5, 2.0, Vec3::Zero()};

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::srand(seed);
  return Eigen::VectorXd::Random(n);
}

// Integral over the mesh of a pointwise function, with the element quadrature but not the space.
double integrate(const CoupledSpace& s, const std::function<double(std::size_t, const std::array<double, 4>&)>& f) {
  const TetRule& rule = tet_rule_degree5();
  double acc = 0.0;
  for (std::size_t e = 0; e < s.num_elements(); ++e)
    for (std::size_t q = 0; q < rule.size(); ++q) acc += 6.0 * s.mesh().signed_volume(e) * rule.weight[q] * f(e, rule.bary[q]);
  return acc;
}

TransformSnapshot snapshot_on_space(const CoupledSpace& s, const FlowMap& flow, double t) {
  const auto pts = quadrature_points(s, tet_rule_degree5());
  const LabelCloud cloud =
      make_metric_cloud(pts, 1.0 / 64, annulus_domain(s.mesh().center, s.mesh().body_inscribed_radius(), kShell.r_out));
  LabelState st = flow.start(cloud.labels);
  flow.advance(st, t);
  return build_snapshot(flow, cloud, st);
}

}  // namespace

TEST_CASE("shell mesh is conforming, counts match and volume converges at second order") {
  const double exact = 4.0 / 3.0 * std::numbers::pi * (8.0 - 0.125);
  double prev = 0.0;
  for (int level = 0; level <= 3; ++level) {
    const ShellMesh m = build_shell_mesh(0.5, 2.0, level);
    CHECK_NOTHROW(validate_mesh(m));
    CHECK(m.tets.size() == static_cast<std::size_t>(60 * (1 << (3 * level))));
    CHECK(m.boundary.size() == static_cast<std::size_t>(40 * (1 << (2 * level))));
    const double err = exact - m.volume();
    CHECK(err > 0.0);
    if (level > 1) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("mesh files round trip and malformed input is rejected") {
  const ShellMesh m = build_shell_mesh(0.5, 2.0, 1, Vec3(0.1, -0.2, 0.3));
  std::stringstream ss;
  write_mesh(ss, m);
  const ShellMesh r = read_mesh(ss);
  REQUIRE(r.vertices.size() == m.vertices.size());
  CHECK(r.tets == m.tets);
  CHECK(r.center.isApprox(m.center));
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK((r.vertices[i] - m.vertices[i]).norm() == 0.0);

  std::stringstream bad("fsi-shell-mesh 2\n");
  try {
    read_mesh(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  ShellMesh inverted = m;
  std::swap(inverted.tets[3][0], inverted.tets[3][1]);
  CHECK_THROWS_AS(validate_mesh(inverted), Error);
  CHECK_THROWS_AS(build_shell_mesh(2.0, 0.5, 1), Error);
}

TEST_CASE("weighted mass reproduces fluid plus body kinetic energy of a rigid field") {
  const CoupledSpace s(build_shell_mesh(0.5, 2.0, 1), BodyCoupling::Rigid);
  Mat3 J;
  J << 2.0, 0.1, 0.0, 0.1, 1.5, 0.2, 0.0, 0.2, 1.0;
  const SpMat M = assemble_weighted_mass(s, J);
  CHECK((Eigen::MatrixXd(M) - Eigen::MatrixXd(M.transpose())).norm() < 1e-13);

  const Vec3 A(0.3, -0.1, 0.2), W(0.0, 0.5, -0.4);
  const Eigen::VectorXd x = s.interpolate([&](const Vec3& y) -> Vec3 { return A + W.cross(y); }, A, W);
  // Oracle: the P2 interpolant evaluated pointwise and squared.
  const auto nodal = s.nodal_velocity(x);
  const double oracle = integrate(s, [&](std::size_t e, const std::array<double, 4>& b) {
                          return eval_velocity(s, nodal, e, b).first.squaredNorm();
                        }) +
                        A.squaredNorm() + W.dot(J * W);
  const double e = x.head(s.num_velocity()).dot(M * x.head(s.num_velocity()));
  CHECK(e == doctest::Approx(oracle).epsilon(1e-12));

  Mat3 bad = J;
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(assemble_weighted_mass(s, bad), Error);
  CHECK_THROWS_AS(assemble_weighted_mass(s, -J), Error);
}

TEST_CASE("viscous block is symmetric positive definite and constants span the gradient kernel") {
  for (BodyCoupling bc : {BodyCoupling::Rigid, BodyCoupling::Dirichlet}) {
    const CoupledSpace s(build_shell_mesh(0.5, 2.0, 1), bc);
    const StokesBlock st = assemble_stokes_block(s);
    CHECK((Eigen::MatrixXd(st.K) - Eigen::MatrixXd(st.K.transpose())).norm() < 1e-12 * st.K.norm());
    Eigen::SimplicialLLT<SpMat> llt(st.K);
    CHECK(llt.info() == Eigen::Success);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.num_pressure());
    CHECK((st.B.transpose() * ones).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(st.mean.sum() == doctest::Approx(s.mesh().volume()).epsilon(1e-12));
  }
}

TEST_CASE("viscous and divergence forms match elementwise evaluation") {
  const CoupledSpace s(build_shell_mesh(0.5, 2.0, 1), BodyCoupling::Dirichlet);
  const StokesBlock st = assemble_stokes_block(s);
  const Eigen::VectorXd a = random_vector(s.size(), 3), b = random_vector(s.size(), 5);
  const auto na = s.nodal_velocity(a), nb = s.nodal_velocity(b);
  const double oracle = integrate(s, [&](std::size_t e, const std::array<double, 4>& bary) {
    const Mat3 Ga = eval_velocity(s, na, e, bary).second, Gb = eval_velocity(s, nb, e, bary).second;
    const Mat3 Da = 0.5 * (Ga + Ga.transpose()), Db = 0.5 * (Gb + Gb.transpose());
    return 2.0 * (Da.cwiseProduct(Db)).sum();
  });
  const int nv = s.num_velocity();
  CHECK(a.head(nv).dot(st.K * b.head(nv)) == doctest::Approx(oracle).epsilon(1e-11));
  const Eigen::VectorXd p = random_vector(s.num_pressure(), 7);
  const double div_oracle = integrate(s, [&](std::size_t e, const std::array<double, 4>& bary) {
    double pq = 0.0;
    for (int k = 0; k < 4; ++k) pq += bary[k] * p[s.mesh().tets[e][k]];
    return -pq * eval_velocity(s, nb, e, bary).second.trace();
  });
  CHECK(p.dot(st.B * b.head(nv)) == doctest::Approx(div_oracle).epsilon(1e-11));
}

TEST_CASE("transformed terms vanish for a body at rest") {
  const CoupledSpace s(build_shell_mesh(0.5, 2.0, 0), BodyCoupling::Rigid);
  const PrescribedMotion rest([](double) -> Vec3 { return Vec3::Zero(); }, [](double) -> Vec3 { return Vec3::Zero(); },
                              [](double) -> Vec3 { return Vec3::Zero(); });
  const FlowMap flow(build_cutoff(kShell, 0.1, 0.3), kShell, rest, 0.05);
  const TransformSnapshot td = snapshot_on_space(s, flow, 0.2);
  const TransformedTerms tt = assemble_transformed_terms(s, td, Eigen::VectorXd::Zero(s.size()), Mat3::Identity());
  CHECK(tt.L_minus_Delta.norm() < 1e-12);
  CHECK(tt.M.norm() < 1e-12);
  CHECK(tt.N.norm() < 1e-12);
  CHECK(tt.G_minus_grad.norm() < 1e-12);
  CHECK(tt.combined.norm() < 1e-12);
}

TEST_CASE("convection matrix agrees with elementwise evaluation of (U~ . grad) U") {
  const CoupledSpace s(build_shell_mesh(0.5, 2.0, 1), BodyCoupling::Rigid);
  const PrescribedMotion rest([](double) -> Vec3 { return Vec3::Zero(); }, [](double) -> Vec3 { return Vec3::Zero(); },
                              [](double) -> Vec3 { return Vec3::Zero(); });
  const FlowMap flow(build_cutoff(kShell, 0.1, 0.3), kShell, rest, 0.05);
  const TransformSnapshot td = snapshot_on_space(s, flow, 0.0);
  const Eigen::VectorXd ut = random_vector(s.size(), 11), u = random_vector(s.size(), 13), v = random_vector(s.size(), 17);
  Mat3 J = Mat3::Identity() * 1.7;
  const TransformedTerms tt = assemble_transformed_terms(s, td, ut, J);
  const auto nt = s.nodal_velocity(ut), nu = s.nodal_velocity(u), nv = s.nodal_velocity(v);
  const double oracle = integrate(s, [&](std::size_t e, const std::array<double, 4>& b) {
    const Vec3 w = eval_velocity(s, nt, e, b).first;
    const auto [uu, gu] = eval_velocity(s, nu, e, b);
    (void)uu;
    return eval_velocity(s, nv, e, b).first.dot(gu * w);
  });
  const int n = s.num_velocity();
  CHECK(v.head(n).dot(tt.N * u.head(n)) == doctest::Approx(oracle).epsilon(1e-11));

  // Rigid rows: -Omega~ x A and -Omega~ x (J Omega).
  const Vec3 Wt = s.rigid_Omega(ut);
  const Vec3 A = s.rigid_A(u), W = s.rigid_Omega(u);
  const Eigen::VectorXd r = tt.rigid * u.head(n);
  CHECK((r.segment<3>(s.rigid_offset()) + Wt.cross(A)).norm() < 1e-13);
  CHECK((r.segment<3>(s.rigid_offset() + 3) + Wt.cross(J * W)).norm() < 1e-13);
}

TEST_CASE("extension field is solenoidal and rigid near the body") {
  const CutoffField zeta = build_cutoff(kShell, 0.1, 0.3);
  const Vec3 A(0.2, -0.3, 0.1), W(0.4, 0.1, -0.2);
  const double h = 1e-4;
  for (const Vec3& y : {Vec3(0.55, 0.1, 0.0), Vec3(0.3, 0.7, -0.6), Vec3(-1.0, 0.5, 0.4), Vec3(0.0, 1.2, 1.2)}) {
    double div = 0.0;
    for (int m = 0; m < 3; ++m) {
      const Vec3 e = Vec3::Unit(m) * h;
      div += (extension_field(y + e, A, W, zeta)[m] - extension_field(y - e, A, W, zeta)[m]) / (2 * h);
    }
    CHECK(std::abs(div) < 1e-7);
  }
  const Vec3 near(0.3, -0.2, 0.4);
  CHECK((extension_field(near, A, W, zeta) - (A + W.cross(near))).norm() < 1e-14);
  CHECK(extension_field(Vec3(1.0, 1.0, 1.0), A, W, zeta).norm() == 0.0);
}

TEST_CASE("discrete inf-sup constant is positive and stable under refinement") {
  double prev = 0.0;
  for (int level = 0; level <= 1; ++level) {
    const CoupledSpace s(build_shell_mesh(0.5, 2.0, level), BodyCoupling::Rigid);
    const double beta = inf_sup_constant(s, assemble_stokes_block(s));
    MESSAGE("inf-sup constant at level " << level << ": " << beta);
    CHECK(beta > 0.05);
    if (level > 0) CHECK(beta > 0.5 * prev);
    prev = beta;
  }
}

TEST_CASE("saddle solve agrees with a Galerkin solve on the discrete kernel of the divergence") {
  const CoupledSpace s(build_shell_mesh(0.5, 2.0, 0), BodyCoupling::Rigid);
  const StokesBlock st = assemble_stokes_block(s);
  const SpMat A = st.K + assemble_weighted_mass(s, Mat3::Identity() * 0.8) * 10.0;
  const Eigen::VectorXd f = assemble_load(s, [](const Vec3& y) -> Vec3 {
    return Vec3(std::sin(y[1]), y[0] * y[2], std::cos(y[0] + y[1]));
  });
  CHECK(nullspace_crosscheck(s, A, st, f) < 1e-9);
}

TEST_CASE("Stokes manufactured solution velocity error drops by at least 3.5 per refinement") {
  auto psi_u = [](const Vec3& y) -> Vec3 {
    const double sx = std::sin(y[0]), cx = std::cos(y[0]), sy = std::sin(y[1]), cy = std::cos(y[1]);
    const double sz = std::sin(y[2]);
    return Vec3(sx * cy * sz, -cx * sy * sz, 0.0);
  };
  // -Laplacian u = 3 u, p = x y z
  auto f = [&](const Vec3& y) -> Vec3 { return 3.0 * psi_u(y) + Vec3(y[1] * y[2], y[0] * y[2], y[0] * y[1]); };
  double errs[2];
  for (int level = 1; level <= 2; ++level) {
    const CoupledSpace s(build_shell_mesh(0.5, 2.0, level), BodyCoupling::Dirichlet);
    const StokesBlock st = assemble_stokes_block(s);
    const Eigen::VectorXd fix = s.fixed_values(psi_u);
    Eigen::VectorXd rhs = assemble_load(s, f);
    rhs.head(s.num_velocity()) -= st.K_fix * fix;
    rhs.segment(s.pressure_offset(), s.num_pressure()) -= st.B_fix * fix;
    Eigen::SparseLU<SpMat> lu(saddle_matrix(s, st.K, st));
    REQUIRE(lu.info() == Eigen::Success);
    const Eigen::VectorXd x = lu.solve(rhs);
    errs[level - 1] = velocity_l2_error(s, x, fix, psi_u);
    MESSAGE("level " << level << " velocity L2 error " << errs[level - 1]);
  }
  CHECK(errs[0] / errs[1] >= 3.5);
}
