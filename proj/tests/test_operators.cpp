#include <cmath>
#include <random>

#include "doctest.h"
#include "fsi/operators.hpp"
#include "support/pullback.hpp"

using namespace fsi;

namespace {

const ShellGeometry kShell{0.5, 2.0, Vec3::Zero()};

std::vector<Vec3> random_labels(int n, double rmin, double rmax, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vec3> out;
  for (int k = 0; k < n; ++k) {
    Vec3 d(nd(rng), nd(rng), nd(rng));
    out.push_back(d.normalized() * (rmin + (rmax - rmin) * u(rng)));
  }
  return out;
}

PrescribedMotion rest_motion() {
  return PrescribedMotion([](double) -> Vec3 { return Vec3::Zero(); }, [](double) -> Vec3 { return Vec3::Zero(); },
                          [](double) -> Vec3 { return Vec3::Zero(); });
}

// Spin about the fixed center: label radii are preserved, so stencils inside the transition
// band never meet the cutoff junctions.
PrescribedMotion tilted_spin(double speed) {
  return PrescribedMotion([](double) -> Vec3 { return Vec3::Zero(); }, [](double) -> Vec3 { return Vec3::Zero(); },
                          [=](double t) -> Vec3 { return speed * Vec3(std::sin(t), 0.5, std::cos(t)).normalized(); });
}

// U_i(t, y) = sin(k_i . y + nu_i t + phi_i) with exact jets in y and t.
struct TimeField {
  std::array<Vec3, 3> k{Vec3(0.9, -0.5, 0.4), Vec3(-0.3, 0.8, 0.6), Vec3(0.5, 0.2, -1.0)};
  Vec3 nu{0.7, -1.1, 0.4}, phi{0.1, 0.5, -0.7};
  Vec3 kp{0.4, 0.9, -0.6};
  double nup = 0.8;

  // d-th time derivative of the jet.
  VectorJet U(double t, const Vec3& y, int d = 0) const {
    VectorJet J;
    for (int i = 0; i < 3; ++i) {
      const double a = k[i].dot(y) + nu[i] * t + phi[i] + 0.5 * M_PI * d;
      const double f = std::pow(nu[i], d);
      J.value[i] = f * std::sin(a);
      J.grad.row(i) = f * std::cos(a) * k[i].transpose();
      J.hess[i] = -f * std::sin(a) * k[i] * k[i].transpose();
    }
    return J;
  }
  ScalarJet P(double t, const Vec3& y, int d = 0) const {
    const double a = kp.dot(y) + nup * t + 0.5 * M_PI * d;
    const double f = std::pow(nup, d);
    return {f * std::cos(a), -f * std::sin(a) * kp};
  }
};

std::vector<GeometryJet> jets_at(const FlowMap& flow, const LabelCloud& cloud, double t) {
  LabelState st = flow.start(cloud.labels);
  flow.advance(st, t);
  return build_jets(flow, cloud, st);
}

}  // namespace

TEST_CASE("operators degenerate to the flat ones for zero motion") {
  const CutoffField z = build_cutoff(kShell, 0.1, 0.3);
  const PrescribedMotion rest = rest_motion();
  FlowMap flow(z, kShell, rest, 0.01);
  const auto centers = random_labels(20, 0.6, 1.7, 1);
  const auto jets = jets_at(flow, make_jet_cloud(centers, 1.0 / 64), 0.3);
  const TimeField f;
  for (std::size_t p = 0; p < centers.size(); ++p) {
    const PointCoefficients c = coefficients_from_jet(jets[p]);
    const VectorJet U = f.U(0.3, centers[p]);
    const ScalarJet P = f.P(0.3, centers[p]);
    CHECK((op_L(U, c) - laplacian(U)).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(op_M(U, c).norm() == 0.0);
    CHECK((op_G(P, c) - P.grad).norm() == 0.0);
    const ConvectionCoefficients n = convection_coefficients(jets[p].gamma, U.value);
    CHECK((op_N(U, n) - U.grad * U.value).norm() == 0.0);
    CHECK((rhs_F(U, P, c, n) + U.grad * U.value).norm() < 1e-14);
  }
}

TEST_CASE("snapshot coefficients match the jet ones and are rejected by strong operators") {
  const CutoffField z = build_cutoff(kShell, 0.1, 0.3);
  const PrescribedMotion spin = tilted_spin(0.8);
  FlowMap flow(z, kShell, spin, 0.01);
  const auto centers = random_labels(10, 0.8, 1.4, 2);
  const double h = 1.0 / 64;
  const auto jets = jets_at(flow, make_jet_cloud(centers, h), 0.4);
  const LabelCloud mc = make_metric_cloud(centers, h, annulus_domain(Vec3::Zero(), 0.5, 2.0));
  LabelState st = flow.start(mc.labels);
  flow.advance(st, 0.4);
  const TransformSnapshot s = build_snapshot(flow, mc, st);
  for (std::size_t p = 0; p < centers.size(); ++p) {
    const PointCoefficients a = coefficients_from_snapshot(s, p), b = coefficients_from_jet(jets[p]);
    CHECK((a.c1 - b.c1).norm() < 1e-12);
    for (int i = 0; i < 3; ++i) CHECK((a.c2[i] - b.c2[i]).norm() < 1e-10);
    CHECK((a.m1 - b.m1).norm() < 1e-12);
    CHECK((a.m0 - b.m0).norm() < 1e-10);
    CHECK_THROWS_AS(op_L(VectorJet{}, a), Error);
  }
}

TEST_CASE("transformed operators match the chain-rule pull-back at sixth order") {
  const CutoffField z = build_cutoff(kShell, 0.1, 0.3);
  const PrescribedMotion spin = tilted_spin(1.0);
  FlowMap flow(z, kShell, spin, 0.01);
  const auto centers = random_labels(12, 0.75, 1.45, 3);
  const auto e1 = testing::pullback_errors(flow, 0.5, centers, 1.0 / 32, {}, 1.0 / 1024);
  const auto e2 = testing::pullback_errors(flow, 0.5, centers, 1.0 / 64, {}, 1.0 / 1024);
  CHECK(e2.max() < 1e-4);
  CHECK(std::log2(e1.L / e2.L) > 5.5);
  CHECK(std::log2(e1.M / e2.M) > 5.5);
  CHECK(std::log2(e1.N / e2.N) > 5.5);
  CHECK(e2.G < 1e-8);
}

TEST_CASE("weak integrand equals 2 D(u):D(phi) of the push-forwards") {
  // Analytic quadratic map X(y) = y + B(y, y): second derivatives are exact, so the physical
  // gradient of u = grad X U follows from the product rule.
  const double e = 0.15;
  static const double c[3][3][3] = {{{2, 0, 1}, {0, 0, 0}, {1, 0, 0}},
                                    {{0, 1, 0}, {1, 2, 0}, {0, 0, -2}},
                                    {{0, 0, 0}, {0, 0, 1}, {0, 1, 2}}};
  auto gradX = [&](const Vec3& y) {
    Mat3 G = Mat3::Identity();
    for (int m = 0; m < 3; ++m)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G(m, i) += e * c[m][i][j] * y[j];
    return G;
  };
  auto physical_gradient = [&](const VectorJet& U, const Vec3& y) {
    // d/dy_j (X_{m,i} U_i) = e c[m][i][j] U_i + X_{m,i} d_j U_i, then times grad Y.
    const Mat3 G = gradX(y);
    Mat3 D = G * U.grad;
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) D(m, j) += e * c[m][i][j] * U.value[i];
    return Mat3(D * G.inverse());
  };
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  auto random_jet = [&] {
    VectorJet J;
    J.value = Vec3(u(rng), u(rng), u(rng));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) J.grad(i, j) = u(rng);
    return J;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 y(u(rng), u(rng), u(rng));
    const MetricData md = metric_and_christoffel(gradX, y, 1.0 / 64);
    const VectorJet U = random_jet(), psi = random_jet();
    const Mat3 du = physical_gradient(U, y), dp = physical_gradient(psi, y);
    const double ref = 0.5 * ((du + du.transpose()).cwiseProduct(dp + dp.transpose())).sum();
    CHECK(std::abs(weak_GL_integrand(U, psi, md.g, md.ginv, md.gamma) - ref) < 1e-9);
    const Mat3 Yg = gradX(y).inverse();
    CHECK((pushforward_gradient(U, gradX(y), Yg, md.gamma) - du).norm() < 1e-9);
  }
  // Identity map: plain symmetric-gradient pairing.
  const VectorJet U = random_jet(), psi = random_jet();
  const double flat = 0.5 * ((U.grad + U.grad.transpose()).cwiseProduct(psi.grad + psi.grad.transpose())).sum();
  CHECK(weak_GL_integrand(U, psi, Mat3::Identity(), Mat3::Identity(), zero_christoffel()) ==
        doctest::Approx(flat).epsilon(1e-14));
}

TEST_CASE("pressure cancellation identity") {
  const CutoffField z = build_cutoff(kShell, 0.1, 0.3);
  PrescribedMotion wob(
      [](double t) -> Vec3 { return Vec3(0.05 * std::sin(t), 0.04 * (1 - std::cos(t)), 0.0); },
      [](double t) -> Vec3 { return Vec3(0.05 * std::cos(t), 0.04 * std::sin(t), 0.0); },
      [](double t) -> Vec3 { return Vec3(0.3 * std::sin(t), 0.2, 0.8 * std::cos(t)); });
  const auto centers = random_labels(40, 0.5, 2.0, 6);
  const LabelCloud cloud = make_metric_cloud(centers, 1.0 / 64, annulus_domain(Vec3::Zero(), 0.5, 2.0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> gradP;
  for (std::size_t p = 0; p < centers.size(); ++p) gradP.emplace_back(u(rng), u(rng), u(rng));

  auto residual = [&](double dt, bool exact) {
    FlowMap flow(z, kShell, wob, dt / 4);
    LabelState st = flow.start(cloud.labels);
    std::vector<TransformSnapshot> seq;
    for (int j = -1; j <= 1; ++j) {
      flow.advance(st, 0.5 + j * dt);
      seq.push_back(build_snapshot(flow, cloud, st));
    }
    const TransformSnapshot& mid = seq[1];
    const MetricRates r =
        exact ? exact_metric_rates(mid) : fd_metric_rates(coefficient_time_derivatives({&seq[0], &seq[1], &seq[2]}, 1));
    return pressure_cancellation(gradP, mid.g, mid.ginv, r);
  };
  CHECK(residual(0.02, true) < 1e-12);
  const double r1 = residual(0.04, false), r2 = residual(0.02, false);
  CHECK(r1 / r2 > 3.0);
  CHECK(r1 / r2 < 5.0);
}

TEST_CASE("Leibniz rule for the first-order coefficient operators") {
  const CutoffField z = build_cutoff(kShell, 0.1, 0.3);
  const PrescribedMotion spin = tilted_spin(0.8);
  FlowMap flow(z, kShell, spin, 0.0025);
  const auto centers = random_labels(10, 0.8, 1.4, 8);
  const LabelCloud cloud = make_jet_cloud(centers, 1.0 / 64);
  const TimeField f;
  const double t = 0.5;

  auto residual = [&](double dt) {
    const auto jm = jets_at(flow, cloud, t - dt), j0 = jets_at(flow, cloud, t), jp = jets_at(flow, cloud, t + dt);
    double worst = 0.0;
    for (std::size_t p = 0; p < centers.size(); ++p) {
      const Vec3& y = centers[p];
      const PointCoefficients cm = coefficients_from_jet(jm[p]), c0 = coefficients_from_jet(j0[p]),
                              cp = coefficients_from_jet(jp[p]);
      PointCoefficients c1 = cp, neg = cm;
      neg *= -1.0;
      c1 += neg;
      c1 *= 1.0 / (2 * dt);
      const VectorJet Um = f.U(t - dt, y), U0 = f.U(t, y), Up = f.U(t + dt, y), Ut = f.U(t, y, 1);
      const ScalarJet Pm = f.P(t - dt, y), P0 = f.P(t, y), Pp = f.P(t + dt, y), Pt = f.P(t, y, 1);
      const auto n = [&](const GeometryJet& g, const VectorJet& U) { return convection_coefficients(g.gamma, U.value); };
      // N depends on U twice; its derivative coefficients use the product rule in the caller.
      ConvectionCoefficients nm = n(jm[p], U0), np = n(jp[p], U0);
      ConvectionCoefficients n1 = np;
      nm *= -1.0;
      n1 += nm;
      n1 *= 1.0 / (2 * dt);
      const Vec3 rL = (op_L(Up, cp) - op_L(Um, cm)) / (2 * dt) - op_L(Ut, c0) - op_L(U0, c1);
      const Vec3 rM = (op_M(Up, cp) - op_M(Um, cm)) / (2 * dt) - op_M(Ut, c0) - op_M(U0, c1);
      const Vec3 rG = (op_G(Pp, cp) - op_G(Pm, cm)) / (2 * dt) - op_G(Pt, c0) - op_G(P0, c1);
      const Vec3 rN = (op_N(Up, n(jp[p], U0)) - op_N(Um, n(jm[p], U0))) / (2 * dt) - op_N(Ut, n(j0[p], U0)) -
                      op_N(U0, n1);
      worst = std::max({worst, rL.norm(), rM.norm(), rG.norm(), rN.norm()});

      // op_F_l at l = 1 is the sum of the coefficient-derivative terms.
      const Vec3 F1 = op_F_l(1, {c0, c1}, {n(j0[p], U0), n1}, {U0}, {P0});
      const Vec3 manual = op_L(U0, c1) - op_M(U0, c1) - op_N(U0, n1) - op_G(P0, c1);
      CHECK((F1 - manual).norm() < 1e-12);
    }
    return worst;
  };
  const double r1 = residual(0.04), r2 = residual(0.02);
  CHECK(r1 / r2 > 3.0);
  CHECK(r1 / r2 < 5.0);
}

TEST_CASE("rigid right-hand sides and their derivative terms") {
  const Vec3 A(0.1, -0.2, 0.3), Om(0.4, 0.1, -0.5), Ot(0.2, 0.7, 0.1);
  const Mat3 J = Mat3::Identity() * (8.0 * M_PI / 15.0);
  const auto [G, H] = rhs_G_H(A, Om, Ot, J);
  CHECK((G + Ot.cross(A)).norm() < 1e-15);
  CHECK((H + Ot.cross(J * Om)).norm() < 1e-15);
  const std::vector<Vec3> dOt{Ot, Vec3(1, 0, 0), Vec3(0, 2, 0)}, dA{A, Vec3(0, 0, 1)}, dOm{Om, Vec3(1, 1, 0)};
  const auto [G2, H2] = rhs_G_H_l(2, dOt, dA, dOm, J);
  const Vec3 G2ref = -(dOt[2].cross(dA[0]) + 2.0 * dOt[1].cross(dA[1]));
  const Vec3 H2ref = -(dOt[2].cross(J * dOm[0]) + 2.0 * dOt[1].cross(J * dOm[1]));
  CHECK((G2 - G2ref).norm() < 1e-14);
  CHECK((H2 - H2ref).norm() < 1e-14);
  CHECK_THROWS_AS(rhs_G_H_l(0, dOt, dA, dOm, J), Error);
  CHECK_THROWS_AS(rhs_G_H_l(3, dOt, dA, dOm, J), Error);
}
