#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fsi/diagnostics.hpp"

using namespace fsi;

namespace {

struct Setup {
  CoupledSpace space{build_shell_mesh(0.5, 2.0, 0), BodyCoupling::Rigid};
  Problem pb;
  Setup() {
    pb.space = &space;
    pb.J = Mat3::Identity() * (8 * std::numbers::pi / 15 * std::pow(0.5, 5));
  }
  Trajectory run(double T, double dt, const Vec3& omega, const Vec3& A = Vec3::Zero()) const {
    SolverConfig c;
    c.dt = dt;
    c.T = T;
    return solve_nonlinear(pb, initial_state(pb, [](const Vec3&) -> Vec3 { return Vec3::Zero(); }, A, omega), c);
  }
};

PrescribedMotion smooth_motion() {
  return PrescribedMotion(
      [](double t) { return Vec3(0.05 * std::sin(t), 0.04 * (1 - std::cos(t)), 0.02 * std::sin(2 * t)); },
      [](double t) { return Vec3(0.05 * std::cos(t), 0.04 * std::sin(t), 0.04 * std::cos(2 * t)); },
      [](double t) { return Vec3(0.3 * std::sin(t), 0.2, 0.8 * std::cos(t)); });
}

const std::vector<Vec3> kCenters{Vec3(0.8, 0.1, 0.2), Vec3(-0.3, 1.2, 0.1), Vec3(0.2, -0.4, -1.1)};

}  // namespace

TEST_CASE("energy report accumulates dissipation") {
  Trajectory tr(0.0, Vec3::Zero());
  for (int n = 0; n < 3; ++n) {
    StepRecord s;
    s.t = 0.1 * n;
    s.dt = n ? 0.1 : 0.0;
    s.energy = 1.0 - 0.2 * n;
    s.dissipation = 1.5;
    tr.steps.push_back(s);
  }
  const auto rows = energy_report(tr);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].slack == doctest::Approx(0.0));
  CHECK(rows[1].slack == doctest::Approx(0.2 - 0.15));
  CHECK(rows[2].slack == doctest::Approx(0.4 - 0.3));
}

TEST_CASE("integrability norm of a steady field at rest") {
  Setup S;
  Trajectory tr(0.0, Vec3::Zero());
  const Vec3 e(0.6, 0.0, 0.8);
  const Eigen::VectorXd x = S.space.interpolate([&](const Vec3&) -> Vec3 { return e; }, e, Vec3::Zero());
  for (int n = 0; n <= 4; ++n) {
    StepRecord s;
    s.t = 0.25 * n;
    s.dt = n ? 0.25 : 0.0;
    tr.steps.push_back(s);
    tr.states.push_back(x);
    if (n) tr.motion.push(s.t, Vec3::Zero(), Vec3::Zero());
  }
  // The field drops to zero on the outer wall, so integrate |u|^s of the interpolant directly.
  const TetRule& rule = tet_rule_degree5();
  const auto nodal = S.space.nodal_velocity(x);
  auto space_integral = [&](double p) {
    double acc = 0.0;
    for (std::size_t el = 0; el < S.space.num_elements(); ++el)
      for (std::size_t q = 0; q < rule.size(); ++q)
        acc += 6.0 * S.space.geometry(el).volume * rule.weight[q] *
               std::pow(eval_velocity(S.space, nodal, el, rule.bary[q]).first.norm(), p);
    return acc;
  };
  // Steady on [0, 1]: the time integral is the integrand itself.
  const double i4 = std::pow(space_integral(4.0), 1.0 / 4.0), i6 = std::pow(space_integral(6.0), 1.0 / 6.0);
  CHECK(prodi_serrin(S.pb, tr, 4.0, 8.0, rule, 1e-2) == doctest::Approx(i4).epsilon(1e-10));
  CHECK(prodi_serrin(S.pb, tr, 6.0, 4.0, rule, 1e-2) == doctest::Approx(i6).epsilon(1e-10));
  CHECK_THROWS_AS(prodi_serrin(S.pb, tr, 4.0, 4.0, rule, 1e-2), Error);
  for (auto& st : tr.states) st *= 3.0;
  CHECK(prodi_serrin(S.pb, tr, 4.0, 8.0, rule, 1e-2) == doctest::Approx(3 * i4).epsilon(1e-10));
  // Halving the horizon scales the norm by 2^{-1/r}.
  tr.states.resize(3);
  tr.steps.resize(3);
  CHECK(prodi_serrin(S.pb, tr, 4.0, 8.0, rule, 1e-2) == doctest::Approx(3 * i4 * std::pow(0.5, 1.0 / 8)).epsilon(1e-10));
}

TEST_CASE("mapped-back traces match the wall and the rigid body") {
  Setup S;
  S.pb.body_force = Vec3(0.3, 0.0, 0.0);
  const Trajectory tr = S.run(0.04, 1e-2, Vec3(0.2, 0.0, 1.0), Vec3(0.1, 0.0, 0.0));
  for (const auto& row : boundary_traces(S.pb, tr, 1e-2)) {
    CHECK(row.outer == 0.0);
    CHECK(row.body < 1e-10);
  }
}

TEST_CASE("momentum residual shrinks with the time step") {
  Setup S;
  auto at = [&](double dt) {
    const Trajectory tr = S.run(0.03, dt, Vec3(0, 0, 1), Vec3(0.1, 0, 0));
    for (const auto& m : momentum_residual(S.pb, tr))
      if (std::abs(m.t - 0.02) < 1e-9) return m.r_a.norm() + m.r_omega.norm();
    FAIL("missing row");
    return 0.0;
  };
  const double coarse = at(1e-2), fine = at(5e-3);
  CHECK(fine < 0.6 * coarse);
}

TEST_CASE("Leibniz residuals are second order in the stencil step") {
  Setup S;
  const PrescribedMotion m = smooth_motion();
  const LeibnizResidual a = leibniz_residual(S.pb, m, kCenters, 0.5, 0.04, 1.0 / 64, 1e-3);
  const LeibnizResidual b = leibniz_residual(S.pb, m, kCenters, 0.5, 0.02, 1.0 / 64, 1e-3);
  CHECK(a.L / b.L == doctest::Approx(4.0).epsilon(0.1));
  CHECK(a.M / b.M == doctest::Approx(4.0).epsilon(0.1));
  CHECK(a.N / b.N == doctest::Approx(4.0).epsilon(0.1));
  CHECK(a.G / b.G == doctest::Approx(4.0).epsilon(0.1));
  CHECK_THROWS_AS(leibniz_residual(S.pb, m, kCenters, 0.5, 0.02, 1.0 / 64, 1e-3, 2), Error);
}

TEST_CASE("pressure terms cancel exactly and to second order with difference caches") {
  Setup S;
  const PrescribedMotion m = smooth_motion();
  const std::vector<Vec3> g{Vec3(0.3, -0.7, 0.5), Vec3(1.0, 0.2, 0.0), Vec3(-0.4, 0.1, 0.9)};
  CHECK(pressure_cancellation_residual(S.pb, m, kCenters, g, 0.5, 0.0, 1.0 / 64, 1e-3) < 1e-12);
  const double a = pressure_cancellation_residual(S.pb, m, kCenters, g, 0.5, 0.04, 1.0 / 64, 1e-3);
  const double b = pressure_cancellation_residual(S.pb, m, kCenters, g, 0.5, 0.02, 1.0 / 64, 1e-3);
  CHECK(a / b == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("hypothesis monitor flags the gap and the exponents") {
  Setup S;
  S.pb.body_force = Vec3(0.0, 0.0, -2.0);
  const Trajectory tr = S.run(0.03, 1e-2, Vec3::Zero());
  const HypothesisReport ok = hypothesis_monitor(S.pb, tr, 0.1, 4.0, 8.0);
  CHECK(ok.exponents_admissible);
  CHECK(ok.first_violation == -1);
  CHECK(ok.min_gap < 1.5);
  CHECK(ok.max_da_dt > 0.0);
  const HypothesisReport bad = hypothesis_monitor(S.pb, tr, ok.rows[1].gap + 1e-12, 5.0, 8.0);
  CHECK(!bad.exponents_admissible);
  CHECK(bad.first_violation == 1);
}

TEST_CASE("full diagnostics report on a short run") {
  Setup S;
  SolverConfig c;
  c.T = 0.03;
  const Trajectory tr = S.run(0.03, 1e-2, Vec3(0, 0, 1));
  const DiagnosticsReport r = run_diagnostics(S.pb, tr, c);
  CHECK(r.energy.size() == tr.size());
  CHECK(r.traces.size() == tr.size());
  CHECK(r.momentum.size() == tr.size() - 2);
  CHECK(r.energy_decreasing);
  CHECK(r.min_slack_relative >= -1e-12);
  CHECK(r.max_divergence < 1e-10);
  CHECK(r.uniqueness_gap < 1e-8);
  CHECK(r.prodi_serrin > 0.0);
  CHECK(r.prodi_serrin_refined == doctest::Approx(r.prodi_serrin).epsilon(0.01));
}
