#include "fsi/diagnostics.hpp"

#include <cmath>
#include <map>

#include "fsi/operators.hpp"

namespace fsi {

std::vector<EnergyRow> energy_report(const Trajectory& traj) {
  std::vector<EnergyRow> out;
  if (traj.steps.empty()) return out;
  const double E0 = traj.steps[0].energy;
  double dissipated = 0.0;
  for (std::size_t n = 0; n < traj.steps.size(); ++n) {
    const StepRecord& s = traj.steps[n];
    if (n > 0) dissipated += s.dt * s.dissipation;
    out.push_back({s.t, s.energy, s.dissipation, E0 - s.energy - dissipated});
  }
  return out;
}

double prodi_serrin(const Problem& pb, const Trajectory& traj, double s, double r, const TetRule& rule, double dt_ode) {
  check_exponents(s, r);
  const CoupledSpace& sp = *pb.space;
  TransformSweep sweep(pb, traj.motion, rule, 0.0, dt_ode);
  double acc = 0.0;
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const TransformSnapshot td = sweep.at(traj.steps[n].t);
    const auto nodal = sp.nodal_velocity(traj.states[n]);
    double in = 0.0;
    for (std::size_t e = 0; e < sp.num_elements(); ++e)
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 U = eval_velocity(sp, nodal, e, rule.bary[q]).first;
        const double u2 = std::max(0.0, U.dot(td.g[e * rule.size() + q] * U));
        in += 6.0 * sp.geometry(e).volume * rule.weight[q] * std::pow(u2, 0.5 * s);
      }
    acc += traj.steps[n].dt * std::pow(in, r / s);
  }
  return std::pow(acc, 1.0 / r);
}

const TetRule& prodi_serrin_rule() { return tet_rule_degree5_refined(); }

const TetRule& prodi_serrin_check_rule() {
  static const TetRule rule = refine_rule(tet_rule_degree5(), 2);
  return rule;
}

std::vector<MomentumRow> momentum_residual(const Problem& pb, const Trajectory& traj) {
  const CoupledSpace& s = *pb.space;
  const SpMat M = assemble_weighted_mass(s, pb.J);
  const int nv = s.num_velocity(), ro = s.rigid_offset();
  std::vector<MomentumRow> out;
  for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
    const double span = traj.steps[n + 1].t - traj.steps[n - 1].t;
    const Eigen::VectorXd rate = (traj.states[n + 1] - traj.states[n - 1]).head(nv) / span;
    const Eigen::VectorXd mr = M * rate;
    const Eigen::Matrix<double, 6, 1> r = mr.segment<6>(ro) + traj.steps[n].rigid_rows;
    out.push_back({traj.steps[n].t, r.head<3>(), r.tail<3>()});
  }
  return out;
}

double uniqueness_gap(const Problem& pb, const Trajectory& traj, const SolverConfig& cfg) {
  const Trajectory lin = solve_linearized(pb, traj, traj.states, cfg);
  const SpMat M = assemble_weighted_mass(*pb.space, pb.J);
  const int nv = pb.space->num_velocity();
  double gap = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const Eigen::VectorXd d = (lin.states[n] - traj.states[n]).head(nv);
    gap = std::max(gap, std::sqrt(std::max(0.0, d.dot(M * d))));
  }
  return gap;
}

namespace {

// Smooth time-dependent probe field for the Leibniz measurement.
struct Probe {
  std::array<Vec3, 3> k{Vec3(0.9, -0.5, 0.4), Vec3(-0.3, 0.8, 0.6), Vec3(0.5, 0.2, -1.0)};
  Vec3 nu{0.7, -1.1, 0.4}, phi{0.1, 0.5, -0.7};
  Vec3 kp{0.4, 0.9, -0.6};
  double nup = 0.8;

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

TransformSnapshot snapshot_at(const FlowMap& flow, const LabelCloud& cloud, double t) {
  LabelState st = flow.start(cloud.labels);
  flow.advance(st, t);
  return build_snapshot(flow, cloud, st);
}

}  // namespace

LeibnizResidual leibniz_residual(const Problem& pb, const Motion& motion, const std::vector<Vec3>& centers, double t,
                                 double eta, double h, double dt_ode, int l) {
  if (l != 1) throw Error(ErrorKind::InvalidInput, "Leibniz residual: only order 1 is cached");
  require(eta > 0.0 && t - eta >= 0.0, "Leibniz residual: need 0 < eta <= t");
  const FlowMap flow(pb.cutoff(), pb.shell, motion, dt_ode);
  const LabelCloud cloud = make_jet_cloud(centers, h);
  const auto jm = jets_at(flow, cloud, t - eta), j0 = jets_at(flow, cloud, t), jp = jets_at(flow, cloud, t + eta);
  const Probe f;
  LeibnizResidual out;
  for (std::size_t p = 0; p < centers.size(); ++p) {
    const Vec3& y = centers[p];
    const PointCoefficients cm = coefficients_from_jet(jm[p]), c0 = coefficients_from_jet(j0[p]),
                            cp = coefficients_from_jet(jp[p]);
    PointCoefficients c1 = cp, neg = cm;
    neg *= -1.0;
    c1 += neg;
    c1 *= 1.0 / (2 * eta);
    const VectorJet Um = f.U(t - eta, y), U0 = f.U(t, y), Up = f.U(t + eta, y), Ut = f.U(t, y, 1);
    const ScalarJet Pm = f.P(t - eta, y), P0 = f.P(t, y), Pp = f.P(t + eta, y), Pt = f.P(t, y, 1);
    // The linearization field is held at U(t) so that N differentiates through its coefficients only.
    const auto conv = [&](const GeometryJet& g) { return convection_coefficients(g.gamma, U0.value); };
    ConvectionCoefficients n1 = conv(jp[p]), nm = conv(jm[p]);
    nm *= -1.0;
    n1 += nm;
    n1 *= 1.0 / (2 * eta);
    const double rL = ((op_L(Up, cp) - op_L(Um, cm)) / (2 * eta) - op_L(Ut, c0) - op_L(U0, c1)).norm();
    const double rM = ((op_M(Up, cp) - op_M(Um, cm)) / (2 * eta) - op_M(Ut, c0) - op_M(U0, c1)).norm();
    const double rN = ((op_N(Up, conv(jp[p])) - op_N(Um, conv(jm[p]))) / (2 * eta) - op_N(Ut, conv(j0[p])) -
                       op_N(U0, n1))
                          .norm();
    const double rG = ((op_G(Pp, cp) - op_G(Pm, cm)) / (2 * eta) - op_G(Pt, c0) - op_G(P0, c1)).norm();
    out.L = std::max(out.L, rL);
    out.M = std::max(out.M, rM);
    out.N = std::max(out.N, rN);
    out.G = std::max(out.G, rG);
  }
  return out;
}

double pressure_cancellation_residual(const Problem& pb, const Motion& motion, const std::vector<Vec3>& points,
                                      const std::vector<Vec3>& gradP, double t, double eta, double h, double dt_ode) {
  require(points.size() == gradP.size(), "pressure cancellation: one gradient per point");
  const FlowMap flow(pb.cutoff(), pb.shell, motion, dt_ode);
  const LabelCloud cloud = make_metric_cloud(
      points, h, annulus_domain(pb.shell.center, pb.space->mesh().body_inscribed_radius(), pb.shell.r_out));
  const TransformSnapshot s0 = snapshot_at(flow, cloud, t);
  if (eta == 0.0) return pressure_cancellation(gradP, s0.g, s0.ginv, exact_metric_rates(s0));
  require(eta > 0.0 && t - eta >= 0.0, "pressure cancellation: need 0 < eta <= t");
  const TransformSnapshot sm = snapshot_at(flow, cloud, t - eta), sp = snapshot_at(flow, cloud, t + eta);
  const CoefficientDerivatives d = coefficient_time_derivatives({&sm, &s0, &sp}, 1);
  return pressure_cancellation(gradP, s0.g, s0.ginv, fd_metric_rates(d));
}

HypothesisReport hypothesis_monitor(const Problem& pb, const Trajectory& traj, double delta, double s, double r) {
  HypothesisReport rep;
  try {
    check_exponents(s, r);
    rep.exponents_admissible = true;
  } catch (const Error&) {
    rep.exponents_admissible = false;
  }
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.steps.size(); ++n) {
    const StepRecord& st = traj.steps[n];
    HypothesisRow row{st.t, pb.gap(st.body.q), 0.0, 0.0, true};
    if (n > 0) {
      const StepRecord& pv = traj.steps[n - 1];
      row.da_dt = (st.body.a - pv.body.a).norm() / st.dt;
      row.domega_dt = (st.body.omega - pv.body.omega).norm() / st.dt;
    }
    row.gap_ok = row.gap >= delta;
    if (!row.gap_ok && rep.first_violation < 0) rep.first_violation = static_cast<long>(n);
    rep.min_gap = std::min(rep.min_gap, row.gap);
    rep.max_da_dt = std::max(rep.max_da_dt, row.da_dt);
    rep.max_domega_dt = std::max(rep.max_domega_dt, row.domega_dt);
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<TraceRow> boundary_traces(const Problem& pb, const Trajectory& traj, double dt_ode) {
  const CoupledSpace& s = *pb.space;
  const ShellMesh& m = s.mesh();
  // Face -> (element, local indices of the face vertices).
  std::map<std::array<int, 3>, std::pair<std::size_t, std::array<int, 3>>> owner;
  for (std::size_t e = 0; e < m.tets.size(); ++e)
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> loc{}, key{};
      for (int i = 0, j = 0; i < 4; ++i)
        if (i != skip) {
          loc[j] = i;
          key[j++] = m.tets[e][i];
        }
      std::array<int, 3> sorted = key;
      std::sort(sorted.begin(), sorted.end());
      owner[sorted] = {e, loc};
    }
  struct Sample {
    std::size_t e;
    std::array<double, 4> bary;
    bool body;
  };
  static const double tri[7][3] = {{1, 0, 0},     {0, 1, 0},     {0, 0, 1},          {0.5, 0.5, 0},
                                   {0, 0.5, 0.5}, {0.5, 0, 0.5}, {1. / 3, 1. / 3, 1. / 3}};
  std::vector<Sample> samples;
  std::vector<Vec3> points;
  for (const auto& f : m.boundary) {
    std::array<int, 3> key = f.v;
    std::sort(key.begin(), key.end());
    const auto& [e, loc] = owner.at(key);
    for (const auto& w : tri) {
      std::array<double, 4> b{0, 0, 0, 0};
      for (int j = 0; j < 3; ++j) b[loc[j]] = w[j];
      samples.push_back({e, b, f.tag == BoundaryTag::Body});
      points.push_back(s.map_point(e, b));
    }
  }
  TransformSweep sweep(pb, traj.motion, points, 0.0, dt_ode);
  std::vector<TraceRow> out;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const TransformSnapshot td = sweep.at(traj.steps[n].t);
    const auto nodal = s.nodal_velocity(traj.states[n]);
    const RigidState& b = traj.steps[n].body;
    TraceRow row{traj.steps[n].t, 0.0, 0.0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Vec3 U = eval_velocity(s, nodal, samples[i].e, samples[i].bary).first;
      const Vec3 u = td.gradX[i] * U;
      if (samples[i].body)
        row.body = std::max(row.body, (u - b.a - b.omega.cross(td.X[i] - b.q)).norm());
      else
        row.outer = std::max(row.outer, u.norm());
    }
    out.push_back(row);
  }
  return out;
}

DiagnosticsReport run_diagnostics(const Problem& pb, const Trajectory& traj, const SolverConfig& cfg,
                                  bool with_uniqueness) {
  DiagnosticsReport r;
  const double dt_ode = cfg.dt_ode > 0 ? cfg.dt_ode : cfg.dt;
  r.energy = energy_report(traj);
  r.momentum = momentum_residual(pb, traj);
  r.hypothesis = hypothesis_monitor(pb, traj, cfg.gap_delta, cfg.s, cfg.r);
  r.traces = boundary_traces(pb, traj, dt_ode);
  r.prodi_serrin = prodi_serrin(pb, traj, cfg.s, cfg.r, prodi_serrin_rule(), dt_ode);
  r.prodi_serrin_refined = prodi_serrin(pb, traj, cfg.s, cfg.r, prodi_serrin_check_rule(), dt_ode);
  if (with_uniqueness) r.uniqueness_gap = uniqueness_gap(pb, traj, cfg);
  const double E0 = r.energy.empty() ? 0.0 : r.energy[0].energy;
  for (std::size_t n = 0; n < r.energy.size(); ++n) {
    if (E0 > 0.0) r.min_slack_relative = std::min(r.min_slack_relative, r.energy[n].slack / E0);
    if (n > 0 && r.energy[n - 1].energy > 0.0 && !(r.energy[n].energy < r.energy[n - 1].energy))
      r.energy_decreasing = false;
  }
  for (const auto& s : traj.steps) r.max_divergence = std::max(r.max_divergence, s.divergence);
  return r;
}

}  // namespace fsi
