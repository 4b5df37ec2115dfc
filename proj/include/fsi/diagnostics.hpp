#pragma once

#include <vector>

#include "fsi/solver.hpp"

namespace fsi {

struct EnergyRow {
  double t, energy, dissipation, slack;
};

/// slack(t_n) = E(0) - E(t_n) - sum_{k <= n} dt_k D(t_k), with D = int 2|D u|^2 at the implicit time level.
std::vector<EnergyRow> energy_report(const Trajectory& traj);

/// (int_0^T (int |u|^s)^{r/s} dt)^{1/r} with |u|^2 = U . g U on the reference mesh (det grad X = 1),
/// rectangle rule in time at the implicit levels, the given tetrahedral rule in space.
double prodi_serrin(const Problem& problem, const Trajectory& traj, double s, double r, const TetRule& rule,
                    double dt_ode);

/// Resolutions used by the monitor: the degree-5 rule on one red refinement (|u|^s has degree 2s
/// for a quadratic field, which a single degree-5 rule under-resolves) and, as a check, on two.
const TetRule& prodi_serrin_rule();
const TetRule& prodi_serrin_check_rule();

struct MomentumRow {
  double t;
  Vec3 r_a, r_omega;
};
/// Weak rigid-test-function residuals at interior steps: centered rate of the weighted momentum plus
/// the stored weak force terms. The scheme's own backward rate makes this vanish; the centered rate
/// exposes the first-order time error.
std::vector<MomentumRow> momentum_residual(const Problem& problem, const Trajectory& traj);

/// max_n ||u_lin - u_nl|| (weighted mass norm) after re-solving the linear problem with U~ := the solution.
double uniqueness_gap(const Problem& problem, const Trajectory& traj, const SolverConfig& config);

/// Residuals FD_t(op U) - op(FD_t U) - op_1 U with op_1 from central coefficient differences of step eta,
/// for a fixed smooth probe field, max over the centers. Order l = 1.
struct LeibnizResidual {
  double L = 0, M = 0, N = 0, G = 0;
  double max() const { return std::max(std::max(L, M), std::max(N, G)); }
};
LeibnizResidual leibniz_residual(const Problem& problem, const Motion& motion, const std::vector<Vec3>& centers,
                                 double t, double eta, double h, double dt_ode, int l = 1);

/// Pressure cancellation max_p |G dt(G^{-1}) grad P + dt(G) G^{-1} grad P| at time t for pressure gradients
/// given at the points. eta = 0 uses exact metric rates; eta > 0 uses central difference caches.
double pressure_cancellation_residual(const Problem& problem, const Motion& motion, const std::vector<Vec3>& points,
                                      const std::vector<Vec3>& gradP, double t, double eta, double h,
                                      double dt_ode);

struct HypothesisRow {
  double t, gap, da_dt, domega_dt;
  bool gap_ok;
};
struct HypothesisReport {
  std::vector<HypothesisRow> rows;
  double min_gap = 0, max_da_dt = 0, max_domega_dt = 0;
  bool exponents_admissible = false;
  long first_violation = -1;  // step index of the first gap below delta
};
HypothesisReport hypothesis_monitor(const Problem& problem, const Trajectory& traj, double delta, double s, double r);

/// Mapped-back traces: max |u| on the outer wall and max |u - a - omega x (x - q)| on the body
/// at boundary face quadrature points, per step.
struct TraceRow {
  double t, outer, body;
};
std::vector<TraceRow> boundary_traces(const Problem& problem, const Trajectory& traj, double dt_ode);

/// Every quantity of a run in one place.
struct DiagnosticsReport {
  std::vector<EnergyRow> energy;
  std::vector<MomentumRow> momentum;
  HypothesisReport hypothesis;
  std::vector<TraceRow> traces;
  double prodi_serrin = 0.0, prodi_serrin_refined = 0.0;  // standard and check resolutions
  double uniqueness_gap = 0.0;
  double max_divergence = 0.0;
  double min_slack_relative = 0.0;  // min slack / E(0) (0 when E(0) = 0)
  bool energy_decreasing = true;
};
DiagnosticsReport run_diagnostics(const Problem& problem, const Trajectory& traj, const SolverConfig& config,
                                  bool with_uniqueness = true);

}  // namespace fsi
