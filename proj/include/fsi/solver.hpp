#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "fsi/assembly.hpp"
#include "fsi/rigid_motion.hpp"
#include "fsi/transform.hpp"

namespace fsi {

struct SolverConfig {
  double dt = 1e-2;
  double T = 1.0;
  double fp_tol = 1e-10;       // relative increment of the inner fixed point
  int max_fp_iterations = 60;
  double linear_tol = 1e-11;   // relative residual of each saddle solve
  double picard_tol = 1e-10;   // relative increment of the outer Picard loop
  int max_picard_iterations = 40;
  double split_threshold = 1e3;  // bound on ||U~||_{L^r L^s} over one window
  double s = 4.0, r = 8.0;       // integrability exponents, 3/s + 2/r = 1
  double gap_delta = 0.1;        // abort when the body-wall distance drops below this
  double fd_h = 1.0 / 64;        // label stencil step for metric derivatives
  double dt_ode = 0.0;           // flow RK4 step, 0 means dt
  int max_bisection = 12;

  /// Throws InvalidInput on non-positive tolerances or inadmissible exponents.
  void validate() const;
};

/// Checks 3/s + 2/r = 1 with s in (3, inf); throws InvalidInput otherwise.
void check_exponents(double s, double r);

/// Physical setup shared by every solve.
struct Problem {
  const CoupledSpace* space = nullptr;  // rigid coupling, mesh centered at q0
  ShellGeometry shell;
  double delta_in = 0.1, delta_out = 0.3;
  Mat3 J = Mat3::Identity();            // body-frame inertia
  Vec3 body_force = Vec3::Zero();       // constant physical force on the body

  CutoffField cutoff() const { return build_cutoff(shell, delta_in, delta_out); }
  /// Body-wall distance for a concentric ball-in-ball at center q.
  double gap(const Vec3& q) const { return shell.r_out - shell.r_in - (q - shell.center).norm(); }
};

/// Factorized implicit Stokes-with-rigid-body operator (M/dt + K with the saddle blocks), cached per dt.
class StokesRigidSystem {
 public:
  StokesRigidSystem(const CoupledSpace& space, const Mat3& J);

  const CoupledSpace& space() const { return space_; }
  const SpMat& mass() const { return M_; }
  const StokesBlock& stokes() const { return st_; }

  /// Solves (M/dt + K) x + B^T p = M/dt prev + load, B x = 0, mean(p) = 0.
  Eigen::VectorXd solve(double dt, const Eigen::VectorXd& load, const Eigen::VectorXd& prev, double linear_tol);
  /// Velocity M-norm of a full-size vector.
  double norm(const Eigen::VectorXd& x) const;

 private:
  const CoupledSpace& space_;
  SpMat M_;
  StokesBlock st_;
  std::map<double, std::unique_ptr<Eigen::SparseLU<SpMat>>> lu_;
  std::map<double, SpMat> A_;
};

/// One implicit step of the linear problem with assembled right-hand side (weak F*, G*, H*).
Eigen::VectorXd stokes_rigid_solve(StokesRigidSystem& sys, const Eigen::VectorXd& rhs, double dt,
                                   const Eigen::VectorXd& prev, double linear_tol);

/// One implicit step inside a fixed-point window: C = combined transformed terms at the step's end.
struct WindowStep {
  double dt = 0.0;
  SpMat C;
  Eigen::VectorXd load;  // body force and other explicit terms, full size
};

/// Outcome of the fixed point on one window.
struct FixedPointResult {
  std::vector<Eigen::VectorXd> x;   // one state per window step
  int iterations = 0;
  double mu_hat = 0.0;              // last measured contraction factor (0 when undefined)
  std::vector<double> increments;   // relative increments per iterate
  std::vector<double> mu_log;
};

/// Thrown when the contraction fails; the caller splits the window.
struct ContractionFailure : Error {
  explicit ContractionFailure(const std::string& m) : Error(ErrorKind::SolverFailure, m) {}
};

/// Fixed point over a window of implicit steps. Each sweep solves, step by step,
/// (M/dt + K) x_n^{k+1} + B^T p_n^{k+1} = M/dt x_{n-1}^{k+1} + C_n x_n^k + load_n,
/// until max_n ||x_n^{k+1} - x_n^k|| <= fp_tol max_n ||x_n^{k+1}|| in the weighted mass norm.
FixedPointResult fixed_point_window(StokesRigidSystem& sys, const std::vector<WindowStep>& steps,
                                    const Eigen::VectorXd& x_start, const SolverConfig& config);

/// Record of one accepted step (index 0 describes the initial state).
struct StepRecord {
  double t = 0.0, dt = 0.0;
  RigidState body;
  int picard_iterations = 0, fp_iterations = 0, bisection_depth = 0;
  double mu_hat = 0.0;
  std::vector<double> fp_increments, mu_log;  // from the last Picard iterate
  double energy = 0.0, dissipation = 0.0, divergence = 0.0, gap = 0.0;
  double wall_seconds = 0.0;
  /// Weak residual K x + B^T p - C x - f on the rigid rows (A then Omega).
  Eigen::Matrix<double, 6, 1> rigid_rows = Eigen::Matrix<double, 6, 1>::Zero();
};

struct Trajectory {
  Trajectory(double t0, const Vec3& q0) : motion(t0, q0) {}
  std::vector<Eigen::VectorXd> states;  // full reduced vectors
  std::vector<StepRecord> steps;
  SegmentMotion motion;                 // piecewise-constant (a, omega) between steps
  std::size_t size() const { return states.size(); }
};

/// Label cloud on the quadrature points of the space, advanced along a motion.
class TransformSweep {
 public:
  TransformSweep(const Problem& problem, const Motion& motion, const TetRule& rule, double h, double dt_ode,
                 double t0 = 0.0);
  /// Arbitrary reference points; h = 0 skips the Christoffel symbols.
  TransformSweep(const Problem& problem, const Motion& motion, const std::vector<Vec3>& points, double h,
                 double dt_ode, double t0 = 0.0);
  /// Snapshot at t >= current time (labels advance monotonically).
  TransformSnapshot at(double t);
  const LabelState& state() const { return state_; }
  void reset(const LabelState& s) { state_ = s; }
  const LabelCloud& cloud() const { return cloud_; }
  const FlowMap& flow() const { return flow_; }

 private:
  FlowMap flow_;
  LabelCloud cloud_;
  LabelState state_;
};

/// Energy 1/2 (int U . g U + |A|^2 + Omega . J Omega) and dissipation int 2|D u|^2 of the physical field.
std::pair<double, double> energy_and_dissipation(const Problem& problem, const TransformSnapshot& td,
                                                 const Eigen::VectorXd& x);

/// Initial state: interior velocity from u0 (reference frame) and rigid unknowns (A0, Omega0),
/// projected onto the discretely divergence-free subspace in the weighted mass norm.
Eigen::VectorXd initial_state(const Problem& problem, const std::function<Vec3(const Vec3&)>& u0, const Vec3& A0,
                              const Vec3& Omega0);

/// max-norm of B x.
double divergence_residual(const CoupledSpace& space, const StokesBlock& st, const Eigen::VectorXd& x);

/// Called with the trajectory so far after the initial state and after every accepted step.
using StepObserver = std::function<void(const Trajectory&)>;

/// Nonlinear moving-body problem on [0, T].
Trajectory solve_nonlinear(const Problem& problem, const Eigen::VectorXd& x0, const SolverConfig& config,
                           const StepObserver& observe = {});

/// Recomputes energy, dissipation, divergence, gap and rigid rows of every record from the stored
/// states and bodies (for trajectories read back from disk; the coupling uses each state itself).
void refresh_records(const Problem& problem, Trajectory& traj, const SolverConfig& config);

/// Linear problem with prescribed motion and linearization states at the same time stamps as `base`.
/// Windows hold `window_steps` steps (0 means all); a window whose contraction fails, or whose
/// ||U~||_{L^r L^s} exceeds the split threshold, is bisected.
Trajectory solve_linearized(const Problem& problem, const Trajectory& base,
                            const std::vector<Eigen::VectorXd>& U_tilde, const SolverConfig& config,
                            std::size_t window_steps = 0);

/// Candidate for t d/dt (U, P, A, Omega) with vanishing initial data (order l = 1 only).
struct DerivativeResult {
  std::vector<Eigen::VectorXd> states;  // Z_n, aligned with base states
  /// max over n >= 1 of ||Z_n / t_n - (x_n - x_{n-1}) / dt_n||_M / max ||(x_n - x_{n-1}) / dt_n||_M
  double fd_consistency = 0.0;
};
DerivativeResult solve_time_derivative(int l, const Problem& problem, const Trajectory& base,
                                       const SolverConfig& config);

}  // namespace fsi
