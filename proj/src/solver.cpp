#include "fsi/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "fsi/operators.hpp"

namespace fsi {

void check_exponents(double s, double r) {
  if (!(std::isfinite(s) && s > 3.0)) throw Error(ErrorKind::InvalidInput, "exponent s must lie in (3, inf)");
  if (!(std::isfinite(r) && r > 0.0) || std::abs(3.0 / s + 2.0 / r - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "exponents (s, r) = (" << s << ", " << r << ") violate 3/s + 2/r = 1";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
}

void SolverConfig::validate() const {
  require(dt > 0.0 && T > 0.0 && dt <= T, "solver: need 0 < dt <= T");
  require(fp_tol > 0.0 && linear_tol > 0.0 && picard_tol > 0.0, "solver: tolerances must be positive");
  require(max_fp_iterations > 0 && max_picard_iterations > 0, "solver: iteration limits must be positive");
  require(split_threshold > 0.0, "solver: split threshold must be positive");
  require(gap_delta > 0.0, "solver: gap delta must be positive");
  require(fd_h > 0.0 && dt_ode >= 0.0, "solver: stencil step must be positive");
  require(max_bisection >= 0 && max_bisection <= 12, "solver: bisection depth must be in [0, 12]");
  check_exponents(s, r);
}

// ---------------------------------------------------------------------------------------------

StokesRigidSystem::StokesRigidSystem(const CoupledSpace& space, const Mat3& J)
    : space_(space), M_(assemble_weighted_mass(space, J)), st_(assemble_stokes_block(space)) {
  require(space.coupling() == BodyCoupling::Rigid, "solver: the space must couple the rigid body");
}

double StokesRigidSystem::norm(const Eigen::VectorXd& x) const {
  const auto v = x.head(space_.num_velocity());
  return std::sqrt(std::max(0.0, v.dot(M_ * v)));
}

Eigen::VectorXd StokesRigidSystem::solve(double dt, const Eigen::VectorXd& load, const Eigen::VectorXd& prev,
                                         double linear_tol) {
  const int nv = space_.num_velocity();
  auto it = lu_.find(dt);
  if (it == lu_.end()) {
    const SpMat V = M_ * (1.0 / dt) + st_.K;
    SpMat A = saddle_matrix(space_, V, st_);
    auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu->analyzePattern(A);
    lu->factorize(A);
    if (lu->info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "implicit Stokes operator is singular");
    A_.emplace(dt, std::move(A));
    it = lu_.emplace(dt, std::move(lu)).first;
  }
  Eigen::VectorXd b = load;
  b.head(nv) += (M_ * prev.head(nv)) / dt;
  const double bn = b.norm();
  if (bn == 0.0) return Eigen::VectorXd::Zero(space_.size());
  Eigen::VectorXd x = it->second->solve(b);
  const double res = (A_.at(dt) * x - b).norm() / bn;
  if (!(res <= linear_tol)) {
    std::ostringstream os;
    os << "linear solve failed: relative residual " << res << " exceeds " << linear_tol;
    throw Error(ErrorKind::SolverFailure, os.str());
  }
  return x;
}

Eigen::VectorXd stokes_rigid_solve(StokesRigidSystem& sys, const Eigen::VectorXd& rhs, double dt,
                                   const Eigen::VectorXd& prev, double linear_tol) {
  return sys.solve(dt, rhs, prev, linear_tol);
}

FixedPointResult fixed_point_window(StokesRigidSystem& sys, const std::vector<WindowStep>& steps,
                                    const Eigen::VectorXd& x_start, const SolverConfig& cfg) {
  require(!steps.empty(), "fixed point: empty window");
  FixedPointResult r;
  const std::size_t n = steps.size();
  bool linear_only = true;
  for (const auto& s : steps) linear_only = linear_only && s.C.nonZeros() == 0;

  // First sweep: the coupling term uses the state just computed for the previous step.
  r.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd& prev = i == 0 ? x_start : r.x[i - 1];
    Eigen::VectorXd load = steps[i].load;
    if (!linear_only) load += steps[i].C * prev;
    r.x[i] = sys.solve(steps[i].dt, load, prev, cfg.linear_tol);
  }
  r.iterations = 1;
  if (linear_only) {
    r.increments.push_back(0.0);
    return r;
  }
  double last = -1.0;
  int diverging = 0;
  for (int k = 2; k <= cfg.max_fp_iterations; ++k) {
    double inc = 0.0, size = 0.0;
    std::vector<Eigen::VectorXd> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd& prev = i == 0 ? x_start : next[i - 1];
      next[i] = sys.solve(steps[i].dt, steps[i].load + steps[i].C * r.x[i], prev, cfg.linear_tol);
      inc = std::max(inc, sys.norm(next[i] - r.x[i]));
      size = std::max(size, sys.norm(next[i]));
    }
    r.increments.push_back(size > 0.0 ? inc / size : inc);
    // Increments near the linear-solve tolerance measure solver noise, not contraction.
    if (last > 0.0 && inc > 100.0 * cfg.linear_tol * size) {
      const double mu = inc / last;
      r.mu_log.push_back(mu);
      r.mu_hat = mu;
      diverging = mu >= 1.0 ? diverging + 1 : 0;
      if (diverging >= 3) throw ContractionFailure("fixed point: contraction factor >= 1 for 3 iterations");
    }
    r.x = std::move(next);
    r.iterations = k;
    if (inc <= cfg.fp_tol * size) return r;
    last = inc;
  }
  throw ContractionFailure("fixed point: no convergence within the iteration limit");
}

// ---------------------------------------------------------------------------------------------

TransformSweep::TransformSweep(const Problem& pb, const Motion& motion, const TetRule& rule, double h, double dt_ode,
                               double t0)
    : TransformSweep(pb, motion, quadrature_points(*pb.space, rule), h, dt_ode, t0) {}

TransformSweep::TransformSweep(const Problem& pb, const Motion& motion, const std::vector<Vec3>& points, double h,
                               double dt_ode, double t0)
    : flow_(pb.cutoff(), pb.shell, motion, dt_ode),
      cloud_(make_metric_cloud(points, h,
                               annulus_domain(pb.shell.center, pb.space->mesh().body_inscribed_radius(),
                                              pb.shell.r_out))),
      state_(flow_.start(cloud_.labels, t0)) {}

TransformSnapshot TransformSweep::at(double t) {
  flow_.advance(state_, t);
  return build_snapshot(flow_, cloud_, state_);
}

std::pair<double, double> energy_and_dissipation(const Problem& pb, const TransformSnapshot& td,
                                                 const Eigen::VectorXd& x) {
  const CoupledSpace& s = *pb.space;
  const TetRule& rule = tet_rule_degree5();
  require(td.size() == s.num_elements() * rule.size(), "energy: snapshot does not match the quadrature points");
  const auto nodal = s.nodal_velocity(x);
  double e = 0.0, d = 0.0;
  for (std::size_t el = 0; el < s.num_elements(); ++el) {
    const double vol = 6.0 * s.geometry(el).volume;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const std::size_t p = el * rule.size() + q;
      VectorJet U;
      std::tie(U.value, U.grad) = eval_velocity(s, nodal, el, rule.bary[q]);
      const double w = vol * rule.weight[q];
      e += w * U.value.dot(td.g[p] * U.value);
      if (td.has_gamma) d += w * weak_GL_integrand(U, U, td.g[p], td.ginv[p], td.gamma[p]);
    }
  }
  const Vec3 A = s.rigid_A(x), W = s.rigid_Omega(x);
  return {0.5 * (e + A.squaredNorm() + W.dot(pb.J * W)), d};
}

double divergence_residual(const CoupledSpace& space, const StokesBlock& st, const Eigen::VectorXd& x) {
  return (st.B * x.head(space.num_velocity())).lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd initial_state(const Problem& pb, const std::function<Vec3(const Vec3&)>& u0, const Vec3& A0,
                              const Vec3& Omega0) {
  const CoupledSpace& s = *pb.space;
  const Eigen::VectorXd raw = s.interpolate(u0, A0, Omega0);
  const SpMat M = assemble_weighted_mass(s, pb.J);
  const StokesBlock st = assemble_stokes_block(s);
  Eigen::SparseLU<SpMat> lu(saddle_matrix(s, M, st));
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "initial projection: factorization failed");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s.size());
  b.head(s.num_velocity()) = M * raw.head(s.num_velocity());
  Eigen::VectorXd x = lu.solve(b);
  x.tail(s.size() - s.num_velocity()).setZero();
  return x;
}

namespace {

using Clock = std::chrono::steady_clock;

Eigen::VectorXd body_load(const Problem& pb, const Mat3& Q) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(pb.space->size());
  f.segment<3>(pb.space->rigid_offset()) = Q.transpose() * pb.body_force;
  return f;
}

// K x + B^T p - C x - f restricted to velocity rows.
Eigen::VectorXd weak_residual(const StokesRigidSystem& sys, const SpMat& C, const Eigen::VectorXd& f,
                              const Eigen::VectorXd& x) {
  const CoupledSpace& s = sys.space();
  const int nv = s.num_velocity();
  Eigen::VectorXd r = sys.stokes().K * x.head(nv) + sys.stokes().B.transpose() * x.segment(s.pressure_offset(), s.num_pressure());
  r -= (C * x).head(nv);
  r -= f.head(nv);
  return r;
}

// (dt (int |U|^s)^{r/s})^{1/r} of the reference field with the snapshot metric (flat if td is null).
double window_norm(const CoupledSpace& s, const Eigen::VectorXd& x, double dt, double sexp, double rexp) {
  const TetRule& rule = tet_rule_degree5();
  const auto nodal = s.nodal_velocity(x);
  double acc = 0.0;
  for (std::size_t e = 0; e < s.num_elements(); ++e)
    for (std::size_t q = 0; q < rule.size(); ++q)
      acc += 6.0 * s.geometry(e).volume * rule.weight[q] *
             std::pow(eval_velocity(s, nodal, e, rule.bary[q]).first.norm(), sexp);
  return std::pow(dt * std::pow(acc, rexp / sexp), 1.0 / rexp);
}

void fill_record(StepRecord& rec, const Problem& pb, StokesRigidSystem& sys, const TransformSnapshot& td,
                 const SpMat& C, const Eigen::VectorXd& f, const Eigen::VectorXd& x) {
  const CoupledSpace& s = *pb.space;
  std::tie(rec.energy, rec.dissipation) = energy_and_dissipation(pb, td, x);
  rec.divergence = divergence_residual(s, sys.stokes(), x);
  rec.rigid_rows = weak_residual(sys, C, f, x).segment<6>(s.rigid_offset());
  rec.gap = pb.gap(rec.body.q);
}

class NonlinearMarcher {
 public:
  NonlinearMarcher(const Problem& pb, const SolverConfig& cfg, Trajectory& traj)
      : pb_(pb), cfg_(cfg), sys_(*pb.space, pb.J), traj_(traj),
        sweep_(pb, traj.motion, tet_rule_degree5(), cfg.fd_h, cfg.dt_ode > 0 ? cfg.dt_ode : cfg.dt) {}

  void initial(const Eigen::VectorXd& x0) {
    const CoupledSpace& s = *pb_.space;
    StepRecord rec;
    rec.body.q = pb_.shell.center;
    rec.body.a = s.rigid_A(x0);
    rec.body.omega = s.rigid_Omega(x0);
    const TransformSnapshot td = sweep_.at(0.0);
    const TransformedTerms tt = assemble_transformed_terms(s, td, x0, pb_.J);
    fill_record(rec, pb_, sys_, td, tt.combined, body_load(pb_, rec.body.Q), x0);
    traj_.states.push_back(x0);
    traj_.steps.push_back(rec);
  }

  void step(double t0, double t1, int depth) {
    const CoupledSpace& s = *pb_.space;
    const auto start = Clock::now();
    const double dt = t1 - t0;
    const Eigen::VectorXd xprev = traj_.states.back();
    const RigidState b0 = traj_.steps.back().body;
    const LabelState L0 = sweep_.state();
    const std::size_t nseg = traj_.motion.size();

    auto bisect = [&](const std::string& why) {
      traj_.motion.truncate(nseg);
      sweep_.reset(L0);
      if (depth >= cfg_.max_bisection) {
        std::ostringstream os;
        os << why << " at t = " << t0 << " after " << depth << " window bisections";
        throw Error(ErrorKind::SolverFailure, os.str());
      }
      const double tm = 0.5 * (t0 + t1);
      step(t0, tm, depth + 1);
      step(tm, t1, depth + 1);
    };

    if (window_norm(s, xprev, dt, cfg_.s, cfg_.r) > cfg_.split_threshold) return bisect("window norm above threshold");

    Eigen::VectorXd guess = xprev;
    StepRecord rec;
    rec.t = t1;
    rec.dt = dt;
    rec.bisection_depth = depth;
    bool converged = false;
    TransformSnapshot td;
    SpMat C;
    Eigen::VectorXd f;
    for (int p = 1; p <= cfg_.max_picard_iterations && !converged; ++p) {
      const Vec3 A = s.rigid_A(guess), W = s.rigid_Omega(guess);
      RigidState b = b0;
      b.t = t1;
      b.Q = b0.Q * rotation_exp(dt * W);
      b.a = b.Q * A;
      b.omega = b.Q * W;
      b.q = b0.q + dt * b.a;
      const double gap = pb_.gap(b.q);
      if (gap < cfg_.gap_delta) {
        std::ostringstream os;
        os << "gap hypothesis violated: body-wall distance " << gap << " below " << cfg_.gap_delta << " at t = " << t1;
        throw Error(ErrorKind::GapViolation, os.str());
      }
      traj_.motion.truncate(nseg);
      traj_.motion.push(t1, b.a, b.omega);
      sweep_.reset(L0);
      td = sweep_.at(t1);
      C = assemble_transformed_terms(s, td, guess, pb_.J).combined;
      f = body_load(pb_, b.Q);
      FixedPointResult fp;
      try {
        fp = fixed_point_window(sys_, {WindowStep{dt, C, f}}, xprev, cfg_);
      } catch (const ContractionFailure& e) {
        return bisect(e.what());
      }
      const double inc = sys_.norm(fp.x[0] - guess), size = sys_.norm(fp.x[0]);
      converged = inc <= cfg_.picard_tol * size;
      guess = std::move(fp.x[0]);
      rec.body = b;
      rec.picard_iterations = p;
      rec.fp_iterations += fp.iterations;
      rec.mu_hat = fp.mu_hat;
      rec.fp_increments = std::move(fp.increments);
      rec.mu_log = std::move(fp.mu_log);
    }
    if (!converged) return bisect("Picard iteration did not converge");

    fill_record(rec, pb_, sys_, td, C, f, guess);
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    traj_.states.push_back(std::move(guess));
    traj_.steps.push_back(std::move(rec));
  }

 private:
  const Problem& pb_;
  const SolverConfig& cfg_;
  StokesRigidSystem sys_;
  Trajectory& traj_;
  TransformSweep sweep_;
};

void check_problem(const Problem& pb) {
  require(pb.space != nullptr, "solver: problem has no space");
  require(pb.space->coupling() == BodyCoupling::Rigid, "solver: the space must couple the rigid body");
  require((pb.space->mesh().center - pb.shell.center).norm() < 1e-12, "solver: mesh and shell centers differ");
}

}  // namespace

void refresh_records(const Problem& pb, Trajectory& traj, const SolverConfig& cfg) {
  cfg.validate();
  check_problem(pb);
  StokesRigidSystem sys(*pb.space, pb.J);
  TransformSweep sweep(pb, traj.motion, tet_rule_degree5(), cfg.fd_h, cfg.dt_ode > 0 ? cfg.dt_ode : cfg.dt);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const TransformSnapshot td = sweep.at(traj.steps[n].t);
    const SpMat C = assemble_transformed_terms(*pb.space, td, traj.states[n], pb.J).combined;
    fill_record(traj.steps[n], pb, sys, td, C, body_load(pb, traj.steps[n].body.Q), traj.states[n]);
  }
}

Trajectory solve_nonlinear(const Problem& pb, const Eigen::VectorXd& x0, const SolverConfig& cfg,
                           const StepObserver& observe) {
  cfg.validate();
  check_problem(pb);
  require(x0.size() == pb.space->size(), "solver: initial state has the wrong size");
  {
    const StokesBlock st = assemble_stokes_block(*pb.space);
    const double div = divergence_residual(*pb.space, st, x0);
    if (div > 1e-9 * std::max(1.0, x0.lpNorm<Eigen::Infinity>()))
      throw Error(ErrorKind::InvalidInput, "solver: initial velocity is not discretely divergence-free (residual " +
                                               std::to_string(div) + ")");
  }
  if (pb.gap(pb.shell.center) < cfg.gap_delta)
    throw Error(ErrorKind::GapViolation, "gap hypothesis violated by the initial configuration");
  Trajectory traj(0.0, pb.shell.center);
  NonlinearMarcher m(pb, cfg, traj);
  m.initial(x0);
  if (observe) observe(traj);
  const long n = std::lround(cfg.T / cfg.dt);
  for (long k = 1; k <= n; ++k) {
    m.step((k - 1) * cfg.dt, k == n ? cfg.T : k * cfg.dt, 0);
    if (observe) observe(traj);
  }
  return traj;
}

namespace {

class LinearMarcher {
 public:
  LinearMarcher(const Problem& pb, const SolverConfig& cfg, const Trajectory& base,
                const std::vector<Eigen::VectorXd>& Ut, Trajectory& out)
      : pb_(pb), cfg_(cfg), base_(base), Ut_(Ut), out_(out), sys_(*pb.space, pb.J),
        sweep_(pb, base.motion, tet_rule_degree5(), cfg.fd_h, cfg.dt_ode > 0 ? cfg.dt_ode : cfg.dt) {}

  void initial() {
    StepRecord rec = base_.steps[0];
    const TransformSnapshot td = sweep_.at(rec.t);
    const SpMat C = assemble_transformed_terms(*pb_.space, td, Ut_[0], pb_.J).combined;
    fill_record(rec, pb_, sys_, td, C, body_load(pb_, rec.body.Q), base_.states[0]);
    out_.states.push_back(base_.states[0]);
    out_.steps.push_back(rec);
  }

  // Steps n0+1 .. n1 of the base time grid.
  void window(std::size_t n0, std::size_t n1) {
    const CoupledSpace& s = *pb_.space;
    const auto start = Clock::now();
    const LabelState L0 = sweep_.state();
    auto split = [&](const std::string& why) {
      sweep_.reset(L0);
      if (n1 - n0 < 2) throw Error(ErrorKind::SolverFailure, why + " on a single-step window at t = " +
                                                                 std::to_string(base_.steps[n1].t));
      const std::size_t nm = (n0 + n1) / 2;
      window(n0, nm);
      window(nm, n1);
    };
    double acc = 0.0;
    for (std::size_t n = n0 + 1; n <= n1; ++n) acc += std::pow(window_norm(s, Ut_[n], base_.steps[n].dt, cfg_.s, cfg_.r), cfg_.r);
    if (n1 - n0 > 1 && std::pow(acc, 1.0 / cfg_.r) > cfg_.split_threshold) return split("window norm above threshold");

    std::vector<WindowStep> steps;
    for (std::size_t n = n0 + 1; n <= n1; ++n) {
      const TransformSnapshot td = sweep_.at(base_.steps[n].t);
      steps.push_back({base_.steps[n].dt, assemble_transformed_terms(s, td, Ut_[n], pb_.J).combined,
                       body_load(pb_, base_.steps[n].body.Q)});
    }
    FixedPointResult fp;
    try {
      fp = fixed_point_window(sys_, steps, out_.states.back(), cfg_);
    } catch (const ContractionFailure& e) {
      return split(e.what());
    }
    // Second pass over the window for the per-step records.
    sweep_.reset(L0);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    for (std::size_t n = n0 + 1; n <= n1; ++n) {
      const std::size_t i = n - n0 - 1;
      StepRecord rec;
      rec.t = base_.steps[n].t;
      rec.dt = base_.steps[n].dt;
      rec.body = base_.steps[n].body;
      rec.bisection_depth = base_.steps[n].bisection_depth;
      rec.fp_iterations = fp.iterations;
      rec.mu_hat = fp.mu_hat;
      rec.fp_increments = fp.increments;
      rec.mu_log = fp.mu_log;
      rec.wall_seconds = secs / steps.size();
      const TransformSnapshot td = sweep_.at(rec.t);
      fill_record(rec, pb_, sys_, td, steps[i].C, steps[i].load, fp.x[i]);
      out_.states.push_back(std::move(fp.x[i]));
      out_.steps.push_back(std::move(rec));
    }
  }

 private:
  const Problem& pb_;
  const SolverConfig& cfg_;
  const Trajectory& base_;
  const std::vector<Eigen::VectorXd>& Ut_;
  Trajectory& out_;
  StokesRigidSystem sys_;
  TransformSweep sweep_;
};

}  // namespace

Trajectory solve_linearized(const Problem& pb, const Trajectory& base, const std::vector<Eigen::VectorXd>& U_tilde,
                            const SolverConfig& cfg, std::size_t window_steps) {
  cfg.validate();
  check_problem(pb);
  require(U_tilde.size() == base.size() && base.size() > 0, "linearized solve: one linearization state per step");
  Trajectory out(0.0, pb.shell.center);
  out.motion = base.motion;
  LinearMarcher m(pb, cfg, base, U_tilde, out);
  m.initial();
  const std::size_t last = base.size() - 1;
  const std::size_t w = window_steps == 0 ? std::max<std::size_t>(last, 1) : window_steps;
  for (std::size_t n0 = 0; n0 < last; n0 += w) m.window(n0, std::min(last, n0 + w));
  return out;
}

DerivativeResult solve_time_derivative(int l, const Problem& pb, const Trajectory& base, const SolverConfig& cfg) {
  cfg.validate();
  check_problem(pb);
  if (l != 1)
    throw Error(ErrorKind::InvalidInput,
                "time-derivative solve: order " + std::to_string(l) + " needs derivative trajectories up to order " +
                    std::to_string(l - 1) + ", which are not cached");
  require(base.size() >= 2, "time-derivative solve: base trajectory needs at least one step");
  const CoupledSpace& s = *pb.space;
  StokesRigidSystem sys(s, pb.J);
  TransformSweep sweep(pb, base.motion, tet_rule_degree5(), cfg.fd_h, cfg.dt_ode > 0 ? cfg.dt_ode : cfg.dt);

  DerivativeResult out;
  out.states.push_back(Eigen::VectorXd::Zero(s.size()));
  SpMat Cprev = assemble_transformed_terms(s, sweep.at(base.steps[0].t), base.states[0], pb.J).combined;
  Eigen::VectorXd fprev = body_load(pb, base.steps[0].body.Q);
  const int nv = s.num_velocity();
  double worst = 0.0, scale = 0.0;
  for (std::size_t n = 1; n < base.size(); ++n) {
    const double t = base.steps[n].t, dt = base.steps[n].dt;
    const SpMat C = assemble_transformed_terms(s, sweep.at(t), base.states[n], pb.J).combined;
    const Eigen::VectorXd f = body_load(pb, base.steps[n].body.Q);
    const Eigen::VectorXd& xp = base.states[n - 1];
    // Weak time derivative of the base at t_{n-1} plus t (coefficient rates) applied to the base.
    Eigen::VectorXd src = Eigen::VectorXd::Zero(s.size());
    src.head(nv) = -weak_residual(sys, Cprev, fprev, xp);
    src.head(nv) += (t / dt) * (((C - Cprev) * xp).head(nv) + (f - fprev).head(nv));
    FixedPointResult fp = fixed_point_window(sys, {WindowStep{dt, C, src}}, out.states.back(), cfg);
    const Eigen::VectorXd y = (base.states[n] - xp) / dt;
    worst = std::max(worst, sys.norm(fp.x[0] / t - y));
    scale = std::max(scale, sys.norm(y));
    out.states.push_back(std::move(fp.x[0]));
    Cprev = C;
    fprev = f;
  }
  out.fd_consistency = scale > 0.0 ? worst / scale : worst;
  return out;
}

}  // namespace fsi
