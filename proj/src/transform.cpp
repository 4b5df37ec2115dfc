#include "fsi/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsi {

CutoffField::CutoffField(double inner, double outer) : inner_(inner), outer_(outer) {
  require(inner > 0.0 && outer > inner, "cutoff: need 0 < inner < outer");
}

double CutoffField::value(double rho) const {
  const double s = std::clamp((rho - inner_) / (outer_ - inner_), 0.0, 1.0);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double CutoffField::d1(double rho) const {
  const double w = outer_ - inner_;
  const double s = std::clamp((rho - inner_) / w, 0.0, 1.0);
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
}

double CutoffField::d2(double rho) const {
  const double w = outer_ - inner_;
  const double s = std::clamp((rho - inner_) / w, 0.0, 1.0);
  return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
}

CutoffField build_cutoff(const ShellGeometry& shell, double delta_in, double delta_out) {
  require(shell.r_in > 0.0 && shell.r_out > shell.r_in, "cutoff: degenerate shell radii");
  require(delta_in > 0.0 && delta_out > 0.0, "cutoff: transition distances must be positive");
  const double inner = shell.r_in + delta_in;
  const double outer = shell.r_out - delta_out;
  if (!(inner < outer)) {
    std::ostringstream os;
    os << "cutoff: overlapping transition shells (inner plateau ends at " << inner
       << ", outer plateau starts at " << outer << ")";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  return CutoffField(inner, outer);
}

PrescribedMotion::PrescribedMotion(std::function<Vec3(double)> q, std::function<Vec3(double)> a,
                                   std::function<Vec3(double)> omega)
    : q_(std::move(q)), a_(std::move(a)), omega_(std::move(omega)) {}

MotionSample PrescribedMotion::at(double t, double) const { return {q_(t), a_(t), omega_(t)}; }

SegmentMotion::SegmentMotion(double t0, const Vec3& q0) : t0_(t0), q0_(q0) {}

void SegmentMotion::push(double t_end, const Vec3& a, const Vec3& omega) {
  const double t0 = end_time();
  require(t_end > t0, "segment motion: segments must advance in time");
  const Vec3 q0 = seg_.empty() ? q0_ : Vec3(seg_.back().q0 + (seg_.back().t1 - seg_.back().t0) * seg_.back().a);
  seg_.push_back({t0, t_end, q0, a, omega});
}

void SegmentMotion::truncate(std::size_t nseg) {
  if (nseg < seg_.size()) seg_.resize(nseg);
}

std::size_t SegmentMotion::find(double t) const {
  // First segment whose end lies beyond t; clamps to the ends.
  auto it = std::upper_bound(seg_.begin(), seg_.end(), t,
                             [](double v, const Segment& s) { return v < s.t1; });
  if (it == seg_.end()) return seg_.size() - 1;
  return static_cast<std::size_t>(it - seg_.begin());
}

Vec3 SegmentMotion::position(double t) const {
  if (seg_.empty()) return q0_;
  const Segment& s = seg_[find(t)];
  return s.q0 + (t - s.t0) * s.a;
}

MotionSample SegmentMotion::at(double t, double piece_mid) const {
  if (seg_.empty()) return {q0_, Vec3::Zero(), Vec3::Zero()};
  const Segment& s = seg_[find(piece_mid)];
  return {s.q0 + (t - s.t0) * s.a, s.a, s.omega};
}

std::vector<double> SegmentMotion::breaks(double t0, double t1) const {
  std::vector<double> out;
  for (const auto& s : seg_)
    if (s.t1 > t0 && s.t1 < t1) out.push_back(s.t1);
  return out;
}

Vec3 transport_velocity(const Vec3& x, const MotionSample& k, const CutoffField& zeta, Mat3* grad) {
  const kernels::StageKinematics sk{{k.q[0], k.q[1], k.q[2]},
                                    {k.a[0], k.a[1], k.a[2]},
                                    {k.omega[0], k.omega[1], k.omega[2]}};
  const double xp[3] = {x[0], x[1], x[2]};
  double w[3], gw[9];
  kernels::eval_transport_point(zeta.params(), sk, xp, w, gw);
  if (grad)
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m) (*grad)(i, m) = gw[3 * i + m];
  return {w[0], w[1], w[2]};
}

Vec3 transport_velocity(double, const Vec3& x, const RigidState& state, const CutoffField& zeta) {
  return transport_velocity(x, MotionSample{state.q, state.a, state.omega}, zeta, nullptr);
}

kernels::FlowBatch LabelState::view() {
  kernels::FlowBatch b{};
  for (int i = 0; i < 3; ++i) b.x[i] = x[i].data();
  for (int i = 0; i < 9; ++i) b.g[i] = g[i].data();
  b.n = size();
  return b;
}

Mat3 LabelState::gradient(std::size_t p) const {
  Mat3 G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = g[3 * i + j][p];
  return G;
}

FlowMap::FlowMap(const CutoffField& cutoff, const ShellGeometry& shell, const Motion& motion, double dt_ode,
                 kernels::SimdLevel level)
    : cutoff_(cutoff), shell_(shell), motion_(motion), dt_ode_(dt_ode), level_(level) {
  require(dt_ode > 0.0, "flow map: dt_ode must be positive");
  require(cutoff.outer() < shell.r_out, "flow map: cutoff support must lie inside Omega");
}

LabelState FlowMap::start(const std::vector<Vec3>& labels, double t0) const {
  LabelState s;
  s.t = t0;
  const std::size_t n = labels.size();
  for (auto& v : s.x) v.resize(n);
  for (int i = 0; i < 9; ++i) s.g[i].assign(n, (i % 4 == 0) ? 1.0 : 0.0);
  for (std::size_t p = 0; p < n; ++p)
    for (int i = 0; i < 3; ++i) s.x[i][p] = labels[p][i];
  return s;
}

void FlowMap::check_support(const MotionSample& k) const {
  const double offset = (k.q - shell_.center).norm();
  if (offset + cutoff_.outer() > shell_.r_out) {
    std::ostringstream os;
    os << "gap hypothesis violated: body displacement " << offset << " pushes the transform support (radius "
       << cutoff_.outer() << ") past the outer wall";
    throw Error(ErrorKind::GapViolation, os.str());
  }
}

MotionSample FlowMap::snapshot_kinematics(double t) const {
  return motion_.at(t, t - 0.5 * dt_ode_);
}

namespace {

kernels::StageKinematics to_stage(const MotionSample& m) {
  return {{m.q[0], m.q[1], m.q[2]}, {m.a[0], m.a[1], m.a[2]}, {m.omega[0], m.omega[1], m.omega[2]}};
}

}  // namespace

void FlowMap::advance(LabelState& state, double t1) const {
  require(t1 >= state.t, "flow map: cannot integrate backwards");
  if (t1 == state.t) return;
  std::vector<double> cuts{state.t};
  for (double b : motion_.breaks(state.t, t1)) cuts.push_back(b);
  cuts.push_back(t1);

  std::vector<kernels::StageKinematics> stages;
  auto kernel = kernels::flow_rk4_kernel(level_);
  kernels::FlowBatch batch = state.view();
  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    const double a = cuts[piece], b = cuts[piece + 1];
    const double len = b - a;
    const int nsub = std::max(1, static_cast<int>(std::ceil(len / dt_ode_ - 1e-9)));
    const double h = len / nsub;
    const double mid = 0.5 * (a + b);
    stages.clear();
    for (int s = 0; s < nsub; ++s) {
      const double ts = a + s * h;
      for (double f : {0.0, 0.5, 1.0}) {
        const MotionSample m = motion_.at(ts + f * h, mid);
        check_support(m);
        stages.push_back(to_stage(m));
      }
    }
    if (batch.n > 0) kernel(cutoff_.params(), stages.data(), nsub, h, batch);
  }
  state.t = t1;
}

std::pair<Vec3, Mat3> FlowMap::map(const Vec3& y, double t, double t0) const {
  LabelState s = start({y}, t0);
  advance(s, t);
  return {s.position(0), s.gradient(0)};
}

}  // namespace fsi
