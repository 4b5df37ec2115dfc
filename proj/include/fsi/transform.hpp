#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fsi/flow_kernels.hpp"
#include "fsi/rigid_motion.hpp"
#include "fsi/types.hpp"

namespace fsi {

/// Radial C2 cutoff: 1 for rho <= inner, 0 for rho >= outer, quintic smoothstep in between.
class CutoffField {
 public:
  CutoffField(double inner, double outer);

  double inner() const { return inner_; }
  double outer() const { return outer_; }
  double value(double rho) const;
  double d1(double rho) const;
  double d2(double rho) const;
  /// zeta(|x - center|)
  double operator()(const Vec3& x, const Vec3& center) const { return value((x - center).norm()); }
  kernels::CutoffParams params() const { return {inner_, outer_}; }

 private:
  double inner_, outer_;
};

/// Plateau radii are r_in + delta_in and r_out - delta_out; overlapping shells are rejected.
CutoffField build_cutoff(const ShellGeometry& shell, double delta_in, double delta_out);

/// Body center, translational and angular velocity (physical frame).
struct MotionSample {
  Vec3 q = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

/// Body kinematics as a function of time. Piecewise data may jump at `breaks`;
/// `piece_mid` selects the piece when t sits on a break.
class Motion {
 public:
  virtual ~Motion() = default;
  virtual MotionSample at(double t, double piece_mid) const = 0;
  MotionSample at(double t) const { return at(t, t); }
  virtual std::vector<double> breaks(double /*t0*/, double /*t1*/) const { return {}; }
};

/// Smooth kinematics given by callables; q must be an antiderivative of a.
class PrescribedMotion : public Motion {
 public:
  PrescribedMotion(std::function<Vec3(double)> q, std::function<Vec3(double)> a,
                   std::function<Vec3(double)> omega);
  using Motion::at;
  MotionSample at(double t, double piece_mid) const override;

 private:
  std::function<Vec3(double)> q_, a_, omega_;
};

/// Piecewise-constant (a, omega) with continuous, piecewise-linear q.
class SegmentMotion : public Motion {
 public:
  SegmentMotion(double t0, const Vec3& q0);

  void push(double t_end, const Vec3& a, const Vec3& omega);
  void truncate(std::size_t nseg);
  std::size_t size() const { return seg_.size(); }
  double start_time() const { return t0_; }
  double end_time() const { return seg_.empty() ? t0_ : seg_.back().t1; }
  Vec3 position(double t) const;

  using Motion::at;
  MotionSample at(double t, double piece_mid) const override;
  std::vector<double> breaks(double t0, double t1) const override;

 private:
  struct Segment {
    double t0, t1;
    Vec3 q0, a, omega;
  };
  std::size_t find(double t) const;
  double t0_;
  Vec3 q0_;
  std::vector<Segment> seg_;
};

/// w = curl(zeta psi), psi = a x r / 2 - |r|^2 omega / 2, r = x - q.
Vec3 transport_velocity(double t, const Vec3& x, const RigidState& state, const CutoffField& zeta);
/// Same field with its gradient (grad(i, m) = d w_i / d x_m).
Vec3 transport_velocity(const Vec3& x, const MotionSample& k, const CutoffField& zeta, Mat3* grad);

/// Label positions and deformation gradients in structure-of-arrays form.
struct LabelState {
  double t = 0.0;
  std::vector<double> x[3];
  std::vector<double> g[9];

  std::size_t size() const { return x[0].size(); }
  kernels::FlowBatch view();
  Vec3 position(std::size_t i) const { return {x[0][i], x[1][i], x[2][i]}; }
  Mat3 gradient(std::size_t i) const;
};

/// Flow of the transport field for a given motion.
class FlowMap {
 public:
  FlowMap(const CutoffField& cutoff, const ShellGeometry& shell, const Motion& motion, double dt_ode,
          kernels::SimdLevel level = kernels::detected_simd_level());

  LabelState start(const std::vector<Vec3>& labels, double t0 = 0.0) const;
  /// Integrates every label to t1 with RK4; throws GapViolation if the field support leaves Omega.
  void advance(LabelState& state, double t1) const;
  /// X(t, y) and grad X(t, y) for one label started at t0.
  std::pair<Vec3, Mat3> map(const Vec3& y, double t, double t0 = 0.0) const;
  /// Kinematics seen by the snapshot at t (left limit for t > start).
  MotionSample snapshot_kinematics(double t) const;
  void check_support(const MotionSample& k) const;

  const CutoffField& cutoff() const { return cutoff_; }
  const ShellGeometry& shell() const { return shell_; }
  const Motion& motion() const { return motion_; }
  double dt_ode() const { return dt_ode_; }
  kernels::SimdLevel simd_level() const { return level_; }

 private:
  CutoffField cutoff_;
  ShellGeometry shell_;
  const Motion& motion_;
  double dt_ode_;
  kernels::SimdLevel level_;
};

enum class StencilKind : std::uint8_t { Central, Forward, Backward };

/// Reference labels: each center plus its finite-difference neighbours, stored contiguously.
/// Metric clouds carry 19 labels per center (6 per axis); jet clouds carry 127 (axes plus mixed).
struct LabelCloud {
  std::vector<Vec3> centers;
  std::vector<Vec3> labels;
  std::vector<std::array<StencilKind, 3>> kind;
  double h = 0.0;
  int per_center = 1;
  std::size_t one_sided = 0;  // centers with at least one one-sided axis

  std::size_t size() const { return centers.size(); }
};

/// Predicate saying whether a label may be used in a stencil.
using LabelDomain = std::function<bool(const Vec3&)>;

/// Annulus test rho_min <= |y - c| <= rho_max.
LabelDomain annulus_domain(const Vec3& center, double rho_min, double rho_max);

/// h = 0 gives a centers-only cloud (no Christoffel symbols).
LabelCloud make_metric_cloud(const std::vector<Vec3>& centers, double h, const LabelDomain& inside);
LabelCloud make_jet_cloud(const std::vector<Vec3>& centers, double h);

/// Geometric data at the centers of a metric cloud for one time instant.
struct TransformSnapshot {
  double t = 0.0;
  MotionSample kin;
  std::vector<Vec3> y, X;
  std::vector<Mat3> gradX, gradY;
  std::vector<double> det;
  std::vector<Mat3> g, ginv;
  std::vector<Christoffel> gamma;
  std::vector<Vec3> Xdot, Ydot;
  std::vector<Mat3> dXdot;  // dXdot[p](k, j) = d Xdot_k / d y_j
  bool has_gamma = false;
  std::size_t one_sided = 0;

  std::size_t size() const { return y.size(); }
};

TransformSnapshot build_snapshot(const FlowMap& flow, const LabelCloud& cloud, const LabelState& state);

/// Pointwise geometry with first spatial derivatives of g^{-1} and Gamma.
struct GeometryJet {
  Vec3 y, X;
  Mat3 gradX, gradY;
  Mat3 g, ginv;
  std::array<Mat3, 3> dginv;  // dginv[m] = d/dy_m g^{..}
  Christoffel gamma;
  std::array<Christoffel, 3> dgamma;  // dgamma[m][k](i, j) = d/dy_m Gamma^k_ij
  Vec3 Xdot, Ydot;
  Mat3 dXdot;
};

std::vector<GeometryJet> build_jets(const FlowMap& flow, const LabelCloud& jet_cloud, const LabelState& state);

/// Metric, inverse metric and Christoffel symbols of an arbitrary map from its gradient,
/// with 6th-order central differences of step h.
struct MetricData {
  Mat3 g, ginv;
  Christoffel gamma;
};
MetricData metric_and_christoffel(const std::function<Mat3(const Vec3&)>& gradX, const Vec3& y, double h);

/// Newton solve of X(t, y) = x starting from the nearest sample; throws SolverFailure after 50 steps.
Vec3 invert_transform(const FlowMap& flow, double t, const std::vector<Vec3>& labels,
                      const std::vector<Vec3>& images, const Vec3& x, double tol = 1e-10);

/// Time derivatives (orders 0..l) of the cached coefficients at the middle snapshot,
/// by central differences over 2l+1 uniformly spaced snapshots. Index [m][point].
struct CoefficientDerivatives {
  int order = 0;
  std::vector<std::vector<Mat3>> g, ginv, gradY;
  std::vector<std::vector<Christoffel>> gamma;
  std::vector<std::vector<Vec3>> Ydot;
};
CoefficientDerivatives coefficient_time_derivatives(const std::vector<const TransformSnapshot*>& seq, int l);

/// Binary dump: magic "FSITD001", u64 point count, u64 doubles per point (85), f64 time, then per
/// point y(3) X(3) gradX(9) gradY(9) det(1) g(9) ginv(9) gamma(27, [k][i][j]) Xdot(3) Ydot(3)
/// dXdot(9). All little-endian, matrices row-major.
void write_snapshot_binary(std::ostream& os, const TransformSnapshot& s);
TransformSnapshot read_snapshot_binary(std::istream& is);

}  // namespace fsi
