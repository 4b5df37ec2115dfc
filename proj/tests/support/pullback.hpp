#pragma once
// Test-side oracle: pull back a manufactured physical field through a flow map and compare the
// transformed operators with the chain rule applied to analytic physical derivatives.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "fsi/operators.hpp"
#include "fsi/transform.hpp"

namespace fsi::testing {

/// u_i = sin(k_i . x + phi_i), p = cos(kp . x).
struct ManufacturedField {
  std::array<Vec3, 3> k{Vec3(1.1, -0.4, 0.7), Vec3(0.3, 0.9, -0.8), Vec3(-0.6, 0.5, 1.2)};
  Vec3 phi{0.3, -0.2, 0.9};
  Vec3 kp{0.8, -0.7, 0.5};

  Vec3 u(const Vec3& x) const {
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = std::sin(k[i].dot(x) + phi[i]);
    return r;
  }
  Mat3 grad_u(const Vec3& x) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.row(i) = std::cos(k[i].dot(x) + phi[i]) * k[i].transpose();
    return r;
  }
  Vec3 lap_u(const Vec3& x) const {
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = -k[i].squaredNorm() * std::sin(k[i].dot(x) + phi[i]);
    return r;
  }
  double p(const Vec3& x) const { return std::cos(kp.dot(x)); }
  Vec3 grad_p(const Vec3& x) const { return -std::sin(kp.dot(x)) * kp; }
};

struct PullbackErrors {
  double L = 0, M = 0, N = 0, G = 0;
  double max() const { return std::max({L, M, N, G}); }
};

namespace detail {
inline constexpr int kOff[4] = {-2, -1, 1, 2};
inline constexpr double kW1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
}  // namespace detail

/// Maximum pointwise errors of L, M, N and G over the centers at time t.
/// U = grad Y u(X) and P = p(X); their reference derivatives come from 4th-order differences of
/// U and P on a 61-point stencil of step h, independent of the library's stencils.
inline PullbackErrors pullback_errors(const FlowMap& flow, double t, const std::vector<Vec3>& centers, double h,
                                      const ManufacturedField& f = {}, double h_field = 0.0) {
  const double hj = h;
  if (h_field > 0.0) h = h_field;
  using detail::kOff;
  using detail::kW1;
  // layout per center: 0 center, 1 + 4m + s axis points, 13 + 16 pair + 4a + b mixed points
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  std::vector<Vec3> labels;
  for (const Vec3& c : centers) {
    labels.push_back(c);
    for (int m = 0; m < 3; ++m)
      for (int s = 0; s < 4; ++s) labels.push_back(c + kOff[s] * h * Vec3::Unit(m));
    for (const auto& pr : pairs)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          labels.push_back(c + kOff[a] * h * Vec3::Unit(pr[0]) + kOff[b] * h * Vec3::Unit(pr[1]));
  }
  LabelState st = flow.start(labels);
  flow.advance(st, t);
  std::vector<Vec3> U(labels.size());
  std::vector<double> P(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Vec3 x = st.position(i);
    U[i] = st.gradient(i).inverse() * f.u(x);
    P[i] = f.p(x);
  }

  const LabelCloud jc = make_jet_cloud(centers, hj);
  LabelState js = flow.start(jc.labels);
  flow.advance(js, t);
  const std::vector<GeometryJet> jets = build_jets(flow, jc, js);

  PullbackErrors e;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const std::size_t b0 = c * 61;
    VectorJet J;
    ScalarJet S;
    J.value = U[b0];
    S.value = P[b0];
    for (int m = 0; m < 3; ++m) {
      Vec3 d = Vec3::Zero();
      double dp = 0.0;
      for (int s = 0; s < 4; ++s) {
        d += kW1[s] * U[b0 + 1 + 4 * m + s];
        dp += kW1[s] * P[b0 + 1 + 4 * m + s];
      }
      J.grad.col(m) = d / h;
      S.grad[m] = dp / h;
      const Vec3 d2 = (-(U[b0 + 1 + 4 * m] + U[b0 + 4 + 4 * m]) + 16.0 * (U[b0 + 2 + 4 * m] + U[b0 + 3 + 4 * m]) -
                       30.0 * U[b0]) /
                      (12.0 * h * h);
      for (int i = 0; i < 3; ++i) J.hess[i](m, m) = d2[i];
    }
    for (int pr = 0; pr < 3; ++pr) {
      Vec3 d = Vec3::Zero();
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) d += kW1[a] * kW1[b] * U[b0 + 13 + 16 * pr + 4 * a + b];
      d /= h * h;
      for (int i = 0; i < 3; ++i) J.hess[i](pairs[pr][0], pairs[pr][1]) = J.hess[i](pairs[pr][1], pairs[pr][0]) = d[i];
    }

    const GeometryJet& g = jets[c];
    const Vec3 x = g.X;
    const Mat3 gY = g.gradY;
    const PointCoefficients coef = coefficients_from_jet(g);

    const Vec3 refL = gY * f.lap_u(x);
    const Vec3 uval = f.u(x);
    const Vec3 refN = gY * (f.grad_u(x) * uval);
    const Vec3 refG = gY * f.grad_p(x);
    // u is stationary, so M U = -dU/dt at fixed y = grad Y dXdot grad Y u - grad Y grad u Xdot.
    const Vec3 refM = gY * (g.dXdot * (gY * uval)) - gY * (f.grad_u(x) * g.Xdot);

    e.L = std::max(e.L, (op_L(J, coef) - refL).norm());
    e.M = std::max(e.M, (op_M(J, coef) - refM).norm());
    e.N = std::max(e.N, (op_N(J, convection_coefficients(g.gamma, J.value)) - refN).norm());
    e.G = std::max(e.G, (op_G(S, coef) - refG).norm());
  }
  return e;
}

}  // namespace fsi::testing
