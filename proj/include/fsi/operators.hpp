#pragma once

#include <array>
#include <utility>
#include <vector>

#include "fsi/transform.hpp"
#include "fsi/types.hpp"

namespace fsi {

/// Value, gradient (grad(i, j) = d_j U_i) and Hessians (hess[i](j, k) = d_j d_k U_i) of a
/// reference vector field at a point.
struct VectorJet {
  Vec3 value = Vec3::Zero();
  Mat3 grad = Mat3::Zero();
  std::array<Mat3, 3> hess{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
};

struct ScalarJet {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
};

/// Coefficients of the transformed operators at one point, grouped so that every operator is
/// linear in them:
///   L U_i = c1^{jk} d_j d_k U_i + dc1^k d_k U_i + c2[i](j, l) d_l U_j + c0(i, j) U_j
///   M U_i = m1_j d_j U_i + m0(i, j) U_j
///   G P   = c1 grad P
/// Replacing each field by its m-th time derivative gives the operators with subscript m.
struct PointCoefficients {
  Mat3 c1 = Mat3::Zero();
  Vec3 dc1 = Vec3::Zero();
  std::array<Mat3, 3> c2{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  Mat3 c0 = Mat3::Zero();
  Vec3 m1 = Vec3::Zero();
  Mat3 m0 = Mat3::Zero();
  bool strong = false;  // dc1 and the derivative part of c0 are available

  PointCoefficients& operator+=(const PointCoefficients& o);
  PointCoefficients& operator*=(double s);
};

/// N U_i = n1_j d_j U_i + n0(i, k) U_k with n1 = U~ and n0(i, k) = Gamma^i_jk U~_j.
struct ConvectionCoefficients {
  Vec3 n1 = Vec3::Zero();
  Mat3 n0 = Mat3::Zero();

  ConvectionCoefficients& operator+=(const ConvectionCoefficients& o);
  ConvectionCoefficients& operator*=(double s);
};

/// Full coefficient set including spatial derivatives of g^{-1} and Gamma.
PointCoefficients coefficients_from_jet(const GeometryJet& jet);
/// Pointwise coefficients only (weak forms); strong operators reject these.
PointCoefficients coefficients_from_snapshot(const TransformSnapshot& td, std::size_t p);
/// Coefficients of the flat operators (identity transform).
PointCoefficients flat_coefficients();

ConvectionCoefficients convection_coefficients(const Christoffel& gamma, const Vec3& U_tilde);

Vec3 laplacian(const VectorJet& U);
Vec3 op_L(const VectorJet& U, const PointCoefficients& c);
Vec3 op_M(const VectorJet& U, const PointCoefficients& c);
Vec3 op_N(const VectorJet& U, const ConvectionCoefficients& n);
Vec3 op_G(const ScalarJet& P, const PointCoefficients& c);

/// (L - Delta)U - M U - N U - (G - grad)P.
Vec3 rhs_F(const VectorJet& U, const ScalarJet& P, const PointCoefficients& c, const ConvectionCoefficients& n);

/// G = -Omega~ x A, H = -Omega~ x (J Omega).
std::pair<Vec3, Vec3> rhs_G_H(const Vec3& A, const Vec3& Omega, const Vec3& Omega_tilde, const Mat3& J);

/// Derivative-of-coefficient right-hand side of order l >= 1.
/// coeff[m], conv[m]: m-th time derivatives of the coefficients (m = 0..l);
/// dU[p], dP[p]: p-th time derivatives of the fields (p = 0..l-1).
Vec3 op_F_l(int l, const std::vector<PointCoefficients>& coeff, const std::vector<ConvectionCoefficients>& conv,
            const std::vector<VectorJet>& dU, const std::vector<ScalarJet>& dP);

/// G_l = -sum_{p<l} C(l,p) Omega~^{(l-p)} x A^{(p)}, H_l likewise with J Omega^{(p)}.
/// dOmega_tilde has entries 0..l, dA and dOmega entries 0..l-1.
std::pair<Vec3, Vec3> rhs_G_H_l(int l, const std::vector<Vec3>& dOmega_tilde, const std::vector<Vec3>& dA,
                                const std::vector<Vec3>& dOmega, const Mat3& J);

/// Integrand of <G L U, psi>: 2 DU:Dpsi plus the four metric corrections.
/// Only values and gradients of U and psi are used.
double weak_GL_integrand(const VectorJet& U, const VectorJet& psi, const Mat3& g, const Mat3& ginv,
                         const Christoffel& gamma);

/// Physical gradient of the push-forward u = grad X U: grad X (grad U + Gamma U) grad Y.
Mat3 pushforward_gradient(const VectorJet& U, const Mat3& gradX, const Mat3& gradY, const Christoffel& gamma);

/// Time rates of G = grad X^T grad X and of its inverse at the snapshot points.
struct MetricRates {
  std::vector<Mat3> dG, dGinv;
};
/// Exact rates from d/dt grad X = grad w grad X.
MetricRates exact_metric_rates(const TransformSnapshot& td);
/// Rates from finite-difference caches (first derivative entries).
MetricRates fd_metric_rates(const CoefficientDerivatives& d);

/// max over points of |G dt(G^{-1}) grad P + dt(G) G^{-1} grad P|.
double pressure_cancellation(const std::vector<Vec3>& gradP, const std::vector<Mat3>& G,
                             const std::vector<Mat3>& Ginv, const MetricRates& rates);

}  // namespace fsi
