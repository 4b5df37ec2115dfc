#include "fsi/operators.hpp"

#include <cmath>

namespace fsi {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void require_strong(const PointCoefficients& c) {
  require(c.strong, "transformed operator: strong form needs coefficient derivatives (metric jet)");
}

// c1^{jk} d_j d_k U_i + dc1^k d_k U_i + c2[i](j,l) d_l U_j + c0(i,j) U_j without the strong check.
Vec3 apply_L(const VectorJet& U, const PointCoefficients& c) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    double s = (c.c1.cwiseProduct(U.hess[i])).sum();
    s += U.grad.row(i).dot(c.dc1);
    s += (c.c2[i].cwiseProduct(U.grad)).sum();
    s += c.c0.row(i).dot(U.value);
    out[i] = s;
  }
  return out;
}

}  // namespace

PointCoefficients& PointCoefficients::operator+=(const PointCoefficients& o) {
  c1 += o.c1;
  dc1 += o.dc1;
  for (int i = 0; i < 3; ++i) c2[i] += o.c2[i];
  c0 += o.c0;
  m1 += o.m1;
  m0 += o.m0;
  strong = strong && o.strong;
  return *this;
}

PointCoefficients& PointCoefficients::operator*=(double s) {
  c1 *= s;
  dc1 *= s;
  for (auto& m : c2) m *= s;
  c0 *= s;
  m1 *= s;
  m0 *= s;
  return *this;
}

ConvectionCoefficients& ConvectionCoefficients::operator+=(const ConvectionCoefficients& o) {
  n1 += o.n1;
  n0 += o.n0;
  return *this;
}

ConvectionCoefficients& ConvectionCoefficients::operator*=(double s) {
  n1 *= s;
  n0 *= s;
  return *this;
}

namespace {

// Parts shared by the jet and snapshot paths.
void fill_pointwise(PointCoefficients& c, const Mat3& ginv, const Christoffel& G, const Vec3& Ydot,
                    const Mat3& gradY, const Mat3& dXdot) {
  c.c1 = ginv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += ginv(k, l) * G[i](j, k);
        c.c2[i](j, l) = 2.0 * s;
      }
  // g^{kl} Gamma^m_jl Gamma^i_km
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m) s += ginv(k, l) * G[m](j, l) * G[i](k, m);
      c.c0(i, j) = s;
    }
  c.m1 = Ydot;
  c.m0 = gradY * dXdot;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.m0(i, j) += G[i].row(j).dot(Ydot);
}

}  // namespace

PointCoefficients coefficients_from_jet(const GeometryJet& J) {
  PointCoefficients c;
  fill_pointwise(c, J.ginv, J.gamma, J.Ydot, J.gradY, J.dXdot);
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += J.dginv[j](j, k);
    c.dc1[k] = s;
  }
  // d_k (g^{kl} Gamma^i_jl)
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += J.dginv[k](k, l) * J.gamma[i](j, l) + J.ginv(k, l) * J.dgamma[k][i](j, l);
      c.c0(i, j) += s;
    }
  c.strong = true;
  return c;
}

PointCoefficients coefficients_from_snapshot(const TransformSnapshot& td, std::size_t p) {
  require(td.has_gamma, "transformed operator: snapshot carries no Christoffel symbols");
  PointCoefficients c;
  fill_pointwise(c, td.ginv[p], td.gamma[p], td.Ydot[p], td.gradY[p], td.dXdot[p]);
  return c;
}

PointCoefficients flat_coefficients() {
  PointCoefficients c;
  c.c1 = Mat3::Identity();
  c.strong = true;
  return c;
}

ConvectionCoefficients convection_coefficients(const Christoffel& G, const Vec3& Ut) {
  ConvectionCoefficients n;
  n.n1 = Ut;
  for (int i = 0; i < 3; ++i) n.n0.row(i) = (G[i].transpose() * Ut).transpose();
  return n;
}

Vec3 laplacian(const VectorJet& U) {
  return {U.hess[0].trace(), U.hess[1].trace(), U.hess[2].trace()};
}

Vec3 op_L(const VectorJet& U, const PointCoefficients& c) {
  require_strong(c);
  return apply_L(U, c);
}

Vec3 op_M(const VectorJet& U, const PointCoefficients& c) { return U.grad * c.m1 + c.m0 * U.value; }

Vec3 op_N(const VectorJet& U, const ConvectionCoefficients& n) { return U.grad * n.n1 + n.n0 * U.value; }

Vec3 op_G(const ScalarJet& P, const PointCoefficients& c) { return c.c1 * P.grad; }

Vec3 rhs_F(const VectorJet& U, const ScalarJet& P, const PointCoefficients& c, const ConvectionCoefficients& n) {
  return (op_L(U, c) - laplacian(U)) - op_M(U, c) - op_N(U, n) - (op_G(P, c) - P.grad);
}

std::pair<Vec3, Vec3> rhs_G_H(const Vec3& A, const Vec3& Omega, const Vec3& Ot, const Mat3& J) {
  return {-Ot.cross(A), -Ot.cross(J * Omega)};
}

Vec3 op_F_l(int l, const std::vector<PointCoefficients>& coeff, const std::vector<ConvectionCoefficients>& conv,
            const std::vector<VectorJet>& dU, const std::vector<ScalarJet>& dP) {
  require(l >= 1, "op_F_l: order must be at least 1");
  require(coeff.size() > static_cast<std::size_t>(l) && conv.size() > static_cast<std::size_t>(l),
          "op_F_l: missing coefficient derivative caches");
  require(dU.size() >= static_cast<std::size_t>(l) && dP.size() >= static_cast<std::size_t>(l),
          "op_F_l: missing field derivatives");
  Vec3 out = Vec3::Zero();
  for (int p = 0; p < l; ++p) {
    const PointCoefficients& c = coeff[l - p];
    const Vec3 term = op_L(dU[p], c) - op_M(dU[p], c) - op_N(dU[p], conv[l - p]) - op_G(dP[p], c);
    out += binomial(l, p) * term;
  }
  return out;
}

std::pair<Vec3, Vec3> rhs_G_H_l(int l, const std::vector<Vec3>& dOt, const std::vector<Vec3>& dA,
                                const std::vector<Vec3>& dOmega, const Mat3& J) {
  require(l >= 1, "rhs_G_H_l: order must be at least 1");
  require(dOt.size() > static_cast<std::size_t>(l) && dA.size() >= static_cast<std::size_t>(l) &&
              dOmega.size() >= static_cast<std::size_t>(l),
          "rhs_G_H_l: missing derivatives");
  Vec3 G = Vec3::Zero(), H = Vec3::Zero();
  for (int p = 0; p < l; ++p) {
    G -= binomial(l, p) * dOt[l - p].cross(dA[p]);
    H -= binomial(l, p) * dOt[l - p].cross(J * dOmega[p]);
  }
  return {G, H};
}

double weak_GL_integrand(const VectorJet& U, const VectorJet& psi, const Mat3& g, const Mat3& ginv,
                         const Christoffel& G) {
  // gradients: dU(i, j) = d_j U_i
  const Mat3& dU = U.grad;
  const Mat3& dp = psi.grad;
  const Mat3 DU = 0.5 * (dU + dU.transpose());
  const Mat3 Dp = 0.5 * (dp + dp.transpose());
  double s = 2.0 * DU.cwiseProduct(Dp).sum();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
          const double dd = (i == k && j == l) ? 1.0 : 0.0;
          s += (g(i, k) * ginv(j, l) - dd) * dU(i, j) * dp(k, l);
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        // (Gamma^m_kl g_im g^jl + Gamma^j_ik) d_j U_i psi_k
        double a = G[j](i, k);
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m) a += G[m](k, l) * g(i, m) * ginv(j, l);
        s += a * dU(i, j) * psi.value[k];
      }
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k) {
        // (Gamma^m_ij g_km g^jl + Gamma^l_ij delta_jk) U_i d_l psi_k
        double a = G[l](i, k);
        for (int j = 0; j < 3; ++j)
          for (int m = 0; m < 3; ++m) a += G[m](i, j) * g(k, m) * ginv(j, l);
        s += a * U.value[i] * dp(k, l);
      }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      // (Gamma^m_ij Gamma^p_kl g_mp g^jl + Gamma^l_ij Gamma^j_kl) U_i psi_k
      double a = 0.0;
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
          a += G[l](i, j) * G[j](k, l);
          for (int m = 0; m < 3; ++m)
            for (int p = 0; p < 3; ++p) a += G[m](i, j) * G[p](k, l) * g(m, p) * ginv(j, l);
        }
      s += a * U.value[i] * psi.value[k];
    }
  return s;
}

Mat3 pushforward_gradient(const VectorJet& U, const Mat3& gradX, const Mat3& gradY, const Christoffel& G) {
  Mat3 V = U.grad;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) V(k, j) += G[k].row(j).dot(U.value);
  return gradX * V * gradY;
}

MetricRates exact_metric_rates(const TransformSnapshot& td) {
  MetricRates r;
  const std::size_t n = td.size();
  r.dG.resize(n);
  r.dGinv.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    r.dG[p] = td.dXdot[p].transpose() * td.gradX[p] + td.gradX[p].transpose() * td.dXdot[p];
    r.dGinv[p] = -td.ginv[p] * r.dG[p] * td.ginv[p];
  }
  return r;
}

MetricRates fd_metric_rates(const CoefficientDerivatives& d) {
  require(d.order >= 1, "metric rates: need first-order derivative caches");
  return {d.g[1], d.ginv[1]};
}

double pressure_cancellation(const std::vector<Vec3>& gradP, const std::vector<Mat3>& G,
                             const std::vector<Mat3>& Ginv, const MetricRates& rates) {
  require(gradP.size() == G.size() && G.size() == Ginv.size() && G.size() == rates.dG.size() &&
              G.size() == rates.dGinv.size(),
          "pressure cancellation: inconsistent point counts");
  double worst = 0.0;
  for (std::size_t p = 0; p < G.size(); ++p) {
    const Vec3 r = G[p] * (rates.dGinv[p] * gradP[p]) + rates.dG[p] * (Ginv[p] * gradP[p]);
    worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace fsi
