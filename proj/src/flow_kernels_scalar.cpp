#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "fsi/flow_kernels.hpp"

namespace fsi::kernels {

void eval_transport_point(const CutoffParams& cut, const StageKinematics& k, const double x[3],
                          double w[3], double gradw[9]) {
  const double r[3] = {x[0] - k.q[0], x[1] - k.q[1], x[2] - k.q[2]};
  const double rho2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  const double rho = std::sqrt(rho2);
  const double width = cut.outer - cut.inner;
  const double s = std::clamp((rho - cut.inner) / width, 0.0, 1.0);
  const double om = 1.0 - s;
  const double S = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  const double S1 = 30.0 * s * s * om * om;
  const double S2 = 60.0 * s * om * (1.0 - 2.0 * s);
  const double z = 1.0 - S;
  const double z1 = -S1 / width;
  const double z2 = -S2 / (width * width);
  const double rho_safe = std::max(rho, 1e-300);
  const double e1 = z1 / rho_safe;
  const double h2 = (z2 - e1) / std::max(rho2, 1e-300);

  const double* a = k.a;
  const double* o = k.omega;
  const double oxr[3] = {o[1] * r[2] - o[2] * r[1], o[2] * r[0] - o[0] * r[2],
                         o[0] * r[1] - o[1] * r[0]};
  const double axr[3] = {a[1] * r[2] - a[2] * r[1], a[2] * r[0] - a[0] * r[2],
                         a[0] * r[1] - a[1] * r[0]};
  double v[3], psi[3];
  for (int i = 0; i < 3; ++i) {
    v[i] = a[i] + oxr[i];
    psi[i] = 0.5 * axr[i] - 0.5 * rho2 * o[i];
  }
  const double c[3] = {r[1] * psi[2] - r[2] * psi[1], r[2] * psi[0] - r[0] * psi[2],
                       r[0] * psi[1] - r[1] * psi[0]};
  const double ra = r[0] * a[0] + r[1] * a[1] + r[2] * a[2];
  double u[3];
  for (int i = 0; i < 3; ++i) {
    w[i] = z * v[i] + e1 * c[i];
    // r x omega = -oxr
    u[i] = e1 * (v[i] + 0.5 * a[i] + oxr[i]) + h2 * c[i];
  }
  // skew(p)_{im} = eps_{ijm} p_j
  auto sk = [](const double* p, int i, int m) {
    static const int next[3] = {1, 2, 0};
    if (i == m) return 0.0;
    if (next[i] == m) return -p[3 - i - m];
    return p[3 - i - m];
  };
  const double diag = -0.5 * e1 * ra;
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 3; ++m)
      gradw[3 * i + m] = u[i] * r[m] + z * sk(o, i, m) - e1 * sk(psi, i, m) + (i == m ? diag : 0.0);
}

namespace {

inline void rate(const CutoffParams& cut, const StageKinematics& k, const double x[3],
                 const double g[9], double dx[3], double dg[9]) {
  double gw[9];
  eval_transport_point(cut, k, x, dx, gw);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      dg[3 * i + j] = gw[3 * i] * g[j] + gw[3 * i + 1] * g[3 + j] + gw[3 * i + 2] * g[6 + j];
}

}  // namespace

void flow_rk4_scalar(const CutoffParams& cut, const StageKinematics* stages, int nsub, double h,
                     const FlowBatch& b) {
  for (std::size_t p = 0; p < b.n; ++p) {
    double x[3], g[9];
    for (int i = 0; i < 3; ++i) x[i] = b.x[i][p];
    for (int i = 0; i < 9; ++i) g[i] = b.g[i][p];
    for (int s = 0; s < nsub; ++s) {
      const StageKinematics& k0 = stages[3 * s];
      const StageKinematics& km = stages[3 * s + 1];
      const StageKinematics& k1 = stages[3 * s + 2];
      double kx[4][3], kg[4][9], xt[3], gt[9];
      rate(cut, k0, x, g, kx[0], kg[0]);
      for (int i = 0; i < 3; ++i) xt[i] = x[i] + 0.5 * h * kx[0][i];
      for (int i = 0; i < 9; ++i) gt[i] = g[i] + 0.5 * h * kg[0][i];
      rate(cut, km, xt, gt, kx[1], kg[1]);
      for (int i = 0; i < 3; ++i) xt[i] = x[i] + 0.5 * h * kx[1][i];
      for (int i = 0; i < 9; ++i) gt[i] = g[i] + 0.5 * h * kg[1][i];
      rate(cut, km, xt, gt, kx[2], kg[2]);
      for (int i = 0; i < 3; ++i) xt[i] = x[i] + h * kx[2][i];
      for (int i = 0; i < 9; ++i) gt[i] = g[i] + h * kg[2][i];
      rate(cut, k1, xt, gt, kx[3], kg[3]);
      for (int i = 0; i < 3; ++i)
        x[i] += h / 6.0 * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
      for (int i = 0; i < 9; ++i)
        g[i] += h / 6.0 * (kg[0][i] + 2.0 * kg[1][i] + 2.0 * kg[2][i] + kg[3][i]);
    }
    for (int i = 0; i < 3; ++i) b.x[i][p] = x[i];
    for (int i = 0; i < 9; ++i) b.g[i][p] = g[i];
  }
}

void field_rate_scalar(const CutoffParams& cut, const StageKinematics& k, const FlowBatch& b,
                       double* const wout[3], double* const gdot[9]) {
  for (std::size_t p = 0; p < b.n; ++p) {
    double x[3], g[9], w[3], dg[9];
    for (int i = 0; i < 3; ++i) x[i] = b.x[i][p];
    for (int i = 0; i < 9; ++i) g[i] = b.g[i][p];
    rate(cut, k, x, g, w, dg);
    for (int i = 0; i < 3; ++i) wout[i][p] = w[i];
    for (int i = 0; i < 9; ++i) gdot[i][p] = dg[i];
  }
}

SimdLevel detected_simd_level() {
  const char* env = std::getenv("FSI_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return SimdLevel::Scalar;
#if FSI_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return SimdLevel::Avx2;
#endif
  return SimdLevel::Scalar;
}

const char* simd_level_name(SimdLevel level) {
  return level == SimdLevel::Avx2 ? "avx2" : "scalar";
}

FlowRk4Fn flow_rk4_kernel(SimdLevel level) {
#if FSI_HAVE_AVX2_KERNELS
  if (level == SimdLevel::Avx2) return &flow_rk4_avx2;
#endif
  (void)level;
  return &flow_rk4_scalar;
}

FieldRateFn field_rate_kernel(SimdLevel level) {
#if FSI_HAVE_AVX2_KERNELS
  if (level == SimdLevel::Avx2) return &field_rate_avx2;
#endif
  (void)level;
  return &field_rate_scalar;
}

}  // namespace fsi::kernels
