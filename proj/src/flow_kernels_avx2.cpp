// Compiled with -mavx2 -mfma; only reached through runtime dispatch.
#include <immintrin.h>

#include "fsi/flow_kernels.hpp"

namespace fsi::kernels {

namespace {

struct V3 {
  __m256d c[3];
};

inline __m256d bc(double v) { return _mm256_set1_pd(v); }

inline V3 cross(const V3& a, const V3& b) {
  return {{_mm256_fmsub_pd(a.c[1], b.c[2], _mm256_mul_pd(a.c[2], b.c[1])),
           _mm256_fmsub_pd(a.c[2], b.c[0], _mm256_mul_pd(a.c[0], b.c[2])),
           _mm256_fmsub_pd(a.c[0], b.c[1], _mm256_mul_pd(a.c[1], b.c[0]))}};
}

struct KinV {
  __m256d q[3], a[3], o[3];
};

inline KinV broadcast(const StageKinematics& k) {
  KinV v;
  for (int i = 0; i < 3; ++i) {
    v.q[i] = bc(k.q[i]);
    v.a[i] = bc(k.a[i]);
    v.o[i] = bc(k.omega[i]);
  }
  return v;
}

// Mirrors eval_transport_point lane-wise.
inline void eval4(const CutoffParams& cut, const KinV& k, const __m256d x[3], __m256d w[3],
                  __m256d gw[9]) {
  V3 r;
  for (int i = 0; i < 3; ++i) r.c[i] = _mm256_sub_pd(x[i], k.q[i]);
  const __m256d rho2 =
      _mm256_fmadd_pd(r.c[0], r.c[0], _mm256_fmadd_pd(r.c[1], r.c[1], _mm256_mul_pd(r.c[2], r.c[2])));
  const __m256d rho = _mm256_sqrt_pd(rho2);
  const double width = cut.outer - cut.inner;
  __m256d s = _mm256_div_pd(_mm256_sub_pd(rho, bc(cut.inner)), bc(width));
  s = _mm256_min_pd(_mm256_max_pd(s, bc(0.0)), bc(1.0));
  const __m256d one = bc(1.0);
  const __m256d om = _mm256_sub_pd(one, s);
  const __m256d s2 = _mm256_mul_pd(s, s);
  const __m256d S = _mm256_mul_pd(_mm256_mul_pd(s2, s),
                                  _mm256_fmadd_pd(bc(6.0), s2, _mm256_fnmadd_pd(bc(15.0), s, bc(10.0))));
  const __m256d S1 = _mm256_mul_pd(bc(30.0), _mm256_mul_pd(s2, _mm256_mul_pd(om, om)));
  const __m256d S2 = _mm256_mul_pd(_mm256_mul_pd(bc(60.0), s),
                                   _mm256_mul_pd(om, _mm256_fnmadd_pd(bc(2.0), s, one)));
  const __m256d z = _mm256_sub_pd(one, S);
  const __m256d z1 = _mm256_div_pd(S1, bc(-width));
  const __m256d z2 = _mm256_div_pd(S2, bc(-width * width));
  const __m256d e1 = _mm256_div_pd(z1, _mm256_max_pd(rho, bc(1e-300)));
  const __m256d h2 = _mm256_div_pd(_mm256_sub_pd(z2, e1), _mm256_max_pd(rho2, bc(1e-300)));

  V3 a{{k.a[0], k.a[1], k.a[2]}}, o{{k.o[0], k.o[1], k.o[2]}};
  const V3 oxr = cross(o, r);
  const V3 axr = cross(a, r);
  V3 v, psi;
  const __m256d half = bc(0.5);
  const __m256d hr2 = _mm256_mul_pd(half, rho2);
  for (int i = 0; i < 3; ++i) {
    v.c[i] = _mm256_add_pd(a.c[i], oxr.c[i]);
    psi.c[i] = _mm256_fnmadd_pd(hr2, o.c[i], _mm256_mul_pd(half, axr.c[i]));
  }
  const V3 c = cross(r, psi);
  const __m256d ra =
      _mm256_fmadd_pd(r.c[0], a.c[0], _mm256_fmadd_pd(r.c[1], a.c[1], _mm256_mul_pd(r.c[2], a.c[2])));
  __m256d u[3];
  for (int i = 0; i < 3; ++i) {
    w[i] = _mm256_fmadd_pd(z, v.c[i], _mm256_mul_pd(e1, c.c[i]));
    const __m256d t = _mm256_add_pd(_mm256_add_pd(v.c[i], _mm256_mul_pd(half, a.c[i])), oxr.c[i]);
    u[i] = _mm256_fmadd_pd(e1, t, _mm256_mul_pd(h2, c.c[i]));
  }
  const __m256d diag = _mm256_mul_pd(_mm256_mul_pd(bc(-0.5), e1), ra);
  // skew(p) = [[0,-p2,p1],[p2,0,-p0],[-p1,p0,0]]
  auto skc = [&](int i, int m, const __m256d zz, const __m256d ee) {
    // z*skew(o)_{im} - e1*skew(psi)_{im}
    if (i == m) return diag;
    const int j = 3 - i - m;
    const bool neg = ((i + 1) % 3 == m);
    __m256d val = _mm256_fmsub_pd(zz, o.c[j], _mm256_mul_pd(ee, psi.c[j]));
    return neg ? _mm256_sub_pd(_mm256_setzero_pd(), val) : val;
  };
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 3; ++m) gw[3 * i + m] = _mm256_fmadd_pd(u[i], r.c[m], skc(i, m, z, e1));
}

inline void rate4(const CutoffParams& cut, const KinV& k, const __m256d x[3], const __m256d g[9],
                  __m256d dx[3], __m256d dg[9]) {
  __m256d gw[9];
  eval4(cut, k, x, dx, gw);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      dg[3 * i + j] = _mm256_fmadd_pd(
          gw[3 * i], g[j], _mm256_fmadd_pd(gw[3 * i + 1], g[3 + j], _mm256_mul_pd(gw[3 * i + 2], g[6 + j])));
}

}  // namespace

void flow_rk4_avx2(const CutoffParams& cut, const StageKinematics* stages, int nsub, double h,
                   const FlowBatch& b) {
  const std::size_t nv = b.n / 4 * 4;
  const __m256d hh = bc(0.5 * h), hf = bc(h), h6 = bc(h / 6.0), two = bc(2.0);
  for (std::size_t p = 0; p < nv; p += 4) {
    __m256d x[3], g[9];
    for (int i = 0; i < 3; ++i) x[i] = _mm256_loadu_pd(b.x[i] + p);
    for (int i = 0; i < 9; ++i) g[i] = _mm256_loadu_pd(b.g[i] + p);
    for (int s = 0; s < nsub; ++s) {
      const KinV k0 = broadcast(stages[3 * s]);
      const KinV km = broadcast(stages[3 * s + 1]);
      const KinV k1 = broadcast(stages[3 * s + 2]);
      __m256d kx[4][3], kg[4][9], xt[3], gt[9];
      rate4(cut, k0, x, g, kx[0], kg[0]);
      for (int i = 0; i < 3; ++i) xt[i] = _mm256_fmadd_pd(hh, kx[0][i], x[i]);
      for (int i = 0; i < 9; ++i) gt[i] = _mm256_fmadd_pd(hh, kg[0][i], g[i]);
      rate4(cut, km, xt, gt, kx[1], kg[1]);
      for (int i = 0; i < 3; ++i) xt[i] = _mm256_fmadd_pd(hh, kx[1][i], x[i]);
      for (int i = 0; i < 9; ++i) gt[i] = _mm256_fmadd_pd(hh, kg[1][i], g[i]);
      rate4(cut, km, xt, gt, kx[2], kg[2]);
      for (int i = 0; i < 3; ++i) xt[i] = _mm256_fmadd_pd(hf, kx[2][i], x[i]);
      for (int i = 0; i < 9; ++i) gt[i] = _mm256_fmadd_pd(hf, kg[2][i], g[i]);
      rate4(cut, k1, xt, gt, kx[3], kg[3]);
      for (int i = 0; i < 3; ++i) {
        const __m256d sum = _mm256_add_pd(_mm256_add_pd(kx[0][i], kx[3][i]),
                                          _mm256_mul_pd(two, _mm256_add_pd(kx[1][i], kx[2][i])));
        x[i] = _mm256_fmadd_pd(h6, sum, x[i]);
      }
      for (int i = 0; i < 9; ++i) {
        const __m256d sum = _mm256_add_pd(_mm256_add_pd(kg[0][i], kg[3][i]),
                                          _mm256_mul_pd(two, _mm256_add_pd(kg[1][i], kg[2][i])));
        g[i] = _mm256_fmadd_pd(h6, sum, g[i]);
      }
    }
    for (int i = 0; i < 3; ++i) _mm256_storeu_pd(b.x[i] + p, x[i]);
    for (int i = 0; i < 9; ++i) _mm256_storeu_pd(b.g[i] + p, g[i]);
  }
  if (nv < b.n) {
    FlowBatch tail = b;
    for (int i = 0; i < 3; ++i) tail.x[i] = b.x[i] + nv;
    for (int i = 0; i < 9; ++i) tail.g[i] = b.g[i] + nv;
    tail.n = b.n - nv;
    flow_rk4_scalar(cut, stages, nsub, h, tail);
  }
}

void field_rate_avx2(const CutoffParams& cut, const StageKinematics& kin, const FlowBatch& b,
                     double* const wout[3], double* const gdot[9]) {
  const std::size_t nv = b.n / 4 * 4;
  const KinV k = broadcast(kin);
  for (std::size_t p = 0; p < nv; p += 4) {
    __m256d x[3], g[9], w[3], dg[9];
    for (int i = 0; i < 3; ++i) x[i] = _mm256_loadu_pd(b.x[i] + p);
    for (int i = 0; i < 9; ++i) g[i] = _mm256_loadu_pd(b.g[i] + p);
    rate4(cut, k, x, g, w, dg);
    for (int i = 0; i < 3; ++i) _mm256_storeu_pd(wout[i] + p, w[i]);
    for (int i = 0; i < 9; ++i) _mm256_storeu_pd(gdot[i] + p, dg[i]);
  }
  if (nv < b.n) {
    FlowBatch tail = b;
    for (int i = 0; i < 3; ++i) tail.x[i] = b.x[i] + nv;
    for (int i = 0; i < 9; ++i) tail.g[i] = b.g[i] + nv;
    tail.n = b.n - nv;
    double* wt[3];
    double* gt[9];
    for (int i = 0; i < 3; ++i) wt[i] = wout[i] + nv;
    for (int i = 0; i < 9; ++i) gt[i] = gdot[i] + nv;
    field_rate_scalar(cut, kin, tail, wt, gt);
  }
}

}  // namespace fsi::kernels
