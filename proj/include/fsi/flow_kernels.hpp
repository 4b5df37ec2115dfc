#pragma once

#include <cstddef>

namespace fsi::kernels {

/// Radial quintic cutoff: 1 for rho <= inner, 0 for rho >= outer.
struct CutoffParams {
  double inner = 0.0;
  double outer = 1.0;
};

/// Body center, translational and angular velocity at one stage time (physical frame).
struct StageKinematics {
  double q[3];
  double a[3];
  double omega[3];
};

/// Structure-of-arrays view of label states: positions x[3][n], gradients g[9][n]
/// (row-major 3x3, g[3*i+j] = dX_i/dy_j).
struct FlowBatch {
  double* x[3];
  double* g[9];
  std::size_t n;
};

/// Field w = curl(zeta psi) and its gradient (row-major, gradw[3*i+m] = dw_i/dx_m) at one point.
void eval_transport_point(const CutoffParams& cut, const StageKinematics& k, const double x[3],
                          double w[3], double gradw[9]);

/// Advance every label of the batch through `nsub` classical RK4 substeps of size h.
/// `stages` holds 3 entries per substep: start, midpoint, end.
using FlowRk4Fn = void (*)(const CutoffParams&, const StageKinematics* stages, int nsub, double h,
                           const FlowBatch& batch);

/// Evaluate w(x) and (grad w)(x) g for every label; outputs are SoA like the batch.
using FieldRateFn = void (*)(const CutoffParams&, const StageKinematics&, const FlowBatch& batch,
                             double* const wout[3], double* const gdot[9]);

void flow_rk4_scalar(const CutoffParams&, const StageKinematics*, int, double, const FlowBatch&);
void field_rate_scalar(const CutoffParams&, const StageKinematics&, const FlowBatch&,
                       double* const[3], double* const[9]);

#if defined(__x86_64__) || defined(_M_X64)
#define FSI_HAVE_AVX2_KERNELS 1
void flow_rk4_avx2(const CutoffParams&, const StageKinematics*, int, double, const FlowBatch&);
void field_rate_avx2(const CutoffParams&, const StageKinematics&, const FlowBatch&,
                     double* const[3], double* const[9]);
#else
#define FSI_HAVE_AVX2_KERNELS 0
#endif

enum class SimdLevel { Scalar, Avx2 };

/// Best level supported by this CPU; FSI_SIMD=scalar in the environment forces the reference path.
SimdLevel detected_simd_level();
const char* simd_level_name(SimdLevel level);

FlowRk4Fn flow_rk4_kernel(SimdLevel level);
FieldRateFn field_rate_kernel(SimdLevel level);

}  // namespace fsi::kernels
