#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fsi/flow_kernels.hpp"

using namespace fsi::kernels;

namespace {

StageKinematics make_kin(double t) {
  return {{0.05 * std::sin(t), -0.03 * t, 0.02},
          {0.4 * std::cos(t), 0.1, -0.3 * t},
          {0.2, -0.5 + t, 0.7 * std::sin(2 * t)}};
}

struct SoA {
  std::vector<double> x[3], g[9];
  FlowBatch view() {
    FlowBatch b{};
    for (int i = 0; i < 3; ++i) b.x[i] = x[i].data();
    for (int i = 0; i < 9; ++i) b.g[i] = g[i].data();
    b.n = x[0].size();
    return b;
  }
};

SoA random_batch(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SoA s;
  for (auto& v : s.x) v.resize(n);
  for (auto& v : s.g) v.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    // Points spread over the whole cutoff transition, including rho = 0.
    double d[3] = {u(rng), u(rng), u(rng)};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    const double rho = p == 0 ? 0.0 : 2.2 * (p % 17) / 16.0;
    for (int i = 0; i < 3; ++i) s.x[i][p] = d[i] / len * rho;
    for (int i = 0; i < 9; ++i) s.g[i][p] = (i % 4 == 0 ? 1.0 : 0.0) + 0.1 * u(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("transport field gradient matches finite differences and is trace free") {
  const CutoffParams cut{0.6, 1.7};
  const StageKinematics k = make_kin(0.3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  for (int trial = 0; trial < 200; ++trial) {
    double x[3] = {u(rng), u(rng), u(rng)};
    double w[3], gw[9];
    eval_transport_point(cut, k, x, w, gw);
    CHECK(std::abs(gw[0] + gw[4] + gw[8]) < 1e-12);
    const double h = 1e-5;
    for (int m = 0; m < 3; ++m) {
      double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
      xp[m] += h;
      xm[m] -= h;
      double wp[3], wm[3], tmp[9];
      eval_transport_point(cut, k, xp, wp, tmp);
      eval_transport_point(cut, k, xm, wm, tmp);
      for (int i = 0; i < 3; ++i) CHECK(std::abs((wp[i] - wm[i]) / (2 * h) - gw[3 * i + m]) < 1e-7);
    }
  }
}

TEST_CASE("transport field is rigid inside and vanishes outside the cutoff") {
  const CutoffParams cut{0.6, 1.7};
  const StageKinematics k = make_kin(0.0);
  double w[3], gw[9];
  const double xin[3] = {k.q[0] + 0.3, k.q[1] - 0.2, k.q[2] + 0.1};
  eval_transport_point(cut, k, xin, w, gw);
  const double r[3] = {0.3, -0.2, 0.1};
  const double* o = k.omega;
  const double rigid[3] = {k.a[0] + o[1] * r[2] - o[2] * r[1], k.a[1] + o[2] * r[0] - o[0] * r[2],
                           k.a[2] + o[0] * r[1] - o[1] * r[0]};
  for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(rigid[i]).epsilon(1e-14));
  const double xout[3] = {k.q[0] + 1.8, k.q[1], k.q[2]};
  eval_transport_point(cut, k, xout, w, gw);
  for (int i = 0; i < 3; ++i) CHECK(w[i] == 0.0);
  for (int i = 0; i < 9; ++i) CHECK(gw[i] == 0.0);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  if (detected_simd_level() == SimdLevel::Scalar) {
    MESSAGE("no SIMD level available; equivalence check skipped");
    return;
  }
  const SimdLevel level = detected_simd_level();
  const CutoffParams cut{0.6, 1.7};
  const int nsub = 4;
  const double h = 0.01;
  std::vector<StageKinematics> stages;
  for (int s = 0; s < nsub; ++s)
    for (double f : {0.0, 0.5, 1.0}) stages.push_back(make_kin((s + f) * h));

  for (std::size_t n : {1u, 4u, 7u, 64u, 101u}) {
    SoA a = random_batch(n, 11), b = random_batch(n, 11);
    flow_rk4_kernel(SimdLevel::Scalar)(cut, stages.data(), nsub, h, a.view());
    flow_rk4_kernel(level)(cut, stages.data(), nsub, h, b.view());
    for (std::size_t p = 0; p < n; ++p) {
      for (int i = 0; i < 3; ++i) CHECK(std::abs(a.x[i][p] - b.x[i][p]) < 1e-13);
      for (int i = 0; i < 9; ++i) CHECK(std::abs(a.g[i][p] - b.g[i][p]) < 1e-13);
    }

    std::vector<double> wa[3], wb[3], ga[9], gb[9];
    double *pwa[3], *pwb[3], *pga[9], *pgb[9];
    for (int i = 0; i < 3; ++i) {
      wa[i].resize(n), wb[i].resize(n);
      pwa[i] = wa[i].data(), pwb[i] = wb[i].data();
    }
    for (int i = 0; i < 9; ++i) {
      ga[i].resize(n), gb[i].resize(n);
      pga[i] = ga[i].data(), pgb[i] = gb[i].data();
    }
    SoA c = random_batch(n, 5);
    field_rate_kernel(SimdLevel::Scalar)(cut, stages[1], c.view(), pwa, pga);
    field_rate_kernel(level)(cut, stages[1], c.view(), pwb, pgb);
    for (std::size_t p = 0; p < n; ++p) {
      for (int i = 0; i < 3; ++i) CHECK(std::abs(wa[i][p] - wb[i][p]) < 1e-13);
      for (int i = 0; i < 9; ++i) CHECK(std::abs(ga[i][p] - gb[i][p]) < 1e-13);
    }
  }
}

TEST_CASE("RK4 flow is fourth-order accurate and preserves det G = 1") {
  const CutoffParams cut{0.6, 1.7};
  auto run = [&](int nsub) {
    const double T = 0.4, h = T / nsub;
    std::vector<StageKinematics> st;
    for (int s = 0; s < nsub; ++s)
      for (double f : {0.0, 0.5, 1.0}) st.push_back(make_kin((s + f) * h));
    SoA a = random_batch(16, 2);
    for (std::size_t p = 0; p < 16; ++p)
      for (int i = 0; i < 9; ++i) a.g[i][p] = (i % 4 == 0) ? 1.0 : 0.0;
    flow_rk4_kernel(SimdLevel::Scalar)(cut, st.data(), nsub, h, a.view());
    return a;
  };
  const SoA ref = run(256), c1 = run(8), c2 = run(16);
  double e1 = 0, e2 = 0, detdev = 0;
  for (std::size_t p = 0; p < 16; ++p) {
    for (int i = 0; i < 3; ++i) {
      e1 = std::max(e1, std::abs(c1.x[i][p] - ref.x[i][p]));
      e2 = std::max(e2, std::abs(c2.x[i][p] - ref.x[i][p]));
    }
    const auto& g = ref.g;
    const double det = g[0][p] * (g[4][p] * g[8][p] - g[5][p] * g[7][p]) -
                       g[1][p] * (g[3][p] * g[8][p] - g[5][p] * g[6][p]) +
                       g[2][p] * (g[3][p] * g[7][p] - g[4][p] * g[6][p]);
    detdev = std::max(detdev, std::abs(det - 1.0));
  }
  CHECK(e1 / e2 > 12.0);
  CHECK(detdev < 1e-10);
}
