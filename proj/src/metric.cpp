#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fsi/finite_difference.hpp"
#include "fsi/transform.hpp"

namespace fsi {

namespace {

constexpr int kMetricPerCenter = 1 + 3 * kArm;
constexpr int kJetPerCenter = kMetricPerCenter + 3 * kArm * kArm;
constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

int stencil_offset(StencilKind k, int j) {
  switch (k) {
    case StencilKind::Forward: return j + 1;
    case StencilKind::Backward: return -(j + 1);
    default: return kCentralOffsets[j];
  }
}

template <class T>
T weighted_differences(const double* w, const T& f0, const T* f) {
  T acc = w[0] * (f[0] - f0);
  for (int j = 1; j < kArm; ++j) acc += w[j] * (f[j] - f0);
  return acc;
}

// d/dy_m of f from its values on one axis arm; f0 is the center value.
template <class T>
T axis_derivative(StencilKind k, const T& f0, const T* f, double h) {
  if (k == StencilKind::Central) return T(weighted_differences(kCentralD1, f0, f) / h);
  const T d = weighted_differences(kForwardD1, f0, f) / h;
  return k == StencilKind::Forward ? d : T(-d);
}

Christoffel christoffel(const Mat3& ginv, const std::array<Mat3, 3>& dg) {
  Christoffel G;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += ginv(k, l) * (dg[j](i, l) + dg[i](j, l) - dg[l](i, j));
        G[k](i, j) = G[k](j, i) = 0.5 * s;
      }
  return G;
}

Mat3 metric_of(const LabelState& s, std::size_t p) {
  const Mat3 G = s.gradient(p);
  return G.transpose() * G;
}

void rate_at_centers(const FlowMap& flow, const LabelState& state, std::size_t per_center,
                     std::vector<Vec3>& w, std::vector<Mat3>& gdot) {
  const std::size_t n = state.size() / per_center;
  std::vector<double> cx[3], cg[9], ow[3], og[9];
  for (int i = 0; i < 3; ++i) {
    cx[i].resize(n);
    ow[i].resize(n);
  }
  for (int i = 0; i < 9; ++i) {
    cg[i].resize(n);
    og[i].resize(n);
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (int i = 0; i < 3; ++i) cx[i][c] = state.x[i][c * per_center];
    for (int i = 0; i < 9; ++i) cg[i][c] = state.g[i][c * per_center];
  }
  kernels::FlowBatch b{};
  double* pw[3];
  double* pg[9];
  for (int i = 0; i < 3; ++i) b.x[i] = cx[i].data(), pw[i] = ow[i].data();
  for (int i = 0; i < 9; ++i) b.g[i] = cg[i].data(), pg[i] = og[i].data();
  b.n = n;
  const MotionSample k = flow.snapshot_kinematics(state.t);
  const kernels::StageKinematics sk{{k.q[0], k.q[1], k.q[2]}, {k.a[0], k.a[1], k.a[2]},
                                    {k.omega[0], k.omega[1], k.omega[2]}};
  if (n > 0) kernels::field_rate_kernel(flow.simd_level())(flow.cutoff().params(), sk, b, pw, pg);
  w.resize(n);
  gdot.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    w[c] = Vec3(ow[0][c], ow[1][c], ow[2][c]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gdot[c](i, j) = og[3 * i + j][c];
  }
}

}  // namespace

LabelDomain annulus_domain(const Vec3& center, double rho_min, double rho_max) {
  return [=](const Vec3& y) {
    const double r = (y - center).norm();
    return r >= rho_min && r <= rho_max;
  };
}

LabelCloud make_metric_cloud(const std::vector<Vec3>& centers, double h, const LabelDomain& inside) {
  require(h >= 0.0, "label cloud: negative stencil step");
  LabelCloud c;
  c.centers = centers;
  c.h = h;
  c.per_center = h > 0.0 ? kMetricPerCenter : 1;
  c.labels.reserve(centers.size() * c.per_center);
  c.kind.resize(centers.size());
  for (std::size_t p = 0; p < centers.size(); ++p) {
    const Vec3& y = centers[p];
    c.labels.push_back(y);
    if (h == 0.0) continue;
    bool flagged = false;
    for (int m = 0; m < 3; ++m) {
      StencilKind chosen = StencilKind::Central;
      for (StencilKind k : {StencilKind::Central, StencilKind::Forward, StencilKind::Backward}) {
        bool ok = true;
        for (int j = 0; j < kArm && ok; ++j) ok = inside(y + stencil_offset(k, j) * h * Vec3::Unit(m));
        if (ok) {
          chosen = k;
          break;
        }
      }
      // No admissible stencil: keep the central one (the flow is defined on all of R^3).
      c.kind[p][m] = chosen;
      flagged = flagged || chosen != StencilKind::Central;
      for (int j = 0; j < kArm; ++j) c.labels.push_back(y + stencil_offset(chosen, j) * h * Vec3::Unit(m));
    }
    if (flagged) ++c.one_sided;
  }
  return c;
}

LabelCloud make_jet_cloud(const std::vector<Vec3>& centers, double h) {
  require(h > 0.0, "jet cloud: stencil step must be positive");
  LabelCloud c;
  c.centers = centers;
  c.h = h;
  c.per_center = kJetPerCenter;
  c.kind.assign(centers.size(), {StencilKind::Central, StencilKind::Central, StencilKind::Central});
  c.labels.reserve(centers.size() * kJetPerCenter);
  for (const Vec3& y : centers) {
    c.labels.push_back(y);
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < kArm; ++j) c.labels.push_back(y + kCentralOffsets[j] * h * Vec3::Unit(m));
    for (const auto& pr : kPairs)
      for (int a = 0; a < kArm; ++a)
        for (int b = 0; b < kArm; ++b)
          c.labels.push_back(y + h * (kCentralOffsets[a] * Vec3::Unit(pr[0]) + kCentralOffsets[b] * Vec3::Unit(pr[1])));
  }
  return c;
}

TransformSnapshot build_snapshot(const FlowMap& flow, const LabelCloud& cloud, const LabelState& state) {
  require(state.size() == cloud.labels.size(), "snapshot: label state does not match the cloud");
  require(cloud.per_center == 1 || cloud.per_center == kMetricPerCenter, "snapshot: expects a metric cloud");
  const std::size_t n = cloud.size();
  const std::size_t pc = cloud.per_center;
  TransformSnapshot s;
  s.t = state.t;
  s.kin = flow.snapshot_kinematics(state.t);
  s.y = cloud.centers;
  s.has_gamma = pc == kMetricPerCenter;
  s.one_sided = cloud.one_sided;
  s.X.resize(n);
  s.gradX.resize(n);
  s.gradY.resize(n);
  s.det.resize(n);
  s.g.resize(n);
  s.ginv.resize(n);
  s.gamma.assign(n, zero_christoffel());
  s.Ydot.resize(n);
  rate_at_centers(flow, state, pc, s.Xdot, s.dXdot);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t base = p * pc;
    const Mat3 G = state.gradient(base);
    s.X[p] = state.position(base);
    s.gradX[p] = G;
    s.gradY[p] = G.inverse();
    s.det[p] = G.determinant();
    s.g[p] = G.transpose() * G;
    s.ginv[p] = s.gradY[p] * s.gradY[p].transpose();
    s.Ydot[p] = -s.gradY[p] * s.Xdot[p];
    if (!s.has_gamma) continue;
    std::array<Mat3, 3> dg;
    for (int m = 0; m < 3; ++m) {
      Mat3 f[kArm];
      for (int j = 0; j < kArm; ++j) f[j] = metric_of(state, base + 1 + kArm * m + j);
      dg[m] = axis_derivative(cloud.kind[p][m], s.g[p], f, cloud.h);
    }
    s.gamma[p] = christoffel(s.ginv[p], dg);
  }
  return s;
}

std::vector<GeometryJet> build_jets(const FlowMap& flow, const LabelCloud& cloud, const LabelState& state) {
  require(cloud.per_center == kJetPerCenter, "jets: expects a jet cloud");
  require(state.size() == cloud.labels.size(), "jets: label state does not match the cloud");
  const std::size_t n = cloud.size();
  const double h = cloud.h;
  std::vector<Vec3> w;
  std::vector<Mat3> gdot;
  rate_at_centers(flow, state, kJetPerCenter, w, gdot);
  std::vector<GeometryJet> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t base = p * kJetPerCenter;
    GeometryJet& J = out[p];
    J.y = cloud.centers[p];
    J.X = state.position(base);
    J.gradX = state.gradient(base);
    J.gradY = J.gradX.inverse();
    J.g = J.gradX.transpose() * J.gradX;
    J.ginv = J.gradY * J.gradY.transpose();
    J.Xdot = w[p];
    J.dXdot = gdot[p];
    J.Ydot = -J.gradY * J.Xdot;

    std::array<Mat3, 3> dg;
    std::array<std::array<Mat3, 3>, 3> ddg;
    for (int m = 0; m < 3; ++m) {
      Mat3 f[kArm];
      for (int j = 0; j < kArm; ++j) f[j] = metric_of(state, base + 1 + kArm * m + j);
      dg[m] = axis_derivative(StencilKind::Central, J.g, f, h);
      ddg[m][m] = weighted_differences(kCentralD2, J.g, f) / (h * h);
    }
    for (int pr = 0; pr < 3; ++pr) {
      // Nested first differences along both axes of the pair; the inner arm values are
      // differenced against the axis point they share a coordinate with.
      Mat3 inner[kArm];
      for (int a = 0; a < kArm; ++a) {
        Mat3 f[kArm];
        for (int b = 0; b < kArm; ++b) f[b] = metric_of(state, base + kMetricPerCenter + kArm * kArm * pr + kArm * a + b);
        inner[a] = weighted_differences(kCentralD1, metric_of(state, base + 1 + kArm * kPairs[pr][0] + a), f);
      }
      const Mat3 zero = Mat3::Zero();
      const Mat3 acc = weighted_differences(kCentralD1, zero, inner) / (h * h);
      ddg[kPairs[pr][0]][kPairs[pr][1]] = acc;
      ddg[kPairs[pr][1]][kPairs[pr][0]] = acc;
    }
    J.gamma = christoffel(J.ginv, dg);
    for (int m = 0; m < 3; ++m) {
      J.dginv[m] = -J.ginv * dg[m] * J.ginv;
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = i; j < 3; ++j) {
            double s = 0.0;
            for (int l = 0; l < 3; ++l) {
              const double bracket = dg[j](i, l) + dg[i](j, l) - dg[l](i, j);
              const double dbracket = ddg[m][j](i, l) + ddg[m][i](j, l) - ddg[m][l](i, j);
              s += J.dginv[m](k, l) * bracket + J.ginv(k, l) * dbracket;
            }
            J.dgamma[m][k](i, j) = J.dgamma[m][k](j, i) = 0.5 * s;
          }
    }
  }
  return out;
}

MetricData metric_and_christoffel(const std::function<Mat3(const Vec3&)>& gradX, const Vec3& y, double h) {
  require(h > 0.0, "metric: stencil step must be positive");
  auto metric = [&](const Vec3& p) {
    const Mat3 G = gradX(p);
    return Mat3(G.transpose() * G);
  };
  MetricData out;
  const Mat3 G = gradX(y);
  const Mat3 Yg = G.inverse();
  out.g = G.transpose() * G;
  out.ginv = Yg * Yg.transpose();
  std::array<Mat3, 3> dg;
  for (int m = 0; m < 3; ++m) {
    Mat3 f[kArm];
    for (int j = 0; j < kArm; ++j) f[j] = metric(y + kCentralOffsets[j] * h * Vec3::Unit(m));
    dg[m] = axis_derivative(StencilKind::Central, out.g, f, h);
  }
  out.gamma = christoffel(out.ginv, dg);
  return out;
}

Vec3 invert_transform(const FlowMap& flow, double t, const std::vector<Vec3>& labels,
                      const std::vector<Vec3>& images, const Vec3& x, double tol) {
  require(!labels.empty() && labels.size() == images.size(), "invert_transform: need matching samples");
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < images.size(); ++p) {
    const double d = (images[p] - x).squaredNorm();
    if (d < bd) bd = d, best = p;
  }
  Vec3 y = labels[best] + (x - images[best]);
  for (int it = 0; it < 50; ++it) {
    const auto [X, G] = flow.map(y, t);
    const Vec3 r = X - x;
    if (r.norm() < tol) return y;
    y -= G.lu().solve(r);
  }
  std::ostringstream os;
  os << "invert_transform: Newton did not converge at x = (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
  throw Error(ErrorKind::SolverFailure, os.str());
}

CoefficientDerivatives coefficient_time_derivatives(const std::vector<const TransformSnapshot*>& seq, int l) {
  require(l >= 0, "coefficient derivatives: order must be non-negative");
  require(seq.size() >= static_cast<std::size_t>(2 * l + 1),
          "coefficient derivatives: need at least 2l+1 snapshots");
  const std::size_t ns = 2 * l + 1;
  const std::size_t off = (seq.size() - ns) / 2;
  const double dt = l > 0 ? seq[off + 1]->t - seq[off]->t : 1.0;
  std::vector<double> nodes(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    nodes[j] = static_cast<double>(j) - l;
    if (l > 0) {
      const double tj = seq[off + j]->t - seq[off]->t;
      require(std::abs(tj - nodes[j] * dt - l * dt) <= 1e-9 * std::max(1.0, std::abs(dt) * ns),
              "coefficient derivatives: snapshots must be uniformly spaced");
    }
    require(seq[off + j]->size() == seq[off]->size(), "coefficient derivatives: inconsistent snapshots");
  }
  const std::size_t np = seq[off]->size();
  CoefficientDerivatives out;
  out.order = l;
  out.g.assign(l + 1, std::vector<Mat3>(np, Mat3::Zero()));
  out.ginv = out.g;
  out.gradY = out.g;
  out.gamma.assign(l + 1, std::vector<Christoffel>(np, zero_christoffel()));
  out.Ydot.assign(l + 1, std::vector<Vec3>(np, Vec3::Zero()));
  for (int m = 0; m <= l; ++m) {
    const std::vector<double> w = fd_weights(m, nodes, 0.0);
    const double scale = std::pow(dt, -m);
    for (std::size_t j = 0; j < ns; ++j) {
      const double c = w[j] * scale;
      if (c == 0.0) continue;
      const TransformSnapshot& s = *seq[off + j];
      for (std::size_t p = 0; p < np; ++p) {
        out.g[m][p] += c * s.g[p];
        out.ginv[m][p] += c * s.ginv[p];
        out.gradY[m][p] += c * s.gradY[p];
        out.Ydot[m][p] += c * s.Ydot[p];
        for (int k = 0; k < 3; ++k) out.gamma[m][p][k] += c * s.gamma[p][k];
      }
    }
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'F', 'S', 'I', 'T', 'D', '0', '0', '1'};
constexpr std::uint64_t kPerPoint = 85;

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(os, u);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorKind::Io, "snapshot dump: truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t u = get_u64(is);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

void put_mat(std::ostream& os, const Mat3& m) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) put_f64(os, m(i, j));
}

Mat3 get_mat(std::istream& is) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = get_f64(is);
  return m;
}

void put_vec(std::ostream& os, const Vec3& v) {
  for (int i = 0; i < 3; ++i) put_f64(os, v[i]);
}

Vec3 get_vec(std::istream& is) {
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = get_f64(is);
  return v;
}

}  // namespace

void write_snapshot_binary(std::ostream& os, const TransformSnapshot& s) {
  os.write(kMagic, 8);
  put_u64(os, s.size());
  put_u64(os, kPerPoint);
  put_f64(os, s.t);
  for (std::size_t p = 0; p < s.size(); ++p) {
    put_vec(os, s.y[p]);
    put_vec(os, s.X[p]);
    put_mat(os, s.gradX[p]);
    put_mat(os, s.gradY[p]);
    put_f64(os, s.det[p]);
    put_mat(os, s.g[p]);
    put_mat(os, s.ginv[p]);
    for (int k = 0; k < 3; ++k) put_mat(os, s.gamma[p][k]);
    put_vec(os, s.Xdot[p]);
    put_vec(os, s.Ydot[p]);
    put_mat(os, s.dXdot[p]);
  }
  if (!os) throw Error(ErrorKind::Io, "snapshot dump: write failed");
}

TransformSnapshot read_snapshot_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorKind::Io, "snapshot dump: bad magic");
  const std::uint64_t n = get_u64(is);
  if (get_u64(is) != kPerPoint) throw Error(ErrorKind::Io, "snapshot dump: unexpected record size");
  TransformSnapshot s;
  s.t = get_f64(is);
  s.has_gamma = true;
  for (std::uint64_t p = 0; p < n; ++p) {
    s.y.push_back(get_vec(is));
    s.X.push_back(get_vec(is));
    s.gradX.push_back(get_mat(is));
    s.gradY.push_back(get_mat(is));
    s.det.push_back(get_f64(is));
    s.g.push_back(get_mat(is));
    s.ginv.push_back(get_mat(is));
    Christoffel c;
    for (int k = 0; k < 3; ++k) c[k] = get_mat(is);
    s.gamma.push_back(c);
    s.Xdot.push_back(get_vec(is));
    s.Ydot.push_back(get_vec(is));
    s.dXdot.push_back(get_mat(is));
  }
  return s;
}

}  // namespace fsi
