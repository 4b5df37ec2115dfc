#include "fsi/assembly.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fsi/operators.hpp"
#include "fsi/rigid_motion.hpp"

namespace fsi {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Reduced expansion of the 30 local velocity components (index 3a + i).
struct LocalDofs {
  std::array<std::array<DofTerm, 3>, 30> terms;
  std::array<int, 30> count;
  std::array<int, 30> fixed;  // 3 * node + comp when fixed, else -1
};

LocalDofs local_dofs(const CoupledSpace& s, std::size_t e) {
  LocalDofs d;
  const auto& en = s.element_nodes(e);
  for (int a = 0; a < 10; ++a)
    for (int i = 0; i < 3; ++i) {
      const int r = 3 * a + i;
      d.count[r] = s.expand(en[a], i, d.terms[r]);
      d.fixed[r] = s.is_fixed(en[a]) ? 3 * en[a] + i : -1;
    }
  return d;
}

using Local30 = Eigen::Matrix<double, 30, 30>;
using Local30x4 = Eigen::Matrix<double, 30, 4>;

void scatter_vv(const LocalDofs& d, const Local30& A, Triplets& red, Triplets* fix) {
  for (int r = 0; r < 30; ++r)
    for (int rt = 0; rt < d.count[r]; ++rt) {
      const DofTerm& tr = d.terms[r][rt];
      for (int c = 0; c < 30; ++c) {
        const double v = A(r, c);
        if (v == 0.0) continue;
        if (d.fixed[c] >= 0) {
          if (fix) fix->emplace_back(tr.index, d.fixed[c], tr.coeff * v);
          continue;
        }
        for (int ct = 0; ct < d.count[c]; ++ct) red.emplace_back(tr.index, d.terms[c][ct].index, tr.coeff * d.terms[c][ct].coeff * v);
      }
    }
}

// Rows: velocity test (30), columns: pressure trial (4 vertices).
void scatter_vp(const LocalDofs& d, const std::array<int, 4>& verts, const Local30x4& G, Triplets& out) {
  for (int r = 0; r < 30; ++r)
    for (int rt = 0; rt < d.count[r]; ++rt)
      for (int b = 0; b < 4; ++b)
        if (G(r, b) != 0.0) out.emplace_back(d.terms[r][rt].index, verts[b], d.terms[r][rt].coeff * G(r, b));
}

SpMat from_triplets(int rows, int cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double qp_weight(const CoupledSpace& s, std::size_t e, const TetRule& rule, std::size_t q) {
  return 6.0 * s.geometry(e).volume * rule.weight[q];
}

}  // namespace

SpMat assemble_weighted_mass(const CoupledSpace& s, const Mat3& J) {
  require((J - J.transpose()).norm() <= 1e-12 * std::max(1.0, J.norm()), "weighted mass: inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(J);
  require(es.eigenvalues().minCoeff() > 0.0, "weighted mass: inertia must be positive definite");
  const TetRule& rule = tet_rule_degree5();
  Triplets t;
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const LocalDofs d = local_dofs(s, e);
    Local30 A = Local30::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const P2Eval b = eval_p2(s.geometry(e), rule.bary[q]);
      const double w = qp_weight(s, e, rule, q);
      for (int a = 0; a < 10; ++a)
        for (int c = 0; c < 10; ++c) {
          const double v = w * b.phi[a] * b.phi[c];
          for (int i = 0; i < 3; ++i) A(3 * a + i, 3 * c + i) += v;
        }
    }
    scatter_vv(d, A, t, nullptr);
  }
  if (s.num_rigid() == 6) {
    const int o = s.rigid_offset();
    for (int i = 0; i < 3; ++i) {
      t.emplace_back(o + i, o + i, 1.0);
      for (int j = 0; j < 3; ++j) t.emplace_back(o + 3 + i, o + 3 + j, J(i, j));
    }
  }
  return from_triplets(s.num_velocity(), s.num_velocity(), t);
}

SpMat assemble_pressure_mass(const CoupledSpace& s) {
  Triplets t;
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const auto& v = s.mesh().tets[e];
    const double vol = s.geometry(e).volume;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) t.emplace_back(v[a], v[b], vol * (a == b ? 0.1 : 0.05));
  }
  return from_triplets(s.num_pressure(), s.num_pressure(), t);
}

StokesBlock assemble_stokes_block(const CoupledSpace& s) {
  const TetRule& rule = tet_rule_degree5();
  Triplets tk, tkf, tb, tbf;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(s.num_pressure());
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const LocalDofs d = local_dofs(s, e);
    const auto& g = s.geometry(e);
    const auto& verts = s.mesh().tets[e];
    Local30 K = Local30::Zero();
    Eigen::Matrix<double, 4, 30> B = Eigen::Matrix<double, 4, 30>::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const P2Eval b = eval_p2(g, rule.bary[q]);
      const double w = qp_weight(s, e, rule, q);
      for (int a = 0; a < 10; ++a)
        for (int c = 0; c < 10; ++c) {
          const double dot = b.grad[a].dot(b.grad[c]);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              K(3 * a + i, 3 * c + j) += w * ((i == j ? dot : 0.0) + b.grad[a][j] * b.grad[c][i]);
        }
      for (int p = 0; p < 4; ++p) {
        const double lam = rule.bary[q][p];
        for (int c = 0; c < 10; ++c)
          for (int j = 0; j < 3; ++j) B(p, 3 * c + j) -= w * lam * b.grad[c][j];
      }
    }
    scatter_vv(d, K, tk, &tkf);
    for (int p = 0; p < 4; ++p) {
      mean[verts[p]] += g.volume / 4.0;
      for (int c = 0; c < 30; ++c) {
        if (B(p, c) == 0.0) continue;
        if (d.fixed[c] >= 0) {
          tbf.emplace_back(verts[p], d.fixed[c], B(p, c));
          continue;
        }
        for (int ct = 0; ct < d.count[c]; ++ct)
          tb.emplace_back(verts[p], d.terms[c][ct].index, d.terms[c][ct].coeff * B(p, c));
      }
    }
  }
  const int nv = s.num_velocity(), np = s.num_pressure(), nf = 3 * static_cast<int>(s.num_nodes());
  return {from_triplets(nv, nv, tk), from_triplets(nv, nf, tkf), from_triplets(np, nv, tb), from_triplets(np, nf, tbf),
          mean};
}

SpMat saddle_matrix(const CoupledSpace& s, const SpMat& A, const StokesBlock& st) {
  require(A.rows() == s.num_velocity() && A.cols() == s.num_velocity(), "saddle matrix: velocity block size");
  const int po = s.pressure_offset(), mi = s.multiplier_index();
  Triplets t;
  t.reserve(A.nonZeros() + 2 * st.B.nonZeros() + 2 * s.num_pressure());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < st.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(st.B, k); it; ++it) {
      t.emplace_back(po + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), po + it.row(), it.value());
    }
  for (int p = 0; p < s.num_pressure(); ++p) {
    t.emplace_back(po + p, mi, st.mean[p]);
    t.emplace_back(mi, po + p, st.mean[p]);
  }
  return from_triplets(s.size(), s.size(), t);
}

Eigen::VectorXd assemble_load(const CoupledSpace& s, const std::function<Vec3(const Vec3&)>& f) {
  const TetRule& rule = tet_rule_degree5();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.size());
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const LocalDofs d = local_dofs(s, e);
    Eigen::Matrix<double, 30, 1> loc = Eigen::Matrix<double, 30, 1>::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const P2Eval b = eval_p2(s.geometry(e), rule.bary[q]);
      const Vec3 fv = f(s.map_point(e, rule.bary[q]));
      const double w = qp_weight(s, e, rule, q);
      for (int a = 0; a < 10; ++a)
        for (int i = 0; i < 3; ++i) loc[3 * a + i] += w * b.phi[a] * fv[i];
    }
    for (int r = 0; r < 30; ++r)
      for (int k = 0; k < d.count[r]; ++k) out[d.terms[r][k].index] += d.terms[r][k].coeff * loc[r];
  }
  return out;
}

TransformedTerms assemble_transformed_terms(const CoupledSpace& s, const TransformSnapshot& td,
                                            const Eigen::VectorXd& U_tilde, const Mat3& J) {
  const TetRule& rule = tet_rule_degree5();
  require(td.size() == s.num_elements() * rule.size(),
          "transformed terms: snapshot must be built on the quadrature points of the space");
  require(td.has_gamma, "transformed terms: snapshot carries no Christoffel symbols");
  require(U_tilde.size() == s.size(), "transformed terms: linearization field has the wrong size");
  const std::vector<Vec3> Ut = s.nodal_velocity(U_tilde);
  Triplets tl, tm, tn, tg;
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const LocalDofs d = local_dofs(s, e);
    const auto& g = s.geometry(e);
    const auto& verts = s.mesh().tets[e];
    Local30 L = Local30::Zero(), M = Local30::Zero(), N = Local30::Zero();
    Local30x4 G = Local30x4::Zero();
    bool any = false;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const std::size_t p = e * rule.size() + q;
      const PointCoefficients c = coefficients_from_snapshot(td, p);
      const Mat3 dginv = c.c1 - Mat3::Identity();
      const Vec3 ut = eval_velocity(s, Ut, e, rule.bary[q]).first;
      const ConvectionCoefficients nc = convection_coefficients(td.gamma[p], ut);
      const bool flat = dginv.norm() == 0.0 && c.c0.norm() == 0.0 && c.c2[0].norm() == 0.0 && c.c2[1].norm() == 0.0 &&
                        c.c2[2].norm() == 0.0 && c.m1.norm() == 0.0 && c.m0.norm() == 0.0 && nc.n1.norm() == 0.0 &&
                        nc.n0.norm() == 0.0;
      if (flat) continue;
      any = true;
      const P2Eval b = eval_p2(g, rule.bary[q]);
      const double w = qp_weight(s, e, rule, q);
      for (int a = 0; a < 10; ++a) {
        const Vec3 Ga = dginv * b.grad[a];
        for (int k = 0; k < 10; ++k) {
          const double visc = -Ga.dot(b.grad[k]);
          const double pa = b.phi[a], pk = b.phi[k];
          const Vec3 mix = b.grad[k] * pa - b.grad[a] * pk;
          const double conv_m = c.m1.dot(b.grad[k]) * pa, conv_n = nc.n1.dot(b.grad[k]) * pa;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              double l = 0.5 * c.c2[i].row(j).dot(mix) + c.c0(i, j) * pa * pk;
              double m = c.m0(i, j) * pk * pa;
              double n = nc.n0(i, j) * pk * pa;
              if (i == j) {
                l += visc;
                m += conv_m;
                n += conv_n;
              }
              L(3 * a + i, 3 * k + j) += w * l;
              M(3 * a + i, 3 * k + j) += w * m;
              N(3 * a + i, 3 * k + j) += w * n;
            }
        }
        for (int v = 0; v < 4; ++v) {
          const Vec3 gq = dginv * g.grad_lambda.row(v).transpose();
          for (int i = 0; i < 3; ++i) G(3 * a + i, v) += w * gq[i] * b.phi[a];
        }
      }
    }
    if (!any) continue;
    scatter_vv(d, L, tl, nullptr);
    scatter_vv(d, M, tm, nullptr);
    scatter_vv(d, N, tn, nullptr);
    scatter_vp(d, verts, G, tg);
  }
  const int nv = s.num_velocity(), np = s.num_pressure();
  TransformedTerms out;
  out.L_minus_Delta = from_triplets(nv, nv, tl);
  out.M = from_triplets(nv, nv, tm);
  out.N = from_triplets(nv, nv, tn);
  out.G_minus_grad = from_triplets(nv, np, tg);
  Triplets tr;
  if (s.num_rigid() == 6) {
    const int o = s.rigid_offset();
    const Mat3 W = skew(s.rigid_Omega(U_tilde));
    const Mat3 WJ = W * J;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (W(i, j) != 0.0) tr.emplace_back(o + i, o + j, -W(i, j));
        if (WJ(i, j) != 0.0) tr.emplace_back(o + 3 + i, o + 3 + j, -WJ(i, j));
      }
  }
  out.rigid = from_triplets(nv, nv, tr);

  Triplets tc;
  auto add = [&](const SpMat& m, double sign, int col_offset) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it) tc.emplace_back(it.row(), col_offset + it.col(), sign * it.value());
  };
  add(out.L_minus_Delta, 1.0, 0);
  add(out.M, -1.0, 0);
  add(out.N, -1.0, 0);
  add(out.rigid, 1.0, 0);
  add(out.G_minus_grad, -1.0, s.pressure_offset());
  out.combined = from_triplets(s.size(), s.size(), tc);
  return out;
}

Vec3 extension_field(const Vec3& y, const Vec3& A, const Vec3& Omega, const CutoffField& zeta, const Vec3& center) {
  MotionSample k;
  k.q = center;
  k.a = A;
  k.omega = Omega;
  return transport_velocity(y, k, zeta, nullptr);
}

double velocity_l2_error(const CoupledSpace& s, const Eigen::VectorXd& x, const Eigen::VectorXd& fixed,
                         const std::function<Vec3(const Vec3&)>& exact) {
  const TetRule& rule = tet_rule_degree5_refined();
  const std::vector<Vec3> nodal = s.nodal_velocity(x, fixed);
  double acc = 0.0;
  for (std::size_t e = 0; e < s.num_elements(); ++e)
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 uh = eval_velocity(s, nodal, e, rule.bary[q]).first;
      acc += qp_weight(s, e, rule, q) * (uh - exact(s.map_point(e, rule.bary[q]))).squaredNorm();
    }
  return std::sqrt(acc);
}

double inf_sup_constant(const CoupledSpace& s, const StokesBlock& st) {
  Eigen::SimplicialLDLT<SpMat> K(st.K);
  if (K.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "inf-sup: viscous block not factorizable");
  const Eigen::MatrixXd Bt = Eigen::MatrixXd(st.B.transpose());
  const Eigen::MatrixXd X = K.solve(Bt);
  const Eigen::MatrixXd S = Eigen::MatrixXd(st.B) * X;
  const Eigen::MatrixXd Mp = Eigen::MatrixXd(assemble_pressure_mass(s));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Mp, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-10 * top) return std::sqrt(ev[i]);
  return 0.0;
}

double nullspace_crosscheck(const CoupledSpace& s, const SpMat& A, const StokesBlock& st, const Eigen::VectorXd& f) {
  const int nv = s.num_velocity();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s.size());
  rhs.head(nv) = f.head(nv);
  Eigen::SparseLU<SpMat> lu(saddle_matrix(s, A, st));
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "nullspace check: saddle factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(st.B), Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  const Eigen::MatrixXd Z = svd.matrixV().rightCols(nv - rank);
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
  const Eigen::VectorXd c = (Z.transpose() * Ad * Z).ldlt().solve(Z.transpose() * f.head(nv));
  return (Z * c - x.head(nv)).lpNorm<Eigen::Infinity>();
}

}  // namespace fsi
