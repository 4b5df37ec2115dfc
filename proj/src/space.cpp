#include "fsi/space.hpp"

#include <map>
#include <set>

namespace fsi {

namespace {
constexpr int kEdge[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
}

CoupledSpace::CoupledSpace(ShellMesh mesh, BodyCoupling coupling) : mesh_(std::move(mesh)), coupling_(coupling) {
  validate_mesh(mesh_);
  const std::size_t nv = mesh_.vertices.size();
  nodes_ = mesh_.vertices;
  kind_.assign(nv, NodeKind::Interior);

  std::set<std::pair<int, int>> body_edges, outer_edges;
  for (const auto& f : mesh_.boundary) {
    const NodeKind k = f.tag == BoundaryTag::Body ? NodeKind::Body : NodeKind::Outer;
    for (int i = 0; i < 3; ++i) {
      kind_[f.v[i]] = k;
      const auto e = std::minmax(f.v[i], f.v[(i + 1) % 3]);
      (k == NodeKind::Body ? body_edges : outer_edges).insert(e);
    }
  }

  std::map<std::pair<int, int>, int> edge_node;
  elem_nodes_.resize(mesh_.tets.size());
  geom_.resize(mesh_.tets.size());
  for (std::size_t e = 0; e < mesh_.tets.size(); ++e) {
    const auto& t = mesh_.tets[e];
    auto& en = elem_nodes_[e];
    for (int i = 0; i < 4; ++i) en[i] = t[i];
    for (int k = 0; k < 6; ++k) {
      const auto key = std::minmax(t[kEdge[k][0]], t[kEdge[k][1]]);
      auto it = edge_node.find(key);
      if (it == edge_node.end()) {
        const int idx = static_cast<int>(nodes_.size());
        nodes_.push_back(0.5 * (mesh_.vertices[key.first] + mesh_.vertices[key.second]));
        kind_.push_back(body_edges.count(key) ? NodeKind::Body
                                              : (outer_edges.count(key) ? NodeKind::Outer : NodeKind::Interior));
        it = edge_node.emplace(key, idx).first;
      }
      en[4 + k] = it->second;
    }
    Mat3 J;
    for (int i = 0; i < 3; ++i) J.col(i) = mesh_.vertices[t[i + 1]] - mesh_.vertices[t[0]];
    const Mat3 Jinv = J.inverse();
    auto& g = geom_[e];
    // lambda_{1..3} = rows of J^{-1} applied to (x - v0); lambda_0 = 1 - sum.
    for (int i = 0; i < 3; ++i) g.grad_lambda.row(i + 1) = Jinv.row(i);
    g.grad_lambda.row(0) = -(Jinv.row(0) + Jinv.row(1) + Jinv.row(2));
    g.volume = J.determinant() / 6.0;
  }

  free_index_.assign(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (kind_[i] == NodeKind::Interior) {
      free_index_[i] = n_free_;
      n_free_ += 3;
    }
}

bool CoupledSpace::is_fixed(std::size_t node) const {
  return kind_[node] == NodeKind::Outer || (kind_[node] == NodeKind::Body && coupling_ == BodyCoupling::Dirichlet);
}

int CoupledSpace::expand(std::size_t node, int comp, std::array<DofTerm, 3>& out) const {
  switch (kind_[node]) {
    case NodeKind::Interior:
      out[0] = {free_index_[node] + comp, 1.0};
      return 1;
    case NodeKind::Outer:
      return 0;
    case NodeKind::Body: {
      if (coupling_ == BodyCoupling::Dirichlet) return 0;
      // (A + Omega x r)_comp with r = y - center: Omega x r = (O1 r2 - O2 r1, O2 r0 - O0 r2, O0 r1 - O1 r0)
      const Vec3 r = nodes_[node] - mesh_.center;
      const int a = n_free_, w = n_free_ + 3;
      const int c1 = (comp + 1) % 3, c2 = (comp + 2) % 3;
      out[0] = {a + comp, 1.0};
      out[1] = {w + c1, r[c2]};
      out[2] = {w + c2, -r[c1]};
      return 3;
    }
  }
  return 0;
}

std::vector<Vec3> CoupledSpace::nodal_velocity(const Eigen::VectorXd& x, const Eigen::VectorXd& fixed) const {
  require(x.size() >= num_velocity(), "nodal_velocity: state vector too short");
  std::vector<Vec3> out(nodes_.size(), Vec3::Zero());
  std::array<DofTerm, 3> t;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      if (is_fixed(i)) {
        if (fixed.size() > 0) out[i][c] = fixed[3 * i + c];
        continue;
      }
      const int n = expand(i, c, t);
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += t[k].coeff * x[t[k].index];
      out[i][c] = v;
    }
  return out;
}

Eigen::VectorXd CoupledSpace::fixed_values(const std::function<Vec3(const Vec3&)>& f) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(3 * nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (is_fixed(i)) v.segment<3>(3 * i) = f(nodes_[i]);
  return v;
}

Eigen::VectorXd CoupledSpace::interpolate(const std::function<Vec3(const Vec3&)>& f, const Vec3& A,
                                          const Vec3& Omega) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (kind_[i] == NodeKind::Interior) x.segment<3>(free_index_[i]) = f(nodes_[i]);
  if (coupling_ == BodyCoupling::Rigid) {
    x.segment<3>(rigid_offset()) = A;
    x.segment<3>(rigid_offset() + 3) = Omega;
  }
  return x;
}

Vec3 CoupledSpace::rigid_A(const Eigen::VectorXd& x) const {
  return coupling_ == BodyCoupling::Rigid ? Vec3(x.segment<3>(rigid_offset())) : Vec3::Zero();
}

Vec3 CoupledSpace::rigid_Omega(const Eigen::VectorXd& x) const {
  return coupling_ == BodyCoupling::Rigid ? Vec3(x.segment<3>(rigid_offset() + 3)) : Vec3::Zero();
}

Vec3 CoupledSpace::map_point(std::size_t e, const std::array<double, 4>& b) const {
  const auto& t = mesh_.tets[e];
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < 4; ++i) p += b[i] * mesh_.vertices[t[i]];
  return p;
}

P2Eval eval_p2(const CoupledSpace::ElementGeometry& g, const std::array<double, 4>& l) {
  P2Eval r;
  for (int i = 0; i < 4; ++i) {
    r.phi[i] = l[i] * (2.0 * l[i] - 1.0);
    r.grad[i] = (4.0 * l[i] - 1.0) * g.grad_lambda.row(i).transpose();
  }
  for (int k = 0; k < 6; ++k) {
    const int a = kEdge[k][0], b = kEdge[k][1];
    r.phi[4 + k] = 4.0 * l[a] * l[b];
    r.grad[4 + k] = 4.0 * (l[b] * g.grad_lambda.row(a).transpose() + l[a] * g.grad_lambda.row(b).transpose());
  }
  return r;
}

std::vector<Vec3> quadrature_points(const CoupledSpace& space, const TetRule& rule) {
  std::vector<Vec3> pts;
  pts.reserve(space.num_elements() * rule.size());
  for (std::size_t e = 0; e < space.num_elements(); ++e)
    for (std::size_t q = 0; q < rule.size(); ++q) pts.push_back(space.map_point(e, rule.bary[q]));
  return pts;
}

std::pair<Vec3, Mat3> eval_velocity(const CoupledSpace& space, const std::vector<Vec3>& nodal, std::size_t e,
                                    const std::array<double, 4>& bary) {
  const P2Eval b = eval_p2(space.geometry(e), bary);
  const auto& en = space.element_nodes(e);
  Vec3 v = Vec3::Zero();
  Mat3 G = Mat3::Zero();
  for (int a = 0; a < 10; ++a) {
    v += b.phi[a] * nodal[en[a]];
    G += nodal[en[a]] * b.grad[a].transpose();
  }
  return {v, G};
}

}  // namespace fsi
