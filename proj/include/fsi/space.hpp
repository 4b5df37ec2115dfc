#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fsi/mesh.hpp"
#include "fsi/quadrature.hpp"
#include "fsi/types.hpp"

namespace fsi {

enum class NodeKind : std::uint8_t { Interior, Body, Outer };

/// How the velocity trace on the body boundary is fixed.
enum class BodyCoupling : std::uint8_t {
  Rigid,     // trace A + Omega x (y - center), (A, Omega) are unknowns
  Dirichlet  // trace prescribed (no rigid unknowns)
};

/// One reduced coefficient contributing to a nodal velocity component.
struct DofTerm {
  int index;
  double coeff;
};

/// Continuous P2 velocity / P1 pressure pair on a shell mesh with the body trace substituted.
///
/// Reduced unknown layout: [free velocity (3 per interior node) | A, Omega (rigid mode) |
/// pressure (one per vertex) | mean-zero multiplier].
/// Fixed velocity components (outer boundary, and the body in Dirichlet mode) take values from
/// a separate vector indexed 3 * node + component.
class CoupledSpace {
 public:
  CoupledSpace(ShellMesh mesh, BodyCoupling coupling);

  const ShellMesh& mesh() const { return mesh_; }
  BodyCoupling coupling() const { return coupling_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_vertices() const { return mesh_.vertices.size(); }
  std::size_t num_elements() const { return mesh_.tets.size(); }
  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  NodeKind node_kind(std::size_t i) const { return kind_[i]; }
  /// Local P2 node order: vertices 0..3 then edges (01, 02, 03, 12, 13, 23).
  const std::array<int, 10>& element_nodes(std::size_t e) const { return elem_nodes_[e]; }

  int num_free() const { return n_free_; }
  int num_rigid() const { return coupling_ == BodyCoupling::Rigid ? 6 : 0; }
  int rigid_offset() const { return n_free_; }
  int num_velocity() const { return n_free_ + num_rigid(); }
  int pressure_offset() const { return num_velocity(); }
  int num_pressure() const { return static_cast<int>(num_vertices()); }
  int multiplier_index() const { return pressure_offset() + num_pressure(); }
  int size() const { return multiplier_index() + 1; }

  /// Reduced terms of nodal component (node, comp); empty for fixed components.
  int expand(std::size_t node, int comp, std::array<DofTerm, 3>& out) const;
  bool is_fixed(std::size_t node) const;

  /// Nodal velocities of a reduced vector plus fixed values (size 3 * num_nodes, may be empty = 0).
  std::vector<Vec3> nodal_velocity(const Eigen::VectorXd& x, const Eigen::VectorXd& fixed = {}) const;
  /// Fixed-value vector from a function of position (only fixed components are read).
  Eigen::VectorXd fixed_values(const std::function<Vec3(const Vec3&)>& f) const;
  /// Reduced vector with interior velocity from f, rigid unknowns (A, Omega), zero pressure.
  Eigen::VectorXd interpolate(const std::function<Vec3(const Vec3&)>& f, const Vec3& A = Vec3::Zero(),
                              const Vec3& Omega = Vec3::Zero()) const;

  Vec3 rigid_A(const Eigen::VectorXd& x) const;
  Vec3 rigid_Omega(const Eigen::VectorXd& x) const;

  /// Barycentric gradients (rows) and volume of an element.
  struct ElementGeometry {
    Eigen::Matrix<double, 4, 3> grad_lambda;
    double volume;
  };
  const ElementGeometry& geometry(std::size_t e) const { return geom_[e]; }
  Vec3 map_point(std::size_t e, const std::array<double, 4>& bary) const;

 private:
  ShellMesh mesh_;
  BodyCoupling coupling_;
  std::vector<Vec3> nodes_;
  std::vector<NodeKind> kind_;
  std::vector<std::array<int, 10>> elem_nodes_;
  std::vector<int> free_index_;  // first free index of the node or -1
  std::vector<ElementGeometry> geom_;
  int n_free_ = 0;
};

/// P2 shape functions and gradients at one barycentric point.
struct P2Eval {
  std::array<double, 10> phi;
  std::array<Vec3, 10> grad;
};
P2Eval eval_p2(const CoupledSpace::ElementGeometry& g, const std::array<double, 4>& bary);

/// Physical quadrature points of every element (element-major), for transform snapshots.
std::vector<Vec3> quadrature_points(const CoupledSpace& space, const TetRule& rule);

/// Velocity value and gradient (grad(i, j) = d_j U_i) at a barycentric point of element e.
std::pair<Vec3, Mat3> eval_velocity(const CoupledSpace& space, const std::vector<Vec3>& nodal, std::size_t e,
                                    const std::array<double, 4>& bary);

}  // namespace fsi
