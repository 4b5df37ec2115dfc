#pragma once

#include <functional>

#include <Eigen/Sparse>

#include "fsi/space.hpp"
#include "fsi/transform.hpp"

namespace fsi {

using SpMat = Eigen::SparseMatrix<double>;

/// Gram matrix of the weighted product: int psi . phi + phi_a . psi_a + J phi_w . psi_w
/// on the reduced velocity unknowns (num_velocity square). J must be SPD.
SpMat assemble_weighted_mass(const CoupledSpace& space, const Mat3& J);

/// Pressure mass matrix (P1, num_pressure square).
SpMat assemble_pressure_mass(const CoupledSpace& space);

/// Viscous block int 2 DU:Dpsi, divergence coupling B(q, U) = -int q div U, and the pressure
/// mean functional. The *_fix blocks act on fixed nodal values (3 * num_nodes columns).
struct StokesBlock {
  SpMat K, K_fix;  // num_velocity x num_velocity, num_velocity x 3 num_nodes
  SpMat B, B_fix;  // num_pressure x num_velocity, num_pressure x 3 num_nodes
  Eigen::VectorXd mean;  // int q_a
};
StokesBlock assemble_stokes_block(const CoupledSpace& space);

/// Full saddle matrix [[A, B^T, 0], [B, 0, m], [0, m^T, 0]] for a velocity block A.
SpMat saddle_matrix(const CoupledSpace& space, const SpMat& A, const StokesBlock& s);

/// int f . psi on velocity rows of a full-size vector.
Eigen::VectorXd assemble_load(const CoupledSpace& space, const std::function<Vec3(const Vec3&)>& f);

/// Weak forms of the transformed correction terms at one time instant.
/// td must be built on quadrature_points(space, tet_rule_degree5()) with Christoffel symbols.
struct TransformedTerms {
  SpMat L_minus_Delta;  // num_velocity square
  SpMat M;              // num_velocity square
  SpMat N;              // num_velocity square, linearized about U~
  SpMat G_minus_grad;   // num_velocity x num_pressure
  SpMat rigid;          // num_velocity square: -Omega~ x A and -Omega~ x (J Omega)
  /// size x size: (L - Delta) - M - N + rigid on velocity columns, -(G - grad) on pressure columns.
  SpMat combined;
};
TransformedTerms assemble_transformed_terms(const CoupledSpace& space, const TransformSnapshot& td,
                                            const Eigen::VectorXd& U_tilde, const Mat3& J);

/// Divergence-free extension of the rigid velocity: curl(zeta psi), psi = A x r / 2 - |r|^2 Omega / 2,
/// r = y - center.
Vec3 extension_field(const Vec3& y, const Vec3& A, const Vec3& Omega, const CutoffField& zeta,
                     const Vec3& center = Vec3::Zero());

/// Velocity L2 error against an exact field, using the refined degree-5 rule.
double velocity_l2_error(const CoupledSpace& space, const Eigen::VectorXd& x, const Eigen::VectorXd& fixed,
                         const std::function<Vec3(const Vec3&)>& exact);

/// Discrete inf-sup constant: sqrt of the smallest non-zero eigenvalue of B K^{-1} B^T
/// relative to the pressure mass. Dense, intended for coarse meshes.
double inf_sup_constant(const CoupledSpace& space, const StokesBlock& s);

/// Solves the Stokes problem A u + B^T p = f, B u = 0 twice: with the saddle system and with
/// a Galerkin projection onto an SVD basis of ker B. Returns the max-norm velocity difference.
double nullspace_crosscheck(const CoupledSpace& space, const SpMat& A, const StokesBlock& s,
                            const Eigen::VectorXd& f);

}  // namespace fsi
