#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fsi/types.hpp"

namespace fsi {

enum class BoundaryTag : std::uint8_t { Outer, Body };

struct BoundaryFace {
  std::array<int, 3> v;  // ordered so the normal points out of the fluid
  BoundaryTag tag;
};

/// Tetrahedral mesh of the shell between two concentric spheres.
struct ShellMesh {
  double r_in = 0.0, r_out = 0.0;
  Vec3 center = Vec3::Zero();
  int level = 0;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;  // positively oriented
  std::vector<BoundaryFace> boundary;

  double signed_volume(std::size_t e) const;
  double volume() const;
  /// Smallest distance from the center to a body facet plane.
  double body_inscribed_radius() const;
  /// Longest edge.
  double max_edge() const;
};

/// Icosphere-layered shell: 20 * 4^level surface triangles, 2^level radial layers, each prism
/// cut into three tetrahedra. Throws on degenerate radii or negative level.
ShellMesh build_shell_mesh(double r_in, double r_out, int level, const Vec3& center = Vec3::Zero());

/// Checks positive volumes, conformity (every interior face shared by exactly two tets) and that
/// every unshared face is tagged. Throws InvalidInput describing the first failure.
void validate_mesh(const ShellMesh& mesh);

/// ASCII format:
///   fsi-shell-mesh 1
///   r_in r_out level cx cy cz
///   vertices N      followed by N lines "x y z"
///   tets M          followed by M lines "v0 v1 v2 v3" (0-based)
///   boundary K      followed by K lines "v0 v1 v2 tag" with tag "outer" or "body"
void write_mesh(std::ostream& os, const ShellMesh& mesh);
ShellMesh read_mesh(std::istream& is);

}  // namespace fsi
