#include "fsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace fsi {

namespace {

struct Surface {
  std::vector<Vec3> points;  // unit vectors
  std::vector<std::array<int, 3>> faces;
};

Surface icosahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  Surface s;
  const double raw[12][3] = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                             {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (const auto& r : raw) s.points.push_back(Vec3(r[0], r[1], r[2]).normalized());
  s.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  return s;
}

Surface subdivide(const Surface& in) {
  Surface out;
  out.points = in.points;
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int idx = static_cast<int>(out.points.size());
    out.points.push_back((out.points[a] + out.points[b]).normalized());
    mid.emplace(key, idx);
    return idx;
  };
  for (const auto& f : in.faces) {
    const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
    out.faces.push_back({f[0], ab, ca});
    out.faces.push_back({f[1], bc, ab});
    out.faces.push_back({f[2], ca, bc});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

}  // namespace

double ShellMesh::signed_volume(std::size_t e) const {
  const auto& t = tets[e];
  return tet_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
}

double ShellMesh::volume() const {
  double v = 0.0;
  for (std::size_t e = 0; e < tets.size(); ++e) v += signed_volume(e);
  return v;
}

double ShellMesh::body_inscribed_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& f : boundary) {
    if (f.tag != BoundaryTag::Body) continue;
    const Vec3 &a = vertices[f.v[0]], &b = vertices[f.v[1]], &c = vertices[f.v[2]];
    const Vec3 n = (b - a).cross(c - a).normalized();
    r = std::min(r, std::abs(n.dot(a - center)));
  }
  return r;
}

double ShellMesh::max_edge() const {
  double h = 0.0;
  for (const auto& t : tets)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) h = std::max(h, (vertices[t[i]] - vertices[t[j]]).norm());
  return h;
}

ShellMesh build_shell_mesh(double r_in, double r_out, int level, const Vec3& center) {
  require(r_in > 0.0 && r_out > r_in, "shell mesh: need 0 < r_in < r_out");
  require(level >= 0 && level <= 6, "shell mesh: level must be in [0, 6]");
  Surface s = icosahedron();
  for (int l = 0; l < level; ++l) s = subdivide(s);
  const int layers = 1 << level;
  const int ns = static_cast<int>(s.points.size());

  ShellMesh m;
  m.r_in = r_in;
  m.r_out = r_out;
  m.center = center;
  m.level = level;
  for (int k = 0; k <= layers; ++k) {
    const double r = r_in + (r_out - r_in) * k / layers;
    for (const Vec3& p : s.points) m.vertices.push_back(center + r * p);
  }
  auto vid = [ns](int layer, int sv) { return layer * ns + sv; };

  // Prism split keyed on the global surface index: the diagonal of each quad face runs from the
  // lower-index bottom vertex to the higher-index top vertex, so neighbouring prisms agree.
  for (int k = 0; k < layers; ++k)
    for (auto f : s.faces) {
      std::sort(f.begin(), f.end());
      const int a = vid(k, f[0]), b = vid(k, f[1]), c = vid(k, f[2]);
      const int A = vid(k + 1, f[0]), B = vid(k + 1, f[1]), C = vid(k + 1, f[2]);
      for (std::array<int, 4> t : {std::array<int, 4>{a, b, c, C}, {a, b, B, C}, {a, A, B, C}}) {
        if (tet_volume(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]], m.vertices[t[3]]) < 0)
          std::swap(t[2], t[3]);
        m.tets.push_back(t);
      }
    }
  for (const auto& f : s.faces) {
    std::array<int, 3> body{vid(0, f[0]), vid(0, f[1]), vid(0, f[2])};
    std::array<int, 3> outer{vid(layers, f[0]), vid(layers, f[1]), vid(layers, f[2])};
    auto orient = [&](std::array<int, 3>& v, double sign) {
      const Vec3 &a = m.vertices[v[0]], &b = m.vertices[v[1]], &c = m.vertices[v[2]];
      if (sign * (b - a).cross(c - a).dot(a - center) < 0) std::swap(v[1], v[2]);
    };
    orient(body, -1.0);
    orient(outer, 1.0);
    m.boundary.push_back({body, BoundaryTag::Body});
    m.boundary.push_back({outer, BoundaryTag::Outer});
  }
  return m;
}

void validate_mesh(const ShellMesh& m) {
  require(!m.tets.empty(), "mesh: no elements");
  const int nv = static_cast<int>(m.vertices.size());
  std::map<std::array<int, 3>, int> faces;
  for (std::size_t e = 0; e < m.tets.size(); ++e) {
    const auto& t = m.tets[e];
    for (int v : t) require(v >= 0 && v < nv, "mesh: vertex index out of range");
    if (!(m.signed_volume(e) > 0.0)) {
      std::ostringstream os;
      os << "mesh: element " << e << " is inverted or degenerate";
      throw Error(ErrorKind::InvalidInput, os.str());
    }
    static const int fl[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    for (const auto& f : fl) {
      std::array<int, 3> key{t[f[0]], t[f[1]], t[f[2]]};
      std::sort(key.begin(), key.end());
      ++faces[key];
    }
  }
  std::map<std::array<int, 3>, int> tagged;
  for (const auto& b : m.boundary) {
    std::array<int, 3> key = b.v;
    std::sort(key.begin(), key.end());
    ++tagged[key];
  }
  for (const auto& [key, count] : faces) {
    require(count <= 2, "mesh: non-conforming face shared by more than two elements");
    if (count == 1) require(tagged.count(key) == 1, "mesh: untagged boundary face");
    else require(tagged.count(key) == 0, "mesh: interior face tagged as boundary");
  }
  require(tagged.size() == m.boundary.size(), "mesh: duplicate boundary faces");
}

void write_mesh(std::ostream& os, const ShellMesh& m) {
  os << "fsi-shell-mesh 1\n" << std::setprecision(17);
  os << m.r_in << ' ' << m.r_out << ' ' << m.level << ' ' << m.center[0] << ' ' << m.center[1] << ' '
     << m.center[2] << '\n';
  os << "vertices " << m.vertices.size() << '\n';
  for (const Vec3& v : m.vertices) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  os << "tets " << m.tets.size() << '\n';
  for (const auto& t : m.tets) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  os << "boundary " << m.boundary.size() << '\n';
  for (const auto& b : m.boundary)
    os << b.v[0] << ' ' << b.v[1] << ' ' << b.v[2] << ' ' << (b.tag == BoundaryTag::Body ? "body" : "outer") << '\n';
}

ShellMesh read_mesh(std::istream& is) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Io, "mesh file: " + what); };
  std::string magic, word;
  int version = 0;
  if (!(is >> magic >> version) || magic != "fsi-shell-mesh" || version != 1) fail("bad header");
  ShellMesh m;
  if (!(is >> m.r_in >> m.r_out >> m.level >> m.center[0] >> m.center[1] >> m.center[2])) fail("bad geometry line");
  std::size_t n = 0;
  if (!(is >> word >> n) || word != "vertices") fail("expected vertices");
  m.vertices.resize(n);
  for (auto& v : m.vertices)
    if (!(is >> v[0] >> v[1] >> v[2])) fail("truncated vertices");
  if (!(is >> word >> n) || word != "tets") fail("expected tets");
  m.tets.resize(n);
  for (auto& t : m.tets)
    if (!(is >> t[0] >> t[1] >> t[2] >> t[3])) fail("truncated tets");
  if (!(is >> word >> n) || word != "boundary") fail("expected boundary");
  m.boundary.resize(n);
  for (auto& b : m.boundary) {
    std::string tag;
    if (!(is >> b.v[0] >> b.v[1] >> b.v[2] >> tag)) fail("truncated boundary");
    if (tag == "body") b.tag = BoundaryTag::Body;
    else if (tag == "outer") b.tag = BoundaryTag::Outer;
    else fail("unknown boundary tag '" + tag + "'");
  }
  validate_mesh(m);
  return m;
}

}  // namespace fsi
