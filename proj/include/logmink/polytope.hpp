#pragma once

// Convex polytopes in R^3: incremental hull construction, support numbers,
// surface-area and cone-volume measures, and OBJ / CSV interchange.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "logmink/errors.hpp"
#include "logmink/io.hpp"
#include "logmink/sphere_grid.hpp"

namespace logmink {

/// Finite measure on S^2 supported on finitely many directions.
class DiscreteMeasure {
 public:
  struct Atom {
    Vec3 direction;
    double weight;
  };

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
      if (!std::isfinite(a.weight) || a.weight < 0.0) throw InvalidParameter("measure weight must be finite and >= 0");
      if (std::abs(a.direction.norm() - 1.0) > 1e-9) throw InvalidParameter("measure direction must be a unit vector");
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double total_mass() const {
    double s = 0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
  }

  /// Integral of g against the measure.
  double integrate(const std::function<double(const Vec3&)>& g) const {
    double s = 0;
    for (const auto& a : atoms_) s += a.weight * g(a.direction);
    return s;
  }

 private:
  std::vector<Atom> atoms_;
};

inline void write_measure_csv(std::ostream& out, const DiscreteMeasure& m) {
  out << "nx,ny,nz,weight\n";
  for (const auto& a : m.atoms())
    out << io::format_double(a.direction.x()) << ',' << io::format_double(a.direction.y()) << ','
        << io::format_double(a.direction.z()) << ',' << io::format_double(a.weight) << '\n';
}

inline DiscreteMeasure read_measure_csv(std::istream& in) {
  std::vector<DiscreteMeasure::Atom> atoms;
  std::string line;
  while (std::getline(in, line)) {
    line = io::trim(line);
    if (line.empty() || line[0] == '#' || line.rfind("nx", 0) == 0) continue;
    auto cells = io::split(line, ',');
    if (cells.size() != 4) throw InvalidParameter("measure CSV row needs 4 columns: " + line);
    atoms.push_back({Vec3(io::parse_double(cells[0]), io::parse_double(cells[1]), io::parse_double(cells[2])),
                     io::parse_double(cells[3])});
  }
  return DiscreteMeasure(std::move(atoms));
}

struct Facet {
  Vec3 normal;                     // outward unit normal
  double support = 0;              // h_F = max over vertices of normal . x
  std::vector<std::size_t> loop;   // counter-clockwise seen from outside
  double area = 0;
};

/// Convex polytope with vertices, planar convex facets and its centroid.
class Polytope {
 public:
  static constexpr double kContainmentSlack = 1e-9;

  Polytope(std::vector<Vec3> vertices, std::vector<std::vector<std::size_t>> loops)
      : vertices_(std::move(vertices)) {
    if (loops.size() < 4) throw DimensionDeficient("a polytope needs at least 4 facets");
    double scale = 0;
    for (const auto& v : vertices_) scale = std::max(scale, v.norm());
    scale = std::max(scale, 1.0);
    for (auto& loop : loops) {
      if (loop.size() < 3) throw InvalidParameter("facet loop with fewer than 3 vertices");
      Vec3 newell = Vec3::Zero();
      for (std::size_t k = 0; k < loop.size(); ++k) {
        const Vec3& a = vertices_.at(loop[k]);
        const Vec3& b = vertices_.at(loop[(k + 1) % loop.size()]);
        newell += a.cross(b);
      }
      double twice_area = newell.norm();
      if (twice_area <= 1e-14 * scale * scale) throw DimensionDeficient("zero-area facet");
      Facet f;
      f.normal = newell / twice_area;
      f.area = 0.5 * twice_area;
      f.loop = std::move(loop);
      f.support = -std::numeric_limits<double>::infinity();
      for (const auto& v : vertices_) f.support = std::max(f.support, f.normal.dot(v));
      for (std::size_t idx : f.loop)
        if (std::abs(f.normal.dot(vertices_[idx]) - f.support) > 1e-8 * scale)
          throw InvalidParameter("facet loop is not planar or not supporting");
      facets_.push_back(std::move(f));
    }
    compute_mass_properties();
  }

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Facet>& facets() const noexcept { return facets_; }
  const Vec3& centroid() const noexcept { return centroid_; }
  double volume() const noexcept { return volume_; }

  /// Origin in the closure of the body, i.e. every support number >= -slack.
  bool contains_origin(double slack = kContainmentSlack) const {
    return std::all_of(facets_.begin(), facets_.end(), [&](const Facet& f) { return f.support >= -slack; });
  }

  double support(const Vec3& u) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) best = std::max(best, u.dot(v));
    return best;
  }

  Polytope transformed(const Eigen::Matrix3d& linear, const Vec3& shift = Vec3::Zero()) const {
    std::vector<Vec3> moved;
    moved.reserve(vertices_.size());
    for (const auto& v : vertices_) moved.push_back(linear * v + shift);
    std::vector<std::vector<std::size_t>> loops;
    for (const auto& f : facets_) loops.push_back(f.loop);
    if (linear.determinant() < 0)
      for (auto& l : loops) std::reverse(l.begin(), l.end());
    return Polytope(std::move(moved), std::move(loops));
  }

 private:
  void compute_mass_properties() {
    Vec3 anchor = Vec3::Zero();
    for (const auto& v : vertices_) anchor += v;
    anchor /= static_cast<double>(vertices_.size());
    double vol = 0;
    Vec3 moment = Vec3::Zero();
    for (const auto& f : facets_) {
      const Vec3& a = vertices_[f.loop[0]];
      for (std::size_t k = 1; k + 1 < f.loop.size(); ++k) {
        const Vec3& b = vertices_[f.loop[k]];
        const Vec3& c = vertices_[f.loop[k + 1]];
        double tet = (a - anchor).dot((b - anchor).cross(c - anchor)) / 6.0;
        vol += tet;
        moment += tet * (anchor + a + b + c) / 4.0;
      }
    }
    if (vol <= 0) throw DimensionDeficient("polytope has no interior");
    centroid_ = moment / vol;
    volume_ = vol;
  }

  std::vector<Vec3> vertices_;
  std::vector<Facet> facets_;
  Vec3 centroid_ = Vec3::Zero();
  double volume_ = 0;
};

namespace detail {

struct HullTriangle {
  std::array<std::size_t, 3> v;
  Vec3 normal;
  double offset;
  bool alive = true;
};

class IncrementalHull {
 public:
  IncrementalHull(std::span<const Vec3> points, double eps) : pts_(points), eps_(eps) {}

  void build() {
    seed();
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < pts_.size(); ++i)
      if (std::find(seed_.begin(), seed_.end(), i) == seed_.end()) order.push_back(i);
    // Farthest points first, so near-boundary points meet a nearly final hull.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (pts_[a] - interior_).squaredNorm() > (pts_[b] - interior_).squaredNorm();
    });
    for (std::size_t p : order) insert(p);
  }

  const std::vector<HullTriangle>& triangles() const { return tris_; }
  const std::map<std::pair<std::size_t, std::size_t>, std::size_t>& edges() const { return edge_owner_; }

 private:
  void seed() {
    const std::size_t n = pts_.size();
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (pts_[i].x() < pts_[i0].x()) i0 = i;
    std::size_t i1 = i0;
    double best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      double d = (pts_[i] - pts_[i0]).squaredNorm();
      if (d > best) best = d, i1 = i;
    }
    if (std::sqrt(best) <= eps_) throw DimensionDeficient("all points coincide");
    const Vec3 axis = (pts_[i1] - pts_[i0]).normalized();
    std::size_t i2 = i0;
    best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 r = pts_[i] - pts_[i0];
      double d = (r - r.dot(axis) * axis).norm();
      if (d > best) best = d, i2 = i;
    }
    if (best <= eps_) throw DimensionDeficient("points are collinear");
    const Vec3 plane_n = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    std::size_t i3 = i0;
    best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::abs(plane_n.dot(pts_[i] - pts_[i0]));
      if (d > best) best = d, i3 = i;
    }
    if (best <= eps_) throw DimensionDeficient("points are coplanar");
    seed_ = {i0, i1, i2, i3};
    interior_ = (pts_[i0] + pts_[i1] + pts_[i2] + pts_[i3]) / 4.0;
    add_oriented(i0, i1, i2);
    add_oriented(i0, i1, i3);
    add_oriented(i0, i2, i3);
    add_oriented(i1, i2, i3);
  }

  void add_oriented(std::size_t a, std::size_t b, std::size_t c) {
    Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    if (n.dot(pts_[a] - interior_) < 0) std::swap(b, c);
    add(a, b, c);
  }

  void add(std::size_t a, std::size_t b, std::size_t c) {
    Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    double len = n.norm();
    if (len == 0.0) throw DimensionDeficient("degenerate hull triangle");
    n /= len;
    std::size_t id = tris_.size();
    tris_.push_back({{a, b, c}, n, n.dot(pts_[a]), true});
    edge_owner_[{a, b}] = id;
    edge_owner_[{b, c}] = id;
    edge_owner_[{c, a}] = id;
  }

  void insert(std::size_t p) {
    const Vec3& x = pts_[p];
    std::vector<std::size_t> visible;
    for (std::size_t t = 0; t < tris_.size(); ++t)
      if (tris_[t].alive && tris_[t].normal.dot(x) - tris_[t].offset > eps_) visible.push_back(t);
    if (visible.empty()) return;
    std::vector<char> is_visible(tris_.size(), 0);
    for (auto t : visible) is_visible[t] = 1;
    std::vector<std::pair<std::size_t, std::size_t>> horizon;
    for (auto t : visible) {
      const auto& v = tris_[t].v;
      for (int k = 0; k < 3; ++k) {
        std::size_t a = v[k], b = v[(k + 1) % 3];
        auto it = edge_owner_.find({b, a});
        if (it == edge_owner_.end() || !is_visible[it->second]) horizon.emplace_back(a, b);
      }
    }
    for (auto t : visible) {
      tris_[t].alive = false;
      const auto& v = tris_[t].v;
      for (int k = 0; k < 3; ++k) {
        auto it = edge_owner_.find({v[k], v[(k + 1) % 3]});
        if (it != edge_owner_.end() && it->second == t) edge_owner_.erase(it);
      }
    }
    for (auto [a, b] : horizon) add(a, b, p);
  }

  std::span<const Vec3> pts_;
  double eps_;
  std::array<std::size_t, 4> seed_{};
  Vec3 interior_ = Vec3::Zero();
  std::vector<HullTriangle> tris_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_owner_;
};

}  // namespace detail

/// Convex hull by incremental insertion; adjacent triangles whose normals agree
/// to within `dihedral_tolerance` (sine of the angle) are merged into one facet, and
/// collinear boundary points are dropped so the vertex set is the extreme points.
inline Polytope convex_hull_3d(std::span<const Vec3> points, double dihedral_tolerance = 1e-9) {
  if (points.size() < 4) throw DimensionDeficient("convex hull needs at least 4 points");
  double scale = 0;
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidParameter("non-finite point");
    scale = std::max(scale, p.cwiseAbs().maxCoeff());
  }
  const double eps = 1e-10 * std::max(scale, 1e-300);

  detail::IncrementalHull hull(points, eps);
  hull.build();
  const auto& tris = hull.triangles();
  const auto& edges = hull.edges();

  // Grow each facet from a seed triangle over neighbours whose normal is within
  // the dihedral tolerance of the seed's and whose corners lie on the seed plane.
  const double plane_tol = 10 * eps;
  std::vector<std::size_t> group_of(tris.size(), static_cast<std::size_t>(-1));
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t seed = 0; seed < tris.size(); ++seed) {
    if (!tris[seed].alive || group_of[seed] != static_cast<std::size_t>(-1)) continue;
    const Vec3& n0 = tris[seed].normal;
    const double d0 = tris[seed].offset;
    std::vector<std::size_t> stack = {seed};
    group_of[seed] = seed;
    while (!stack.empty()) {
      std::size_t t = stack.back();
      stack.pop_back();
      groups[seed].push_back(t);
      for (int k = 0; k < 3; ++k) {
        auto it = edges.find({tris[t].v[(k + 1) % 3], tris[t].v[k]});
        if (it == edges.end()) continue;
        std::size_t u = it->second;
        if (group_of[u] != static_cast<std::size_t>(-1)) continue;
        const auto& tu = tris[u];
        if (n0.dot(tu.normal) <= 0 || n0.cross(tu.normal).norm() > dihedral_tolerance) continue;
        bool on_plane = true;
        for (auto idx : tu.v) on_plane = on_plane && std::abs(n0.dot(points[idx]) - d0) <= plane_tol;
        if (!on_plane) continue;
        group_of[u] = seed;
        stack.push_back(u);
      }
    }
  }

  std::vector<std::vector<std::size_t>> loops;
  for (auto& [r, members] : groups) {
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    Vec3 normal = Vec3::Zero();
    for (auto t : members) {
      for (int k = 0; k < 3; ++k) directed[{tris[t].v[k], tris[t].v[(k + 1) % 3]}] = 1;
      const auto& v = tris[t].v;
      normal += (points[v[1]] - points[v[0]]).cross(points[v[2]] - points[v[0]]);
    }
    normal.normalize();
    std::map<std::size_t, std::size_t> next;
    for (const auto& [e, one] : directed)
      if (!directed.count({e.second, e.first})) next[e.first] = e.second;
    if (next.empty()) throw DimensionDeficient("facet without boundary");
    std::vector<std::size_t> loop;
    std::size_t start = next.begin()->first, cur = start;
    do {
      loop.push_back(cur);
      auto it = next.find(cur);
      if (it == next.end() || loop.size() > next.size()) throw DimensionDeficient("facet boundary is not a simple loop");
      cur = it->second;
    } while (cur != start);
    // Drop vertices where the boundary goes straight on.
    std::vector<std::size_t> corners;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Vec3& prev = points[loop[(k + loop.size() - 1) % loop.size()]];
      const Vec3& here = points[loop[k]];
      const Vec3& nxt = points[loop[(k + 1) % loop.size()]];
      Vec3 a = here - prev, b = nxt - here;
      if (normal.dot(a.cross(b)) > 1e-12 * a.norm() * b.norm()) corners.push_back(loop[k]);
    }
    if (corners.size() < 3) throw DimensionDeficient("facet collapsed to a segment");
    loops.push_back(std::move(corners));
  }

  // Keep only the vertices that appear on facet loops, in input order.
  std::vector<std::size_t> remap(points.size(), static_cast<std::size_t>(-1));
  for (const auto& loop : loops)
    for (auto idx : loop) remap[idx] = 0;
  std::vector<Vec3> verts;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (remap[i] == 0) {
      remap[i] = verts.size();
      verts.push_back(points[i]);
    }
  for (auto& loop : loops)
    for (auto& idx : loop) idx = remap[idx];
  return Polytope(std::move(verts), std::move(loops));
}

inline Polytope convex_hull_3d(const std::vector<Vec3>& points, double dihedral_tolerance = 1e-9) {
  return convex_hull_3d(std::span<const Vec3>(points.data(), points.size()), dihedral_tolerance);
}

/// Near-uniform unit vectors on a Fibonacci spiral.
inline std::vector<Vec3> fibonacci_sphere(std::size_t count) {
  if (count < 4) throw InvalidParameter("fibonacci_sphere needs at least 4 points");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * static_cast<double>(i);
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

/// Bounded intersection of half-spaces {x : normals[j] . x <= offsets[j]}, all
/// offsets positive. Computed through the polar body: the hull of normals/offsets
/// has one facet per vertex of the intersection.
inline Polytope halfspace_intersection(const std::vector<Vec3>& normals, const std::vector<double>& offsets) {
  if (normals.size() != offsets.size()) throw InvalidParameter("normals and offsets differ in length");
  std::vector<Vec3> dual;
  dual.reserve(normals.size());
  for (std::size_t j = 0; j < normals.size(); ++j) {
    if (!(offsets[j] > 0.0)) throw InvalidParameter("half-space offsets must be positive");
    dual.push_back(normals[j].normalized() / offsets[j]);
  }
  Polytope polar = convex_hull_3d(dual);
  if (!polar.contains_origin(0.0)) throw InvalidParameter("half-space intersection is unbounded");
  std::vector<Vec3> corners;
  for (const auto& f : polar.facets()) corners.push_back(f.normal / f.support);
  return convex_hull_3d(corners);
}

/// Circumscribed polytope of P + rB: P's own facet planes pushed out by r plus
/// tangent planes of the offset body for each of the given directions.
inline Polytope ball_offset_outer(const Polytope& p, double r, const std::vector<Vec3>& directions) {
  if (!(r >= 0.0)) throw InvalidParameter("offset radius must be nonnegative");
  if (!p.contains_origin(0.0) || std::any_of(p.facets().begin(), p.facets().end(), [](const Facet& f) { return f.support <= 0; }))
    throw PreconditionViolation("ball offset needs the origin in the interior");
  std::vector<Vec3> normals;
  std::vector<double> offsets;
  for (const auto& f : p.facets()) {
    normals.push_back(f.normal);
    offsets.push_back(f.support + r);
  }
  for (const auto& d : directions) {
    Vec3 u = d.normalized();
    normals.push_back(u);
    offsets.push_back(p.support(u) + r);
  }
  return halfspace_intersection(normals, offsets);
}

inline double support_function(const Polytope& p, const Vec3& u) { return p.support(u); }

/// One atom per facet: (normal, area).
inline DiscreteMeasure surface_area_measure(const Polytope& p) {
  std::vector<DiscreteMeasure::Atom> atoms;
  for (const auto& f : p.facets()) atoms.push_back({f.normal, f.area});
  return DiscreteMeasure(std::move(atoms));
}

/// One atom per facet: (normal, h_F * area / 3). Requires the origin in the body.
inline DiscreteMeasure cone_volume_measure(const Polytope& p) {
  if (!p.contains_origin())
    throw PreconditionViolation("cone-volume measure needs the origin inside the polytope");
  std::vector<DiscreteMeasure::Atom> atoms;
  for (const auto& f : p.facets()) atoms.push_back({f.normal, std::max(f.support, 0.0) * f.area / 3.0});
  return DiscreteMeasure(std::move(atoms));
}

/// Volume as the sum of facet cones with apex at the centroid.
inline double volume(const Polytope& p) {
  double v = 0;
  for (const auto& f : p.facets()) v += (f.support - f.normal.dot(p.centroid())) * f.area / 3.0;
  return v;
}

inline double surface_area(const Polytope& p) { return surface_area_measure(p).total_mass(); }

// ---- OBJ interchange -------------------------------------------------------

struct ObjMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<std::size_t>> faces;  // zero-based
};

inline ObjMesh read_obj(std::istream& in) {
  ObjMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = io::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw InvalidParameter("bad vertex on OBJ line " + std::to_string(lineno));
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<std::size_t> face;
      std::string tok;
      while (ss >> tok) {
        auto slash = tok.find('/');
        long idx = 0;
        try {
          idx = std::stol(tok.substr(0, slash));
        } catch (const std::exception&) {
          throw InvalidParameter("bad face index on OBJ line " + std::to_string(lineno));
        }
        if (idx < 0) idx = static_cast<long>(mesh.vertices.size()) + idx + 1;
        if (idx < 1 || static_cast<std::size_t>(idx) > mesh.vertices.size())
          throw InvalidParameter("face index out of range on OBJ line " + std::to_string(lineno));
        face.push_back(static_cast<std::size_t>(idx - 1));
      }
      if (face.size() < 3) throw InvalidParameter("face with fewer than 3 vertices on OBJ line " + std::to_string(lineno));
      mesh.faces.push_back(std::move(face));
    }
  }
  return mesh;
}

/// Polytope of an OBJ file: the convex hull of its vertices.
inline Polytope polytope_from_obj(std::istream& in) {
  ObjMesh mesh = read_obj(in);
  return convex_hull_3d(mesh.vertices);
}

inline void write_obj(std::ostream& out, const Polytope& p) {
  for (const auto& v : p.vertices())
    out << "v " << io::format_double(v.x()) << ' ' << io::format_double(v.y()) << ' ' << io::format_double(v.z()) << '\n';
  for (const auto& f : p.facets()) {
    out << 'f';
    for (auto idx : f.loop) out << ' ' << idx + 1;
    out << '\n';
  }
}

}  // namespace logmink
