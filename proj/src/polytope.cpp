#include "cca/polytope.hpp"

#include "cca/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace cca {

BoxLimits::BoxLimits(VecX lo, VecX hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw InputError("box limits: lower has " + std::to_string(lower.size()) +
                     " entries, upper has " + std::to_string(upper.size()));
  }
  if (lower.size() < 1) throw InputError("box limits: need at least one actuator");
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) {
      throw InputError("box limits: lower[" + std::to_string(j) + "] = " +
                       format_double(lower[j]) + " is not below upper = " +
                       format_double(upper[j]));
    }
  }
}

bool BoxLimits::contains(const VecX& u, double tol) const {
  if (u.size() != lower.size()) return false;
  return ((u - lower).array() >= -tol).all() && ((upper - u).array() >= -tol).all();
}

int PolytopeV::euler_characteristic() const {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& f : facets) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k];
      int b = f[(k + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
         static_cast<int>(facets.size());
}

double PolytopeV::radius() const {
  double r = 0.0;
  for (const auto& v : vertices) r = std::max(r, v.norm());
  return r;
}

std::vector<VecX> enumerate_vertices(const BoxLimits& limits, int cap) {
  const int m = limits.size();
  if (m > cap) throw VertexExplosionError(m, cap);
  const std::size_t count = std::size_t{1} << m;
  std::vector<VecX> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    VecX v(m);
    for (int j = 0; j < m; ++j) v[j] = ((i >> j) & 1U) ? limits.upper[j] : limits.lower[j];
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vec3> map_vertices(const std::vector<VecX>& vertices, const MatX& transform) {
  if (transform.rows() != 3) {
    throw InputError("map_vertices: transform has " + std::to_string(transform.rows()) +
                     " rows, expected 3");
  }
  std::vector<Vec3> out;
  out.reserve(vertices.size());
  for (const auto& v : vertices) {
    if (v.size() != transform.cols()) {
      throw InputError("map_vertices: vertex dimension " + std::to_string(v.size()) +
                       " does not match transform columns " +
                       std::to_string(transform.cols()));
    }
    out.emplace_back(transform * v);
  }
  return out;
}

namespace {

struct Face {
  std::array<int, 3> v;
  Vec3 normal;
  double offset = 0.0;
  bool alive = true;
  std::vector<int> outside;

  double distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

class QuickHull {
 public:
  QuickHull(const std::vector<Vec3>& points, double rel_tol) : pts_(points) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& p : pts_) {
      if (!p.allFinite()) throw InputError("convex hull: non-finite input point");
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 centre = 0.5 * (lo + hi);
    double scale = 0.0;
    for (const auto& p : pts_) scale = std::max(scale, (p - centre).norm());
    eps_ = rel_tol * scale;
    if (scale == 0.0) throw DegenerateHullError(0);
  }

  PolytopeV run() {
    build_simplex();
    for (;;) {
      int eye_face = -1;
      int eye_point = -1;
      double best = eps_;
      for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (!faces_[f].alive) continue;
        for (int p : faces_[f].outside) {
          double d = faces_[f].distance(pts_[p]);
          if (d > best) {
            best = d;
            eye_face = static_cast<int>(f);
            eye_point = p;
          }
        }
      }
      if (eye_face < 0) break;
      add_point(eye_face, eye_point);
    }
    return collect();
  }

 private:
  void build_simplex() {
    const int n = static_cast<int>(pts_.size());
    if (n < 4) throw DegenerateHullError(std::max(0, n - 1));

    // Farthest pair among the axis extremes.
    std::array<int, 6> ext{};
    for (int a = 0; a < 3; ++a) {
      int imin = 0, imax = 0;
      for (int i = 1; i < n; ++i) {
        if (pts_[i][a] < pts_[imin][a]) imin = i;
        if (pts_[i][a] > pts_[imax][a]) imax = i;
      }
      ext[2 * a] = imin;
      ext[2 * a + 1] = imax;
    }
    int i0 = ext[0], i1 = ext[1];
    double dmax = -1.0;
    for (int a : ext) {
      for (int b : ext) {
        double d = (pts_[a] - pts_[b]).squaredNorm();
        if (d > dmax) {
          dmax = d;
          i0 = a;
          i1 = b;
        }
      }
    }
    if (std::sqrt(dmax) <= eps_) throw DegenerateHullError(0);

    const Vec3 dir = (pts_[i1] - pts_[i0]).normalized();
    int i2 = -1;
    dmax = eps_;
    for (int i = 0; i < n; ++i) {
      Vec3 r = pts_[i] - pts_[i0];
      double d = (r - r.dot(dir) * dir).norm();
      if (d > dmax) {
        dmax = d;
        i2 = i;
      }
    }
    if (i2 < 0) throw DegenerateHullError(1);

    const Vec3 plane_n = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    int i3 = -1;
    dmax = eps_;
    for (int i = 0; i < n; ++i) {
      double d = std::abs(plane_n.dot(pts_[i] - pts_[i0]));
      if (d > dmax) {
        dmax = d;
        i3 = i;
      }
    }
    if (i3 < 0) throw DegenerateHullError(2);

    if (plane_n.dot(pts_[i3] - pts_[i0]) > 0) std::swap(i1, i2);
    // (i0, i1, i2) now faces away from i3.
    make_face(i0, i1, i2);
    make_face(i0, i3, i1);
    make_face(i1, i3, i2);
    make_face(i2, i3, i0);

    std::vector<int> all;
    all.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (i != i0 && i != i1 && i != i2 && i != i3) all.push_back(i);
    }
    assign(all, {0, 1, 2, 3});
  }

  int make_face(int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    const Vec3& pa = pts_[a];
    const Vec3& pb = pts_[b];
    const Vec3& pc = pts_[c];
    f.normal = (pb - pa).cross(pc - pa);
    double len = f.normal.norm();
    if (len > 0) f.normal /= len;
    f.offset = (f.normal.dot(pa) + f.normal.dot(pb) + f.normal.dot(pc)) / 3.0;
    const int id = static_cast<int>(faces_.size());
    faces_.push_back(std::move(f));
    edges_[edge_key(a, b)] = id;
    edges_[edge_key(b, c)] = id;
    edges_[edge_key(c, a)] = id;
    return id;
  }

  void assign(const std::vector<int>& candidates, const std::vector<int>& targets) {
    for (int p : candidates) {
      int best_face = -1;
      double best = eps_;
      for (int f : targets) {
        double d = faces_[f].distance(pts_[p]);
        if (d > best) {
          best = d;
          best_face = f;
        }
      }
      if (best_face >= 0) faces_[best_face].outside.push_back(p);
    }
  }

  void add_point(int eye_face, int eye) {
    const Vec3& p = pts_[eye];
    std::vector<int> visible{eye_face};
    faces_[eye_face].alive = false;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const Face& f = faces_[visible[k]];
      for (int e = 0; e < 3; ++e) {
        int nb = edges_.at(edge_key(f.v[(e + 1) % 3], f.v[e]));
        if (faces_[nb].alive && faces_[nb].distance(p) > eps_) {
          faces_[nb].alive = false;
          visible.push_back(nb);
        }
      }
    }

    std::vector<std::pair<int, int>> horizon;
    std::vector<int> orphans;
    for (int fid : visible) {
      const Face& f = faces_[fid];
      for (int e = 0; e < 3; ++e) {
        int a = f.v[e];
        int b = f.v[(e + 1) % 3];
        int nb = edges_.at(edge_key(b, a));
        if (faces_[nb].alive) horizon.emplace_back(a, b);
      }
      for (int q : f.outside) {
        if (q != eye) orphans.push_back(q);
      }
    }
    for (int fid : visible) {
      const Face& f = faces_[fid];
      for (int e = 0; e < 3; ++e) edges_.erase(edge_key(f.v[e], f.v[(e + 1) % 3]));
      faces_[fid].outside.clear();
    }

    std::vector<int> created;
    created.reserve(horizon.size());
    for (auto [a, b] : horizon) created.push_back(make_face(a, b, eye));
    assign(orphans, created);
  }

  PolytopeV collect() const {
    PolytopeV out;
    std::vector<int> remap(pts_.size(), -1);
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        int& slot = remap[f.v[k]];
        if (slot < 0) {
          slot = static_cast<int>(out.vertices.size());
          out.vertices.push_back(pts_[f.v[k]]);
        }
        tri[k] = slot;
      }
      out.facets.push_back(tri);
    }
    return out;
  }

  const std::vector<Vec3>& pts_;
  double eps_ = 0.0;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, int> edges_;
};

Vec3 facet_normal(const PolytopeV& p, const std::array<int, 3>& f) {
  const Vec3& a = p.vertices[f[0]];
  return (p.vertices[f[1]] - a).cross(p.vertices[f[2]] - a).normalized();
}

// Vertices whose incident facet normals do not span 3-space sit on an edge or
// inside a flat face; confirm by distance to the hull of the others.
std::vector<int> suspect_vertices(const PolytopeV& p) {
  std::vector<std::vector<Vec3>> incident(p.vertices.size());
  for (const auto& f : p.facets) {
    Vec3 n = facet_normal(p, f);
    for (int v : f) incident[v].push_back(n);
  }
  std::vector<int> out;
  for (std::size_t v = 0; v < incident.size(); ++v) {
    MatX3 stack(static_cast<Eigen::Index>(incident[v].size()), 3);
    for (std::size_t k = 0; k < incident[v].size(); ++k) {
      stack.row(static_cast<Eigen::Index>(k)) = incident[v][k].transpose();
    }
    Eigen::JacobiSVD<MatX3> svd(stack);
    const auto& s = svd.singularValues();
    if (s.size() < 3 || s[2] <= 1e-6 * s[0]) out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

PolytopeV convex_hull_3d(const std::vector<Vec3>& points, double rel_tol) {
  PolytopeV hull = QuickHull(points, rel_tol).run();

  // Drop vertices that are not extreme within tolerance and rebuild.
  for (;;) {
    const std::vector<int> suspects = suspect_vertices(hull);
    int drop = -1;
    for (int v : suspects) {
      std::vector<Vec3> others;
      others.reserve(hull.vertices.size() - 1);
      for (std::size_t k = 0; k < hull.vertices.size(); ++k) {
        if (static_cast<int>(k) != v) others.push_back(hull.vertices[k]);
      }
      PolytopeV reduced;
      try {
        reduced = QuickHull(others, rel_tol).run();
      } catch (const DegenerateHullError&) {
        continue;
      }
      const double eps = rel_tol * std::max(hull.radius(), 1e-300);
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& f : reduced.facets) {
        const Vec3 n = facet_normal(reduced, f);
        worst = std::max(worst, n.dot(hull.vertices[v] - reduced.vertices[f[0]]));
      }
      if (worst <= eps) {
        drop = v;
        hull = std::move(reduced);
        break;
      }
    }
    if (drop < 0) break;
  }
  return hull;
}

PolytopeH to_halfspace(const PolytopeV& p, double rel_tol) {
  const double eps = rel_tol * p.radius();
  PolytopeH h;
  h.tolerance = rel_tol;
  h.normals.resize(static_cast<Eigen::Index>(p.facets.size()), 3);
  for (std::size_t i = 0; i < p.facets.size(); ++i) {
    const auto& f = p.facets[i];
    const Vec3 n = facet_normal(p, f);
    const double d =
        (n.dot(p.vertices[f[0]]) + n.dot(p.vertices[f[1]]) + n.dot(p.vertices[f[2]])) / 3.0;
    if (!(d > eps)) {
      throw OriginNotInteriorError("origin not interior: facet " + std::to_string(i) +
                                   " has offset " + format_double(d));
    }
    h.normals.row(static_cast<Eigen::Index>(i)) = (n / d).transpose();
  }
  return h;
}

std::vector<Vec3> halfspace_vertices(const PolytopeH& h) {
  std::vector<Vec3> dual;
  dual.reserve(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index i = 0; i < h.normals.rows(); ++i) dual.emplace_back(h.normals.row(i));
  PolytopeV dual_hull = convex_hull_3d(dual, h.tolerance);

  double dual_radius = dual_hull.radius();
  std::vector<Vec3> out;
  for (const auto& f : dual_hull.facets) {
    const Vec3 n = facet_normal(dual_hull, f);
    const double d = n.dot(dual_hull.vertices[f[0]]);
    if (!(d > h.tolerance * dual_radius)) {
      throw DegenerateIntersectionError("degenerate intersection: half-space system is unbounded");
    }
    out.push_back(n / d);
  }
  double radius = 0.0;
  for (const auto& v : out) radius = std::max(radius, v.norm());
  const double merge = 1e3 * h.tolerance * radius;
  std::vector<Vec3> unique;
  for (const auto& v : out) {
    bool seen = std::any_of(unique.begin(), unique.end(),
                            [&](const Vec3& u) { return (u - v).norm() <= merge; });
    if (!seen) unique.push_back(v);
  }
  return unique;
}

PolytopeV intersect(const PolytopeV& a, const PolytopeV& b, double rel_tol) {
  PolytopeH ha;
  PolytopeH hb;
  try {
    ha = to_halfspace(a, rel_tol);
    hb = to_halfspace(b, rel_tol);
  } catch (const OriginNotInteriorError& e) {
    throw DegenerateIntersectionError(std::string("degenerate intersection: ") + e.what());
  }
  PolytopeH pooled;
  pooled.tolerance = rel_tol;
  pooled.normals.resize(ha.rows() + hb.rows(), 3);
  pooled.normals << ha.normals, hb.normals;
  try {
    return convex_hull_3d(halfspace_vertices(pooled), rel_tol);
  } catch (const DegenerateHullError& e) {
    throw DegenerateIntersectionError(std::string("degenerate intersection: ") + e.what());
  }
}

double max_row_product(const PolytopeH& h, const Vec3& tau) {
  if (h.rows() == 0) return -std::numeric_limits<double>::infinity();
  return (h.normals * tau).maxCoeff();
}

bool contains(const PolytopeH& h, const Vec3& tau) {
  return max_row_product(h, tau) <= 1.0 + h.tolerance;
}

Eigen::Matrix<double, 3, 2> extents(const PolytopeV& p) {
  Eigen::Matrix<double, 3, 2> e;
  e.col(0).setConstant(std::numeric_limits<double>::infinity());
  e.col(1).setConstant(-std::numeric_limits<double>::infinity());
  for (const auto& v : p.vertices) {
    e.col(0) = e.col(0).cwiseMin(v);
    e.col(1) = e.col(1).cwiseMax(v);
  }
  return e;
}

bool same_vertex_set(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tol) {
  if (a.size() != b.size()) return false;
  auto covered = [tol](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    return std::all_of(x.begin(), x.end(), [&](const Vec3& p) {
      return std::any_of(y.begin(), y.end(),
                         [&](const Vec3& q) { return (p - q).lpNorm<Eigen::Infinity>() <= tol; });
    });
  };
  return covered(a, b) && covered(b, a);
}

void write_off(std::ostream& os, const PolytopeV& p) {
  os << "OFF\n" << p.vertices.size() << ' ' << p.facets.size() << " 0\n";
  for (const auto& v : p.vertices) {
    os << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z())
       << '\n';
  }
  for (const auto& f : p.facets) os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

PolytopeV read_off(std::istream& is) {
  std::string magic;
  if (!(is >> magic) || magic != "OFF") throw InputError("OFF: missing header");
  std::size_t nv = 0, nf = 0, ne = 0;
  if (!(is >> nv >> nf >> ne)) throw InputError("OFF: bad counts line");
  PolytopeV p;
  p.vertices.resize(nv);
  for (auto& v : p.vertices) {
    for (int k = 0; k < 3; ++k) {
      std::string tok;
      if (!(is >> tok)) throw InputError("OFF: truncated vertex list");
      v[k] = parse_double(tok);
    }
  }
  p.facets.resize(nf);
  for (auto& f : p.facets) {
    int count = 0;
    if (!(is >> count) || count != 3) throw InputError("OFF: only triangular facets supported");
    for (int k = 0; k < 3; ++k) {
      if (!(is >> f[k]) || f[k] < 0 || static_cast<std::size_t>(f[k]) >= nv) {
        throw InputError("OFF: bad facet index");
      }
    }
  }
  return p;
}

}  // namespace cca
