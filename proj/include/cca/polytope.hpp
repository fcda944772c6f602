#pragma once

// Convex geometry of attainable moment sets in three dimensions.
//
// A box of actuator limits is enumerated into its 2^m corners, mapped into
// moment space by a 3 x m matrix, and wrapped by a 3-D quickhull. The hull is
// converted into a normalized half-space form  N tau <= 1  (possible because
// the origin is strictly interior), and two hulls are intersected through the
// polar dual: pooled rows of N are points whose hull facets map back to the
// vertices of the intersection.

#include "cca/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace cca {

inline constexpr double kDefaultRelativeTolerance = 1e-9;
inline constexpr int kDefaultVertexCap = 16;

struct BoxLimits {
  VecX lower;
  VecX upper;

  BoxLimits() = default;
  // Throws InputError unless sizes agree, m >= 1 and lower < upper elementwise.
  BoxLimits(VecX lower, VecX upper);

  int size() const { return static_cast<int>(lower.size()); }
  bool contains(const VecX& u, double tol = 0.0) const;
};

struct PolytopeV {
  std::vector<Vec3> vertices;
  // Index triples into `vertices`, counter-clockwise seen from outside.
  std::vector<std::array<int, 3>> facets;

  int euler_characteristic() const;
  // Largest distance of a vertex from the origin.
  double radius() const;
};

struct PolytopeH {
  // Row i is the outward normal of facet i divided by its offset.
  MatX3 normals;
  // Relative tolerance: tau is inside when every row product is <= 1 + tolerance.
  double tolerance = kDefaultRelativeTolerance;

  int rows() const { return static_cast<int>(normals.rows()); }
};

// All 2^m corners of the box in binary-counter order: bit j of the index
// selects upper[j]. Throws VertexExplosionError when m > cap.
std::vector<VecX> enumerate_vertices(const BoxLimits& limits, int cap = kDefaultVertexCap);

// Image T v of each vertex; T must be 3 x m.
std::vector<Vec3> map_vertices(const std::vector<VecX>& vertices, const MatX& transform);

// Quickhull with a tolerance of rel_tol times the radius of the input around
// its bounding-box centre. Interior and near-coplanar points are discarded, so
// every returned vertex is extreme. Throws DegenerateHullError carrying the
// detected affine rank when the input does not span three dimensions.
PolytopeV convex_hull_3d(const std::vector<Vec3>& points,
                         double rel_tol = kDefaultRelativeTolerance);

// Throws OriginNotInteriorError when a facet plane passes through or behind
// the origin.
PolytopeH to_halfspace(const PolytopeV& polytope, double rel_tol = kDefaultRelativeTolerance);

// Vertices of { tau : N tau <= 1 } recovered through the polar dual.
std::vector<Vec3> halfspace_vertices(const PolytopeH& h);

// V-representation of A ∩ B. Both inputs must contain the origin strictly;
// otherwise, or when the result is flat, throws DegenerateIntersectionError.
PolytopeV intersect(const PolytopeV& a, const PolytopeV& b,
                    double rel_tol = kDefaultRelativeTolerance);

bool contains(const PolytopeH& h, const Vec3& tau);

// Largest row of N tau; <= 1 inside, == 1 on the boundary.
double max_row_product(const PolytopeH& h, const Vec3& tau);

// Per-axis [min, max] over the vertices, as a 3 x 2 matrix.
Eigen::Matrix<double, 3, 2> extents(const PolytopeV& p);

// True when both vertex lists agree as sets within tol (order-free).
bool same_vertex_set(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tol);

// OFF-like text: "OFF", "V F 0", V vertex lines, F lines "3 i j k".
// Floats use the shortest representation that reads back exactly.
void write_off(std::ostream& os, const PolytopeV& p);
PolytopeV read_off(std::istream& is);

}  // namespace cca
