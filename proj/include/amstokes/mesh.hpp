#pragma once

#include <array>
#include <string>
#include <vector>

#include "amstokes/tensor.hpp"

namespace amstokes {

/// Triangle with counterclockwise vertices. The refinement edge is (v[0],v[1])
/// and v[2] is the peak (newest vertex), the standard newest-vertex-bisection
/// storage convention.
struct Triangle {
  std::array<int, 3> v;
  int label = 0;  // quadrant subdomain 1..4
};

struct Edge {
  int a = -1, b = -1;  // a < b; the global edge direction is a -> b
  std::array<int, 2> tri = {-1, -1};
  bool boundary = false;
};

struct ElementGeometry {
  std::array<Vec2, 3> vertex;
  double area = 0.0;
  double diameter = 0.0;                  // longest edge h_K
  std::array<Vec2, 3> normal;             // outward unit normal of edge opposite vertex i
  std::array<double, 3> edge_length;      // edge opposite vertex i
  std::array<Vec2, 3> grad_lambda;        // gradients of barycentric coordinates

  Vec2 point(double l0, double l1, double l2) const {
    return vertex[0] * l0 + vertex[1] * l1 + vertex[2] * l2;
  }

  std::array<double, 3> barycentric(const Vec2& p) const {
    std::array<double, 3> l;
    for (int i = 0; i < 3; ++i) l[i] = 1.0 + grad_lambda[i].dot(p - vertex[i]);
    return l;
  }
};

/// Conforming triangulation of [-1,1]^2 aligned with the quadrant subdomains.
/// Immutable after construction; refinement returns a new mesh.
class Mesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;
  /// tri_edges[k][i] = global index of the edge opposite local vertex i.
  std::vector<std::array<int, 3>> tri_edges;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  /// Rebuilds the edge table from the triangle list. Throws if an edge has
  /// more than two incident triangles.
  void build_edges();

  double total_area() const;
  double min_angle() const;

  /// Checks all structural invariants: positive areas, interior edges with
  /// exactly two incident triangles, single-incidence edges on the outer
  /// boundary only (no hanging vertices), labels matching centroid quadrants.
  /// Throws std::runtime_error with a description on the first violation.
  void audit() const;
};

/// Quadrant of a point, 1..4 counterclockwise from the positive quadrant.
int quadrant_of(const Vec2& p);

/// 2n x 2n grid of squares on [-1,1]^2, each split into two triangles along
/// the lower-left/upper-right diagonal; the diagonal (longest edge) is the
/// initial refinement edge. n must be even and >= 2.
Mesh build_structured_mesh(int n);

/// Newest-vertex bisection of the marked triangles plus recursive conforming
/// closure. Children inherit the parent's subdomain label.
Mesh bisect(const Mesh& mesh, const std::vector<int>& marked);

ElementGeometry geometry(const Mesh& mesh, int k);

/// Plain-text export: vertex count, "x y" lines, triangle count,
/// "v0 v1 v2 label" lines.
void write_mesh_txt(const Mesh& mesh, const std::string& path);

/// VTK legacy (ASCII) export with the subdomain label as cell data.
void write_mesh_vtk(const Mesh& mesh, const std::string& path);

}  // namespace amstokes
