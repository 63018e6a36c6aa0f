#include "amstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace amstokes {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

bool on_outer_boundary(const Vec2& a, const Vec2& b) {
  const double tol = 1e-12;
  auto on_line = [&](double va, double vb, double target) {
    return std::abs(va - target) < tol && std::abs(vb - target) < tol;
  };
  return on_line(a.x, b.x, -1.0) || on_line(a.x, b.x, 1.0) || on_line(a.y, b.y, -1.0) ||
         on_line(a.y, b.y, 1.0);
}

}  // namespace

int quadrant_of(const Vec2& p) {
  if (p.x > 0.0) return p.y > 0.0 ? 1 : 4;
  return p.y > 0.0 ? 2 : 3;
}

void Mesh::build_edges() {
  edges.clear();
  tri_edges.assign(triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> index;
  for (size_t k = 0; k < triangles.size(); ++k) {
    const auto& t = triangles[k];
    for (int i = 0; i < 3; ++i) {
      int a = t.v[(i + 1) % 3];
      int b = t.v[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, fresh] = index.try_emplace({a, b}, static_cast<int>(edges.size()));
      if (fresh) {
        Edge e;
        e.a = a;
        e.b = b;
        e.tri[0] = static_cast<int>(k);
        edges.push_back(e);
      } else {
        Edge& e = edges[it->second];
        if (e.tri[1] != -1) throw std::runtime_error("edge with more than two incident triangles");
        e.tri[1] = static_cast<int>(k);
      }
      tri_edges[k][i] = it->second;
    }
  }
  for (auto& e : edges) e.boundary = (e.tri[1] == -1);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (const auto& t : triangles)
    s += signed_area(vertices[t.v[0]], vertices[t.v[1]], vertices[t.v[2]]);
  return s;
}

double Mesh::min_angle() const {
  double amin = 4.0;
  for (const auto& t : triangles) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 p = vertices[t.v[i]];
      const Vec2 u = vertices[t.v[(i + 1) % 3]] - p;
      const Vec2 w = vertices[t.v[(i + 2) % 3]] - p;
      const double ang = std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0));
      amin = std::min(amin, ang);
    }
  }
  return amin;
}

void Mesh::audit() const {
  for (size_t k = 0; k < triangles.size(); ++k) {
    const auto& t = triangles[k];
    if (signed_area(vertices[t.v[0]], vertices[t.v[1]], vertices[t.v[2]]) <= 0.0)
      throw std::runtime_error("non-positive triangle area");
    const Vec2 c = (vertices[t.v[0]] + vertices[t.v[1]] + vertices[t.v[2]]) * (1.0 / 3.0);
    if (quadrant_of(c) != t.label) throw std::runtime_error("label does not match centroid quadrant");
  }
  for (const auto& e : edges) {
    const bool single = (e.tri[1] == -1);
    if (single && !on_outer_boundary(vertices[e.a], vertices[e.b]))
      throw std::runtime_error("interior edge with one incident triangle (hanging vertex)");
    if (!single && on_outer_boundary(vertices[e.a], vertices[e.b]))
      throw std::runtime_error("boundary edge with two incident triangles");
    if (single != e.boundary) throw std::runtime_error("stale boundary flag");
  }
}

Mesh build_structured_mesh(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("structured mesh requires even n >= 2");
  Mesh mesh;
  const int m = 2 * n;  // cells per direction
  const double h = 1.0 / n;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) mesh.vertices.push_back({-1.0 + i * h, -1.0 + j * h});
  auto vid = [m](int i, int j) { return j * (m + 1) + i; };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      const Vec2 center = (mesh.vertices[v00] + mesh.vertices[v11]) * 0.5;
      const int label = quadrant_of(center);
      // Diagonal v00-v11 is the longest edge of both triangles.
      mesh.triangles.push_back({{v11, v00, v10}, label});
      mesh.triangles.push_back({{v00, v11, v01}, label});
    }
  }
  mesh.build_edges();
  return mesh;
}

Mesh bisect(const Mesh& mesh, const std::vector<int>& marked) {
  if (marked.empty()) return mesh;

  std::vector<char> refine_edge(mesh.edges.size(), 0);
  for (int k : marked) {
    if (k < 0 || k >= mesh.n_triangles()) throw std::invalid_argument("marked index out of range");
    refine_edge[mesh.tri_edges[k][2]] = 1;  // edge (v0,v1)
  }

  // Closure: a triangle with any marked edge must have its refinement edge
  // marked as well. The fixpoint marks at most one new edge per triangle per
  // sweep, so the iteration count is bounded by the edge count.
  const size_t max_sweeps = mesh.edges.size() + 2;
  size_t sweeps = 0;
  for (bool changed = true; changed; ++sweeps) {
    if (sweeps > max_sweeps) throw std::runtime_error("closure did not terminate: malformed refinement edges");
    changed = false;
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      const auto& te = mesh.tri_edges[k];
      if ((refine_edge[te[0]] || refine_edge[te[1]]) && !refine_edge[te[2]]) {
        refine_edge[te[2]] = 1;
        changed = true;
      }
    }
  }

  Mesh out;
  out.vertices = mesh.vertices;
  std::vector<int> midpoint(mesh.edges.size(), -1);
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    if (!refine_edge[e]) continue;
    midpoint[e] = out.n_vertices();
    out.vertices.push_back((mesh.vertices[mesh.edges[e].a] + mesh.vertices[mesh.edges[e].b]) * 0.5);
  }

  // Bisect (v0,v1,v2) at the midpoint of (v0,v1); the children keep the old
  // edges (v2,v0) and (v1,v2) as their refinement edges, so a second split of
  // a child reuses the midpoints created here and conformity is automatic.
  auto emit = [&](auto&& self, int v0, int v1, int v2, int e_opp2, int e_opp0, int e_opp1,
                  int label) -> void {
    if (e_opp2 < 0 || !refine_edge[e_opp2]) {
      out.triangles.push_back({{v0, v1, v2}, label});
      return;
    }
    const int m = midpoint[e_opp2];
    self(self, v2, v0, m, e_opp1, -1, -1, label);
    self(self, v1, v2, m, e_opp0, -1, -1, label);
  };
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    const auto& te = mesh.tri_edges[k];
    emit(emit, t.v[0], t.v[1], t.v[2], te[2], te[0], te[1], t.label);
  }
  out.build_edges();
  return out;
}

ElementGeometry geometry(const Mesh& mesh, int k) {
  if (k < 0 || k >= mesh.n_triangles()) throw std::invalid_argument("triangle index out of range");
  const auto& t = mesh.triangles[k];
  ElementGeometry g;
  for (int i = 0; i < 3; ++i) g.vertex[i] = mesh.vertices[t.v[i]];
  g.area = signed_area(g.vertex[0], g.vertex[1], g.vertex[2]);
  for (int i = 0; i < 3; ++i) {
    const Vec2 p = g.vertex[(i + 1) % 3];
    const Vec2 q = g.vertex[(i + 2) % 3];
    const Vec2 tang = q - p;
    g.edge_length[i] = tang.norm();
    g.normal[i] = Vec2{tang.y, -tang.x} * (1.0 / g.edge_length[i]);
    g.diameter = std::max(g.diameter, g.edge_length[i]);
  }
  for (int i = 0; i < 3; ++i)
    g.grad_lambda[i] = g.normal[i] * (-g.edge_length[i] / (2.0 * g.area));
  return g;
}

void write_mesh_txt(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(17);
  f << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices) f << v.x << " " << v.y << "\n";
  f << mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles)
    f << t.v[0] << " " << t.v[1] << " " << t.v[2] << " " << t.label << "\n";
}

void write_mesh_vtk(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(17);
  f << "# vtk DataFile Version 2.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices) f << v.x << " " << v.y << " 0\n";
  f << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) f << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
  f << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int k = 0; k < mesh.n_triangles(); ++k) f << "5\n";
  f << "CELL_DATA " << mesh.n_triangles() << "\nSCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (const auto& t : mesh.triangles) f << t.label << "\n";
}

}  // namespace amstokes
