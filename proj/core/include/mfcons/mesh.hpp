#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mfcons/types.hpp"

namespace mfcons {

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  /// Range and degeneracy checks. Throws invalid_argument.
  void validate() const;
};

/// Undirected weighted adjacency used for shortest-path geodesics.
class EdgeGraph {
 public:
  struct Arc {
    std::uint32_t to;
    double length;
  };

  explicit EdgeGraph(std::size_t num_vertices = 0) : adjacency_(num_vertices) {}

  /// Mesh edges weighted by Euclidean length.
  static EdgeGraph from_mesh(const TriMesh& mesh);
  /// Symmetric k-nearest-neighbour graph, for point clouds without faces.
  static EdgeGraph knn(std::span<const Vec3> points, std::size_t k);
  /// from_mesh when the mesh has triangles, knn(vertices, 8) otherwise.
  static EdgeGraph for_surface(const TriMesh& mesh);

  void add_edge(std::uint32_t a, std::uint32_t b, double length);

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::span<const Arc> neighbors(std::size_t v) const { return adjacency_[v]; }

  /// Component id per vertex, numbered in order of first vertex.
  std::vector<std::uint32_t> components() const;

  /// Single-source Dijkstra. Unreachable vertices get +infinity.
  std::vector<double> shortest_paths(std::uint32_t source) const;

 private:
  std::vector<std::vector<Arc>> adjacency_;
};

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct GeodesicTable {
  std::vector<std::uint32_t> ids;
  std::vector<double> distances;  // row-major ids.size() x ids.size()

  std::size_t size() const noexcept { return ids.size(); }
  double at(std::size_t row, std::size_t col) const { return distances[row * ids.size() + col]; }
};

GeodesicTable geodesic_distances(const EdgeGraph& graph, std::span<const std::uint32_t> ids);
GeodesicTable geodesic_distances(const TriMesh& mesh, std::span<const std::uint32_t> ids);

/// Largest pairwise geodesic over a seeded sample of vertices (all vertices
/// when sample_count >= vertex count). Throws disconnected_mesh.
double mesh_diameter(const EdgeGraph& graph, std::size_t sample_count, std::uint64_t seed);
double mesh_diameter(const TriMesh& mesh, std::size_t sample_count, std::uint64_t seed);

/// Bowyer-Watson in input order inside a super-triangle ten times the
/// bounding box. Cocircular quads take the diagonal through the lowest vertex
/// index. `heights` (optional) becomes the z coordinate of the output.
/// Throws degenerate_input for fewer than 3 points or all-collinear input.
TriMesh delaunay_triangulate_2d(std::span<const Vec2> points, std::span<const double> heights = {});

/// Signed incircle determinant; positive when d lies inside the circle
/// through the counter-clockwise triangle (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace mfcons
