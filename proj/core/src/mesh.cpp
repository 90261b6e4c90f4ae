#include "mfcons/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>

#include "mfcons/error.hpp"

namespace mfcons {

void TriMesh::validate() const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (auto v : tri) {
      if (v >= vertices.size()) {
        throw Error(Errc::invalid_argument, "triangle " + std::to_string(t) + " references a missing vertex");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw Error(Errc::invalid_argument, "triangle " + std::to_string(t) + " repeats a vertex");
    }
  }
}

void EdgeGraph::add_edge(std::uint32_t a, std::uint32_t b, double length) {
  adjacency_[a].push_back({b, length});
  adjacency_[b].push_back({a, length});
}

EdgeGraph EdgeGraph::from_mesh(const TriMesh& mesh) {
  mesh.validate();
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k];
      const std::uint32_t b = t[(k + 1) % 3];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  EdgeGraph g(mesh.vertices.size());
  for (const auto& [a, b] : edges) g.add_edge(a, b, (mesh.vertices[a] - mesh.vertices[b]).norm());
  return g;
}

EdgeGraph EdgeGraph::knn(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::pair<double, std::uint32_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((points[i] - points[j]).squaredNorm(), static_cast<std::uint32_t>(j));
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    for (std::size_t r = 0; r < take; ++r) {
      const auto a = static_cast<std::uint32_t>(i);
      const auto b = dist[r].second;
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  EdgeGraph g(n);
  for (const auto& [a, b] : edges) g.add_edge(a, b, (points[a] - points[b]).norm());
  return g;
}

EdgeGraph EdgeGraph::for_surface(const TriMesh& mesh) {
  if (mesh.triangles.empty()) return knn(mesh.vertices, 8);
  return from_mesh(mesh);
}

std::vector<std::uint32_t> EdgeGraph::components() const {
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(size(), unset);
  std::uint32_t next = 0;
  std::vector<std::uint32_t> stack;
  for (std::size_t s = 0; s < size(); ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    stack.assign(1, static_cast<std::uint32_t>(s));
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& arc : adjacency_[v]) {
        if (comp[arc.to] == unset) {
          comp[arc.to] = next;
          stack.push_back(arc.to);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::vector<double> EdgeGraph::shortest_paths(std::uint32_t source) const {
  std::vector<double> dist(size(), kUnreachable);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& arc : adjacency_[v]) {
      const double nd = d + arc.length;
      if (nd < dist[arc.to]) {
        dist[arc.to] = nd;
        heap.emplace(nd, arc.to);
      }
    }
  }
  return dist;
}

GeodesicTable geodesic_distances(const EdgeGraph& graph, std::span<const std::uint32_t> ids) {
  for (auto id : ids) {
    if (id >= graph.size()) throw Error(Errc::invalid_argument, "geodesic query vertex out of range");
  }
  GeodesicTable table;
  table.ids.assign(ids.begin(), ids.end());
  const std::size_t k = ids.size();
  table.distances.assign(k * k, 0.0);
  std::map<std::uint32_t, std::vector<double>> cache;
  for (std::size_t r = 0; r < k; ++r) {
    auto it = cache.find(ids[r]);
    if (it == cache.end()) it = cache.emplace(ids[r], graph.shortest_paths(ids[r])).first;
    for (std::size_t c = 0; c < k; ++c) table.distances[r * k + c] = it->second[ids[c]];
  }
  // Symmetrize; the two Dijkstra runs agree up to summation order.
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = r + 1; c < k; ++c) {
      const double d = std::min(table.distances[r * k + c], table.distances[c * k + r]);
      table.distances[r * k + c] = table.distances[c * k + r] = d;
    }
  }
  return table;
}

GeodesicTable geodesic_distances(const TriMesh& mesh, std::span<const std::uint32_t> ids) {
  return geodesic_distances(EdgeGraph::from_mesh(mesh), ids);
}

double mesh_diameter(const EdgeGraph& graph, std::size_t sample_count, std::uint64_t seed) {
  if (sample_count < 2) throw Error(Errc::invalid_argument, "diameter needs at least two samples");
  if (graph.size() == 0) throw Error(Errc::invalid_argument, "diameter of an empty mesh");
  const auto comp = graph.components();
  if (std::any_of(comp.begin(), comp.end(), [](std::uint32_t c) { return c != 0; })) {
    throw Error(Errc::disconnected_mesh, "mesh has more than one connected component");
  }
  std::vector<std::uint32_t> all(graph.size());
  std::iota(all.begin(), all.end(), 0u);
  std::vector<std::uint32_t> sample;
  if (sample_count >= all.size()) {
    sample = all;
  } else {
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(sample), sample_count, rng);
  }
  const GeodesicTable table = geodesic_distances(graph, sample);
  return table.distances.empty() ? 0.0 : *std::max_element(table.distances.begin(), table.distances.end());
}

double mesh_diameter(const TriMesh& mesh, std::size_t sample_count, std::uint64_t seed) {
  return mesh_diameter(EdgeGraph::for_surface(mesh), sample_count, seed);
}

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

namespace {

struct Tri {
  std::array<std::uint32_t, 3> v;
  bool alive = true;
};

Triangle canonical(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  // Rotate so the smallest index leads; orientation is preserved.
  if (b < a && b < c) return {b, c, a};
  if (c < a && c < b) return {c, a, b};
  return {a, b, c};
}

}  // namespace

TriMesh delaunay_triangulate_2d(std::span<const Vec2> points, std::span<const double> heights) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(Errc::degenerate_input, "Delaunay needs at least three points");
  if (!heights.empty() && heights.size() != n) {
    throw Error(Errc::invalid_argument, "heights must match the point count");
  }

  Vec2 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-300);
  const double area_tol = 1e-12 * extent * extent;

  {
    std::set<std::pair<double, double>> unique;
    for (const auto& p : points) {
      if (!unique.emplace(p.x(), p.y()).second) throw Error(Errc::degenerate_input, "duplicate input point");
    }
    std::size_t far = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if ((points[i] - points[0]).squaredNorm() > (points[far] - points[0]).squaredNorm()) far = i;
    }
    bool collinear = true;
    for (std::size_t i = 0; i < n && collinear; ++i) {
      if (std::abs(orient2d(points[0], points[far], points[i])) > area_tol) collinear = false;
    }
    if (collinear) throw Error(Errc::degenerate_input, "all points are collinear");
  }

  const std::span<const Vec2> pts = points;
  // Vertex at infinity. A ghost triangle (u, v, g) stands for the open half
  // plane left of u->v, which lies outside the current hull.
  const auto g = static_cast<std::uint32_t>(n);

  std::uint32_t i0 = 0, i1 = 1, i2 = 0;
  for (std::uint32_t i = 1; i < n; ++i) {
    if ((pts[i] - pts[0]).squaredNorm() > (pts[i1] - pts[0]).squaredNorm()) i1 = i;
  }
  double best = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double o = std::abs(orient2d(pts[i0], pts[i1], pts[i]));
    if (o > best) {
      best = o;
      i2 = i;
    }
  }
  if (orient2d(pts[i0], pts[i1], pts[i2]) < 0) std::swap(i1, i2);

  std::vector<Tri> tris;
  tris.push_back({{i0, i1, i2}});
  tris.push_back({{i1, i0, g}});
  tris.push_back({{i2, i1, g}});
  tris.push_back({{i0, i2, g}});

  const double circle_tol = 1e-12 * extent * extent * extent * extent;
  auto in_conflict = [&](const Tri& t, std::uint32_t p) {
    if (t.v[2] != g) return incircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], pts[p]) > circle_tol;
    const Vec2& u = pts[t.v[0]];
    const Vec2& v = pts[t.v[1]];
    const double o = orient2d(u, v, pts[p]);
    if (o > area_tol) return true;
    if (o < -area_tol) return false;
    const double along = (pts[p] - u).dot(v - u);
    return along > 0.0 && along < (v - u).squaredNorm();
  };

  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_count;
  for (std::uint32_t p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2) continue;
    edge_count.clear();
    std::vector<std::size_t> bad;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (tris[t].alive && in_conflict(tris[t], p)) bad.push_back(t);
    }
    for (std::size_t t : bad) {
      tris[t].alive = false;
      const auto& v = tris[t].v;
      for (int k = 0; k < 3; ++k) {
        const auto a = v[k], b = v[(k + 1) % 3];
        ++edge_count[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (std::size_t t : bad) {
      const auto v = tris[t].v;  // copy: push_back below may reallocate
      for (int k = 0; k < 3; ++k) {
        const auto a = v[k], b = v[(k + 1) % 3];
        if (edge_count[{std::min(a, b), std::max(a, b)}] != 1) continue;
        // Keep the ghost vertex last so the half-plane test sees (u, v, g).
        if (a == g) tris.push_back({{b, p, g}});
        else if (b == g) tris.push_back({{p, a, g}});
        else tris.push_back({{a, b, p}});
      }
    }
    if (p % 32 == 31) std::erase_if(tris, [](const Tri& t) { return !t.alive; });
  }

  std::vector<Triangle> out;
  for (const auto& t : tris) {
    if (!t.alive || t.v[2] == g) continue;
    out.push_back(canonical(t.v[0], t.v[1], t.v[2]));
  }

  // Cocircular quads: keep the diagonal through the lowest vertex index.
  for (std::size_t pass = 0; pass < 4 * out.size() + 4; ++pass) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<std::size_t, int>> owner;
    bool flipped = false;
    for (std::size_t t = 0; t < out.size() && !flipped; ++t) {
      for (int k = 0; k < 3 && !flipped; ++k) {
        const auto a = out[t][k], b = out[t][(k + 1) % 3];
        const auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto it = owner.find(key);
        if (it == owner.end()) {
          owner.emplace(key, std::make_pair(t, k));
          continue;
        }
        const std::size_t u = it->second.first;
        const auto c = out[t][(k + 2) % 3];
        std::uint32_t d = 0;
        for (auto w : out[u]) {
          if (w != a && w != b) d = w;
        }
        if (std::abs(incircle(pts[a], pts[b], pts[c], pts[d])) > circle_tol) continue;
        if (std::min(c, d) >= std::min(a, b)) continue;
        // Flip only when the quad is strictly convex.
        if (orient2d(pts[c], pts[d], pts[a]) * orient2d(pts[c], pts[d], pts[b]) >= 0) continue;
        // t = (a, b, c) counter-clockwise, u holds (b, a, d).
        out[t] = canonical(c, a, d);
        out[u] = canonical(d, b, c);
        flipped = true;
      }
    }
    if (!flipped) break;
  }

  std::sort(out.begin(), out.end());
  TriMesh mesh;
  mesh.vertices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    mesh.vertices.emplace_back(points[i].x(), points[i].y(), heights.empty() ? 0.0 : heights[i]);
  }
  mesh.triangles = std::move(out);
  return mesh;
}

}  // namespace mfcons
