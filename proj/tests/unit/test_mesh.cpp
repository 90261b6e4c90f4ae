#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mfcons/mesh.hpp"
#include "test_util.hpp"

using namespace mfcons;
using mfcons::testing::code_of;

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

// Circumcircle membership from the circumcentre, independent of incircle().
bool strictly_inside_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p, double tol) {
  const double d = 2.0 * (a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) + c.x() * (a.y() - b.y()));
  const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), c2 = c.squaredNorm();
  const Vec2 o((a2 * (b.y() - c.y()) + b2 * (c.y() - a.y()) + c2 * (a.y() - b.y())) / d,
               (a2 * (c.x() - b.x()) + b2 * (a.x() - c.x()) + c2 * (b.x() - a.x())) / d);
  const double r = (a - o).norm();
  return (p - o).norm() < r - tol;
}

double hull_area(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::vector<Vec2> hull;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t base = hull.size();
    for (const auto& p : pts) {
      while (hull.size() >= base + 2 && signed_area(hull[hull.size() - 2], hull.back(), p) <= 0) hull.pop_back();
      hull.push_back(p);
    }
    hull.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  double area = 0.0;
  for (std::size_t i = 1; i + 1 < hull.size(); ++i) area += signed_area(hull[0], hull[i], hull[i + 1]);
  return area;
}

std::vector<std::vector<double>> floyd_warshall(const TriMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kUnreachable));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k], b = t[(k + 1) % 3];
      const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
      d[a][b] = std::min(d[a][b], len);
      d[b][a] = std::min(d[b][a], len);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

std::vector<std::uint32_t> all_ids(std::size_t n) {
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  return ids;
}

TriMesh chain() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  m.triangles = {{0, 1, 2}};
  return m;
}

TriMesh two_triangles() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  return m;
}

}  // namespace

TEST(Delaunay, UnitSquareUsesLowestIndexDiagonal) {
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto mesh = delaunay_triangulate_2d(pts);
  ASSERT_EQ(mesh.triangles.size(), 2u);
  for (const auto& t : mesh.triangles) {
    EXPECT_TRUE(std::find(t.begin(), t.end(), 0u) != t.end());
    EXPECT_TRUE(std::find(t.begin(), t.end(), 2u) != t.end());
  }
  double area = 0.0;
  for (const auto& t : mesh.triangles) area += std::abs(signed_area(pts[t[0]], pts[t[1]], pts[t[2]]));
  EXPECT_NEAR(area, 1.0, 1e-12);
}

TEST(Delaunay, ThreePointsOneTriangle) {
  const std::vector<Vec2> pts{{0, 0}, {2, 0}, {0.5, 1}};
  const std::vector<double> heights{1, 2, 3};
  const auto mesh = delaunay_triangulate_2d(pts, heights);
  ASSERT_EQ(mesh.triangles.size(), 1u);
  EXPECT_EQ(mesh.vertices[2].z(), 3.0);
}

TEST(Delaunay, DegenerateInputs) {
  const std::vector<Vec2> collinear{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_EQ(code_of([&] { delaunay_triangulate_2d(collinear); }), Errc::degenerate_input);
  const std::vector<Vec2> two{{0, 0}, {1, 0}};
  EXPECT_EQ(code_of([&] { delaunay_triangulate_2d(two); }), Errc::degenerate_input);
  const std::vector<Vec2> dup{{0, 0}, {1, 0}, {0, 1}, {1, 0}};
  EXPECT_EQ(code_of([&] { delaunay_triangulate_2d(dup); }), Errc::degenerate_input);
}

TEST(Delaunay, EmptyCircumcircleAndHullCoverage) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 20; ++round) {
    std::vector<Vec2> pts(20 + rng() % 60);
    for (auto& p : pts) p = Vec2(u(rng), u(rng));
    const auto mesh = delaunay_triangulate_2d(pts);
    double area = 0.0;
    for (const auto& t : mesh.triangles) {
      const Vec2 &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
      EXPECT_GT(signed_area(a, b, c), 0.0);
      area += signed_area(a, b, c);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == t[0] || i == t[1] || i == t[2]) continue;
        EXPECT_FALSE(strictly_inside_circumcircle(a, b, c, pts[i], 1e-9));
      }
    }
    EXPECT_NEAR(area, hull_area(pts), 1e-9);
  }
}

TEST(Delaunay, GridIsDeterministic) {
  std::vector<Vec2> pts;
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) pts.emplace_back(x, y);
  }
  const auto a = delaunay_triangulate_2d(pts);
  const auto b = delaunay_triangulate_2d(pts);
  EXPECT_EQ(a.triangles, b.triangles);
  EXPECT_EQ(a.triangles.size(), 50u);
}

TEST(Geodesics, ChainAndDiagonal) {
  const auto t = geodesic_distances(chain(), all_ids(3));
  EXPECT_DOUBLE_EQ(t.at(0, 2), 2.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(t.at(i, i), 0.0);
}

TEST(Geodesics, DisconnectedIsInfinite) {
  const std::vector<std::uint32_t> ids{0, 4};
  const auto t = geodesic_distances(two_triangles(), ids);
  EXPECT_EQ(t.at(0, 1), kUnreachable);
  EXPECT_EQ(t.at(1, 0), kUnreachable);
  const std::vector<std::uint32_t> bad{9};
  EXPECT_EQ(code_of([&] { geodesic_distances(two_triangles(), bad); }), Errc::invalid_argument);
}

TEST(Geodesics, MatchFloydWarshallAndBoundEuclidean) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 10; ++round) {
    std::vector<Vec2> pts(10 + rng() % 40);
    std::vector<double> h(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      pts[i] = Vec2(u(rng), u(rng));
      h[i] = 0.3 * u(rng);
    }
    const auto mesh = delaunay_triangulate_2d(pts, h);
    const auto ids = all_ids(pts.size());
    const auto t = geodesic_distances(mesh, ids);
    const auto fw = floyd_warshall(mesh);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        EXPECT_NEAR(t.at(i, j), fw[i][j], 1e-12);
        EXPECT_EQ(t.at(i, j), t.at(j, i));
        EXPECT_GE(t.at(i, j), (mesh.vertices[i] - mesh.vertices[j]).norm() - 1e-12);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          EXPECT_LE(t.at(i, j), (t.at(i, k) + t.at(k, j)) * (1 + 1e-9));
        }
      }
    }
  }
}

TEST(Geodesics, PointCloudUsesSymmetricKnn) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(i, 0, 0);
  TriMesh cloud;
  cloud.vertices = pts;
  const auto g = EdgeGraph::for_surface(cloud);
  for (std::size_t v = 0; v < g.size(); ++v) {
    EXPECT_GE(g.neighbors(v).size(), 8u);
    for (const auto& arc : g.neighbors(v)) {
      const auto back = g.neighbors(arc.to);
      EXPECT_TRUE(std::any_of(back.begin(), back.end(), [&](const EdgeGraph::Arc& a) { return a.to == v; }));
    }
  }
  const std::vector<std::uint32_t> ids{0, 19};
  EXPECT_NEAR(geodesic_distances(g, ids).at(0, 1), 19.0, 1e-12);
  EXPECT_EQ(g.components(), std::vector<std::uint32_t>(20, 0));
}

TEST(MeshDiameter, Examples) {
  EXPECT_DOUBLE_EQ(mesh_diameter(chain(), 3, 0), 2.0);
  TriMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}};
  tri.triangles = {{0, 1, 2}};
  EXPECT_NEAR(mesh_diameter(tri, 3, 0), 1.0, 1e-12);
  EXPECT_EQ(code_of([] { mesh_diameter(two_triangles(), 6, 0); }), Errc::disconnected_mesh);
  EXPECT_EQ(code_of([] { mesh_diameter(chain(), 1, 0); }), Errc::invalid_argument);
}

TEST(TriMesh, ValidateRejectsBadTriangles) {
  TriMesh m = chain();
  m.triangles = {{0, 1, 7}};
  EXPECT_EQ(code_of([&] { m.validate(); }), Errc::invalid_argument);
  m.triangles = {{0, 1, 1}};
  EXPECT_EQ(code_of([&] { m.validate(); }), Errc::invalid_argument);
}

TEST(Predicates, OrientAndIncircle) {
  const Vec2 a(0, 0), b(1, 0), c(0, 1);
  EXPECT_GT(orient2d(a, b, c), 0.0);
  EXPECT_LT(orient2d(a, c, b), 0.0);
  EXPECT_GT(incircle(a, b, c, Vec2(0.5, 0.5)), 0.0);
  EXPECT_LT(incircle(a, b, c, Vec2(2, 2)), 0.0);
  EXPECT_NEAR(incircle(a, b, c, Vec2(1, 1)), 0.0, 1e-15);
}
