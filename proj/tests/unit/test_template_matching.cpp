#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mfcons/evaluation.hpp"
#include "mfcons/synth.hpp"
#include "mfcons/template_matching.hpp"
#include "test_util.hpp"

using namespace mfcons;
using mfcons::testing::code_of;

namespace {

struct Scene {
  std::vector<Vec3> model;
  std::vector<Vec2> pixels;
  CameraIntrinsics k{800, 800, 320, 240};
};

// Flat side x side grid seen by one rigid camera, projected without noise.
Scene rigid_scene(std::size_t side) {
  Scene s;
  const Pose pose = SynthSpec::default_pose();
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const Vec3 p(0.1 * static_cast<double>(x), 0.1 * static_cast<double>(y), 0.0);
      s.model.push_back(p);
      s.pixels.push_back(project_point(s.k, pose, p));
    }
  }
  return s;
}

MatchSet identity_matches(std::size_t n) {
  MatchSet m;
  for (std::size_t i = 0; i < n; ++i) m.pairs.push_back({i, i});
  return m;
}

}  // namespace

TEST(TriangleGraph, MinimalFourPointConfiguration) {
  Scene s = rigid_scene(2);
  TemplateMatchConfig cfg;
  cfg.edges_per_point_cap = 1;
  const auto g = build_triangle_graph(s.model, s.pixels, s.k, cfg);
  EXPECT_EQ(g.subset_size, 3u);
  EXPECT_EQ(g.vertices.size(), 2u);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_TRUE(g.edges[0].agrees);

  // Move one pixel: the single edge now disagrees and compiles to 4 variables.
  s.pixels[3] += Vec2(60, -40);
  const auto bad = build_triangle_graph(s.model, s.pixels, s.k, cfg);
  ASSERT_EQ(bad.edges.size(), 1u);
  EXPECT_FALSE(bad.edges[0].agrees);
  const auto p = build_covering_program(bad, 4);
  ASSERT_EQ(p.constraints.size(), 1u);
  EXPECT_EQ(p.constraints[0], (Constraint{0, 1, 2, 3}));
}

TEST(TriangleGraph, RigidSceneAlwaysAgrees) {
  const Scene s = rigid_scene(6);
  const auto g = build_triangle_graph(s.model, s.pixels, s.k, TemplateMatchConfig{});
  ASSERT_FALSE(g.edges.empty());
  for (const auto& e : g.edges) EXPECT_TRUE(e.agrees);
  EXPECT_TRUE(build_covering_program(g, s.model.size()).constraints.empty());
}

TEST(TriangleGraph, TooFewMatches) {
  const Scene s = rigid_scene(2);
  const std::vector<Vec3> model(s.model.begin(), s.model.begin() + 3);
  const std::vector<Vec2> pixels(s.pixels.begin(), s.pixels.begin() + 3);
  EXPECT_EQ(code_of([&] { build_triangle_graph(model, pixels, s.k, TemplateMatchConfig{}); }),
            Errc::too_few_matches);
}

TEST(TriangleGraph, StructuralInvariants) {
  SynthSpec spec;
  spec.kind = SynthKind::template_bend;
  spec.num_points = 100;
  spec.outlier_ratio = 0.3;
  spec.seed = 2;
  const auto inst = synth_template_instance(spec);
  TemplateMatchConfig cfg;
  cfg.seed = 9;
  const auto g = build_triangle_graph(inst.template_points, inst.image_points, inst.camera, cfg);
  g.validate();
  std::vector<std::size_t> incident(100, 0);
  for (const auto& e : g.edges) {
    std::set<MatchIndex> u(g.vertices[e.a].begin(), g.vertices[e.a].end());
    u.insert(g.vertices[e.b].begin(), g.vertices[e.b].end());
    EXPECT_EQ(u.size(), 4u);
    for (MatchIndex i : u) ++incident[i];
  }
  for (std::size_t c : incident) EXPECT_LE(c, cfg.edges_per_point_cap);
  for (const auto& c : build_covering_program(g, 100).constraints) EXPECT_EQ(c.size(), 4u);

  const auto again = build_triangle_graph(inst.template_points, inst.image_points, inst.camera, cfg);
  EXPECT_EQ(again.vertices, g.vertices);
  ASSERT_EQ(again.edges.size(), g.edges.size());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    EXPECT_EQ(again.edges[k].a, g.edges[k].a);
    EXPECT_EQ(again.edges[k].b, g.edges[k].b);
    EXPECT_EQ(again.edges[k].agrees, g.edges[k].agrees);
  }
}

TEST(LocalFiltering, Votes) {
  ConsensusGraph g;
  g.subset_size = 3;
  g.vertices = {{0, 1, 2}, {1, 2, 3}, {0, 1, 3}, {0, 2, 3}};
  g.edges = {{0, 1, true}, {0, 2, true}, {0, 3, true}, {1, 2, false}, {1, 3, false}, {2, 3, false}};
  // Every match sits in all six edges: 3 agree, 3 disagree.
  EXPECT_EQ(local_filtering(g, 5, 0.5, 3),
            (LabelVector{Label::inlier, Label::inlier, Label::inlier, Label::inlier, Label::outlier}));
  EXPECT_EQ(local_filtering(g, 4, 0.6, 3), LabelVector(4, Label::outlier));
  EXPECT_EQ(local_filtering(g, 4, 0.5, 7), LabelVector(4, Label::outlier));
  for (auto& e : g.edges) e.agrees = true;
  EXPECT_EQ(local_filtering(g, 4, 1.0, 6), LabelVector(4, Label::inlier));
  for (auto& e : g.edges) e.agrees = false;
  EXPECT_EQ(local_filtering(g, 4, 0.1, 1), LabelVector(4, Label::outlier));
}

TEST(TemplateRegistration, RigidGridIsAllInliers) {
  const Scene s = rigid_scene(15);
  const auto r = template_image_registration(s.model, s.pixels, identity_matches(225), s.k, TemplateMatchConfig{});
  EXPECT_EQ(r.labels, LabelVector(225, Label::inlier));
  EXPECT_TRUE(r.all_optimal());
  EXPECT_EQ(r.total_objective(), 0);
}

TEST(TemplateRegistration, CleanBentGridIsAllInliers) {
  SynthSpec spec;
  spec.kind = SynthKind::template_bend;
  spec.num_points = 225;
  const auto inst = synth_template_instance(spec);
  const auto r = template_image_registration(inst.template_points, inst.image_points, inst.matches,
                                             inst.camera, TemplateMatchConfig{});
  EXPECT_EQ(r.labels, LabelVector(225, Label::inlier));
  EXPECT_EQ(r.clusters[0].violated_edges, 0u);
}

TEST(TemplateRegistration, BentGridWithQuarterOutliers) {
  // Pooled over a few instances; single instances vary with outlier clumping.
  EvalReport pooled;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SynthSpec spec;
    spec.kind = SynthKind::template_bend;
    spec.num_points = 225;
    spec.outlier_ratio = 0.25;
    spec.seed = seed;
    const auto inst = synth_template_instance(spec);
    TemplateMatchConfig cfg;
    cfg.seed = seed;
    cfg.solver.time_budget = 3.0;
    const auto r = template_image_registration(inst.template_points, inst.image_points, inst.matches,
                                               inst.camera, cfg);
    const auto e = evaluate_labels(r.labels, *inst.matches.gt_labels);
    pooled.true_inliers_kept += e.true_inliers_kept;
    pooled.true_inliers_lost += e.true_inliers_lost;
    pooled.outliers_removed += e.outliers_removed;
    pooled.outliers_missed += e.outliers_missed;
  }
  const double inlier_rate = static_cast<double>(pooled.true_inliers_kept) /
                             static_cast<double>(pooled.true_inliers_kept + pooled.true_inliers_lost);
  const double outlier_rate = static_cast<double>(pooled.outliers_removed) /
                              static_cast<double>(pooled.outliers_removed + pooled.outliers_missed);
  EXPECT_GE(outlier_rate, 0.90);
  EXPECT_GE(inlier_rate, 0.95);
}

TEST(TemplateRegistration, SkippedClusters) {
  const Scene s = rigid_scene(2);
  const std::vector<Vec3> model(s.model.begin(), s.model.begin() + 3);
  const std::vector<Vec2> pixels(s.pixels.begin(), s.pixels.begin() + 3);
  EXPECT_EQ(code_of([&] {
              template_image_registration(model, pixels, identity_matches(3), s.k, TemplateMatchConfig{});
            }),
            Errc::all_clusters_skipped);

  // A far-away triple forms its own tiny cluster next to a solvable one.
  Scene big = rigid_scene(5);
  const Pose pose = SynthSpec::default_pose();
  for (const Vec3& p : {Vec3(5, 5, 0), Vec3(5.1, 5, 0), Vec3(5, 5.1, 0)}) {
    big.model.push_back(p);
    big.pixels.push_back(project_point(big.k, pose, p));
  }
  TemplateMatchConfig cfg;
  cfg.clusters = 2;
  const auto r = template_image_registration(big.model, big.pixels, identity_matches(28), big.k, cfg);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.labels, LabelVector(28, Label::inlier));
  for (std::size_t i = 25; i < 28; ++i) EXPECT_TRUE(r.unconstrained[i]);
}

TEST(TemplateRegistration, LocalFilterModeHasNoSolverResult) {
  SynthSpec spec;
  spec.kind = SynthKind::template_bend;
  spec.num_points = 64;
  spec.outlier_ratio = 0.2;
  const auto inst = synth_template_instance(spec);
  TemplateMatchConfig cfg;
  cfg.mode = SolveMode::local_filter;
  const auto r = template_image_registration(inst.template_points, inst.image_points, inst.matches, inst.camera, cfg);
  ASSERT_EQ(r.clusters.size(), 1u);
  EXPECT_FALSE(r.clusters[0].result.has_value());
  EXPECT_EQ(r.labels.size(), 64u);
}

TEST(TemplateMatchConfig, Validation) {
  TemplateMatchConfig cfg;
  cfg.eps1 = 4.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::invalid_argument);
  cfg = {};
  cfg.q = 3;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::invalid_argument);
  cfg = {};
  cfg.tau = 0.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::invalid_argument);
  cfg = {};
  cfg.eps2 = -1.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::invalid_argument);
}
