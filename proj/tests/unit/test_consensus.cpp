#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "mfcons/consensus.hpp"
#include "mfcons/error.hpp"
#include "test_util.hpp"

using namespace mfcons;
using mfcons::testing::code_of;

namespace {

ConsensusGraph singleton_graph(std::size_t n) {
  ConsensusGraph g;
  g.subset_size = 1;
  for (MatchIndex i = 0; i < n; ++i) g.vertices.push_back({i});
  return g;
}

}  // namespace

TEST(BuildCoveringProgram, OneViolatedEdgeGivesOneConstraint) {
  ConsensusGraph g = singleton_graph(3);
  g.edges = {{0, 1, false}, {1, 2, true}};
  const auto p = build_covering_program(g, 3);
  ASSERT_EQ(p.constraints.size(), 1u);
  EXPECT_EQ(p.constraints[0], (Constraint{0, 1}));
  EXPECT_EQ(p.num_vars, 3u);
}

TEST(BuildCoveringProgram, AgreeingGraphIsEmpty) {
  ConsensusGraph g = singleton_graph(4);
  g.edges = {{0, 1, true}, {1, 2, true}, {2, 3, true}};
  EXPECT_TRUE(build_covering_program(g, 4).constraints.empty());
  EXPECT_TRUE(build_covering_program(ConsensusGraph{}, 0).constraints.empty());
}

TEST(BuildCoveringProgram, TriangleVerticesGiveFourVariables) {
  ConsensusGraph g;
  g.subset_size = 3;
  g.vertices = {{0, 1, 2}, {1, 2, 3}};
  g.edges = {{0, 1, false}};
  const auto p = build_covering_program(g, 4);
  ASSERT_EQ(p.constraints.size(), 1u);
  EXPECT_EQ(p.constraints[0], (Constraint{0, 1, 2, 3}));
}

TEST(BuildCoveringProgram, DuplicateUnionsCollapse) {
  ConsensusGraph g;
  g.subset_size = 3;
  g.vertices = {{0, 1, 2}, {1, 2, 3}, {0, 1, 3}, {0, 2, 3}};
  g.edges = {{0, 1, false}, {2, 3, false}, {0, 2, false}};
  const auto p = build_covering_program(g, 4);
  EXPECT_EQ(p.constraints.size(), 1u);
}

TEST(BuildCoveringProgram, ConstraintsComeFromViolatedEdgesOnly) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const std::size_t s = 1 + rng() % 3;
    const std::size_t n = 8 + rng() % 8;
    ConsensusGraph g;
    g.subset_size = s;
    for (int v = 0; v < 10; ++v) {
      std::vector<MatchIndex> all(n);
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      g.vertices.emplace_back(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(s));
    }
    std::set<std::set<MatchIndex>> expected;
    for (std::size_t a = 0; a < g.vertices.size(); ++a) {
      for (std::size_t b = a + 1; b < g.vertices.size(); ++b) {
        if (rng() % 3 != 0) continue;
        const bool agrees = rng() % 2 == 0;
        g.edges.push_back({a, b, agrees});
        if (!agrees) {
          std::set<MatchIndex> u(g.vertices[a].begin(), g.vertices[a].end());
          u.insert(g.vertices[b].begin(), g.vertices[b].end());
          expected.insert(u);
        }
      }
    }
    g.validate();
    const auto p = build_covering_program(g, n);
    std::set<std::set<MatchIndex>> got;
    for (const auto& c : p.constraints) {
      EXPECT_LE(c.size(), 2 * s);
      got.emplace(c.begin(), c.end());
    }
    EXPECT_EQ(got, expected);
    EXPECT_EQ(got.size(), p.constraints.size());
  }
}

TEST(ConsensusGraph, ValidateRejectsMalformedGraphs) {
  ConsensusGraph loop = singleton_graph(2);
  loop.edges = {{1, 1, true}};
  EXPECT_EQ(code_of([&] { loop.validate(); }), Errc::invalid_argument);

  ConsensusGraph dup = singleton_graph(2);
  dup.edges = {{0, 1, true}, {1, 0, false}};
  EXPECT_EQ(code_of([&] { dup.validate(); }), Errc::invalid_argument);

  ConsensusGraph card;
  card.subset_size = 2;
  card.vertices = {{0, 0}};
  EXPECT_EQ(code_of([&] { card.validate(); }), Errc::invalid_argument);
}

TEST(CoveringProgram, SatisfactionCount) {
  CoveringProgram p{3, {{0, 1}, {2}}};
  const LabelVector none(3, Label::inlier);
  EXPECT_EQ(p.count_violated(none), 2u);
  EXPECT_TRUE(p.satisfied_by(LabelVector{Label::outlier, Label::inlier, Label::outlier}));
  CoveringProgram bad{2, {{0, 5}}};
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::invalid_argument);
}

TEST(MatchesInEdges, MarksOnlyEdgeMembers) {
  ConsensusGraph g = singleton_graph(4);
  g.edges = {{0, 2, true}};
  EXPECT_EQ(matches_in_edges(g, 4), (std::vector<bool>{true, false, true, false}));
}

TEST(EstimateGraphSize, TableFormulas) {
  EXPECT_EQ(estimate_graph_size(100, 0, 1, 1), (GraphSize{100, 4950}));
  EXPECT_EQ(estimate_graph_size(1, 0, 1, 1), (GraphSize{1, 0}));
  EXPECT_EQ(estimate_graph_size(90, 15, 5, 3), (GraphSize{630, 198135}));
}

TEST(EstimateGraphSize, RejectsBadArguments) {
  EXPECT_EQ(code_of([] { estimate_graph_size(2, 0, 1, 3); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { estimate_graph_size(10, 0, 0, 1); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { estimate_graph_size(10, 1, 2, 3); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { estimate_graph_size(100000, 0, 1, 4); }), Errc::invalid_argument);
}

TEST(KMeans, SingleClusterTakesEverything) {
  std::vector<Vec3> pts{{0, 0, 0}, {5, 1, 0}, {-3, 2, 7}};
  const auto part = kmeans_partition(pts, 1, 3);
  EXPECT_EQ(part.num_clusters, 1u);
  EXPECT_EQ(part.assignments, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(KMeans, SeparatedBlobsAreRecovered) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<Vec3> pts;
  std::vector<int> blob;
  for (int i = 0; i < 40; ++i) {
    const bool right = i % 3 == 0;
    pts.emplace_back((right ? 1.0 : 0.0) + noise(rng), noise(rng), noise(rng));
    blob.push_back(right);
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto part = kmeans_partition(pts, 2, seed);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) {
        EXPECT_EQ(part.assignments[i] == part.assignments[j], blob[i] == blob[j]);
      }
    }
  }
}

TEST(KMeans, OnePointPerClusterAndErrors) {
  std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {3, 3, 3}};
  const auto part = kmeans_partition(pts, 4, 1);
  for (const auto& m : part.members()) EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(code_of([&] { kmeans_partition(pts, 5, 1); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { kmeans_partition(pts, 0, 1); }), Errc::invalid_argument);
}

TEST(KMeans, DeterministicAndNonEmpty) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts(300);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  for (std::size_t m : {2u, 5u, 17u}) {
    const auto a = kmeans_partition(pts, m, 42);
    const auto b = kmeans_partition(pts, m, 42);
    EXPECT_EQ(a.assignments, b.assignments);
    for (const auto& members : a.members()) EXPECT_FALSE(members.empty());
  }
}

TEST(AggregateLabels, Examples) {
  const LabelVector one{Label::outlier, Label::inlier};
  std::vector<ClusterLabels> pass{{{0, 1}, one}};
  EXPECT_EQ(aggregate_labels(2, pass), one);

  std::vector<ClusterLabels> split{{{0, 1}, {Label::inlier, Label::outlier}}, {{2}, {Label::inlier}}};
  EXPECT_EQ(aggregate_labels(3, split), (LabelVector{Label::inlier, Label::outlier, Label::inlier}));

  std::vector<ClusterLabels> overlap{{{0, 1}, {Label::inlier, Label::inlier}}, {{1}, {Label::inlier}}};
  EXPECT_EQ(code_of([&] { aggregate_labels(2, overlap); }), Errc::invalid_argument);

  std::vector<ClusterLabels> gap{{{0}, {Label::inlier}}};
  EXPECT_EQ(code_of([&] { aggregate_labels(2, gap); }), Errc::coverage_gap);
}

TEST(AggregateLabels, SplitThenAggregateIsIdentity) {
  std::mt19937_64 rng(3);
  LabelVector labels(60);
  for (auto& l : labels) l = rng() % 2 ? Label::outlier : Label::inlier;
  std::vector<Vec3> pts(60);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = Vec3(static_cast<double>(rng() % 100), 0, 0);
  const auto part = kmeans_partition(pts, 4, 0);
  std::vector<ClusterLabels> pieces;
  for (const auto& members : part.members()) {
    ClusterLabels piece{members, {}};
    for (std::size_t i : members) piece.labels.push_back(labels[i]);
    pieces.push_back(piece);
  }
  EXPECT_EQ(aggregate_labels(labels.size(), pieces), labels);
}
