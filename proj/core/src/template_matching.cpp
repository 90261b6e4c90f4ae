#include "mfcons/template_matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "mfcons/error.hpp"

namespace mfcons {

void TemplateMatchConfig::validate() const {
  if (!(eps1 > 0.0 && eps1 < std::numbers::pi)) throw Error(Errc::invalid_argument, "eps1 must lie in (0, pi)");
  if (!(eps2 > 0.0)) throw Error(Errc::invalid_argument, "eps2 must be positive");
  if (q < 4) throw Error(Errc::invalid_argument, "neighbourhood size q must be at least 4");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(Errc::invalid_argument, "tau must lie in (0, 1]");
  if (edges_per_point_cap == 0) throw Error(Errc::invalid_argument, "edge cap must be positive");
  if (clusters == 0) throw Error(Errc::invalid_argument, "cluster count must be positive");
  solver.validate();
}

namespace {

using Tri = std::array<MatchIndex, 3>;

std::vector<std::set<MatchIndex>> symmetric_knn(std::span<const Vec3> points, std::size_t q) {
  const std::size_t n = points.size();
  std::vector<std::set<MatchIndex>> adj(n);
  std::vector<std::pair<double, MatchIndex>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((points[i] - points[j]).squaredNorm(), static_cast<MatchIndex>(j));
    }
    const std::size_t take = std::min(q, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    for (std::size_t r = 0; r < take; ++r) {
      adj[i].insert(dist[r].second);
      adj[dist[r].second].insert(static_cast<MatchIndex>(i));
    }
  }
  return adj;
}

bool well_shaped(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double diameter = std::sqrt(std::max({(a - b).squaredNorm(), (b - c).squaredNorm(), (a - c).squaredNorm()}));
  const double twice_area = (b - a).cross(c - a).norm();
  return diameter > 0.0 && twice_area / diameter >= 1e-6 * diameter;
}

}  // namespace

ConsensusGraph build_triangle_graph(std::span<const Vec3> template_points, std::span<const Vec2> image_points,
                                    const CameraIntrinsics& k, const TemplateMatchConfig& config) {
  config.validate();
  k.validate();
  const std::size_t n = template_points.size();
  if (image_points.size() != n) throw Error(Errc::invalid_argument, "template and image point counts differ");
  if (n < 4) throw Error(Errc::too_few_matches, "a triangle graph needs at least 4 matches");

  const auto adj = symmetric_knn(template_points, config.q);

  std::vector<Tri> triangles;
  for (MatchIndex i = 0; i < n; ++i) {
    for (MatchIndex j : adj[i]) {
      if (j <= i) continue;
      for (MatchIndex l : adj[i]) {
        if (l <= j || !adj[j].count(l)) continue;
        if (well_shaped(template_points[i], template_points[j], template_points[l])) triangles.push_back({i, j, l});
      }
    }
  }

  // Triangle pairs sharing exactly one side, i.e. four distinct matches.
  std::map<std::pair<MatchIndex, MatchIndex>, std::vector<std::size_t>> by_side;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    by_side[{tri[0], tri[1]}].push_back(t);
    by_side[{tri[0], tri[2]}].push_back(t);
    by_side[{tri[1], tri[2]}].push_back(t);
  }
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (const auto& [side, list] : by_side) {
    for (std::size_t x = 0; x < list.size(); ++x) {
      for (std::size_t y = x + 1; y < list.size(); ++y) candidates.emplace_back(list[x], list[y]);
    }
  }
  std::mt19937_64 rng(config.seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  std::vector<Vec3> bearings(n);
  for (std::size_t i = 0; i < n; ++i) bearings[i] = k.bearing(image_points[i]);

  std::vector<std::optional<std::vector<Pose>>> poses(triangles.size());
  auto poses_of = [&](std::size_t t) -> const std::vector<Pose>& {
    if (!poses[t]) {
      const auto& tri = triangles[t];
      try {
        poses[t] = p3p_solve({template_points[tri[0]], template_points[tri[1]], template_points[tri[2]]},
                             {bearings[tri[0]], bearings[tri[1]], bearings[tri[2]]});
      } catch (const Error& e) {
        if (e.code() != Errc::degenerate_configuration) throw;
        poses[t] = std::vector<Pose>{};
      }
    }
    return *poses[t];
  };

  ConsensusGraph graph;
  graph.subset_size = 3;
  std::vector<std::size_t> vertex_of(triangles.size(), SIZE_MAX);
  auto vertex = [&](std::size_t t) {
    if (vertex_of[t] == SIZE_MAX) {
      vertex_of[t] = graph.vertices.size();
      graph.vertices.push_back({triangles[t][0], triangles[t][1], triangles[t][2]});
    }
    return vertex_of[t];
  };

  std::vector<std::size_t> incident(n, 0);
  for (const auto& [ta, tb] : candidates) {
    std::array<MatchIndex, 6> all{triangles[ta][0], triangles[ta][1], triangles[ta][2],
                                  triangles[tb][0], triangles[tb][1], triangles[tb][2]};
    std::sort(all.begin(), all.end());
    const auto end = std::unique(all.begin(), all.end());
    if (std::any_of(all.begin(), end, [&](MatchIndex i) { return incident[i] >= config.edges_per_point_cap; })) {
      continue;
    }
    const auto& pa = poses_of(ta);
    const auto& pb = poses_of(tb);
    if (pa.empty() || pb.empty()) continue;
    const bool agrees = pose_agreement(pa, pb, config.eps1, config.eps2);
    for (auto it = all.begin(); it != end; ++it) ++incident[*it];
    graph.edges.push_back({vertex(ta), vertex(tb), agrees});
  }
  return graph;
}

LabelVector local_filtering(const ConsensusGraph& graph, std::size_t num_matches, double tau,
                            std::size_t min_incident) {
  std::vector<std::size_t> total(num_matches, 0), agreeing(num_matches, 0);
  std::vector<MatchIndex> members;
  for (const auto& e : graph.edges) {
    members = graph.vertices[e.a];
    members.insert(members.end(), graph.vertices[e.b].begin(), graph.vertices[e.b].end());
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (MatchIndex i : members) {
      if (i >= num_matches) continue;
      ++total[i];
      if (e.agrees) ++agreeing[i];
    }
  }
  LabelVector labels(num_matches, Label::outlier);
  for (std::size_t i = 0; i < num_matches; ++i) {
    if (total[i] >= min_incident && total[i] > 0 &&
        static_cast<double>(agreeing[i]) >= tau * static_cast<double>(total[i])) {
      labels[i] = Label::inlier;
    }
  }
  return labels;
}

RegistrationResult template_image_registration(std::span<const Vec3> template_points,
                                               std::span<const Vec2> image_points, const MatchSet& matches,
                                               const CameraIntrinsics& k, const TemplateMatchConfig& config) {
  config.validate();
  k.validate();
  matches.validate(template_points.size(), image_points.size());

  const std::size_t p = matches.size();
  std::vector<Vec3> model(p);
  std::vector<Vec2> pixels(p);
  for (std::size_t i = 0; i < p; ++i) {
    model[i] = template_points[matches.pairs[i].source];
    pixels[i] = image_points[matches.pairs[i].target];
  }

  const ClusterPartition partition = kmeans_partition(model, std::min(config.clusters, p), config.seed);

  RegistrationResult result;
  result.unconstrained.assign(p, true);
  std::vector<ClusterLabels> pieces;
  std::size_t solved_clusters = 0;
  for (auto& members : partition.members()) {
    ClusterReport report;
    report.members = members;
    const std::size_t size = members.size();
    if (size < 4) {
      report.skipped = true;
      result.warnings.push_back("cluster with " + std::to_string(size) + " matches skipped (needs 4)");
      pieces.push_back({members, LabelVector(size, Label::inlier)});
      result.clusters.push_back(std::move(report));
      continue;
    }
    ++solved_clusters;

    std::vector<Vec3> local_model(size);
    std::vector<Vec2> local_pixels(size);
    for (std::size_t i = 0; i < size; ++i) {
      local_model[i] = model[members[i]];
      local_pixels[i] = pixels[members[i]];
    }
    const ConsensusGraph graph = build_triangle_graph(local_model, local_pixels, k, config);
    report.graph_vertices = graph.vertices.size();
    report.graph_edges = graph.edges.size();
    report.violated_edges = static_cast<std::size_t>(
        std::count_if(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& e) { return !e.agrees; }));
    const auto used = matches_in_edges(graph, size);
    for (std::size_t i = 0; i < size; ++i) result.unconstrained[members[i]] = !used[i];

    if (config.mode == SolveMode::local_filter) {
      pieces.push_back({members, local_filtering(graph, size, config.tau, config.min_incident_edges)});
    } else {
      const CoveringProgram program = build_covering_program(graph, size);
      report.constraints = program.constraints.size();
      SolverResult solved = solve_program(program, config.mode, config.solver);
      pieces.push_back({members, solved.labels});
      report.result = std::move(solved);
    }
    result.clusters.push_back(std::move(report));
  }
  if (solved_clusters == 0) throw Error(Errc::all_clusters_skipped, "every cluster has fewer than 4 matches");
  result.labels = aggregate_labels(p, pieces);
  return result;
}

}  // namespace mfcons
