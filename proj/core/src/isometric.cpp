#include "mfcons/isometric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "mfcons/error.hpp"

namespace mfcons {

void IsometryConfig::validate() const {
  if (!(eps_rel > 0.0 && eps_rel < 1.0)) throw Error(Errc::invalid_argument, "eps_rel must lie in (0, 1)");
  if (!(eps_abs_frac >= 0.0 && eps_abs_frac <= 0.1)) {
    throw Error(Errc::invalid_argument, "eps_abs_frac must lie in [0, 0.1]");
  }
  if (clusters && *clusters == 0) throw Error(Errc::invalid_argument, "cluster count must be positive");
  if (mode == SolveMode::local_filter) {
    throw Error(Errc::invalid_argument, "local filtering is only defined for template matching");
  }
  solver.validate();
}

std::size_t IsometryConfig::cluster_count(std::size_t num_matches) const {
  const std::size_t m = clusters.value_or(num_matches < 200 ? 1 : 5);
  return std::min(m, std::max<std::size_t>(num_matches, 1));
}

bool isometry_agreement(double g_source, double g_target, double eps_rel, double eps_abs) {
  return std::abs(g_source - g_target) <= std::max(eps_rel * g_source, eps_abs);
}

ConsensusGraph isometry_graph(const GeodesicTable& source, std::span<const std::size_t> source_rows,
                              const GeodesicTable& target, std::span<const std::size_t> target_rows,
                              double eps_rel, double eps_abs) {
  if (source_rows.size() != target_rows.size()) {
    throw Error(Errc::invalid_argument, "source and target row lists differ in length");
  }
  const std::size_t k = source_rows.size();
  ConsensusGraph graph;
  graph.subset_size = 1;
  graph.vertices.reserve(k);
  for (std::size_t i = 0; i < k; ++i) graph.vertices.push_back({static_cast<MatchIndex>(i)});
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double gs = source.at(source_rows[i], source_rows[j]);
      const double gt = target.at(target_rows[i], target_rows[j]);
      if (!std::isfinite(gs) || !std::isfinite(gt)) continue;
      graph.edges.push_back({i, j, isometry_agreement(gs, gt, eps_rel, eps_abs)});
    }
  }
  return graph;
}

namespace {

struct TableIndex {
  GeodesicTable table;
  std::map<std::size_t, std::size_t> row_of;  // vertex id -> table row
};

TableIndex geodesics_for(const EdgeGraph& graph, const std::vector<std::size_t>& vertex_ids) {
  TableIndex out;
  std::vector<std::uint32_t> ids;
  for (std::size_t v : vertex_ids) {
    if (out.row_of.emplace(v, ids.size()).second) ids.push_back(static_cast<std::uint32_t>(v));
  }
  out.table = geodesic_distances(graph, ids);
  return out;
}

}  // namespace

RegistrationResult shape_registration(const TriMesh& source, const TriMesh& target, const MatchSet& matches,
                                      const IsometryConfig& config) {
  config.validate();
  matches.validate(source.vertices.size(), target.vertices.size());
  source.validate();
  target.validate();

  const std::size_t p = matches.size();
  const EdgeGraph source_graph = EdgeGraph::for_surface(source);
  const EdgeGraph target_graph = EdgeGraph::for_surface(target);

  std::vector<std::size_t> src_ids(p), tgt_ids(p);
  std::vector<Vec3> cluster_points(p);
  for (std::size_t i = 0; i < p; ++i) {
    src_ids[i] = matches.pairs[i].source;
    tgt_ids[i] = matches.pairs[i].target;
    cluster_points[i] = source.vertices[src_ids[i]];
  }
  const TableIndex src_geo = geodesics_for(source_graph, src_ids);
  const TableIndex tgt_geo = geodesics_for(target_graph, tgt_ids);

  // The absolute floor is taken on the largest connected piece of the source.
  double diameter = 0.0;
  for (std::size_t r = 0; r < src_geo.table.size(); ++r) {
    for (std::size_t c = 0; c < src_geo.table.size(); ++c) {
      const double d = src_geo.table.at(r, c);
      if (std::isfinite(d)) diameter = std::max(diameter, d);
    }
  }
  try {
    diameter = std::max(diameter, mesh_diameter(source_graph, config.diameter_samples, config.seed));
  } catch (const Error& e) {
    if (e.code() != Errc::disconnected_mesh) throw;
  }
  const double eps_abs = config.eps_abs_frac * diameter;

  const ClusterPartition partition = kmeans_partition(cluster_points, config.cluster_count(p), config.seed);

  RegistrationResult result;
  result.unconstrained.assign(p, true);
  std::vector<ClusterLabels> pieces;
  for (auto& members : partition.members()) {
    ClusterReport report;
    report.members = members;
    const std::size_t k = members.size();
    std::vector<std::size_t> src_rows(k), tgt_rows(k);
    for (std::size_t i = 0; i < k; ++i) {
      src_rows[i] = src_geo.row_of.at(src_ids[members[i]]);
      tgt_rows[i] = tgt_geo.row_of.at(tgt_ids[members[i]]);
    }

    const ConsensusGraph graph = isometry_graph(src_geo.table, src_rows, tgt_geo.table, tgt_rows,
                                                config.eps_rel, eps_abs);
    if (k > 1 && graph.edges.empty()) {
      throw Error(Errc::geodesic_failure, "cluster matches are mutually disconnected on a shape");
    }
    const CoveringProgram program = build_covering_program(graph, k);
    report.graph_vertices = graph.vertices.size();
    report.graph_edges = graph.edges.size();
    report.violated_edges = static_cast<std::size_t>(
        std::count_if(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& e) { return !e.agrees; }));
    report.constraints = program.constraints.size();

    const auto used = matches_in_edges(graph, k);
    for (std::size_t i = 0; i < k; ++i) result.unconstrained[members[i]] = !used[i];

    SolverResult solved = solve_program(program, config.mode, config.solver);
    pieces.push_back({members, solved.labels});
    report.result = std::move(solved);
    result.clusters.push_back(std::move(report));
  }
  result.labels = aggregate_labels(p, pieces);
  return result;
}

}  // namespace mfcons
