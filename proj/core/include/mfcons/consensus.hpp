#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfcons/types.hpp"

namespace mfcons {

using MatchIndex = std::uint32_t;

/// A node of the agreement graph: a minimal subset of match indices.
using IndexSubset = std::vector<MatchIndex>;

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  bool agrees = true;  // the binary rule value Theta
};

/// Vertices are minimal match subsets of cardinality `subset_size`; edges
/// carry the outcome of an agreement rule evaluated on the two endpoints.
struct ConsensusGraph {
  std::size_t subset_size = 1;
  std::vector<IndexSubset> vertices;
  std::vector<GraphEdge> edges;

  /// Checks every invariant (distinct indices per vertex, fixed cardinality,
  /// no self loops, no duplicate undirected edges). Throws invalid_argument.
  void validate() const;
};

/// One covering constraint: at least one listed match must be an outlier.
using Constraint = std::vector<MatchIndex>;

/// minimize sum(z) subject to sum_{i in c} z_i >= 1 for every constraint c.
struct CoveringProgram {
  std::size_t num_vars = 0;
  std::vector<Constraint> constraints;

  void validate() const;
  bool satisfied_by(std::span<const Label> labels) const;
  std::size_t count_violated(std::span<const Label> labels) const;
};

/// Compiles every disagreeing edge into the union of its endpoint subsets.
/// Constraints are sorted, deduplicated and listed in first-seen order.
CoveringProgram build_covering_program(const ConsensusGraph& graph, std::size_t num_vars);

/// Marks the matches that occur in at least one edge of `graph`.
std::vector<bool> matches_in_edges(const ConsensusGraph& graph, std::size_t num_vars);

struct GraphSize {
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;

  friend bool operator==(const GraphSize&, const GraphSize&) = default;
};

/// Combinatorial size of a single program. `cluster_size == 1` selects the
/// fully connected count C(p,s); otherwise floor(p/(s*r)) * C(q, s-1).
/// Throws invalid_argument on violated preconditions or 64-bit overflow.
GraphSize estimate_graph_size(std::uint64_t num_points, std::uint64_t neighborhood,
                              std::uint64_t cluster_size, std::uint64_t subset_size);

struct ClusterPartition {
  std::size_t num_clusters = 0;
  std::vector<std::size_t> assignments;  // 0-based cluster id per match

  std::vector<std::vector<std::size_t>> members() const;
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
};

/// Lloyd's algorithm from k-means++ seeding. Deterministic for a fixed seed;
/// empty clusters are refilled with the point farthest from its centroid.
ClusterPartition kmeans_partition(std::span<const Vec3> points, std::size_t num_clusters,
                                  std::uint64_t seed, const KMeansOptions& options = {});

struct ClusterLabels {
  std::vector<std::size_t> members;  // global match indices
  LabelVector labels;                // one label per member
};

/// Scatters per-cluster labels back to global order. Throws invalid_argument
/// on overlapping clusters and coverage_gap if a match is left unlabeled.
LabelVector aggregate_labels(std::size_t num_matches, std::span<const ClusterLabels> clusters);

}  // namespace mfcons
