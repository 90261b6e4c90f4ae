#include "mfcons/consensus.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "mfcons/error.hpp"

namespace mfcons {

void ConsensusGraph::validate() const {
  if (subset_size == 0) throw Error(Errc::invalid_argument, "subset size must be positive");
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    IndexSubset sorted = vertices[v];
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() != subset_size ||
        std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(Errc::invalid_argument,
                  "vertex " + std::to_string(v) + " is not a set of " + std::to_string(subset_size) +
                      " distinct matches");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.a == e.b) throw Error(Errc::invalid_argument, "self loop in consensus graph");
    if (e.a >= vertices.size() || e.b >= vertices.size()) {
      throw Error(Errc::invalid_argument, "edge endpoint out of range");
    }
    if (!seen.emplace(std::min(e.a, e.b), std::max(e.a, e.b)).second) {
      throw Error(Errc::invalid_argument, "duplicate edge in consensus graph");
    }
  }
}

void CoveringProgram::validate() const {
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    if (constraints[c].empty()) {
      throw Error(Errc::invalid_argument, "constraint " + std::to_string(c) + " is empty");
    }
    for (MatchIndex i : constraints[c]) {
      if (i >= num_vars) {
        throw Error(Errc::invalid_argument,
                    "constraint " + std::to_string(c) + " references variable " + std::to_string(i));
      }
    }
  }
}

bool CoveringProgram::satisfied_by(std::span<const Label> labels) const {
  return count_violated(labels) == 0;
}

std::size_t CoveringProgram::count_violated(std::span<const Label> labels) const {
  std::size_t violated = 0;
  for (const auto& c : constraints) {
    const bool covered = std::any_of(c.begin(), c.end(), [&](MatchIndex i) {
      return i < labels.size() && is_outlier(labels[i]);
    });
    if (!covered) ++violated;
  }
  return violated;
}

CoveringProgram build_covering_program(const ConsensusGraph& graph, std::size_t num_vars) {
  CoveringProgram program;
  program.num_vars = num_vars;
  std::set<Constraint> seen;
  for (const auto& e : graph.edges) {
    if (e.agrees) continue;
    Constraint c = graph.vertices[e.a];
    c.insert(c.end(), graph.vertices[e.b].begin(), graph.vertices[e.b].end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (seen.insert(c).second) program.constraints.push_back(std::move(c));
  }
  program.validate();
  return program;
}

std::vector<bool> matches_in_edges(const ConsensusGraph& graph, std::size_t num_vars) {
  std::vector<bool> used(num_vars, false);
  for (const auto& e : graph.edges) {
    for (std::size_t v : {e.a, e.b}) {
      for (MatchIndex i : graph.vertices[v]) {
        if (i < num_vars) used[i] = true;
      }
    }
  }
  return used;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw Error(Errc::invalid_argument, "graph size overflows 64 bits");
  }
  return a * b;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) is divisible by i at every step.
    const std::uint64_t g = std::gcd(result, i);
    result = checked_mul(result / g, (n - k + i) / (i / g));
  }
  return result;
}

}  // namespace

GraphSize estimate_graph_size(std::uint64_t num_points, std::uint64_t neighborhood,
                              std::uint64_t cluster_size, std::uint64_t subset_size) {
  if (subset_size < 1 || num_points < subset_size || cluster_size < 1) {
    throw Error(Errc::invalid_argument, "graph size requires p >= s >= 1 and r >= 1");
  }
  GraphSize size;
  if (cluster_size == 1) {
    size.vertices = binomial(num_points, subset_size);
  } else {
    if (neighborhood + 1 < subset_size) {
      throw Error(Errc::invalid_argument, "graph size requires q >= s - 1");
    }
    size.vertices = checked_mul(num_points / (subset_size * cluster_size),
                                binomial(neighborhood, subset_size - 1));
  }
  size.edges = binomial(size.vertices, 2);
  return size;
}

std::vector<std::vector<std::size_t>> ClusterPartition::members() const {
  std::vector<std::vector<std::size_t>> out(num_clusters);
  for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
  return out;
}

ClusterPartition kmeans_partition(std::span<const Vec3> points, std::size_t num_clusters,
                                  std::uint64_t seed, const KMeansOptions& options) {
  const std::size_t n = points.size();
  if (num_clusters == 0) throw Error(Errc::invalid_argument, "k-means needs at least one cluster");
  if (num_clusters > n) {
    throw Error(Errc::invalid_argument, "k-means with " + std::to_string(num_clusters) +
                                            " clusters over " + std::to_string(n) + " points");
  }

  ClusterPartition partition;
  partition.num_clusters = num_clusters;
  partition.assignments.assign(n, 0);
  if (num_clusters == 1) return partition;

  std::mt19937_64 rng(seed);
  std::vector<Vec3> centers;
  centers.reserve(num_clusters);

  // k-means++ seeding
  centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centers[0]).squaredNorm();
  while (centers.size() < num_clusters) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (r < d2[i]) {
          pick = i;
          break;
        }
        r -= d2[i];
      }
    } else {
      // All points coincide with a center; any unused index will do.
      pick = centers.size();
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
  }

  auto& assign = partition.assignments;
  std::vector<std::size_t> counts(num_clusters);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = (points[i] - centers[0]).squaredNorm();
      for (std::size_t c = 1; c < num_clusters; ++c) {
        const double d = (points[i] - centers[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (iter == 0 || assign[i] != best) changed = true;
      assign[i] = best;
    }

    // Refill empty clusters with the point farthest from its own centroid.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t a : assign) ++counts[a];
    for (std::size_t c = 0; c < num_clusters; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] < 2) continue;
        const double d = (points[i] - centers[assign[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
      changed = true;
    }

    for (auto& center : centers) center.setZero();
    for (std::size_t i = 0; i < n; ++i) centers[assign[i]] += points[i];
    for (std::size_t c = 0; c < num_clusters; ++c) centers[c] /= static_cast<double>(counts[c]);

    if (!changed) break;
  }
  return partition;
}

LabelVector aggregate_labels(std::size_t num_matches, std::span<const ClusterLabels> clusters) {
  LabelVector out(num_matches, Label::inlier);
  std::vector<bool> seen(num_matches, false);
  for (const auto& cluster : clusters) {
    if (cluster.members.size() != cluster.labels.size()) {
      throw Error(Errc::invalid_argument, "cluster labels do not match its member count");
    }
    for (std::size_t k = 0; k < cluster.members.size(); ++k) {
      const std::size_t i = cluster.members[k];
      if (i >= num_matches) throw Error(Errc::invalid_argument, "cluster member out of range");
      if (seen[i]) {
        throw Error(Errc::invalid_argument, "match " + std::to_string(i) + " appears in two clusters");
      }
      seen[i] = true;
      out[i] = cluster.labels[k];
    }
  }
  for (std::size_t i = 0; i < num_matches; ++i) {
    if (!seen[i]) throw Error(Errc::coverage_gap, "match " + std::to_string(i) + " has no label");
  }
  return out;
}

}  // namespace mfcons
