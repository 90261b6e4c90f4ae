#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "mfcons/mesh.hpp"
#include "mfcons/pipeline.hpp"

namespace mfcons {

struct IsometryConfig {
  double eps_rel = 0.20;
  double eps_abs_frac = 0.01;  // absolute floor, fraction of the source diameter
  std::optional<std::size_t> clusters;  // default: 1 below 200 matches, else 5
  SolverConfig solver;
  SolveMode mode = SolveMode::exact;
  std::uint64_t seed = 0;
  std::size_t diameter_samples = 128;

  void validate() const;
  std::size_t cluster_count(std::size_t num_matches) const;
};

/// |g_source - g_target| <= max(eps_rel * g_source, eps_abs)
bool isometry_agreement(double g_source, double g_target, double eps_rel, double eps_abs);

/// Fully connected graph over singleton vertices for one cluster. Vertex k is
/// `{k}` (cluster-local); `source_rows[k]` / `target_rows[k]` select the
/// matched point's row in the respective geodesic table. Pairs with a
/// non-finite geodesic on either side produce no edge.
ConsensusGraph isometry_graph(const GeodesicTable& source, std::span<const std::size_t> source_rows,
                              const GeodesicTable& target, std::span<const std::size_t> target_rows,
                              double eps_rel, double eps_abs);

/// Outlier removal between two shapes under the isometry prior: k-means on
/// source coordinates, one fully connected program per cluster, aggregated.
/// Meshes without triangles are treated as point clouds (k-NN graph).
RegistrationResult shape_registration(const TriMesh& source, const TriMesh& target,
                                      const MatchSet& matches, const IsometryConfig& config);

}  // namespace mfcons
