#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "mfcons/pipeline.hpp"
#include "mfcons/pose.hpp"

namespace mfcons {

struct TemplateMatchConfig {
  double eps1 = 10.0 * 3.14159265358979323846 / 180.0;  // radians
  double eps2 = 0.40;
  std::size_t q = 15;
  std::size_t edges_per_point_cap = 30;
  std::size_t clusters = 1;
  double tau = 0.5;
  std::size_t min_incident_edges = 3;
  SolverConfig solver;
  SolveMode mode = SolveMode::exact;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Triangle graph of one cluster. Each point is a match: `template_points[i]`
/// is seen at pixel `image_points[i]`. Vertices are non-collinear triangles
/// among mutual q-nearest neighbours; edges join triangles sharing two
/// points and carry the P3P pose agreement. Vertex indices refer to the
/// positions in the input spans. Throws too_few_matches below 4 points.
ConsensusGraph build_triangle_graph(std::span<const Vec3> template_points,
                                    std::span<const Vec2> image_points, const CameraIntrinsics& k,
                                    const TemplateMatchConfig& config);

/// Voting baseline: inlier iff at least `min_incident` incident edges and an
/// agreeing fraction of at least `tau`.
LabelVector local_filtering(const ConsensusGraph& graph, std::size_t num_matches, double tau,
                            std::size_t min_incident);

/// Template-to-image outlier removal. Clusters with fewer than 4 matches are
/// skipped with a warning and their matches reported unconstrained.
RegistrationResult template_image_registration(std::span<const Vec3> template_points,
                                               std::span<const Vec2> image_points,
                                               const MatchSet& matches, const CameraIntrinsics& k,
                                               const TemplateMatchConfig& config);

}  // namespace mfcons
