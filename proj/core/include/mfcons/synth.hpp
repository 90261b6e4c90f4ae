#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfcons/mesh.hpp"
#include "mfcons/pose.hpp"
#include "mfcons/types.hpp"

namespace mfcons {

enum class SynthKind { isometric_grid, template_bend };

struct SynthSpec {
  SynthKind kind = SynthKind::isometric_grid;
  std::size_t num_points = 100;
  double outlier_ratio = 0.0;
  double noise = 0.0;  // pixels (template) or model units (isometric target)
  std::uint64_t seed = 0;

  double grid_side = 1.0;
  double bend_radius = 2.0;  // cylinder radius of the template bend
  Pose pose = default_pose();
  CameraIntrinsics camera{800.0, 800.0, 320.0, 240.0};
  double image_width = 640.0;
  double image_height = 480.0;
  double min_outlier_offset = 5.0;  // pixels

  void validate() const;
  /// round(ratio * n), halves rounded up.
  std::size_t outlier_count() const;

  static Pose default_pose();
};

struct IsometricInstance {
  TriMesh source;
  TriMesh target;
  MatchSet matches;  // gt_labels filled
};

struct TemplateInstance {
  std::vector<Vec3> template_points;
  std::vector<Vec3> deformed_points;  // camera-frame truth
  std::vector<Vec2> image_points;
  CameraIntrinsics camera;
  MatchSet matches;  // identity pairs, gt_labels filled
};

/// Grid of `num_points` vertices (row-major, last row possibly partial),
/// spacing grid_side / (columns - 1), triangulated with Delaunay.
TriMesh grid_mesh(std::size_t num_points, double grid_side);

/// Grid mesh matched to a rigidly moved copy of itself, with round(ratio*n)
/// matches re-assigned to random wrong targets. Throws invalid_spec.
IsometricInstance synth_isometric_instance(const SynthSpec& spec);

/// Planar grid bent around a cylinder, posed and projected, with Gaussian
/// pixel noise and outliers replaced by random in-frame pixels at least
/// `min_outlier_offset` away from the truth. Throws invalid_spec.
TemplateInstance synth_template_instance(const SynthSpec& spec);

}  // namespace mfcons
