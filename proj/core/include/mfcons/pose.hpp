#pragma once

#include <array>
#include <vector>

#include "mfcons/types.hpp"

namespace mfcons {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
  /// Unit bearing through pixel `uv`.
  Vec3 bearing(const Vec2& uv) const;
};

/// Maps model coordinates into the camera frame: X_cam = R X + t.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
};

bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Rotation about a unit axis by `angle` radians.
Mat3 axis_angle(const Vec3& axis, double angle);

/// All real solutions (at most four) of the perspective-three-point problem.
/// Throws degenerate_configuration for collinear points or coincident
/// bearings; an empty result means no real solution exists.
std::vector<Pose> p3p_solve(const std::array<Vec3, 3>& points, const std::array<Vec3, 3>& bearings);

/// Angle of Ra^T Rb in [0, pi]. Throws invalid_rotation.
double rotation_geodesic_distance(const Mat3& ra, const Mat3& rb);

struct PoseComparison {
  double rotation_distance = 0.0;
  double translation_gap = 0.0;  // l1 norm of t_a - t_b
  double translation_scale = 0.0;  // max(|t_a|, |t_b|)
};

/// Compares the closest pair of candidate poses (by rotation distance, ties
/// by translation gap). Throws empty_solutions if either list is empty.
PoseComparison closest_pose_pair(const std::vector<Pose>& a, const std::vector<Pose>& b);

/// Rotation within eps1 radians and l1 translation gap within eps2 times the
/// larger translation norm, on the closest pair of candidates.
bool pose_agreement(const std::vector<Pose>& a, const std::vector<Pose>& b, double eps1, double eps2);

/// Pinhole projection of R X + t. Throws behind_camera for depth <= 0.
Vec2 project_point(const CameraIntrinsics& k, const Pose& pose, const Vec3& x);

}  // namespace mfcons
