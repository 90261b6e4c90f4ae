#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mfcons {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Label : std::uint8_t { inlier = 0, outlier = 1 };

/// z_i = 1 marks match i as an outlier.
using LabelVector = std::vector<Label>;

inline bool is_outlier(Label l) noexcept { return l == Label::outlier; }

struct MatchPair {
  std::size_t source = 0;
  std::size_t target = 0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// Index correspondences between two point domains. The points themselves
/// live with the caller (mesh vertices, template points, image points); a
/// MatchSet only records which index is paired with which.
struct MatchSet {
  std::vector<MatchPair> pairs;
  std::optional<LabelVector> gt_labels;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  /// Throws Errc::empty_matches / Errc::invalid_argument when the pairs are
  /// empty, out of range, or the ground-truth vector has the wrong length.
  void validate(std::size_t num_source, std::size_t num_target) const;
};

}  // namespace mfcons
