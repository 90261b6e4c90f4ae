#pragma once

#include <cstddef>
#include <span>

#include "mfcons/types.hpp"

namespace mfcons {

/// Confusion counts for the inlier class.
///   precision      = kept / (kept + missed)    (predicted inliers that are true)
///   recall         = kept / (kept + lost)      (true inliers retained)
///   outlier_recall = removed / (removed + missed)
/// An empty denominator yields 1.
struct EvalReport {
  std::size_t true_inliers_kept = 0;
  std::size_t true_inliers_lost = 0;
  std::size_t outliers_removed = 0;
  std::size_t outliers_missed = 0;
  double precision = 1.0;
  double recall = 1.0;
  double outlier_recall = 1.0;
  double wall_time = 0.0;

  std::size_t total() const noexcept {
    return true_inliers_kept + true_inliers_lost + outliers_removed + outliers_missed;
  }
};

/// Throws length_mismatch when the vectors differ in length.
EvalReport evaluate_labels(std::span<const Label> predicted, std::span<const Label> ground_truth);

}  // namespace mfcons
