#include "mfcons/evaluation.hpp"

#include "mfcons/error.hpp"

namespace mfcons {

namespace {

double ratio_or_one(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport evaluate_labels(std::span<const Label> predicted, std::span<const Label> ground_truth) {
  if (predicted.size() != ground_truth.size()) {
    throw Error(Errc::length_mismatch, "predicted and ground-truth labels differ in length");
  }
  EvalReport r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool truly_inlier = !is_outlier(ground_truth[i]);
    const bool kept = !is_outlier(predicted[i]);
    if (truly_inlier) {
      (kept ? r.true_inliers_kept : r.true_inliers_lost)++;
    } else {
      (kept ? r.outliers_missed : r.outliers_removed)++;
    }
  }
  r.precision = ratio_or_one(r.true_inliers_kept, r.true_inliers_kept + r.outliers_missed);
  r.recall = ratio_or_one(r.true_inliers_kept, r.true_inliers_kept + r.true_inliers_lost);
  r.outlier_recall = ratio_or_one(r.outliers_removed, r.outliers_removed + r.outliers_missed);
  return r;
}

}  // namespace mfcons
