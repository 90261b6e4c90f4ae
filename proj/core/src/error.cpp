#include "mfcons/error.hpp"

#include "mfcons/types.hpp"

namespace mfcons {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::coverage_gap: return "coverage-gap";
    case Errc::too_large: return "too-large";
    case Errc::infeasible_node: return "infeasible-node";
    case Errc::lp_not_converged: return "lp-not-converged";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::degenerate_configuration: return "degenerate-configuration";
    case Errc::behind_camera: return "behind-camera";
    case Errc::invalid_rotation: return "invalid-rotation";
    case Errc::empty_solutions: return "empty-solutions";
    case Errc::empty_matches: return "empty-matches";
    case Errc::geodesic_failure: return "geodesic-failure";
    case Errc::disconnected_mesh: return "disconnected-mesh";
    case Errc::too_few_matches: return "too-few-matches";
    case Errc::all_clusters_skipped: return "all-clusters-skipped";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::malformed_input: return "malformed-input";
  }
  return "unknown";
}

void MatchSet::validate(std::size_t num_source, std::size_t num_target) const {
  if (pairs.empty()) throw Error(Errc::empty_matches, "match set is empty");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].source >= num_source || pairs[i].target >= num_target) {
      throw Error(Errc::invalid_argument,
                  "match " + std::to_string(i) + " references an out-of-range point");
    }
  }
  if (gt_labels && gt_labels->size() != pairs.size()) {
    throw Error(Errc::invalid_argument, "ground-truth labels do not match the pair count");
  }
}

}  // namespace mfcons
