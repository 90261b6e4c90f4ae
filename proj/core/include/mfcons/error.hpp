#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfcons {

enum class Errc {
  invalid_argument,
  coverage_gap,
  too_large,
  infeasible_node,
  lp_not_converged,
  degenerate_input,
  degenerate_configuration,
  behind_camera,
  invalid_rotation,
  empty_solutions,
  empty_matches,
  geodesic_failure,
  disconnected_mesh,
  too_few_matches,
  all_clusters_skipped,
  invalid_spec,
  length_mismatch,
  malformed_input,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mfcons
