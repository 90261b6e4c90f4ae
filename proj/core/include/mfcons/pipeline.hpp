#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfcons/consensus.hpp"
#include "mfcons/covering_solver.hpp"

namespace mfcons {

enum class SolveMode { exact, relaxed, local_filter };

std::string_view to_string(SolveMode mode) noexcept;
/// Accepts "exact", "relaxed" and "local-filter". Throws invalid_argument.
SolveMode parse_solve_mode(std::string_view text);

/// Everything observed while processing one k-means cluster.
struct ClusterReport {
  std::vector<std::size_t> members;  // global match indices
  std::size_t graph_vertices = 0;
  std::size_t graph_edges = 0;
  std::size_t violated_edges = 0;
  std::size_t constraints = 0;
  bool skipped = false;
  std::optional<SolverResult> result;  // absent for skipped clusters and local filtering
};

struct RegistrationResult {
  LabelVector labels;
  std::vector<bool> unconstrained;  // match took part in no evaluated edge
  std::vector<ClusterReport> clusters;
  std::vector<std::string> warnings;

  std::int64_t total_objective() const;
  double total_lower_bound() const;
  bool all_optimal() const;
  double total_wall_time() const;
};

/// Dispatches to solve_exact or solve_relaxed.
SolverResult solve_program(const CoveringProgram& program, SolveMode mode, const SolverConfig& config);

}  // namespace mfcons
