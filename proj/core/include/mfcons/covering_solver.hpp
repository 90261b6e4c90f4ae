#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfcons/consensus.hpp"

namespace mfcons {

struct SolverConfig {
  double time_budget = 60.0;  // seconds
  std::uint64_t node_budget = 1'000'000;
  double lp_tolerance = 1e-7;
  bool trace_enabled = true;

  void validate() const;
};

struct TraceEntry {
  std::uint64_t iteration = 0;
  std::int64_t upper_bound = 0;
  double lower_bound = 0.0;
  std::size_t open_nodes = 0;
};

struct SolverResult {
  LabelVector labels;
  std::int64_t objective = 0;  // number of outliers
  double lower_bound = 0.0;
  bool optimal = false;
  std::vector<TraceEntry> trace;
  double wall_time = 0.0;
  std::uint64_t nodes = 0;
  // Relaxed mode only: fractional z and constraints left uncovered by rounding.
  std::vector<double> fractional;
  std::size_t violated_constraints = 0;
};

/// Per-variable state inside a branch-and-bound node.
enum class Fix : std::int8_t { free = -1, inlier = 0, outlier = 1 };
using PartialAssignment = std::vector<Fix>;

/// Branch and bound for the covering program: best-first on the LP bound,
/// branching on the free variable in the most uncovered constraints, child
/// z=1 before z=0, greedy incumbents. Budget exhaustion returns the best
/// incumbent with `optimal == false`.
SolverResult solve_exact(const CoveringProgram& program, const SolverConfig& config = {});

/// LP relaxation rounded at 0.5. `lower_bound` is the fractional optimum and
/// `optimal` reports LP convergence. Throws lp_not_converged.
SolverResult solve_relaxed(const CoveringProgram& program, const SolverConfig& config = {});

struct OracleResult {
  std::int64_t objective = 0;
  LabelVector labels;
};

/// Exhaustive enumeration for at most 24 variables (too_large otherwise).
/// Returns the lexicographically smallest optimal z vector.
OracleResult brute_force_oracle(const CoveringProgram& program);

/// Greedy cover respecting `fixed` (empty span means nothing fixed). Throws
/// infeasible_node when some constraint is fixed entirely to inliers.
LabelVector greedy_cover(const CoveringProgram& program, std::span<const Fix> fixed = {});

/// Residual LP optimum plus the number of variables fixed to outlier.
/// Throws infeasible_node like greedy_cover, lp_not_converged on stall.
double lp_lower_bound(const CoveringProgram& program, std::span<const Fix> fixed = {},
                      double tolerance = 1e-7);

/// Plain-text instance: "p c" then c lines of 1-based indices.
CoveringProgram read_instance(std::istream& in);
void write_instance(std::ostream& out, const CoveringProgram& program);

/// CSV with header "iteration,upper,lower,open_nodes".
void write_trace_csv(std::ostream& out, std::span<const TraceEntry> trace);
std::vector<TraceEntry> read_trace_csv(std::istream& in);

}  // namespace mfcons
