#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfcons/consensus.hpp"

namespace mfcons {

struct CoveringLpResult {
  double objective = 0.0;       // sum of the packing duals, a valid lower bound
  std::vector<double> z;        // covering solution, one entry per variable
  bool converged = false;
  std::size_t iterations = 0;
};

/// Solves min 1'z s.t. every constraint sums to >= 1, 0 <= z <= 1.
///
/// Works on the packing dual max 1'y s.t. A y <= 1, y >= 0 with a revised
/// primal simplex. The slack basis is feasible from the start, so every
/// iterate is dual feasible for the covering problem and its objective is a
/// valid lower bound even when the iteration cap is reached. The covering
/// solution is read off the simplex multipliers.
CoveringLpResult solve_covering_lp(std::size_t num_vars, std::span<const Constraint> constraints,
                                   double tolerance);

}  // namespace mfcons
