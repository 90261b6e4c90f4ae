#include "mfcons/pipeline.hpp"

#include <string>

#include "mfcons/error.hpp"

namespace mfcons {

std::string_view to_string(SolveMode mode) noexcept {
  switch (mode) {
    case SolveMode::exact: return "exact";
    case SolveMode::relaxed: return "relaxed";
    case SolveMode::local_filter: return "local-filter";
  }
  return "exact";
}

SolveMode parse_solve_mode(std::string_view text) {
  if (text == "exact") return SolveMode::exact;
  if (text == "relaxed") return SolveMode::relaxed;
  if (text == "local-filter") return SolveMode::local_filter;
  throw Error(Errc::invalid_argument, "unknown mode \"" + std::string(text) + "\"");
}

SolverResult solve_program(const CoveringProgram& program, SolveMode mode, const SolverConfig& config) {
  switch (mode) {
    case SolveMode::exact: return solve_exact(program, config);
    case SolveMode::relaxed: return solve_relaxed(program, config);
    case SolveMode::local_filter: break;
  }
  throw Error(Errc::invalid_argument, "local filtering does not solve a covering program");
}

std::int64_t RegistrationResult::total_objective() const {
  std::int64_t sum = 0;
  for (const auto& c : clusters) {
    if (c.result) sum += c.result->objective;
  }
  return sum;
}

double RegistrationResult::total_lower_bound() const {
  double sum = 0.0;
  for (const auto& c : clusters) {
    if (c.result) sum += c.result->lower_bound;
  }
  return sum;
}

bool RegistrationResult::all_optimal() const {
  for (const auto& c : clusters) {
    if (c.result && !c.result->optimal) return false;
  }
  return true;
}

double RegistrationResult::total_wall_time() const {
  double sum = 0.0;
  for (const auto& c : clusters) {
    if (c.result) sum += c.result->wall_time;
  }
  return sum;
}

}  // namespace mfcons
