#include "mfcons/covering_solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>

#include "mfcons/covering_lp.hpp"
#include "mfcons/error.hpp"

namespace mfcons {

void SolverConfig::validate() const {
  if (!(time_budget > 0.0)) throw Error(Errc::invalid_argument, "time budget must be positive");
  if (node_budget == 0) throw Error(Errc::invalid_argument, "node budget must be positive");
  if (!(lp_tolerance > 0.0 && lp_tolerance < 1e-3)) {
    throw Error(Errc::invalid_argument, "lp tolerance must lie in (0, 1e-3)");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

PartialAssignment expand_fixed(std::size_t n, std::span<const Fix> fixed) {
  if (fixed.empty()) return PartialAssignment(n, Fix::free);
  if (fixed.size() != n) throw Error(Errc::invalid_argument, "partial assignment has the wrong length");
  return {fixed.begin(), fixed.end()};
}

bool covered(const Constraint& c, const PartialAssignment& fixed) {
  return std::any_of(c.begin(), c.end(), [&](MatchIndex i) { return fixed[i] == Fix::outlier; });
}

std::size_t count_outliers(const PartialAssignment& fixed) {
  return static_cast<std::size_t>(std::count(fixed.begin(), fixed.end(), Fix::outlier));
}

/// Fixes the last free variable of every uncovered constraint to outlier
/// until nothing changes. Returns false when a constraint has no free
/// variable left and nothing covering it.
bool propagate(const CoveringProgram& program, PartialAssignment& fixed) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : program.constraints) {
      std::size_t free_count = 0;
      MatchIndex last = 0;
      bool is_covered = false;
      for (MatchIndex i : c) {
        if (fixed[i] == Fix::outlier) {
          is_covered = true;
          break;
        }
        if (fixed[i] == Fix::free) {
          ++free_count;
          last = i;
        }
      }
      if (is_covered) continue;
      if (free_count == 0) return false;
      if (free_count == 1) {
        fixed[last] = Fix::outlier;
        changed = true;
      }
    }
  }
  return true;
}

void require_feasible(const CoveringProgram& program, const PartialAssignment& fixed) {
  for (std::size_t c = 0; c < program.constraints.size(); ++c) {
    const auto& con = program.constraints[c];
    const bool open = std::any_of(con.begin(), con.end(), [&](MatchIndex i) { return fixed[i] != Fix::inlier; });
    if (!open) {
      throw Error(Errc::infeasible_node, "constraint " + std::to_string(c) + " has every variable fixed inlier");
    }
  }
}

/// Uncovered constraints restricted to free variables, renumbered densely.
struct Residual {
  std::vector<MatchIndex> free_vars;
  std::vector<Constraint> constraints;
};

Residual make_residual(const CoveringProgram& program, const PartialAssignment& fixed) {
  Residual r;
  std::vector<MatchIndex> local(fixed.size(), std::numeric_limits<MatchIndex>::max());
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] == Fix::free) {
      local[i] = static_cast<MatchIndex>(r.free_vars.size());
      r.free_vars.push_back(static_cast<MatchIndex>(i));
    }
  }
  for (const auto& c : program.constraints) {
    if (covered(c, fixed)) continue;
    Constraint reduced;
    for (MatchIndex i : c) {
      if (fixed[i] == Fix::free) reduced.push_back(local[i]);
    }
    r.constraints.push_back(std::move(reduced));
  }
  return r;
}

LabelVector greedy_from(const CoveringProgram& program, const PartialAssignment& fixed) {
  const std::size_t n = program.num_vars;
  LabelVector labels(n, Label::inlier);
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] == Fix::outlier) labels[i] = Label::outlier;
  }

  std::vector<std::vector<std::size_t>> incident(n);
  std::vector<std::size_t> score(n, 0);
  std::vector<bool> done(program.constraints.size(), false);
  std::size_t remaining = 0;
  for (std::size_t c = 0; c < program.constraints.size(); ++c) {
    const auto& con = program.constraints[c];
    if (covered(con, fixed)) {
      done[c] = true;
      continue;
    }
    bool any_free = false;
    for (MatchIndex i : con) {
      if (fixed[i] != Fix::free) continue;
      incident[i].push_back(c);
      ++score[i];
      any_free = true;
    }
    if (!any_free) {
      throw Error(Errc::infeasible_node, "constraint " + std::to_string(c) + " has every variable fixed inlier");
    }
    ++remaining;
  }

  while (remaining > 0) {
    std::size_t pick = 0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (score[i] > best) {
        best = score[i];
        pick = i;
      }
    }
    labels[pick] = Label::outlier;
    for (std::size_t c : incident[pick]) {
      if (done[c]) continue;
      done[c] = true;
      --remaining;
      for (MatchIndex i : program.constraints[c]) {
        if (fixed[i] == Fix::free && score[i] > 0) --score[i];
      }
    }
    score[pick] = 0;
  }
  return labels;
}

/// Drops outliers whose every constraint is covered by another outlier,
/// visiting the least-used variables first (ties by index).
void prune_redundant(const CoveringProgram& program, LabelVector& labels) {
  const std::size_t n = program.num_vars;
  std::vector<std::vector<std::size_t>> incident(n);
  std::vector<std::size_t> cover(program.constraints.size(), 0);
  for (std::size_t c = 0; c < program.constraints.size(); ++c) {
    for (MatchIndex i : program.constraints[c]) {
      incident[i].push_back(c);
      if (labels[i] == Label::outlier) ++cover[c];
    }
  }
  std::vector<MatchIndex> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == Label::outlier) order.push_back(static_cast<MatchIndex>(i));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](MatchIndex a, MatchIndex b) { return incident[a].size() < incident[b].size(); });
  for (MatchIndex i : order) {
    const bool redundant = std::all_of(incident[i].begin(), incident[i].end(), [&](std::size_t c) { return cover[c] >= 2; });
    if (!redundant) continue;
    labels[i] = Label::inlier;
    for (std::size_t c : incident[i]) --cover[c];
  }
}

std::int64_t count_labels(const LabelVector& labels) {
  return static_cast<std::int64_t>(std::count(labels.begin(), labels.end(), Label::outlier));
}

std::int64_t ceil_bound(double bound, double tol) {
  return static_cast<std::int64_t>(std::ceil(bound - tol));
}

struct Node {
  PartialAssignment fixed;
  double bound = 0.0;
  std::int64_t key = 0;  // ceil(bound - tol)
  std::size_t depth = 0;
  std::uint64_t seq = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    // std::priority_queue pops the largest element: invert everything.
    if (a.key != b.key) return a.key > b.key;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

}  // namespace

LabelVector greedy_cover(const CoveringProgram& program, std::span<const Fix> fixed) {
  program.validate();
  return greedy_from(program, expand_fixed(program.num_vars, fixed));
}

double lp_lower_bound(const CoveringProgram& program, std::span<const Fix> fixed, double tolerance) {
  program.validate();
  const PartialAssignment assignment = expand_fixed(program.num_vars, fixed);
  require_feasible(program, assignment);
  const Residual residual = make_residual(program, assignment);
  const CoveringLpResult lp = solve_covering_lp(residual.free_vars.size(), residual.constraints, tolerance);
  if (!lp.converged) throw Error(Errc::lp_not_converged, "iteration cap reached in lower bound");
  return static_cast<double>(count_outliers(assignment)) + lp.objective;
}

SolverResult solve_exact(const CoveringProgram& program, const SolverConfig& config) {
  program.validate();
  config.validate();
  const auto start = Clock::now();
  const double tol = config.lp_tolerance;
  const std::size_t n = program.num_vars;

  SolverResult result;
  auto record = [&](std::uint64_t iteration, std::int64_t ub, double lb, std::size_t open) {
    if (config.trace_enabled) result.trace.push_back({iteration, ub, lb, open});
  };

  PartialAssignment root(n, Fix::free);
  propagate(program, root);  // the all-free root is always feasible

  LabelVector incumbent;
  std::int64_t upper = std::numeric_limits<std::int64_t>::max();
  auto offer = [&](LabelVector candidate) {
    prune_redundant(program, candidate);
    const std::int64_t value = count_labels(candidate);
    if (value < upper) {
      upper = value;
      incumbent = std::move(candidate);
    }
  };
  offer(greedy_from(program, root));

  // Returns the node bound; also offers an LP-rounded incumbent.
  auto evaluate = [&](const PartialAssignment& fixed, double floor_bound) {
    const Residual residual = make_residual(program, fixed);
    const double ones = static_cast<double>(count_outliers(fixed));
    if (residual.constraints.empty()) return std::max(floor_bound, ones);
    // Unconverged iterates are still dual feasible, so the bound stays valid.
    const CoveringLpResult lp = solve_covering_lp(residual.free_vars.size(), residual.constraints, tol);
    PartialAssignment rounded = fixed;
    for (std::size_t k = 0; k < residual.free_vars.size(); ++k) {
      if (lp.z[k] >= 0.5 - tol) rounded[residual.free_vars[k]] = Fix::outlier;
    }
    offer(greedy_from(program, rounded));
    return std::max(floor_bound, ones + lp.objective);
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::multiset<double> open_bounds;
  std::uint64_t seq = 0;
  auto push = [&](Node node) {
    open_bounds.insert(node.bound);
    open.push(std::move(node));
  };

  {
    Node node;
    node.bound = evaluate(root, 0.0);
    node.key = ceil_bound(node.bound, tol);
    node.fixed = std::move(root);
    node.seq = seq++;
    if (node.key < upper) push(std::move(node));
  }

  double lower = open_bounds.empty() ? static_cast<double>(upper)
                                     : std::min(*open_bounds.begin(), static_cast<double>(upper));
  record(0, upper, lower, open.size());

  std::vector<std::size_t> score(n);
  std::uint64_t iteration = 0;
  bool exhausted = false;
  while (true) {
    if (!open_bounds.empty()) {
      lower = std::max(lower, std::min(*open_bounds.begin(), static_cast<double>(upper)));
    } else {
      lower = static_cast<double>(upper);
    }
    if (static_cast<double>(upper) - lower < 1.0 - tol) break;
    if (iteration >= config.node_budget || seconds_since(start) >= config.time_budget) {
      exhausted = true;
      break;
    }

    Node node = open.top();
    open.pop();
    open_bounds.erase(open_bounds.find(node.bound));
    ++iteration;

    if (node.key >= upper) {
      record(iteration, upper, lower, open.size());
      continue;
    }

    std::fill(score.begin(), score.end(), 0);
    for (const auto& c : program.constraints) {
      if (covered(c, node.fixed)) continue;
      for (MatchIndex i : c) {
        if (node.fixed[i] == Fix::free) ++score[i];
      }
    }
    std::size_t branch = n;
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (node.fixed[i] == Fix::free && score[i] > best) {
        best = score[i];
        branch = i;
      }
    }

    if (branch == n) {
      // Nothing left to branch on: the node is a complete cover.
      LabelVector labels(n, Label::inlier);
      for (std::size_t i = 0; i < n; ++i) {
        if (node.fixed[i] == Fix::outlier) labels[i] = Label::outlier;
      }
      const std::int64_t value = count_labels(labels);
      if (value < upper) {
        upper = value;
        incumbent = std::move(labels);
      }
    } else {
      for (Fix value : {Fix::outlier, Fix::inlier}) {
        PartialAssignment fixed = node.fixed;
        fixed[branch] = value;
        if (!propagate(program, fixed)) continue;

        offer(greedy_from(program, fixed));

        Node child;
        child.bound = evaluate(fixed, node.bound);
        child.key = ceil_bound(child.bound, tol);
        if (child.key >= upper) continue;
        child.fixed = std::move(fixed);
        child.depth = node.depth + 1;
        child.seq = seq++;
        push(std::move(child));
      }
    }

    double open_lower = open_bounds.empty() ? static_cast<double>(upper)
                                            : std::min(*open_bounds.begin(), static_cast<double>(upper));
    record(iteration, upper, std::max(lower, open_lower), open.size());
  }

  result.labels = std::move(incumbent);
  result.objective = upper;
  result.lower_bound = lower;
  result.optimal = !exhausted;
  result.nodes = iteration;
  if (config.trace_enabled && !result.trace.empty()) {
    const auto& last = result.trace.back();
    if (last.upper_bound != upper || last.lower_bound != lower || last.open_nodes != open.size()) {
      record(iteration, upper, lower, open.size());
    }
  }
  result.wall_time = seconds_since(start);
  return result;
}

SolverResult solve_relaxed(const CoveringProgram& program, const SolverConfig& config) {
  program.validate();
  config.validate();
  const auto start = Clock::now();
  const CoveringLpResult lp = solve_covering_lp(program.num_vars, program.constraints, config.lp_tolerance);
  if (!lp.converged) throw Error(Errc::lp_not_converged, "covering LP hit its iteration cap");

  SolverResult result;
  result.fractional = lp.z;
  result.labels.assign(program.num_vars, Label::inlier);
  for (std::size_t i = 0; i < program.num_vars; ++i) {
    if (lp.z[i] >= 0.5 - config.lp_tolerance) result.labels[i] = Label::outlier;
  }
  result.objective = count_labels(result.labels);
  result.lower_bound = lp.objective;
  result.optimal = true;
  result.violated_constraints = program.count_violated(result.labels);
  result.nodes = 0;
  result.wall_time = seconds_since(start);
  return result;
}

OracleResult brute_force_oracle(const CoveringProgram& program) {
  program.validate();
  const std::size_t n = program.num_vars;
  if (n > 24) throw Error(Errc::too_large, "brute force is limited to 24 variables");

  // Variable i maps to bit (n-1-i) so numeric order equals lexicographic order of z.
  std::vector<std::uint32_t> masks;
  masks.reserve(program.constraints.size());
  for (const auto& c : program.constraints) {
    std::uint32_t m = 0;
    for (MatchIndex i : c) m |= 1u << (n - 1 - i);
    masks.push_back(m);
  }

  const std::uint32_t limit = n == 0 ? 1u : (1u << n);
  int best_count = static_cast<int>(n) + 1;
  std::uint32_t best = 0;
  for (std::uint32_t z = 0; z < limit; ++z) {
    const int count = std::popcount(z);
    if (count >= best_count) continue;
    const bool feasible = std::all_of(masks.begin(), masks.end(), [z](std::uint32_t m) { return (m & z) != 0; });
    if (feasible) {
      best_count = count;
      best = z;
    }
  }

  OracleResult out;
  out.objective = best_count;
  out.labels.assign(n, Label::inlier);
  for (std::size_t i = 0; i < n; ++i) {
    if (best & (1u << (n - 1 - i))) out.labels[i] = Label::outlier;
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(Errc::malformed_input, "<instance>:" + std::to_string(line) + ": " + what);
}

bool parse_int(const std::string& token, long long& value) {
  try {
    std::size_t used = 0;
    value = std::stoll(token, &used);
    return used == token.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

CoveringProgram read_instance(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) parse_fail(line_no, "missing header");
  std::istringstream header(line);
  std::string tp, tc, extra;
  long long p = 0, c = 0;
  if (!(header >> tp >> tc) || (header >> extra) || !parse_int(tp, p) || !parse_int(tc, c) || p < 0 || c < 0) {
    parse_fail(line_no, "expected \"p c\"");
  }

  CoveringProgram program;
  program.num_vars = static_cast<std::size_t>(p);
  for (long long k = 0; k < c; ++k) {
    if (!next_line()) parse_fail(line_no, "expected " + std::to_string(c) + " constraints");
    std::istringstream row(line);
    std::string token;
    Constraint con;
    while (row >> token) {
      long long v = 0;
      if (!parse_int(token, v) || v < 1 || v > p) parse_fail(line_no, "bad variable index \"" + token + "\"");
      con.push_back(static_cast<MatchIndex>(v - 1));
    }
    std::sort(con.begin(), con.end());
    con.erase(std::unique(con.begin(), con.end()), con.end());
    program.constraints.push_back(std::move(con));
  }
  return program;
}

void write_instance(std::ostream& out, const CoveringProgram& program) {
  out << program.num_vars << ' ' << program.constraints.size() << '\n';
  for (const auto& c : program.constraints) {
    for (std::size_t k = 0; k < c.size(); ++k) out << (k ? " " : "") << c[k] + 1;
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, std::span<const TraceEntry> trace) {
  out << "iteration,upper,lower,open_nodes\n";
  std::ostringstream row;
  row << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : trace) {
    row.str({});
    row << e.iteration << ',' << e.upper_bound << ',' << e.lower_bound << ',' << e.open_nodes << '\n';
    out << row.str();
  }
}

std::vector<TraceEntry> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(Errc::malformed_input, "<trace>:1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "iteration,upper,lower,open_nodes") throw Error(Errc::malformed_input, "<trace>:1: bad header");
  std::vector<TraceEntry> trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    TraceEntry e;
    if (!(row >> e.iteration >> e.upper_bound >> e.lower_bound >> e.open_nodes)) {
      throw Error(Errc::malformed_input, "<trace>:" + std::to_string(line_no) + ": bad row");
    }
    trace.push_back(e);
  }
  return trace;
}

}  // namespace mfcons
