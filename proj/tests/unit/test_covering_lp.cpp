#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "mfcons/covering_lp.hpp"

using namespace mfcons;

namespace {

// Minimum of sum(z) over the vertices of {A z >= 1, 0 <= z <= 1}, found by
// solving every choice of n tight rows.
double enumerate_vertices(std::size_t n, const std::vector<Constraint>& cons) {
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& c : cons) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (MatchIndex i : c) a(i) = 1.0;
    rows.push_back(a);
    rhs.push_back(1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    lo(static_cast<Eigen::Index>(i)) = 1.0;
    rows.push_back(lo);
    rhs.push_back(0.0);
    rows.push_back(-lo);
    rhs.push_back(-1.0);
  }
  const std::size_t m = rows.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  do {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    std::size_t r = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (!pick[k]) continue;
      a.row(static_cast<Eigen::Index>(r)) = rows[k].transpose();
      b(static_cast<Eigen::Index>(r)) = rhs[k];
      ++r;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < static_cast<Eigen::Index>(n)) continue;
    const Eigen::VectorXd z = lu.solve(b);
    bool feasible = true;
    for (std::size_t k = 0; k < m && feasible; ++k) feasible = rows[k].dot(z) >= rhs[k] - 1e-9;
    if (feasible) best = std::min(best, z.sum());
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST(CoveringLp, OddCycleIsHalfIntegral) {
  const std::vector<Constraint> cons{{0, 1}, {1, 2}, {0, 2}};
  EXPECT_NEAR(enumerate_vertices(3, cons), 1.5, 1e-12);
  const auto r = solve_covering_lp(3, cons, 1e-7);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.objective, 1.5, 1e-7);
  for (double z : r.z) EXPECT_NEAR(z, 0.5, 1e-7);
}

TEST(CoveringLp, SinglePairHasUnitOptimum) {
  const std::vector<Constraint> cons{{0, 1}};
  EXPECT_NEAR(enumerate_vertices(2, cons), 1.0, 1e-12);
  const auto r = solve_covering_lp(2, cons, 1e-7);
  EXPECT_NEAR(r.objective, 1.0, 1e-7);
}

TEST(CoveringLp, EmptyProgram) {
  const auto r = solve_covering_lp(4, {}, 1e-7);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.z, std::vector<double>(4, 0.0));
}

TEST(CoveringLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 80; ++round) {
    const std::size_t n = 3 + rng() % 3;
    const std::size_t count = 1 + rng() % 7;
    std::vector<Constraint> cons;
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 4);
      Constraint con;
      while (con.size() < k) {
        const auto v = static_cast<MatchIndex>(rng() % n);
        if (std::find(con.begin(), con.end(), v) == con.end()) con.push_back(v);
      }
      std::sort(con.begin(), con.end());
      cons.push_back(con);
    }
    const auto r = solve_covering_lp(n, cons, 1e-7);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.objective, enumerate_vertices(n, cons), 1e-7) << "round " << round;

    // The reported z is a feasible covering point with the same value.
    double sum = 0.0;
    for (double z : r.z) {
      EXPECT_GE(z, -1e-9);
      EXPECT_LE(z, 1.0 + 1e-9);
      sum += z;
    }
    EXPECT_NEAR(sum, r.objective, 1e-6);
    for (const auto& c : cons) {
      double s = 0.0;
      for (MatchIndex i : c) s += r.z[i];
      EXPECT_GE(s, 1.0 - 1e-6);
    }
  }
}

TEST(CoveringLp, LargeProgramStaysFeasible) {
  std::mt19937_64 rng(5);
  const std::size_t n = 120;
  std::vector<Constraint> cons;
  for (int c = 0; c < 900; ++c) {
    Constraint con;
    while (con.size() < 4) {
      const auto v = static_cast<MatchIndex>(rng() % n);
      if (std::find(con.begin(), con.end(), v) == con.end()) con.push_back(v);
    }
    std::sort(con.begin(), con.end());
    cons.push_back(con);
  }
  const auto r = solve_covering_lp(n, cons, 1e-7);
  ASSERT_TRUE(r.converged);
  for (const auto& c : cons) {
    double s = 0.0;
    for (MatchIndex i : c) s += r.z[i];
    EXPECT_GE(s, 1.0 - 1e-6);
  }
  double sum = 0.0;
  for (double z : r.z) sum += z;
  EXPECT_NEAR(sum, r.objective, 1e-6);
}
