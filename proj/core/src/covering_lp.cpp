#include "mfcons/covering_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace mfcons {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorEvery = 64;
constexpr std::size_t kStallBeforeBland = 50;

// Revised simplex for max 1'y s.t. A y + s = 1, y, s >= 0. Rows are covering
// variables, structural columns are constraints, slack m + r sits in row r.
class PackingSimplex {
 public:
  PackingSimplex(std::size_t rows, std::span<const Constraint> columns, double tol)
      : rows_(rows), columns_(columns), tol_(tol), binv_(Eigen::MatrixXd::Identity(rows, rows)),
        xb_(Eigen::VectorXd::Ones(rows)), basis_(rows), position_(columns.size() + rows, kNonBasic) {
    for (std::size_t r = 0; r < rows_; ++r) {
      basis_[r] = columns_.size() + r;
      position_[basis_[r]] = r;
    }
  }

  CoveringLpResult run() {
    CoveringLpResult out;
    const std::size_t m = columns_.size();
    const std::size_t cap = 50 * (rows_ + m) + 1000;
    Eigen::VectorXd alpha(rows_);
    double best_objective = -1.0;
    std::size_t stall = 0;

    for (std::size_t iter = 0;; ++iter) {
      if (iter >= cap) {
        out.iterations = iter;
        break;
      }
      if (iter > 0 && iter % kRefactorEvery == 0) refactor();

      compute_duals();
      const bool bland = stall >= kStallBeforeBland;
      const std::size_t entering = price(bland);
      if (entering == kNonBasic) {
        out.converged = true;
        out.iterations = iter;
        break;
      }

      column_times_binv(entering, alpha);
      const std::size_t leave_row = ratio_test(alpha, bland);
      if (leave_row == kNonBasic) {
        // Cannot happen for a packing LP with non-empty columns; treat as a stall.
        out.iterations = iter;
        break;
      }
      pivot(entering, leave_row, alpha);

      const double objective = current_objective();
      if (objective > best_objective + 1e-12) {
        best_objective = objective;
        stall = 0;
      } else {
        ++stall;
      }
    }

    compute_duals();
    out.objective = current_objective();
    out.z.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out.z[r] = std::clamp(duals_(r), 0.0, 1.0);
    return out;
  }

 private:
  static constexpr std::size_t kNonBasic = std::numeric_limits<std::size_t>::max();

  bool is_structural(std::size_t j) const { return j < columns_.size(); }

  double cost(std::size_t j) const { return is_structural(j) ? 1.0 : 0.0; }

  void compute_duals() {
    duals_.setZero(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (is_structural(basis_[r])) duals_ += binv_.row(r).transpose();
    }
  }

  double reduced_cost(std::size_t j) const {
    if (!is_structural(j)) return -duals_(j - columns_.size());
    double d = 1.0;
    for (MatchIndex i : columns_[j]) d -= duals_(i);
    return d;
  }

  std::size_t price(bool bland) const {
    std::size_t best = kNonBasic;
    double best_d = tol_;
    const std::size_t total = columns_.size() + rows_;
    for (std::size_t j = 0; j < total; ++j) {
      if (position_[j] != kNonBasic) continue;
      const double d = reduced_cost(j);
      if (d > best_d) {
        best = j;
        if (bland) return best;
        best_d = d;
      }
    }
    return best;
  }

  void column_times_binv(std::size_t j, Eigen::VectorXd& alpha) const {
    if (is_structural(j)) {
      alpha.setZero();
      for (MatchIndex i : columns_[j]) alpha += binv_.col(i);
    } else {
      alpha = binv_.col(j - columns_.size());
    }
  }

  std::size_t ratio_test(const Eigen::VectorXd& alpha, bool bland) const {
    std::size_t leave = kNonBasic;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows_; ++r) {
      if (alpha(r) <= kPivotTol) continue;
      const double ratio = std::max(xb_(r), 0.0) / alpha(r);
      if (leave == kNonBasic || ratio < best_ratio - 1e-12) {
        leave = r;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-12) {
        const bool better = bland ? basis_[r] < basis_[leave] : alpha(r) > alpha(leave);
        if (better) {
          leave = r;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    return leave;
  }

  void pivot(std::size_t entering, std::size_t row, const Eigen::VectorXd& alpha) {
    const double inv = 1.0 / alpha(row);
    binv_.row(row) *= inv;
    xb_(row) *= inv;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == row || alpha(r) == 0.0) continue;
      binv_.row(r) -= alpha(r) * binv_.row(row);
      xb_(r) -= alpha(r) * xb_(row);
    }
    position_[basis_[row]] = kNonBasic;
    basis_[row] = entering;
    position_[entering] = row;
  }

  void refactor() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      const std::size_t j = basis_[r];
      if (is_structural(j)) {
        for (MatchIndex i : columns_[j]) b(i, r) = 1.0;
      } else {
        b(j - columns_.size(), r) = 1.0;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv_ = lu.inverse();
    xb_ = binv_ * Eigen::VectorXd::Ones(rows_);
    for (std::size_t r = 0; r < rows_; ++r) xb_(r) = std::max(xb_(r), 0.0);
  }

  double current_objective() const {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (is_structural(basis_[r])) sum += std::max(xb_(r), 0.0);
    }
    return sum;
  }

  std::size_t rows_;
  std::span<const Constraint> columns_;
  double tol_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd duals_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> position_;
};

}  // namespace

CoveringLpResult solve_covering_lp(std::size_t num_vars, std::span<const Constraint> constraints,
                                   double tolerance) {
  if (constraints.empty() || num_vars == 0) {
    CoveringLpResult out;
    out.z.assign(num_vars, 0.0);
    out.converged = true;
    return out;
  }
  return PackingSimplex(num_vars, constraints, tolerance).run();
}

}  // namespace mfcons
