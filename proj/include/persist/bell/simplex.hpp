#ifndef PERSIST_BELL_SIMPLEX_HPP
#define PERSIST_BELL_SIMPLEX_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "persist/errors.hpp"

namespace persist {

/// Dense two-phase primal simplex for min c.x s.t. Ax = b, x >= 0.
/// Small and deterministic; Dantzig pricing with a lexicographic ratio
/// test. Built for the local-polytope LPs (m <= 3^6, n <= 4^6+1).
class SimplexSolver {
 public:
  struct Result {
    bool feasible = false;
    bool bounded = true;
    double objective = 0.0;
    Eigen::VectorXd x;     // primal solution (n), zero if infeasible
    Eigen::VectorXd dual;  // simplex multipliers y for the original rows
    double phase1_objective = 0.0;  // residual infeasibility
  };

  Result solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
               const Eigen::VectorXd& cost) {
    try {
      return solve_once(a, b, cost);
    } catch (const Error&) {
      // Highly degenerate instances can stall despite the lexicographic
      // rule once round-off creeps into the tableau. Retry once with a
      // tiny deterministic rhs perturbation to break the degeneracy; the
      // answer is accurate to the perturbation scale and every certificate
      // built from it is re-verified independently. The perturbation is
      // taken inside the column cone (b + A * delta, delta >= 0) so a
      // feasible instance can never become infeasible.
      const double scale = 1e-9 * std::max(1.0, b.lpNorm<Eigen::Infinity>()) /
                           std::max(1.0, a.lpNorm<Eigen::Infinity>());
      Eigen::VectorXd delta(a.cols());
      for (long j = 0; j < a.cols(); ++j)
        delta(j) = scale * std::abs(std::sin(997.0 * (j + 1)));
      return solve_once(a, b + a * delta, cost);
    }
  }

 private:
  Result solve_once(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& cost) {
    const long m = a.rows();
    const long n = a.cols();
    // flip rows to make rhs nonnegative; artificial columns are then e_i
    Eigen::VectorXd flip = Eigen::VectorXd::Ones(m);
    tab_.resize(m, n + m);
    rhs_.resize(m);
    for (long i = 0; i < m; ++i) {
      const double s = b(i) < 0.0 ? -1.0 : 1.0;
      flip(i) = s;
      tab_.row(i).head(n) = s * a.row(i);
      rhs_(i) = s * b(i);
    }
    tab_.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
    basis_.resize(m);
    for (long i = 0; i < m; ++i) basis_[i] = n + i;

    Result r;
    // phase 1: minimize sum of artificials
    cost_.setZero(n + m);
    cost_.tail(m).setOnes();
    canonicalize_cost();
    if (!iterate(n + m)) {
      r.bounded = false;  // cannot happen for phase 1; defensive
      return r;
    }
    recompute_objective();  // incremental tracking drifts on long runs
    r.phase1_objective = obj_;
    if (obj_ > 1e-9) {
      r.feasible = false;
      r.dual = extract_dual(flip);
      return r;
    }
    r.feasible = true;

    // Drive any artificial still basic at zero level out of the basis:
    // phase 2 pivots could otherwise lift it to a positive value, silently
    // violating Ax = b while reporting a too-good objective. A row with no
    // structural pivot is redundant and stays identically zero.
    for (long i = 0; i < m; ++i) {
      if (basis_[i] < n) continue;
      long enter = -1;
      double best = kPivotTol;
      for (long j = 0; j < n; ++j) {
        const double v = std::abs(tab_(i, j));
        if (v > best) {
          enter = j;
          best = v;
        }
      }
      if (enter >= 0) pivot(i, enter);
    }

    // phase 2: real costs, artificial columns barred from entering
    cost_.setZero(n + m);
    cost_.head(n) = cost;
    canonicalize_cost();
    if (!iterate(n)) {
      r.bounded = false;
      return r;
    }
    recompute_objective();
    r.objective = obj_;
    r.x = Eigen::VectorXd::Zero(n);
    for (long i = 0; i < m; ++i)
      if (basis_[i] < n) r.x(basis_[i]) = rhs_(i);
    // audit: a corrupted tableau reports an infeasible point as optimal;
    // throwing here routes the instance to the perturbed retry.
    const double drift = (a * r.x - b).cwiseAbs().maxCoeff();
    if (drift > 1e-7 * std::max(1.0, b.cwiseAbs().maxCoeff()))
      throw Error("simplex: feasibility drift");
    r.dual = extract_dual(flip);
    return r;
  }

 private:
  // Pivot eligibility must stay well above round-off: dividing a row by a
  // near-noise pivot element turns 1e-12-scale rhs round-off into O(1)
  // infeasibility that the ratio test then propagates silently.
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-11;
  static constexpr double kRhsRoundoff = 1e-9;

  void recompute_objective() {
    obj_ = 0.0;
    for (long i = 0; i < tab_.rows(); ++i) obj_ += cost_(basis_[i]) * rhs_(i);
  }

  void canonicalize_cost() {
    red_ = cost_;
    obj_ = 0.0;
    for (long i = 0; i < tab_.rows(); ++i) {
      const double cb = cost_(basis_[i]);
      if (cb != 0.0) {
        red_ -= cb * tab_.row(i).transpose();
        obj_ += cb * rhs_(i);
      }
    }
  }

  // Pivot until optimal over columns [0, enter_limit). Returns false when
  // unbounded. Dantzig pricing with a lexicographic ratio test: rows are
  // compared by (rhs, B^-1 row)/pivot, which rules out cycling since the
  // artificial block keeps every row lexicographically positive.
  bool iterate(long enter_limit) {
    const long m = tab_.rows();
    const long nart = tab_.cols() - m;  // artificial block = B^-1
    for (long it = 0;; ++it) {
      long enter = -1;
      double best = -kCostTol;
      for (long j = 0; j < enter_limit; ++j) {
        if (red_(j) < best) {
          enter = j;
          best = red_(j);
        }
      }
      if (enter < 0) return true;  // optimal
      long leave = -1;
      for (long i = 0; i < m; ++i) {
        const double aij = tab_(i, enter);
        if (aij <= kPivotTol) continue;
        if (leave < 0) {
          leave = i;
          continue;
        }
        const double al = tab_(leave, enter);
        double d = rhs_(i) / aij - rhs_(leave) / al;
        if (d < -1e-12) {
          leave = i;
          continue;
        }
        if (d > 1e-12) continue;
        for (long k = 0; k < m; ++k) {
          d = tab_(i, nart + k) / aij - tab_(leave, nart + k) / al;
          if (d < -1e-12) {
            leave = i;
            break;
          }
          if (d > 1e-12) break;
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
      if (it > 500000) throw Error("simplex: iteration limit");
    }
  }

  void pivot(long leave, long enter) {
    const double p = tab_(leave, enter);
    tab_.row(leave) /= p;
    rhs_(leave) /= p;
    for (long i = 0; i < tab_.rows(); ++i) {
      if (i == leave) continue;
      const double f = tab_(i, enter);
      if (f != 0.0) {
        tab_.row(i) -= f * tab_.row(leave);
        rhs_(i) -= f * rhs_(leave);
      }
    }
    const double fc = red_(enter);
    if (fc != 0.0) {
      red_ -= fc * tab_.row(leave).transpose();
      obj_ += fc * rhs_(leave);
    }
    basis_[leave] = enter;
    // rhs entries within round-off of zero are exactly zero in the ideal
    // tableau; left negative, a later degenerate pivot can amplify them.
    for (long i = 0; i < rhs_.size(); ++i)
      if (rhs_(i) < 0.0 && rhs_(i) > -kRhsRoundoff) rhs_(i) = 0.0;
  }

  // y_i = (c_art_i - reduced cost under artificial column i), mapped back
  // through the row sign flips.
  Eigen::VectorXd extract_dual(const Eigen::VectorXd& flip) const {
    const long m = tab_.rows();
    const long n = tab_.cols() - m;
    Eigen::VectorXd y(m);
    for (long i = 0; i < m; ++i)
      y(i) = flip(i) * (cost_(n + i) - red_(n + i));
    return y;
  }

  Eigen::MatrixXd tab_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd cost_;
  Eigen::VectorXd red_;  // reduced costs
  double obj_ = 0.0;
  std::vector<long> basis_;
};

}  // namespace persist

#endif
