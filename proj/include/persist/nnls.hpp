#ifndef PERSIST_NNLS_HPP
#define PERSIST_NNLS_HPP

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace persist {

/// Lawson-Hanson active-set nonnegative least squares:
///   min ||A x - b||_2  s.t.  x >= 0.
/// A is m x n with n typically much larger than m; the passive set never
/// exceeds m columns.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            double grad_tol = 1e-12, long max_iter = 0) {
  const long m = a.rows();
  const long n = a.cols();
  if (max_iter == 0) max_iter = 8 * std::max(m, n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<long> passive;
  std::vector<char> in_passive(n, 0);
  Eigen::VectorXd resid = b;

  auto solve_passive = [&](void) -> Eigen::VectorXd {
    Eigen::MatrixXd ap(m, passive.size());
    for (std::size_t j = 0; j < passive.size(); ++j)
      ap.col(j) = a.col(passive[j]);
    return (ap.transpose() * ap)
        .ldlt()
        .solve(ap.transpose() * b);
  };

  for (long iter = 0; iter < max_iter; ++iter) {
    // most-violated KKT multiplier
    Eigen::VectorXd grad = a.transpose() * resid;
    long best = -1;
    double best_g = grad_tol;
    for (long j = 0; j < n; ++j)
      if (!in_passive[j] && grad(j) > best_g) {
        best_g = grad(j);
        best = j;
      }
    if (best < 0) break;
    passive.push_back(best);
    in_passive[best] = 1;

    // inner loop: keep the passive solution nonnegative
    for (;;) {
      Eigen::VectorXd z = solve_passive();
      double alpha = 1.0;
      for (std::size_t j = 0; j < passive.size(); ++j)
        if (z(j) <= 0.0) {
          const double xj = x(passive[j]);
          if (xj - z(j) > 1e-300)
            alpha = std::min(alpha, xj / (xj - z(j)));
          else
            alpha = 0.0;
        }
      if (alpha >= 1.0) {
        for (std::size_t j = 0; j < passive.size(); ++j) x(passive[j]) = z(j);
        break;
      }
      for (std::size_t j = 0; j < passive.size(); ++j)
        x(passive[j]) += alpha * (z(j) - x(passive[j]));
      // drop columns at (or numerically below) zero
      std::vector<long> next;
      for (long p : passive) {
        if (x(p) > 1e-14) {
          next.push_back(p);
        } else {
          x(p) = 0.0;
          in_passive[p] = 0;
        }
      }
      passive = std::move(next);
      if (passive.empty()) break;
    }
    Eigen::VectorXd ax = Eigen::VectorXd::Zero(m);
    for (long p : passive) ax += x(p) * a.col(p);
    resid = b - ax;
  }
  return x;
}

}  // namespace persist

#endif
