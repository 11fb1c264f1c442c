#ifndef PERSIST_BELL_HORODECKI_HPP
#define PERSIST_BELL_HORODECKI_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <cmath>

#include "persist/bell/observable.hpp"
#include "persist/errors.hpp"
#include "persist/linalg.hpp"
#include "persist/state.hpp"

namespace persist {

/// Correlation matrix T_ij = tr(rho sigma_i x sigma_j) of a 2-qubit state.
inline Eigen::Matrix3d correlation_matrix(const DensityOperator& rho2) {
  if (rho2.sites() != 2 || rho2.reg().dim(0) != 2 || rho2.reg().dim(1) != 2)
    throw NotTwoQubits("correlation_matrix wants a 2-qubit state");
  const std::array<Eigen::Matrix2cd, 3> sig = {pauli_x(), pauli_y(), pauli_z()};
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Matrix op = kron(Matrix(sig[i]), Matrix(sig[j]));
      t(i, j) = (rho2.matrix() * op).trace().real();
    }
  return t;
}

struct HorodeckiResult {
  double value;  // exact max CHSH over qubit observables
  DichotomicObservable a0, a1, b0, b1;
};

/// Exact maximal CHSH of a 2-qubit state: 2 sqrt(t1 + t2) with t1 >= t2 the
/// largest eigenvalues of T^T T, plus optimizing observables from the
/// singular vectors of T.
inline HorodeckiResult horodecki_chsh_max(const DensityOperator& rho2) {
  const Eigen::Matrix3d t = correlation_matrix(rho2);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s1 = svd.singularValues()(0);
  const double s2 = svd.singularValues()(1);
  const double value = 2.0 * std::sqrt(s1 * s1 + s2 * s2);

  // a.T(b+b') + a'.T(b-b') with b+b' = 2cos(chi) v1, b-b' = 2sin(chi) v2,
  // a = u1, a' = u2, tan(chi) = s2/s1.
  const double chi = std::atan2(s2, s1);
  const Eigen::Vector3d v1 = svd.matrixV().col(0);
  const Eigen::Vector3d v2 = svd.matrixV().col(1);
  const Eigen::Vector3d u1 = svd.matrixU().col(0);
  const Eigen::Vector3d u2 = svd.matrixU().col(1);
  const Eigen::Vector3d b0v = std::cos(chi) * v1 + std::sin(chi) * v2;
  const Eigen::Vector3d b1v = std::cos(chi) * v1 - std::sin(chi) * v2;
  auto obs = [](const Eigen::Vector3d& n) {
    return DichotomicObservable::from_bloch(2, {n(0), n(1), n(2)});
  };
  return HorodeckiResult{value, obs(u1), obs(u2), obs(b0v), obs(b1v)};
}

}  // namespace persist

#endif
