#ifndef PERSIST_STATE_HPP
#define PERSIST_STATE_HPP

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "persist/errors.hpp"
#include "persist/register.hpp"

namespace persist {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = -1e-9;

/// Normalized pure state on a qudit register.
class StateVector {
 public:
  StateVector(QuditRegister reg, Vector amplitudes)
      : reg_(std::move(reg)), amps_(std::move(amplitudes)) {
    if (amps_.size() != reg_.total_dimension())
      throw DimensionMismatch("amplitude count != register dimension");
    if (std::abs(amps_.norm() - 1.0) > kNormTol)
      throw InvariantViolation("state vector is not normalized");
  }

  const QuditRegister& reg() const { return reg_; }
  const Vector& amplitudes() const { return amps_; }
  std::size_t sites() const { return reg_.sites(); }
  long dim() const { return reg_.total_dimension(); }

  Matrix projector() const {
    if (dim() > kMaxMatrixDimension)
      throw DimensionBudgetExceeded("projector would exceed 2^14 x 2^14");
    return amps_ * amps_.adjoint();
  }

 private:
  QuditRegister reg_;
  Vector amps_;
};

/// Mixed state: Hermitian, unit trace, PSD up to tolerance. Violations are
/// errors, not silent repairs.
class DensityOperator {
 public:
  DensityOperator(QuditRegister reg, Matrix m)
      : reg_(std::move(reg)), mat_(std::move(m)) {
    const long d = reg_.total_dimension();
    if (d > kMaxMatrixDimension)
      throw DimensionBudgetExceeded("density matrix exceeds 2^14 x 2^14");
    if (mat_.rows() != d || mat_.cols() != d)
      throw DimensionMismatch("matrix size != register dimension");
    if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
      throw InvariantViolation("density matrix is not Hermitian");
    if (std::abs(mat_.trace().real() - 1.0) > kTraceTol ||
        std::abs(mat_.trace().imag()) > kTraceTol)
      throw InvariantViolation("density matrix trace != 1");
    // symmetrize away the sub-tolerance asymmetry so downstream
    // eigendecompositions see an exactly Hermitian matrix
    mat_ = 0.5 * (mat_ + mat_.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat_,
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kPsdTol)
      throw InvariantViolation("density matrix is not PSD");
  }

  static DensityOperator from_pure(const StateVector& psi) {
    return DensityOperator(psi.reg(), psi.projector());
  }

  const QuditRegister& reg() const { return reg_; }
  const Matrix& matrix() const { return mat_; }
  std::size_t sites() const { return reg_.sites(); }
  long dim() const { return reg_.total_dimension(); }

 private:
  QuditRegister reg_;
  Matrix mat_;
};

}  // namespace persist

#endif
