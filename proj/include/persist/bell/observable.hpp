#ifndef PERSIST_BELL_OBSERVABLE_HPP
#define PERSIST_BELL_OBSERVABLE_HPP

#include <array>
#include <cmath>
#include <vector>

#include "persist/errors.hpp"
#include "persist/linalg.hpp"
#include "persist/random.hpp"
#include "persist/state.hpp"

namespace persist {

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline Eigen::Matrix2cd bloch_observable(const std::array<double, 3>& n) {
  return n[0] * pauli_x() + n[1] * pauli_y() + n[2] * pauli_z();
}

/// Binary-outcome observable: Hermitian with spectrum in {+1,-1}.
class DichotomicObservable {
 public:
  explicit DichotomicObservable(Matrix m) : mat_(std::move(m)) {
    const long d = mat_.rows();
    if (mat_.cols() != d) throw DimensionMismatch("observable must be square");
    if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
      throw InvariantViolation("observable is not Hermitian");
    if ((mat_ * mat_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kHermTol)
      throw InvariantViolation("observable does not square to identity");
  }

  /// Bloch-vector observable on the {|i0>,|i1>} subspace of a d-level
  /// site, outcome +1 on the orthogonal complement.
  static DichotomicObservable from_bloch(int d, const std::array<double, 3>& n,
                                         int i0 = 0, int i1 = 1) {
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (std::abs(len - 1.0) > 1e-9)
      throw ParameterOutOfRange("Bloch vector must be unit length");
    return DichotomicObservable(
        embed_qubit_operator(bloch_observable(n), d, i0, i1));
  }

  const Matrix& matrix() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

 private:
  Matrix mat_;
};

/// Per-party measurement settings; fixed at 2 settings per party.
class MeasurementScenario {
 public:
  MeasurementScenario(
      std::vector<std::array<DichotomicObservable, 2>> settings)
      : settings_(std::move(settings)) {
    if (settings_.empty()) throw DimensionMismatch("scenario needs >= 1 party");
  }

  std::size_t parties() const { return settings_.size(); }
  const DichotomicObservable& observable(std::size_t party, int setting) const {
    return settings_.at(party).at(static_cast<std::size_t>(setting));
  }

  void set_observable(std::size_t party, int setting,
                      DichotomicObservable o) {
    settings_.at(party).at(static_cast<std::size_t>(setting)) = std::move(o);
  }

  void check_register(const QuditRegister& reg) const {
    if (reg.sites() != parties())
      throw DimensionMismatch("scenario party count != register sites");
    for (std::size_t i = 0; i < parties(); ++i)
      if (settings_[i][0].dim() != reg.dim(i) ||
          settings_[i][1].dim() != reg.dim(i))
        throw DimensionMismatch("observable dimension != site dimension");
  }

  /// Random qubit-subspace Bloch settings; for d > 2 the 2-level subspace
  /// is also drawn at random.
  static MeasurementScenario random(const QuditRegister& reg, Rng& rng) {
    std::vector<std::array<DichotomicObservable, 2>> s;
    s.reserve(reg.sites());
    for (std::size_t i = 0; i < reg.sites(); ++i) {
      const int d = reg.dim(i);
      int i0 = 0, i1 = 1;
      if (d > 2) {
        std::uniform_int_distribution<int> pick(0, d - 1);
        i0 = pick(rng);
        do {
          i1 = pick(rng);
        } while (i1 == i0);
        if (i0 > i1) std::swap(i0, i1);
      }
      s.push_back({DichotomicObservable::from_bloch(
                       d, random_bloch_vector(rng), i0, i1),
                   DichotomicObservable::from_bloch(
                       d, random_bloch_vector(rng), i0, i1)});
    }
    return MeasurementScenario(std::move(s));
  }

 private:
  std::vector<std::array<DichotomicObservable, 2>> settings_;
};

}  // namespace persist

#endif
