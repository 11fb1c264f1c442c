#ifndef PERSIST_REGISTER_HPP
#define PERSIST_REGISTER_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "persist/errors.hpp"

namespace persist {

// Hard cap on the total Hilbert space dimension of any materialized
// operator (density matrices). Pure-state amplitude vectors may be larger;
// their reduced operators are always small. kMaxVectorDimension bounds the
// amplitude vectors themselves.
inline constexpr long kMaxMatrixDimension = 1L << 14;
inline constexpr long kMaxVectorDimension = 1L << 21;

/// A register of qudits with per-site local dimensions. Sites are
/// 0-indexed throughout the library.
class QuditRegister {
 public:
  QuditRegister() = default;
  explicit QuditRegister(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw InvariantViolation("register needs >= 1 site");
    long total = 1;
    for (int d : dims_) {
      if (d < 2) throw InvariantViolation("local dimension must be >= 2");
      total *= d;
      if (total > kMaxVectorDimension)
        throw DimensionBudgetExceeded("total dimension exceeds 2^21");
    }
    total_ = total;
  }
  QuditRegister(std::initializer_list<int> dims)
      : QuditRegister(std::vector<int>(dims)) {}

  /// N qubit/qudit sites of equal local dimension d.
  static QuditRegister uniform(std::size_t n, int d) {
    return QuditRegister(std::vector<int>(n, d));
  }

  std::size_t sites() const { return dims_.size(); }
  int dim(std::size_t site) const { return dims_.at(site); }
  const std::vector<int>& dims() const { return dims_; }
  long total_dimension() const { return total_; }

  bool operator==(const QuditRegister& o) const { return dims_ == o.dims_; }
  bool operator!=(const QuditRegister& o) const { return !(*this == o); }

 private:
  std::vector<int> dims_;
  long total_ = 0;
};

}  // namespace persist

#endif
