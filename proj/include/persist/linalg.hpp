#ifndef PERSIST_LINALG_HPP
#define PERSIST_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <utility>
#include <vector>

#include "persist/errors.hpp"
#include "persist/register.hpp"
#include "persist/state.hpp"

namespace persist {

// ---------------------------------------------------------------------------
// Multi-index helpers. Site 0 is the leftmost (most significant) tensor
// factor: index = sum_i x_i * stride_i with stride_{N-1} = 1.
// ---------------------------------------------------------------------------

inline std::vector<long> site_strides(const std::vector<int>& dims) {
  std::vector<long> s(dims.size());
  long acc = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    s[i] = acc;
    acc *= dims[i];
  }
  return s;
}

// Flat offsets contributed by every configuration of the given sites,
// other sites held at 0. Enumeration order: odometer over `sites` with the
// last listed site fastest.
inline std::vector<long> subset_offsets(const std::vector<int>& dims,
                                        const std::vector<std::size_t>& sites) {
  const auto strides = site_strides(dims);
  long count = 1;
  for (auto s : sites) count *= dims[s];
  std::vector<long> out;
  out.reserve(count);
  std::vector<int> idx(sites.size(), 0);
  for (long c = 0; c < count; ++c) {
    long off = 0;
    for (std::size_t k = 0; k < sites.size(); ++k)
      off += idx[k] * strides[sites[k]];
    out.push_back(off);
    for (std::size_t k = sites.size(); k-- > 0;) {
      if (++idx[k] < dims[sites[k]]) break;
      idx[k] = 0;
    }
  }
  return out;
}

inline void check_sites(std::size_t n, const std::vector<std::size_t>& sites) {
  for (auto s : sites)
    if (s >= n) throw DimensionMismatch("site index out of range");
  for (std::size_t i = 1; i < sites.size(); ++i)
    if (sites[i] <= sites[i - 1])
      throw DimensionMismatch("site set must be strictly increasing");
}

inline std::vector<std::size_t> complement_sites(
    std::size_t n, const std::vector<std::size_t>& sites) {
  std::vector<bool> in(n, false);
  for (auto s : sites) in[s] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Tensor products
// ---------------------------------------------------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (long i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline QuditRegister concat_regs(const QuditRegister& a,
                                 const QuditRegister& b) {
  std::vector<int> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return QuditRegister(dims);
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
  return StateVector(concat_regs(a.reg(), b.reg()),
                     kron(a.amplitudes(), b.amplitudes()));
}

inline DensityOperator tensor_product(const DensityOperator& a,
                                      const DensityOperator& b) {
  return DensityOperator(concat_regs(a.reg(), b.reg()),
                         kron(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------------------
// Partial trace / partial transpose
// ---------------------------------------------------------------------------

inline QuditRegister reduced_reg(const QuditRegister& reg,
                                 const std::vector<std::size_t>& keep) {
  std::vector<int> dims;
  dims.reserve(keep.size());
  for (auto s : keep) dims.push_back(reg.dim(s));
  return QuditRegister(dims);
}

/// Trace out `traced_sites` (sorted, 0-based) of a density operator.
/// Remaining sites keep their original relative order.
inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<std::size_t>& traced_sites) {
  const auto& dims = rho.reg().dims();
  check_sites(rho.sites(), traced_sites);
  if (traced_sites.size() >= rho.sites())
    throw TracedAllSites("partial trace must leave at least one site");
  if (traced_sites.empty()) return rho;
  const auto keep = complement_sites(rho.sites(), traced_sites);
  const auto keep_off = subset_offsets(dims, keep);
  const auto tr_off = subset_offsets(dims, traced_sites);
  const long dk = static_cast<long>(keep_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  const Matrix& m = rho.matrix();
  for (long i = 0; i < dk; ++i)
    for (long j = 0; j < dk; ++j) {
      Complex acc(0, 0);
      for (long t : tr_off) acc += m(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  return DensityOperator(reduced_reg(rho.reg(), keep), std::move(out));
}

/// Partial trace of a pure state without materializing the full projector
/// (reshape-and-contract over the amplitude vector).
inline DensityOperator partial_trace(const StateVector& psi,
                                     const std::vector<std::size_t>& traced_sites) {
  const auto& dims = psi.reg().dims();
  check_sites(psi.sites(), traced_sites);
  if (traced_sites.size() >= psi.sites())
    throw TracedAllSites("partial trace must leave at least one site");
  const auto keep = complement_sites(psi.sites(), traced_sites);
  const auto keep_off = subset_offsets(dims, keep);
  const long dk = static_cast<long>(keep_off.size());
  if (dk > kMaxMatrixDimension)
    throw DimensionBudgetExceeded("reduced operator exceeds 2^14");
  Matrix out = Matrix::Zero(dk, dk);
  const Vector& a = psi.amplitudes();
  if (traced_sites.empty()) {
    out = a * a.adjoint();
  } else {
    const auto tr_off = subset_offsets(dims, traced_sites);
    Vector slice(dk);
    for (long t : tr_off) {
      for (long i = 0; i < dk; ++i) slice(i) = a(keep_off[i] + t);
      out.noalias() += slice * slice.adjoint();
    }
  }
  return DensityOperator(reduced_reg(psi.reg(), keep), std::move(out));
}

/// Partial trace of a raw matrix (no density-operator invariants assumed).
inline Matrix partial_trace_matrix(const Matrix& m,
                                   const std::vector<int>& dims,
                                   const std::vector<std::size_t>& traced_sites) {
  check_sites(dims.size(), traced_sites);
  const auto keep = complement_sites(dims.size(), traced_sites);
  const auto keep_off = subset_offsets(dims, keep);
  const auto tr_off = subset_offsets(dims, traced_sites);
  const long dk = static_cast<long>(keep_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (long i = 0; i < dk; ++i)
    for (long j = 0; j < dk; ++j) {
      Complex acc(0, 0);
      for (long t : tr_off) acc += m(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  return out;
}

/// Transpose the tensor factors in `subset`; returns a plain Hermitian
/// matrix (the result need not be PSD).
inline Matrix partial_transpose(const DensityOperator& rho,
                                const std::vector<std::size_t>& subset) {
  check_sites(rho.sites(), subset);
  if (subset.empty() || subset.size() >= rho.sites())
    throw DimensionMismatch("subset must be a nonempty proper subset");
  const auto& dims = rho.reg().dims();
  const auto rest = complement_sites(rho.sites(), subset);
  const auto sub_off = subset_offsets(dims, subset);
  const auto rest_off = subset_offsets(dims, rest);
  const long ds = static_cast<long>(sub_off.size());
  const long dr = static_cast<long>(rest_off.size());
  const Matrix& m = rho.matrix();
  Matrix out(m.rows(), m.cols());
  for (long ri = 0; ri < dr; ++ri)
    for (long rj = 0; rj < dr; ++rj)
      for (long si = 0; si < ds; ++si)
        for (long sj = 0; sj < ds; ++sj)
          out(rest_off[ri] + sub_off[sj], rest_off[rj] + sub_off[si]) =
              m(rest_off[ri] + sub_off[si], rest_off[rj] + sub_off[sj]);
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (descending eigenvalues)
// ---------------------------------------------------------------------------

struct EigResult {
  Eigen::VectorXd values;  // descending
  Matrix vectors;          // unitary, columns match values
};

inline EigResult hermitian_eig(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw NotHermitian("hermitian_eig: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint().eval()));
  if (es.info() != Eigen::Success)
    throw Error("hermitian_eig: eigensolver failed");
  const long n = m.rows();
  EigResult r;
  r.values.resize(n);
  r.vectors.resize(n, n);
  for (long i = 0; i < n; ++i) {
    r.values(i) = es.eigenvalues()(n - 1 - i);
    r.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return r;
}

inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  return hermitian_eig(m).values;
}

// ---------------------------------------------------------------------------
// Local filtering, white noise, trace distance
// ---------------------------------------------------------------------------

/// Embed a 2x2 operator into the {|i0>,|i1>} subspace of a d-dimensional
/// site, identity on the complement.
inline Matrix embed_qubit_operator(const Eigen::Matrix2cd& op, int d,
                                   int i0 = 0, int i1 = 1) {
  if (i0 == i1 || i0 >= d || i1 >= d || i0 < 0 || i1 < 0)
    throw DimensionMismatch("invalid qubit subspace indices");
  Matrix out = Matrix::Identity(d, d);
  out(i0, i0) = op(0, 0);
  out(i0, i1) = op(0, 1);
  out(i1, i0) = op(1, 0);
  out(i1, i1) = op(1, 1);
  return out;
}

inline Matrix single_site_operator(const QuditRegister& reg, std::size_t site,
                                   const Matrix& op) {
  if (site >= reg.sites()) throw DimensionMismatch("site out of range");
  if (op.rows() != reg.dim(site) || op.cols() != reg.dim(site))
    throw DimensionMismatch("operator does not match site dimension");
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < reg.sites(); ++i) {
    if (i == site)
      out = kron(out, op);
    else
      out = kron(out, Matrix::Identity(reg.dim(i), reg.dim(i)).eval());
  }
  return out;
}

struct FilterResult {
  DensityOperator state;
  double success_probability;
};

/// Apply a single-site filter F (2x2, acting on the {|i0>,|i1>} subspace,
/// identity elsewhere): rho -> F rho F^dag / tr(F rho F^dag).
inline FilterResult apply_local_filter(const DensityOperator& rho,
                                       std::size_t site,
                                       const Eigen::Matrix2cd& filter,
                                       int i0 = 0, int i1 = 1) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(filter);
  if (svd.singularValues().maxCoeff() > 1.0 + 1e-12)
    throw InvariantViolation("filter has singular value > 1");
  const Matrix f = single_site_operator(
      rho.reg(), site,
      embed_qubit_operator(filter, rho.reg().dim(site), i0, i1));
  Matrix m = f * rho.matrix() * f.adjoint();
  const double p = m.trace().real();
  if (p < 1e-14)
    throw ZeroSuccessProbability("filter annihilates the state");
  m /= p;
  return FilterResult{DensityOperator(rho.reg(), std::move(m)), p};
}

inline DensityOperator mix_with_white_noise(const StateVector& psi, double w) {
  if (w < 0.0 || w > 1.0) throw ParameterOutOfRange("w must be in [0,1]");
  const long d = psi.dim();
  Matrix m = w * psi.projector();
  m += ((1.0 - w) / static_cast<double>(d)) * Matrix::Identity(d, d);
  return DensityOperator(psi.reg(), std::move(m));
}

inline DensityOperator mix_with_white_noise(const DensityOperator& rho,
                                            double w) {
  if (w < 0.0 || w > 1.0) throw ParameterOutOfRange("w must be in [0,1]");
  const long d = rho.dim();
  Matrix m = w * rho.matrix();
  m += ((1.0 - w) / static_cast<double>(d)) * Matrix::Identity(d, d);
  return DensityOperator(rho.reg(), std::move(m));
}

/// Half the trace norm of rho - sigma.
inline double trace_distance(const DensityOperator& rho,
                             const DensityOperator& sigma) {
  if (rho.reg() != sigma.reg())
    throw DimensionMismatch("trace_distance: registers differ");
  const Eigen::VectorXd ev =
      hermitian_eigenvalues(rho.matrix() - sigma.matrix());
  return 0.5 * ev.cwiseAbs().sum();
}

}  // namespace persist

#endif
