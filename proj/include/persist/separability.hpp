#ifndef PERSIST_SEPARABILITY_HPP
#define PERSIST_SEPARABILITY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "persist/bell/search.hpp"
#include "persist/errors.hpp"
#include "persist/linalg.hpp"
#include "persist/nnls.hpp"
#include "persist/random.hpp"
#include "persist/state.hpp"

namespace persist {

// ---------------------------------------------------------------------------
// NPT scan
// ---------------------------------------------------------------------------

struct NptWitness {
  std::vector<std::size_t> bipartition;  // transposed side
  double min_eigenvalue;                 // <= -1e-9
};

/// Scan every bipartition (smaller side first, then lexicographic) for a
/// negative partial transpose; first hit wins.
inline std::optional<NptWitness> npt_any_bipartition(
    const DensityOperator& rho) {
  const std::size_t k = rho.sites();
  if (k < 2) return std::nullopt;
  // subsets not containing site 0 enumerate each bipartition once
  std::vector<std::vector<std::size_t>> subsets;
  for (long mask = 1; mask < (1L << (k - 1)); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 1; i < k; ++i)
      if ((mask >> (i - 1)) & 1) s.push_back(i);
    subsets.push_back(std::move(s));
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [k](const auto& a, const auto& b) {
                     const auto sa = std::min(a.size(), k - a.size());
                     const auto sb = std::min(b.size(), k - b.size());
                     if (sa != sb) return sa < sb;
                     return a < b;
                   });
  for (const auto& s : subsets) {
    const double min_eig =
        hermitian_eigenvalues(partial_transpose(rho, s)).minCoeff();
    if (min_eig <= -1e-9) return NptWitness{s, min_eig};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Separable decompositions
// ---------------------------------------------------------------------------

struct SeparableDecomposition {
  std::vector<double> weights;                   // >= 0, sum 1
  std::vector<std::vector<Vector>> product_states;  // per term, per site

  Matrix reconstruct(const QuditRegister& reg) const {
    Matrix m = Matrix::Zero(reg.total_dimension(), reg.total_dimension());
    for (std::size_t t = 0; t < weights.size(); ++t) {
      Vector v = Vector::Ones(1);
      for (const auto& site_vec : product_states[t]) v = kron(v, site_vec);
      m += weights[t] * (v * v.adjoint()).eval();
    }
    return m;
  }
};

/// Check the decomposition invariant against rho from scratch.
inline bool verify_decomposition(const DensityOperator& rho,
                                 const SeparableDecomposition& d) {
  double wsum = 0.0;
  for (double w : d.weights) {
    if (w < -1e-15) return false;
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-10) return false;
  const Matrix m = d.reconstruct(rho.reg());
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho.matrix() - m);
  return 0.5 * ev.cwiseAbs().sum() <= 1e-7;
}

namespace detail {

/// Best product approximation to a full vector by alternating per-site
/// contractions. Returns (product factors, overlap |<prod|v>|).
inline std::pair<std::vector<Vector>, double> closest_product_vector(
    const Vector& v, const std::vector<int>& dims, int iters = 60) {
  const std::size_t n = dims.size();
  std::vector<Vector> f(n);
  // init from single-site marginals of v
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    Matrix red = partial_trace_matrix(v * v.adjoint(), dims, others);
    EigResult e = hermitian_eig(red);
    f[i] = e.vectors.col(0);
  }
  double overlap = 0.0;
  for (int it = 0; it < iters; ++it) {
    double prev = overlap;
    for (std::size_t i = 0; i < n; ++i) {
      // contract v with the other factors
      Vector g = Vector::Zero(dims[i]);
      const auto strides = site_strides(dims);
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(j);
      const auto other_off = subset_offsets(dims, others);
      std::vector<int> idx(others.size(), 0);
      for (long c = 0; c < static_cast<long>(other_off.size()); ++c) {
        Complex coef(1, 0);
        for (std::size_t j = 0; j < others.size(); ++j)
          coef *= std::conj(f[others[j]](idx[j]));
        for (int a = 0; a < dims[i]; ++a)
          g(a) += coef * v(other_off[c] + a * strides[i]);
        for (std::size_t j = others.size(); j-- > 0;) {
          if (++idx[j] < dims[others[j]]) break;
          idx[j] = 0;
        }
      }
      const double norm = g.norm();
      if (norm < 1e-300) return {f, 0.0};
      f[i] = g / norm;
      overlap = norm;
    }
    if (std::abs(overlap - prev) < 1e-13) break;
  }
  return {f, overlap};
}

inline Vector product_to_full(const std::vector<Vector>& f) {
  Vector v = Vector::Ones(1);
  for (const auto& site : f) v = kron(v, site);
  return v;
}

}  // namespace detail

/// Certify separability when every eigenvector (with a product search
/// inside degenerate eigenspaces) is a product state; covers classically
/// correlated mixtures diagonal in a product basis.
inline std::optional<SeparableDecomposition> product_eigenbasis_certify(
    const DensityOperator& rho) {
  const auto& dims = rho.reg().dims();
  if (dims.size() == 1) {
    // single site: eigen-mixture is trivially separable
    EigResult e = hermitian_eig(rho.matrix());
    SeparableDecomposition d;
    for (long i = 0; i < e.values.size(); ++i)
      if (e.values(i) > 1e-12) {
        d.weights.push_back(e.values(i));
        d.product_states.push_back({e.vectors.col(i)});
      }
    return d;
  }
  EigResult e = hermitian_eig(rho.matrix());
  SeparableDecomposition d;
  long i = 0;
  while (i < e.values.size()) {
    if (e.values(i) <= 1e-10) break;  // eigenvalues are descending
    // group a (near-)degenerate eigenspace
    long j = i;
    while (j + 1 < e.values.size() &&
           std::abs(e.values(j + 1) - e.values(i)) < 1e-8)
      ++j;
    const long r = j - i + 1;
    Matrix basis = e.vectors.middleCols(i, r);
    // deflate the eigenspace into mutually orthogonal product vectors
    for (long t = 0; t < r; ++t) {
      const long rank = basis.cols();
      bool found = false;
      for (long start = 0; start < 4 * rank && !found; ++start) {
        Rng rng(0x5eedULL + static_cast<std::uint64_t>(start) +
                1315423911ULL * static_cast<std::uint64_t>(t));
        Vector v = basis * random_unit_vector(rank, rng);
        v.normalize();
        for (int it = 0; it < 50; ++it) {
          auto [f, overlap] = detail::closest_product_vector(v, dims, 8);
          Vector p = detail::product_to_full(f);
          Vector proj = basis * (basis.adjoint() * p);
          const double pn = proj.norm();
          if (pn < 1e-12) break;
          proj /= pn;
          if ((proj - p).norm() < 1e-9) {
            // orthogonal product vector inside the eigenspace
            d.weights.push_back(e.values(i));
            d.product_states.push_back(f);
            // deflate: orthonormal basis of the span minus p (Gram-Schmidt)
            Matrix deflated = basis - p * (p.adjoint() * basis);
            Matrix thin = Matrix::Zero(basis.rows(),
                                       std::max<long>(0, rank - 1));
            long kept = 0;
            for (long ccol = 0; ccol < deflated.cols() && kept < rank - 1;
                 ++ccol) {
              Vector w = deflated.col(ccol);
              for (long kk = 0; kk < kept; ++kk)
                w -= thin.col(kk) * (thin.col(kk).adjoint() * w);
              if (w.norm() > 1e-9) thin.col(kept++) = w / w.norm();
            }
            thin.conservativeResize(basis.rows(), kept);
            basis = thin;
            found = true;
            break;
          }
          v = proj;
        }
      }
      if (!found) return std::nullopt;
      if (basis.cols() == 0) break;
    }
    i = j + 1;
  }
  // weights from eigenvalues already sum to ~1; renormalize exactly
  double wsum = 0.0;
  for (double w : d.weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-8) return std::nullopt;
  for (double& w : d.weights) w /= wsum;
  if (!verify_decomposition(rho, d)) return std::nullopt;
  return d;
}

/// Random-product-basis fit with column generation: sample `budget` product
/// states, NNLS-fit rho in their convex hull, then iteratively add product
/// states aligned with the residual until the fit closes or stalls.
inline std::optional<SeparableDecomposition> separable_fit(
    const DensityOperator& rho, long budget = 5000,
    std::uint64_t seed = 0x5eed) {
  if (rho.dim() > 64) return std::nullopt;
  const auto& dims = rho.reg().dims();
  const long d = rho.dim();
  const long vdim = d * d;  // real vectorization of Hermitian matrices

  auto vectorize = [&](const Matrix& m) {
    Eigen::VectorXd v(vdim);
    long p = 0;
    const double r2 = std::sqrt(2.0);
    for (long i = 0; i < d; ++i) v(p++) = m(i, i).real();
    for (long i = 0; i < d; ++i)
      for (long j = i + 1; j < d; ++j) {
        v(p++) = r2 * m(i, j).real();
        v(p++) = r2 * m(i, j).imag();
      }
    return v;
  };

  Rng rng(seed);
  std::vector<std::vector<Vector>> atoms;
  auto add_atom = [&](std::vector<Vector> f) {
    atoms.push_back(std::move(f));
  };
  for (long s = 0; s < budget; ++s) {
    std::vector<Vector> f;
    f.reserve(dims.size());
    for (int dd : dims) f.push_back(random_unit_vector(dd, rng));
    add_atom(std::move(f));
  }

  const Eigen::VectorXd target = vectorize(rho.matrix());
  Eigen::MatrixXd a(vdim, atoms.size());
  for (std::size_t s = 0; s < atoms.size(); ++s) {
    Vector v = detail::product_to_full(atoms[s]);
    a.col(static_cast<long>(s)) = vectorize((v * v.adjoint()).eval());
  }

  const int max_rounds = 400;
  Eigen::VectorXd x;
  for (int round = 0; round < max_rounds; ++round) {
    x = nnls(a, target);
    Eigen::VectorXd resid = target - a * x;
    if (resid.norm() < 5e-9) break;
    // column generation: product state maximizing tr(R |p><p|)
    Matrix rmat = Matrix::Zero(d, d);
    {
      long p = 0;
      const double r2 = std::sqrt(2.0);
      for (long i = 0; i < d; ++i) rmat(i, i) = resid(p++);
      for (long i = 0; i < d; ++i)
        for (long j = i + 1; j < d; ++j) {
          rmat(i, j) = Complex(resid(p) / r2, resid(p + 1) / r2);
          rmat(j, i) = std::conj(rmat(i, j));
          p += 2;
        }
    }
    // a few alternating ascents from random starts
    double best_gain = -1e300;
    std::vector<Vector> best_f;
    for (int s = 0; s < 8; ++s) {
      std::vector<Vector> f;
      for (int dd : dims) f.push_back(random_unit_vector(dd, rng));
      for (int it = 0; it < 40; ++it) {
        for (std::size_t i = 0; i < dims.size(); ++i) {
          // local operator <others| R |others>
          Matrix other = Matrix::Ones(1, 1);
          for (std::size_t jj = 0; jj < dims.size(); ++jj) {
            if (jj == i)
              other = kron(other, Matrix::Identity(dims[jj], dims[jj]).eval());
            else
              other = kron(other, (f[jj] * f[jj].adjoint()).eval());
          }
          std::vector<std::size_t> others;
          for (std::size_t jj = 0; jj < dims.size(); ++jj)
            if (jj != i) others.push_back(jj);
          Matrix local = partial_trace_matrix(rmat * other, dims, others);
          EigResult e = hermitian_eig(0.5 * (local + local.adjoint().eval()));
          f[i] = e.vectors.col(0);
        }
      }
      Vector v = detail::product_to_full(f);
      const double gain = (v.adjoint() * rmat * v)(0).real();
      if (gain > best_gain) {
        best_gain = gain;
        best_f = f;
      }
    }
    if (best_gain < 1e-12) break;  // no ascent direction left
    Vector v = detail::product_to_full(best_f);
    a.conservativeResize(Eigen::NoChange, a.cols() + 1);
    a.col(a.cols() - 1) = vectorize((v * v.adjoint()).eval());
    add_atom(std::move(best_f));
  }

  SeparableDecomposition dres;
  double wsum = 0.0;
  for (long s = 0; s < x.size(); ++s)
    if (x(s) > 1e-12) {
      dres.weights.push_back(x(s));
      dres.product_states.push_back(atoms[static_cast<std::size_t>(s)]);
      wsum += x(s);
    }
  if (wsum < 1e-12) return std::nullopt;
  for (double& w : dres.weights) w /= wsum;
  if (!verify_decomposition(rho, dres)) return std::nullopt;
  return dres;
}

// ---------------------------------------------------------------------------
// Three-valued status
// ---------------------------------------------------------------------------

enum class Verdict { Entangled, Separable, Unknown };

struct EntanglementStatus {
  Verdict verdict = Verdict::Unknown;
  std::optional<NptWitness> npt;
  std::optional<NonlocalityCertificate> bell;
  std::optional<SeparableDecomposition> decomposition;

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (verdict) {
      case Verdict::Entangled:
        j["verdict"] = "entangled";
        break;
      case Verdict::Separable:
        j["verdict"] = "separable";
        break;
      case Verdict::Unknown:
        j["verdict"] = "unknown";
        break;
    }
    if (npt) {
      j["bipartition"] = npt->bipartition;
      j["min_eig"] = npt->min_eigenvalue;
    }
    if (bell) {
      j["bell_value"] = bell->value;
      j["bell_local_bound"] = bell->local_bound;
      j["bell_functional"] = bell->functional.to_json();
    }
    if (decomposition) {
      j["weights"] = decomposition->weights;
      auto& ps = j["product_states"] = nlohmann::json::array();
      for (const auto& term : decomposition->product_states) {
        nlohmann::json sites = nlohmann::json::array();
        for (const auto& v : term) {
          nlohmann::json amps = nlohmann::json::array();
          for (long i = 0; i < v.size(); ++i)
            amps.push_back({v(i).real(), v(i).imag()});
          sites.push_back(std::move(amps));
        }
        ps.push_back(std::move(sites));
      }
    }
    return j;
  }
};

struct SeparabilityBudget {
  long fit_samples = 5000;
  int bell_restarts = 4;
  std::uint64_t seed = 0x5eed;
};

/// Certifier chain: NPT -> product eigenbasis -> convex fit -> bounded Bell
/// search -> Unknown.
inline EntanglementStatus entanglement_status(
    const DensityOperator& rho, const SeparabilityBudget& budget = {}) {
  EntanglementStatus st;
  if (rho.sites() < 2) {
    st.verdict = Verdict::Separable;
    st.decomposition = product_eigenbasis_certify(rho);
    return st;
  }
  if (auto npt = npt_any_bipartition(rho)) {
    st.verdict = Verdict::Entangled;
    st.npt = npt;
    return st;
  }
  if (auto dec = product_eigenbasis_certify(rho)) {
    st.verdict = Verdict::Separable;
    st.decomposition = std::move(dec);
    return st;
  }
  if (rho.dim() <= 64) {
    if (auto dec = separable_fit(rho, budget.fit_samples, budget.seed)) {
      st.verdict = Verdict::Separable;
      st.decomposition = std::move(dec);
      return st;
    }
  }
  if (rho.sites() <= kMaxParties) {
    SearchOptions opt;
    opt.restarts = budget.bell_restarts;
    if (auto cert = nonlocality_search(rho, budget.seed, opt)) {
      st.verdict = Verdict::Entangled;
      st.bell = std::move(cert);
      return st;
    }
  }
  return st;  // Unknown
}

}  // namespace persist

#endif
