#ifndef PERSIST_BELL_SEARCH_HPP
#define PERSIST_BELL_SEARCH_HPP

#include <optional>
#include <utility>
#include <vector>

#include "persist/bell/polytope.hpp"
#include "persist/bell/seesaw.hpp"

namespace persist {

struct NonlocalityCertificate {
  MeasurementScenario scenario;
  BellFunctional functional;
  double value;        // S
  double local_bound;  // L, re-verified by enumeration
};

/// Recompute the behavior and the functional value from scratch; a
/// certificate must reproduce S > L + 1e-9.
inline bool verify_certificate(const DensityOperator& rho,
                               const NonlocalityCertificate& cert) {
  const double s = evaluate_functional(rho, cert.scenario, cert.functional);
  const double l = cert.functional.deterministic_max();
  return std::abs(l - cert.local_bound) < 1e-9 && s > l + 1e-9;
}

struct SearchOptions {
  int restarts = 32;
  int deepen_rounds = 12;
  SeesawOptions seesaw{1, 500, 1e-10};  // per-deepening descent
};

namespace detail {

/// Deterministic starting scenario aligned with the dominant eigenvector of
/// rho: per site, measure sigma_z / sigma_x inside the 2-subspace spanned by
/// the top eigenvectors of that site's marginal (+1 on the complement).
/// Random computational-subspace starts rarely hit the right local subspace
/// when the entangled part of rho lives in superposed levels.
inline MeasurementScenario aligned_scenario(const DensityOperator& rho) {
  const auto& dims = rho.reg().dims();
  const Vector psi = hermitian_eig(rho.matrix()).vectors.col(0);
  std::vector<std::array<DichotomicObservable, 2>> obs;
  for (std::size_t i = 0; i < rho.sites(); ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < rho.sites(); ++j)
      if (j != i) others.push_back(j);
    EigResult e =
        hermitian_eig(partial_trace_matrix(psi * psi.adjoint(), dims, others));
    const auto u0 = e.vectors.col(0);
    const auto u1 = e.vectors.col(1);
    const Matrix comp = Matrix::Identity(dims[i], dims[i]) -
                        u0 * u0.adjoint() - u1 * u1.adjoint();
    obs.push_back({DichotomicObservable(u0 * u0.adjoint() -
                                        u1 * u1.adjoint() + comp),
                   DichotomicObservable(u0 * u1.adjoint() +
                                        u1 * u0.adjoint() + comp)});
  }
  return MeasurementScenario(std::move(obs));
}

/// Every party measures cos(t) sz + sin(t) sx on its {|0>,|1>} subspace
/// (+1 on the rest), all sharing the same two angles. Symmetric mixtures
/// (W/Dicke residues) often violate only through such collective settings,
/// whose alignment random per-party starts almost never reproduce.
inline MeasurementScenario planar_symmetric(const QuditRegister& reg,
                                            double t0, double t1) {
  auto planar = [&](std::size_t dim, double t) {
    Matrix m = Matrix::Identity(dim, dim);
    m(0, 0) = std::cos(t);
    m(0, 1) = std::sin(t);
    m(1, 0) = std::sin(t);
    m(1, 1) = -std::cos(t);
    return DichotomicObservable(std::move(m));
  };
  std::vector<std::array<DichotomicObservable, 2>> obs;
  for (std::size_t i = 0; i < reg.sites(); ++i)
    obs.push_back({planar(reg.dims()[i], t0), planar(reg.dims()[i], t1)});
  return MeasurementScenario(std::move(obs));
}

/// Best planar-symmetric scenario by polytope visibility: coarse angle grid
/// followed by step-halving coordinate descent.
inline MeasurementScenario planar_symmetric_best(const DensityOperator& rho,
                                                 int grid) {
  const std::size_t k = rho.sites();
  auto vis_at = [&](double t0, double t1) {
    return polytope_visibility(
               k, correlators(rho, planar_symmetric(rho.reg(), t0, t1)))
        .visibility;
  };
  const double pi = 3.14159265358979323846;
  double bt0 = 0.0, bt1 = 0.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double v = vis_at(pi * i / grid, pi * j / grid);
      if (v < best) {
        best = v;
        bt0 = pi * i / grid;
        bt1 = pi * j / grid;
      }
    }
  for (double step = pi / grid; step > 1e-4; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      const double c0[4] = {bt0 + step, bt0 - step, bt0, bt0};
      const double c1[4] = {bt1, bt1, bt1 + step, bt1 - step};
      for (int t = 0; t < 4; ++t) {
        const double v = vis_at(c0[t], c1[t]);
        if (v < best - 1e-13) {
          best = v;
          bt0 = c0[t];
          bt1 = c1[t];
          improved = true;
        }
      }
    }
  }
  return planar_symmetric(rho.reg(), bt0, bt1);
}

/// Alternate LP facet extraction and see-saw measurement optimization from
/// one starting scenario.
inline std::optional<NonlocalityCertificate> search_attempt(
    const DensityOperator& rho, MeasurementScenario scenario,
    const SearchOptions& opt) {
  const std::size_t k = rho.sites();
  Eigen::VectorXd corr = correlators(rho, scenario);
  double best_vis = std::numeric_limits<double>::infinity();
  std::optional<NonlocalityCertificate> best;
  for (int round = 0; round < opt.deepen_rounds; ++round) {
    auto vis = polytope_visibility(k, corr);
    if (!vis.facet) break;  // behavior is the white-noise point
    const BellFunctional& f = *vis.facet;
    const double value = f.evaluate_correlators(corr);
    if (value - f.local_bound() > 1e-9 &&
        (!best || value - f.local_bound() > best->value - best->local_bound)) {
      NonlocalityCertificate cert{scenario, f, value, f.local_bound()};
      if (verify_certificate(rho, cert)) best = std::move(cert);
    }
    if (vis.visibility > best_vis - 1e-12) break;  // stalled
    best_vis = vis.visibility;
    auto ss = seesaw_from(rho, f, std::move(scenario), opt.seesaw);
    scenario = std::move(ss.scenario);
    corr = correlators(rho, scenario);
  }
  return best;
}

}  // namespace detail

/// Look for a certified Bell violation of rho with 2 binary settings per
/// party. `hints` (e.g. incumbent scenarios from earlier runs) are tried
/// before random restarts. Absence of a certificate is NOT a locality proof.
inline std::optional<NonlocalityCertificate> nonlocality_search(
    const DensityOperator& rho, std::uint64_t seed,
    const SearchOptions& opt = {},
    const std::vector<MeasurementScenario>& hints = {}) {
  if (rho.sites() > kMaxParties)
    throw ScenarioTooLarge("nonlocality search supports <= 6 parties");
  if (rho.sites() < 2) return std::nullopt;
  for (const auto& hint : hints) {
    if (auto cert = detail::search_attempt(rho, hint, opt)) return cert;
  }
  {
    MeasurementScenario start = detail::aligned_scenario(rho);
    // the aligned correlators are often still local, where the LP facet is
    // degenerate; a CHSH see-saw first pushes two-party behaviors outside
    // the polytope so the deepening loop has a facet to work with
    if (rho.sites() == 2)
      start = seesaw_from(rho, BellFunctional::chsh(), std::move(start),
                          opt.seesaw)
                  .scenario;
    if (auto cert = detail::search_attempt(rho, std::move(start), opt))
      return cert;
  }
  if (rho.sites() <= 5) {  // LP grid too slow for 6-party behaviors
    const int grid = rho.sites() <= 4 ? 12 : 8;
    auto start = detail::planar_symmetric_best(rho, grid);
    if (auto cert = detail::search_attempt(rho, std::move(start), opt))
      return cert;
  }
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto scenario = MeasurementScenario::random(rho.reg(), rng);
    if (auto cert = detail::search_attempt(rho, std::move(scenario), opt))
      return cert;
  }
  return std::nullopt;
}

}  // namespace persist

#endif
