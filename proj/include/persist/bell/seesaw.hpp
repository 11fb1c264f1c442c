#ifndef PERSIST_BELL_SEESAW_HPP
#define PERSIST_BELL_SEESAW_HPP

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "persist/bell/behavior.hpp"
#include "persist/bell/functional.hpp"
#include "persist/bell/observable.hpp"
#include "persist/errors.hpp"
#include "persist/linalg.hpp"
#include "persist/random.hpp"
#include "persist/state.hpp"

namespace persist {

struct SeesawOptions {
  int restarts = 32;
  int max_sweeps = 500;
  double sweep_tol = 1e-10;
};

struct SeesawResult {
  double value;
  MeasurementScenario scenario;
};

namespace detail {

/// Optimal response within the reflection class I - 2|v><v| (one -1
/// direction, +1 elsewhere): tr(K O) = tr K - 2 <v|K|v> is maximized by the
/// lowest eigenvector of K. On qubits this class is exactly the traceless
/// Bloch observables, matching the random starts and the closed-form
/// two-qubit oracle. The unconstrained sign(K) response would be greedier
/// but stalls the ascent on near-deterministic points (e.g. +-identity),
/// which never violate.
inline DichotomicObservable sign_observable(const Matrix& k) {
  EigResult eig = hermitian_eig(0.5 * (k + k.adjoint().eval()));
  const auto v = eig.vectors.col(eig.values.size() - 1);
  Matrix o = Matrix::Identity(k.rows(), k.cols()) - 2.0 * (v * v.adjoint());
  return DichotomicObservable(std::move(o));
}

/// Conditional operator on `party` for one correlator term: the partial
/// trace over all other sites of rho times the term's other observables.
inline Matrix conditional_operator(const DensityOperator& rho,
                                   const MeasurementScenario& sc,
                                   const BellTerm& term, std::size_t party) {
  const auto& dims = rho.reg().dims();
  Matrix op = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < rho.sites(); ++i) {
    const int d = dims[i];
    bool in_term = false;
    int setting = 0;
    for (std::size_t p = 0; p < term.subset.size(); ++p)
      if (term.subset[p] == i) {
        in_term = true;
        setting = term.settings[p];
      }
    if (in_term && i != party)
      op = kron(op, sc.observable(i, setting).matrix());
    else
      op = kron(op, Matrix::Identity(d, d).eval());
  }
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < rho.sites(); ++i)
    if (i != party) others.push_back(i);
  return partial_trace_matrix(rho.matrix() * op, dims, others);
}

}  // namespace detail

/// One see-saw descent from a given starting scenario: alternately set each
/// party's observables to the optimal dichotomic response. The value is
/// nondecreasing across sweeps.
inline SeesawResult seesaw_from(const DensityOperator& rho,
                                const BellFunctional& f,
                                MeasurementScenario scenario,
                                const SeesawOptions& opt = {}) {
  scenario.check_register(rho.reg());
  if (f.parties() != rho.sites())
    throw DimensionMismatch("functional party count != state sites");
  double value = evaluate_functional(rho, scenario, f);
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    for (std::size_t party = 0; party < rho.sites(); ++party) {
      for (int setting = 0; setting < 2; ++setting) {
        Matrix k = Matrix::Zero(rho.reg().dim(party), rho.reg().dim(party));
        bool touched = false;
        for (const auto& term : f.terms()) {
          bool has = false;
          for (std::size_t p = 0; p < term.subset.size(); ++p)
            if (term.subset[p] == party && term.settings[p] == setting)
              has = true;
          if (!has) continue;
          touched = true;
          k += term.coeff *
               detail::conditional_operator(rho, scenario, term, party);
        }
        if (touched)
          scenario.set_observable(party, setting, detail::sign_observable(k));
      }
    }
    const double next = evaluate_functional(rho, scenario, f);
    const bool converged = next - value < opt.sweep_tol;
    value = next;
    if (converged) break;
  }
  return SeesawResult{value, std::move(scenario)};
}

/// Best of `restarts` random initializations (deterministic: lowest restart
/// index wins ties).
inline SeesawResult seesaw_maximize(const DensityOperator& rho,
                                    const BellFunctional& f,
                                    std::uint64_t seed,
                                    const SeesawOptions& opt = {}) {
  std::optional<SeesawResult> best;
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto res = seesaw_from(rho, f, MeasurementScenario::random(rho.reg(), rng),
                           opt);
    if (!best || res.value > best->value) best = std::move(res);
  }
  return *best;
}

}  // namespace persist

#endif
