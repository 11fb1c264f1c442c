#ifndef PERSIST_BELL_POLYTOPE_HPP
#define PERSIST_BELL_POLYTOPE_HPP

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "persist/bell/behavior.hpp"
#include "persist/bell/functional.hpp"
#include "persist/bell/simplex.hpp"
#include "persist/errors.hpp"

namespace persist {

/// Correlator vectors of all 4^k deterministic strategies, one column per
/// strategy. Cached per party count.
inline const Eigen::MatrixXd& deterministic_vertices(std::size_t parties) {
  if (parties < 1 || parties > kMaxParties)
    throw ScenarioTooLarge("deterministic enumeration supports 1..6 parties");
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::unique_ptr<Eigen::MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[parties];
  if (!slot) {
    const long ncorr = pow_long(3, parties);
    const long nstrat = pow_long(4, parties);
    slot = std::make_unique<Eigen::MatrixXd>(ncorr, nstrat);
    for (long s = 0; s < nstrat; ++s)
      for (long c = 0; c < ncorr; ++c)
        (*slot)(c, s) = deterministic_correlator(parties, s, c);
  }
  return *slot;
}

struct LocalDecomposition {
  // (strategy index, weight), weights >= 0 summing to 1
  std::vector<std::pair<long, double>> weights;

  Eigen::VectorXd reconstruct_correlators(std::size_t parties) const {
    const auto& v = deterministic_vertices(parties);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(v.rows());
    for (auto [s, w] : weights) c += w * v.col(s);
    return c;
  }
};

struct NonlocalWitness {
  BellFunctional functional;
  double value;      // functional on the tested behavior
  double violation;  // value - local bound
};

using MembershipResult = std::variant<LocalDecomposition, NonlocalWitness>;

namespace detail {

inline BellFunctional functional_from_direction(std::size_t parties,
                                                const Eigen::VectorXd& y) {
  std::vector<double> coeffs(y.size());
  double scale = 0.0;
  for (long i = 1; i < y.size(); ++i) scale = std::max(scale, std::abs(y(i)));
  if (scale < 1e-300) scale = 1.0;
  for (long i = 0; i < y.size(); ++i) coeffs[i] = y(i) / scale;
  coeffs[0] = 0.0;  // a constant offsets value and bound equally
  return BellFunctional(parties, coeffs);
}

}  // namespace detail

/// Explicit convex decomposition of a correlator point over deterministic
/// strategies, or nothing if the point lies outside the local polytope.
inline std::optional<LocalDecomposition> polytope_decompose(
    std::size_t parties, const Eigen::VectorXd& corr) {
  const auto& v = deterministic_vertices(parties);
  if (corr.size() != v.rows())
    throw DimensionMismatch("correlator vector length mismatch");
  SimplexSolver solver;
  auto r = solver.solve(v, corr, Eigen::VectorXd::Zero(v.cols()));
  if (!r.feasible) return std::nullopt;
  LocalDecomposition d;
  for (long s = 0; s < r.x.size(); ++s)
    if (r.x(s) > 1e-14) d.weights.push_back({s, r.x(s)});
  return d;
}

struct VisibilityResult {
  double visibility;  // max v with v*corr (+ (1-v)*white noise) local
  std::optional<BellFunctional> facet;  // supporting facet along the ray
};

/// Largest v such that the correlator point shrunk toward the uniform
/// behavior (all correlators 0) by v stays local:
///   max v  s.t.  V lambda = e0 + v (corr - e0), lambda >= 0.
/// The dual optimal direction is the facet the ray crosses; when v < 1 it
/// is a Bell inequality violated by the input.
inline VisibilityResult polytope_visibility(std::size_t parties,
                                            const Eigen::VectorXd& corr) {
  const auto& v = deterministic_vertices(parties);
  if (corr.size() != v.rows())
    throw DimensionMismatch("correlator vector length mismatch");
  Eigen::VectorXd dir = corr;
  dir(0) = 0.0;  // ray leaves the normalization component fixed
  const double dir_scale = dir.cwiseAbs().maxCoeff();
  if (dir_scale < 1e-12)
    return VisibilityResult{std::numeric_limits<double>::infinity(),
                            std::nullopt};
  dir /= dir_scale;  // keep the LP column well-scaled for tiny correlators
  const long n = v.cols();
  Eigen::MatrixXd a(v.rows(), n + 1);
  a.leftCols(n) = v;
  a.col(n) = -dir;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(v.rows());
  b(0) = 1.0;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + 1);
  cost(n) = -1.0;  // maximize v
  SimplexSolver solver;
  auto r = solver.solve(a, b, cost);
  if (!r.feasible) throw Error("visibility LP infeasible (cannot happen)");
  if (!r.bounded)
    return VisibilityResult{std::numeric_limits<double>::infinity(),
                            std::nullopt};
  VisibilityResult out;
  out.visibility = -r.objective / dir_scale;
  out.facet = detail::functional_from_direction(parties, r.dual);
  return out;
}

/// Exact membership with re-verified certificates: either a convex
/// decomposition reconstructing the behavior, or a Bell functional whose
/// enumerated local bound L and value S satisfy S - L > 1e-9.
inline MembershipResult local_polytope_membership(std::size_t parties,
                                                  const Eigen::VectorXd& corr) {
  auto vis = polytope_visibility(parties, corr);
  if (vis.visibility < 1.0 && vis.facet) {
    const BellFunctional& f = *vis.facet;
    const double value = f.evaluate_correlators(corr);
    const double bound = f.local_bound();  // re-verified by enumeration
    if (value - bound > 1e-9)
      return NonlocalWitness{f, value, value - bound};
  }
  auto d = polytope_decompose(parties, corr);
  if (!d)
    throw Error("membership: LP inconsistency (visibility >= 1 but no "
                "decomposition)");
  return *d;
}

inline MembershipResult local_polytope_membership(const BehaviorTable& b) {
  return local_polytope_membership(b.parties(), b.to_correlators());
}

}  // namespace persist

#endif
