#ifndef PERSIST_PERSISTENCY_HPP
#define PERSIST_PERSISTENCY_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "persist/bell/horodecki.hpp"
#include "persist/bell/search.hpp"
#include "persist/separability.hpp"
#include "persist/states.hpp"

namespace persist {

// ---------------------------------------------------------------------------
// Budgets and subset plumbing
// ---------------------------------------------------------------------------

struct PersistencyBudget {
  int search_restarts = 16;   // nonlocality search restarts per residue
  int deepen_rounds = 12;     // LP/see-saw alternations per restart
  long fit_samples = 4000;    // separable_fit atom budget
  int sep_bell_restarts = 2;  // Bell fallback inside entanglement_status
  double strength_tol = 1e-3;
  double filter_eps_min = 1e-3;

  nlohmann::json to_json() const {
    return {{"search_restarts", search_restarts},
            {"deepen_rounds", deepen_rounds},
            {"fit_samples", fit_samples},
            {"sep_bell_restarts", sep_bell_restarts},
            {"strength_tol", strength_tol},
            {"filter_eps_min", filter_eps_min}};
  }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> subsets_of_size(std::size_t n,
                                                             std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(m);
  for (std::size_t i = 0; i < m; ++i) cur[i] = i;
  if (m > n) return out;
  while (true) {
    out.push_back(cur);
    if (m == 0) break;
    // next lexicographic combination
    std::size_t i = m;
    while (i-- > 0) {
      if (cur[i] + (m - i) < n) {
        ++cur[i];
        for (std::size_t j = i + 1; j < m; ++j) cur[j] = cur[j - 1] + 1;
        break;
      }
      if (i == 0) return out;
    }
  }
  return out;
}

}  // namespace detail

/// Pure-or-mixed input; residues are computed from the cheapest
/// representation available.
class StateSource {
 public:
  explicit StateSource(StateVector psi) : pure_(std::move(psi)) {}
  explicit StateSource(DensityOperator rho) : mixed_(std::move(rho)) {}
  explicit StateSource(const BuiltState& built) {
    if (std::holds_alternative<StateVector>(built))
      pure_ = std::get<StateVector>(built);
    else
      mixed_ = std::get<DensityOperator>(built);
  }

  std::size_t sites() const {
    return pure_ ? pure_->sites() : mixed_->sites();
  }
  const QuditRegister& reg() const {
    return pure_ ? pure_->reg() : mixed_->reg();
  }
  bool is_pure() const { return pure_.has_value(); }
  const StateVector& pure() const { return *pure_; }

  DensityOperator reduce(const std::vector<std::size_t>& removed) const {
    if (removed.empty()) {
      if (mixed_) return *mixed_;
      return DensityOperator::from_pure(*pure_);
    }
    return pure_ ? partial_trace(*pure_, removed)
                 : partial_trace(*mixed_, removed);
  }

 private:
  std::optional<StateVector> pure_;
  std::optional<DensityOperator> mixed_;
};

// ---------------------------------------------------------------------------
// Persistency of entanglement: exact interval from certified verdicts
// ---------------------------------------------------------------------------

struct ResidueVerdict {
  std::vector<std::size_t> removed;
  Verdict verdict;
};

struct PersistencyEntanglement {
  int lo = 0;  // largest k with all (k-1)-removal residues certified entangled
  int hi = 0;  // smallest k with some k-removal residue certified separable
  std::optional<std::vector<std::size_t>> sep_subset;
  std::vector<ResidueVerdict> verdicts;

  bool exact() const { return lo == hi; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"lo", lo}, {"hi", hi}};
    j["sep_subset"] =
        sep_subset ? nlohmann::json(*sep_subset) : nlohmann::json(nullptr);
    auto& w = j["ent_witnesses"] = nlohmann::json::array();
    for (const auto& v : verdicts) {
      const char* s = v.verdict == Verdict::Entangled   ? "entangled"
                      : v.verdict == Verdict::Separable ? "separable"
                                                        : "unknown";
      w.push_back({{"removed", v.removed}, {"verdict", s}});
    }
    return j;
  }
};

inline PersistencyEntanglement persistency_entanglement(
    const StateSource& src, const PersistencyBudget& budget = {},
    std::uint64_t seed = 0x5eed) {
  const std::size_t n = src.sites();
  if (n > 8) throw TooManySites("subset enumeration capped at 8 sites");
  PersistencyEntanglement out;
  out.lo = 0;
  out.hi = static_cast<int>(n) - 1;  // single remaining site is separable
  std::uint64_t subset_index = 0;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    bool all_entangled = true;
    bool any_separable = false;
    for (const auto& removed : detail::subsets_of_size(n, m)) {
      Verdict verdict = Verdict::Unknown;
      if (m == 0 && src.is_pure()) {
        // pure state: fully product iff every single-site marginal is pure
        bool product = true;
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<std::size_t> others;
          for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(j);
          const Matrix red = partial_trace(src.pure(), others).matrix();
          if ((red * red).trace().real() < 1.0 - 1e-10) {
            product = false;
            break;
          }
        }
        verdict = product ? Verdict::Separable : Verdict::Entangled;
      } else {
        SeparabilityBudget sb;
        sb.fit_samples = budget.fit_samples;
        sb.bell_restarts = budget.sep_bell_restarts;
        sb.seed = derive_seed(seed, subset_index);
        verdict = entanglement_status(src.reduce(removed), sb).verdict;
      }
      ++subset_index;
      out.verdicts.push_back({removed, verdict});
      if (verdict != Verdict::Entangled) all_entangled = false;
      if (verdict == Verdict::Separable) {
        any_separable = true;
        if (!out.sep_subset) out.sep_subset = removed;
      }
    }
    if (any_separable) {
      out.hi = static_cast<int>(m);
      break;
    }
    if (all_entangled && out.lo == static_cast<int>(m))
      out.lo = static_cast<int>(m) + 1;
  }
  if (!out.sep_subset && static_cast<int>(n) - 1 == out.hi) {
    // removing all but one site always succeeds
    auto last = detail::subsets_of_size(n, n - 1).front();
    out.sep_subset = last;
    out.verdicts.push_back({last, Verdict::Separable});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistency of nonlocality (lower bound by level certification)
// ---------------------------------------------------------------------------

struct SubsetCertificate {
  std::vector<std::size_t> removed;
  NonlocalityCertificate cert;
};

struct PersistencyNonlocality {
  int lower_bound = 0;
  std::vector<SubsetCertificate> certs;  // one per subset of the deepest level
};

namespace detail {

/// Certify every residue at removal depth j nonlocal; fills certs on
/// success. A certificate for the deepest level implies certificates for
/// all shallower levels (tracing commutes with ignoring extra parties).
inline bool certify_level(const StateSource& src, std::size_t j,
                          std::uint64_t seed, const SearchOptions& opt,
                          std::vector<SubsetCertificate>& certs) {
  certs.clear();
  std::vector<MeasurementScenario> hints;
  std::uint64_t idx = 0;
  for (const auto& removed : subsets_of_size(src.sites(), j)) {
    DensityOperator reduced = src.reduce(removed);
    auto cert =
        nonlocality_search(reduced, derive_seed(seed, idx++), opt, hints);
    if (!cert) return false;
    hints.clear();
    hints.push_back(cert->scenario);
    certs.push_back({removed, std::move(*cert)});
  }
  return true;
}

}  // namespace detail

inline PersistencyNonlocality persistency_nonlocality(
    const StateSource& src, const PersistencyBudget& budget = {},
    std::uint64_t seed = 0x5eed) {
  const std::size_t n = src.sites();
  if (n < 2) return {};
  const std::size_t j_min = n > kMaxParties ? n - kMaxParties : 0;
  if (n - 2 < j_min)
    throw ScenarioTooLarge("no testable removal depth with <= 6 parties left");
  SearchOptions opt;
  opt.restarts = budget.search_restarts;
  opt.deepen_rounds = budget.deepen_rounds;
  PersistencyNonlocality out;
  for (std::size_t j = n - 2; j + 1 > j_min; --j) {
    std::vector<SubsetCertificate> certs;
    if (detail::certify_level(src, j, derive_seed(seed, j), opt, certs)) {
      out.lower_bound = static_cast<int>(j) + 1;
      out.certs = std::move(certs);
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistency of hidden nonlocality (diagonal local filters)
// ---------------------------------------------------------------------------

struct FilteredCertificate {
  std::vector<std::size_t> removed;
  std::vector<double> eps;  // per remaining site; 1.0 = identity
  double success_probability = 1.0;
  NonlocalityCertificate cert;  // on the filtered residue
};

struct PersistencyHidden {
  int lower_bound = 0;
  std::vector<FilteredCertificate> certs;
};

namespace detail {

inline FilterResult filter_diagonal(const DensityOperator& rho,
                                    const std::vector<double>& eps) {
  DensityOperator cur = rho;
  double prob = 1.0;
  for (std::size_t i = 0; i < rho.sites(); ++i) {
    if (eps[i] >= 1.0 - 1e-12) continue;
    Eigen::Matrix2cd f;
    f << eps[i], 0, 0, 1;
    FilterResult r = apply_local_filter(cur, i, f);
    cur = std::move(r.state);
    prob *= r.success_probability;
  }
  return FilterResult{std::move(cur), prob};
}

template <class F>
double golden_max(F f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

inline bool is_two_qubit(const QuditRegister& reg) {
  return reg.sites() == 2 && reg.dim(0) == 2 && reg.dim(1) == 2;
}

/// Violation S - L of the best certificate found on the filtered residue;
/// -inf when the filter annihilates the state or nothing certifies.
inline double filtered_violation(const DensityOperator& reduced,
                                 const std::vector<double>& eps,
                                 std::uint64_t seed, const SearchOptions& opt,
                                 const std::vector<MeasurementScenario>& hints) {
  try {
    FilterResult fr = filter_diagonal(reduced, eps);
    if (is_two_qubit(reduced.reg()))
      return horodecki_chsh_max(fr.state).value - 2.0;
    auto cert = nonlocality_search(fr.state, seed, opt, hints);
    return cert ? cert->value - cert->local_bound
                : -std::numeric_limits<double>::infinity();
  } catch (const ZeroSuccessProbability&) {
    return -std::numeric_limits<double>::infinity();
  }
}

/// Plain search first; on failure, optimize per-site diag(eps,1) filters by
/// golden-section sweeps interleaved with fresh searches.
inline std::optional<FilteredCertificate> certify_hidden(
    const DensityOperator& reduced, std::uint64_t seed,
    const SearchOptions& opt, double eps_min,
    const std::vector<MeasurementScenario>& hints) {
  const std::size_t k = reduced.sites();
  std::vector<double> eps(k, 1.0);
  if (auto cert = nonlocality_search(reduced, seed, opt, hints))
    return FilteredCertificate{{}, eps, 1.0, std::move(*cert)};

  // cheaper inner searches inside the line sweeps
  SearchOptions inner = opt;
  inner.restarts = std::max(2, opt.restarts / 4);
  double best = filtered_violation(reduced, eps, seed, inner, hints);
  for (int round = 0; round < 4; ++round) {
    double round_best = best;
    for (std::size_t i = 0; i < k; ++i) {
      if (reduced.reg().dim(i) < 2) continue;
      auto obj = [&](double e) {
        std::vector<double> trial = eps;
        trial[i] = e;
        return filtered_violation(reduced, trial, derive_seed(seed, i), inner,
                                  hints);
      };
      const double e_star = golden_max(obj, eps_min, 1.0, 1e-4);
      const double v = obj(e_star);
      if (v > best + 1e-12) {
        best = v;
        eps[i] = e_star;
      }
    }
    if (best <= round_best + 1e-9) break;
  }
  if (!std::isfinite(best) || best <= 1e-9) return std::nullopt;

  FilterResult fr = filter_diagonal(reduced, eps);
  std::optional<NonlocalityCertificate> cert;
  if (is_two_qubit(reduced.reg())) {
    HorodeckiResult h = horodecki_chsh_max(fr.state);
    MeasurementScenario sc({{h.a0, h.a1}, {h.b0, h.b1}});
    NonlocalityCertificate c{sc, BellFunctional::chsh(), h.value, 2.0};
    if (verify_certificate(fr.state, c)) cert = std::move(c);
  }
  if (!cert) cert = nonlocality_search(fr.state, seed, opt, hints);
  if (!cert) return std::nullopt;
  return FilteredCertificate{{}, eps, fr.success_probability,
                             std::move(*cert)};
}

}  // namespace detail

inline PersistencyHidden persistency_hidden(
    const StateSource& src, const PersistencyBudget& budget = {},
    std::uint64_t seed = 0x5eed) {
  const std::size_t n = src.sites();
  if (n < 2) return {};
  const std::size_t j_min = n > kMaxParties ? n - kMaxParties : 0;
  if (n - 2 < j_min)
    throw ScenarioTooLarge("no testable removal depth with <= 6 parties left");
  SearchOptions opt;
  opt.restarts = budget.search_restarts;
  opt.deepen_rounds = budget.deepen_rounds;
  PersistencyHidden out;
  for (std::size_t j = n - 2; j + 1 > j_min; --j) {
    std::vector<FilteredCertificate> certs;
    std::vector<MeasurementScenario> hints;
    bool all = true;
    std::uint64_t idx = 0;
    for (const auto& removed : detail::subsets_of_size(n, j)) {
      DensityOperator reduced = src.reduce(removed);
      auto fc = detail::certify_hidden(
          reduced, derive_seed(derive_seed(seed, j), idx++), opt,
          budget.filter_eps_min, hints);
      if (!fc) {
        all = false;
        break;
      }
      fc->removed = removed;
      hints.clear();
      hints.push_back(fc->cert.scenario);
      certs.push_back(std::move(*fc));
    }
    if (all) {
      out.lower_bound = static_cast<int>(j) + 1;
      out.certs = std::move(certs);
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strength of persistency (white-noise threshold)
// ---------------------------------------------------------------------------

struct StrengthResult {
  double w = 1.0;  // max over removal subsets of per-subset thresholds
  double lo = 0.0, hi = 1.0;  // bracket of the maximizing subset
  int k_remove = 0;
  std::vector<double> per_subset;
};

namespace detail {

struct IncumbentWitness {
  MeasurementScenario scenario;
  BellFunctional functional;
};

/// S(w) for w psi + (1-w) I/d is affine: w S(1) + (1-w) c0, with c0 the
/// functional's constant coefficient. Returns the certification threshold
/// of this witness, or nullopt if it never certifies.
inline std::optional<double> witness_threshold(const DensityOperator& pure_res,
                                               const IncumbentWitness& wit) {
  if (wit.scenario.parties() != pure_res.sites()) return std::nullopt;
  for (std::size_t i = 0; i < pure_res.sites(); ++i)
    if (wit.scenario.observable(i, 0).dim() != pure_res.reg().dim(i))
      return std::nullopt;
  const Eigen::VectorXd corr1 = correlators(pure_res, wit.scenario);
  const double s1 = wit.functional.evaluate_correlators(corr1);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(corr1.size());
  e0(0) = 1.0;
  const double c0 = wit.functional.evaluate_correlators(e0);
  const double l = wit.functional.local_bound();
  if (s1 <= l + 1e-9) return std::nullopt;
  return (l - c0) / (s1 - c0);
}

}  // namespace detail

/// Minimum w such that every residue of w|psi><psi| + (1-w) I/d^N after
/// removing k_remove parties is still certified nonlocal. Upper-bound
/// estimate (the search may miss violations below the reported bracket).
inline StrengthResult strength(const StateVector& psi, int k_remove,
                               const PersistencyBudget& budget = {},
                               std::uint64_t seed = 0x5eed,
                               double tol = 1e-3) {
  const std::size_t n = psi.sites();
  if (k_remove < 0 || k_remove >= static_cast<int>(n))
    throw ParameterOutOfRange("k_remove must be in [0, N-1)");
  if (n - static_cast<std::size_t>(k_remove) > kMaxParties)
    throw ScenarioTooLarge("more than 6 parties left after removal");
  SearchOptions opt;
  opt.restarts = budget.search_restarts;
  opt.deepen_rounds = budget.deepen_rounds;

  auto residue_pure = [&](const std::vector<std::size_t>& removed) {
    return removed.empty() ? DensityOperator::from_pure(psi)
                           : partial_trace(psi, removed);
  };

  StrengthResult out;
  out.k_remove = k_remove;
  out.w = 0.0;
  std::vector<detail::IncumbentWitness> pool;
  double best_lo = 0.0, best_hi = 1.0;
  std::uint64_t idx = 0;
  for (const auto& removed :
       detail::subsets_of_size(n, static_cast<std::size_t>(k_remove))) {
    const std::uint64_t sub_seed = derive_seed(seed, idx++);
    const DensityOperator res1 = residue_pure(removed);
    double lo = 0.0, hi = 1.0;
    // incumbent witnesses give closed-form thresholds
    for (const auto& wit : pool)
      if (auto th = detail::witness_threshold(res1, wit))
        hi = std::min(hi, std::max(0.0, *th));
    if (hi >= 1.0) {
      auto cert = nonlocality_search(res1, sub_seed, opt);
      if (!cert)
        throw Error("strength: residue at w = 1 not certified nonlocal");
      pool.push_back({cert->scenario, cert->functional});
      if (auto th = detail::witness_threshold(res1, pool.back()))
        hi = std::min(hi, std::max(0.0, *th));
    }
    std::vector<MeasurementScenario> hints;
    for (const auto& wit : pool) hints.push_back(wit.scenario);
    while (hi - lo > tol && hi > out.w - tol) {
      const double mid = 0.5 * (lo + hi);
      auto cert = nonlocality_search(mix_with_white_noise(res1, mid),
                                     derive_seed(sub_seed, 1000), opt, hints);
      if (cert) {
        pool.push_back({cert->scenario, cert->functional});
        double new_hi = mid;
        if (auto th = detail::witness_threshold(res1, pool.back()))
          new_hi = std::min(new_hi, std::max(lo, *th));
        hi = new_hi;
        hints.clear();
        for (const auto& wit : pool) hints.push_back(wit.scenario);
      } else {
        lo = mid;
      }
    }
    out.per_subset.push_back(hi);
    if (hi > out.w) {
      out.w = hi;
      best_lo = lo;
      best_hi = hi;
    }
  }
  out.lo = best_lo;
  out.hi = best_hi;
  return out;
}

// ---------------------------------------------------------------------------
// Analytic cluster-state bounds and asymmetry bound
// ---------------------------------------------------------------------------

enum class ClusterTopology { Ring, Linear };

struct ClusterBounds {
  int pnl_lower;
  int pe_upper;
};

inline ClusterBounds cluster_bounds(int n, ClusterTopology topology) {
  if (n < 2) throw ParameterOutOfRange("cluster bounds need N >= 2");
  const int lower = (n - 1) / 4 + 1;
  int upper;
  if (topology == ClusterTopology::Ring) {
    upper = 2 * ((n + 4) / 5);
  } else {
    const int a = n - 6;
    upper = 2 * (a <= 0 ? 0 : (a + 4) / 5) + 2;
  }
  return {lower, upper};
}

/// Device-independent lower bound on the trace distance to the nearest
/// symmetric state: max(0, (S - L) / (2 ||B||_inf)).
inline double asymmetry_bound(double s, double l, const Matrix& bell_operator) {
  if (!std::isfinite(s) || !std::isfinite(l))
    throw ParameterOutOfRange("S and L must be finite");
  const double norm =
      hermitian_eigenvalues(bell_operator).cwiseAbs().maxCoeff();
  if (norm < 1e-14) throw ZeroOperator("Bell operator is numerically zero");
  return std::max(0.0, (s - l) / (2.0 * norm));
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json scenario_to_json(const MeasurementScenario& sc) {
  nlohmann::json parties = nlohmann::json::array();
  for (std::size_t i = 0; i < sc.parties(); ++i) {
    nlohmann::json settings = nlohmann::json::array();
    for (int x = 0; x < 2; ++x) {
      const Matrix& m = sc.observable(i, x).matrix();
      nlohmann::json rows = nlohmann::json::array();
      for (long r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (long c = 0; c < m.cols(); ++c)
          row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
      }
      settings.push_back(std::move(rows));
    }
    parties.push_back(std::move(settings));
  }
  return parties;
}

inline nlohmann::json certificate_to_json(const NonlocalityCertificate& c) {
  return {{"functional", c.functional.to_json()},
          {"value", c.value},
          {"local_bound", c.local_bound},
          {"scenario", scenario_to_json(c.scenario)}};
}

}  // namespace detail

struct PersistencyReport {
  std::string spec;
  int n = 0;
  PersistencyEntanglement pe;
  PersistencyNonlocality pnl;
  PersistencyHidden pnl_star;
  std::optional<StrengthResult> strength_w;
  PersistencyBudget budget;
  std::uint64_t seed = 0;
  long elapsed_ms = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["spec"] = spec;
    j["n"] = n;
    j["pe"] = pe.to_json();
    {
      nlohmann::json certs = nlohmann::json::array();
      for (const auto& c : pnl.certs) {
        nlohmann::json jc = detail::certificate_to_json(c.cert);
        jc["removed"] = c.removed;
        certs.push_back(std::move(jc));
      }
      j["pnl"] = {{"lb", pnl.lower_bound}, {"certs", std::move(certs)}};
    }
    {
      nlohmann::json certs = nlohmann::json::array();
      for (const auto& c : pnl_star.certs) {
        nlohmann::json jc = detail::certificate_to_json(c.cert);
        jc["removed"] = c.removed;
        jc["eps"] = c.eps;
        jc["success_probability"] = c.success_probability;
        certs.push_back(std::move(jc));
      }
      j["pnl_star"] = {{"lb", pnl_star.lower_bound},
                       {"certs", std::move(certs)}};
    }
    if (strength_w) {
      j["strength"] = {{"w", strength_w->w},
                       {"bracket", {strength_w->lo, strength_w->hi}},
                       {"k_remove", strength_w->k_remove}};
    } else {
      j["strength"] = nullptr;
    }
    j["budget"] = budget.to_json();
    j["seed"] = seed;
    // elapsed_ms stays out: identical (config, seed) must give identical
    // bytes.
    return j;
  }
};

struct AnalysisSelection {
  bool entanglement = true;
  bool nonlocality = true;
  bool hidden = true;
  bool strength = true;
};

inline PersistencyReport analyze_persistency(
    const StateSource& src, const std::string& spec_text,
    const PersistencyBudget& budget = {}, std::uint64_t seed = 0x5eed,
    const AnalysisSelection& sel = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  PersistencyReport rep;
  rep.spec = spec_text;
  rep.n = static_cast<int>(src.sites());
  rep.budget = budget;
  rep.seed = seed;
  if (sel.entanglement)
    rep.pe = persistency_entanglement(src, budget, derive_seed(seed, 1));
  else
    rep.pe.hi = rep.n - 1;
  if (sel.nonlocality)
    rep.pnl = persistency_nonlocality(src, budget, derive_seed(seed, 2));
  if (sel.hidden)
    rep.pnl_star = persistency_hidden(src, budget, derive_seed(seed, 3));
  if (rep.pnl_star.lower_bound < rep.pnl.lower_bound) {
    // a no-filter certificate is a filtered certificate with identity filter
    rep.pnl_star.lower_bound = rep.pnl.lower_bound;
    rep.pnl_star.certs.clear();
    for (const auto& c : rep.pnl.certs)
      rep.pnl_star.certs.push_back(
          {c.removed, std::vector<double>(src.sites() - c.removed.size(), 1.0),
           1.0, c.cert});
  }
  if (sel.strength && src.is_pure() && rep.pnl.lower_bound >= 1) {
    rep.strength_w =
        strength(src.pure(), rep.pnl.lower_bound - 1, budget,
                 derive_seed(seed, 4), budget.strength_tol);
  }
  rep.elapsed_ms = static_cast<long>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - t0)
          .count());
  return rep;
}

}  // namespace persist

#endif
