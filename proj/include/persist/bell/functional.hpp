#ifndef PERSIST_BELL_FUNCTIONAL_HPP
#define PERSIST_BELL_FUNCTIONAL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "persist/errors.hpp"

namespace persist {

// The party cap keeps the deterministic-strategy enumeration (4^k) and the
// correlator space (3^k) exact and small.
inline constexpr std::size_t kMaxParties = 6;

inline long pow_long(long base, std::size_t exp) {
  long r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

// Correlator indexing: base-3 digit per party, party 0 most significant.
// Digit 0 = identity, 1 = setting 0, 2 = setting 1. Index 0 is the constant.
inline long correlator_index(std::size_t parties,
                             const std::vector<std::size_t>& subset,
                             const std::vector<int>& settings) {
  long idx = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < parties; ++i) {
    idx *= 3;
    if (pos < subset.size() && subset[pos] == i) {
      idx += 1 + settings[pos];
      ++pos;
    }
  }
  if (pos != subset.size())
    throw DimensionMismatch("term subset index out of range");
  return idx;
}

/// Value of the correlator `cidx` under deterministic strategy `strat`
/// (2 bits per party: outcome sign for each setting; party 0 in the lowest
/// bit pair).
inline double deterministic_correlator(std::size_t parties, long strat,
                                       long cidx) {
  double v = 1.0;
  for (std::size_t i = parties; i-- > 0;) {
    const int digit = static_cast<int>(cidx % 3);
    cidx /= 3;
    if (digit != 0) {
      const int bit = static_cast<int>((strat >> (2 * i + (digit - 1))) & 1);
      v *= bit ? -1.0 : 1.0;
    }
  }
  return v;
}

struct BellTerm {
  std::vector<std::size_t> subset;  // strictly increasing party indices
  std::vector<int> settings;        // one 0/1 entry per subset member
  double coeff;
};

/// Linear functional over full and marginal correlators of a 2-setting,
/// binary-outcome scenario, together with its deterministic local bound.
class BellFunctional {
 public:
  BellFunctional(std::size_t parties, std::vector<BellTerm> terms)
      : parties_(parties), terms_(std::move(terms)) {
    if (parties_ < 1 || parties_ > kMaxParties)
      throw ScenarioTooLarge("functional supports 1..6 parties");
    coeffs_.assign(pow_long(3, parties_), 0.0);
    for (const auto& t : terms_) {
      if (t.settings.size() != t.subset.size())
        throw DimensionMismatch("term settings/subset size mismatch");
      for (int x : t.settings)
        if (x != 0 && x != 1) throw ParameterOutOfRange("setting must be 0/1");
      for (std::size_t i = 1; i < t.subset.size(); ++i)
        if (t.subset[i] <= t.subset[i - 1])
          throw DimensionMismatch("term subset must be strictly increasing");
      coeffs_[correlator_index(parties_, t.subset, t.settings)] += t.coeff;
    }
    local_bound_ = deterministic_max();
  }

  /// Construct directly from a dense correlator-coefficient vector.
  BellFunctional(std::size_t parties, const std::vector<double>& coeffs)
      : parties_(parties), coeffs_(coeffs) {
    if (parties_ < 1 || parties_ > kMaxParties)
      throw ScenarioTooLarge("functional supports 1..6 parties");
    if (static_cast<long>(coeffs_.size()) != pow_long(3, parties_))
      throw DimensionMismatch("coefficient vector has wrong length");
    for (long c = 0; c < static_cast<long>(coeffs_.size()); ++c) {
      if (coeffs_[c] == 0.0) continue;
      BellTerm t;
      long v = c;
      for (std::size_t i = parties_; i-- > 0;) {
        const int digit = static_cast<int>(v % 3);
        v /= 3;
        if (digit != 0) {
          t.subset.insert(t.subset.begin(), i);
          t.settings.insert(t.settings.begin(), digit - 1);
        }
      }
      t.coeff = coeffs_[c];
      terms_.push_back(std::move(t));
    }
    local_bound_ = deterministic_max();
  }

  std::size_t parties() const { return parties_; }
  const std::vector<BellTerm>& terms() const { return terms_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double local_bound() const { return local_bound_; }

  double evaluate_correlators(const Eigen::VectorXd& corr) const {
    if (corr.size() != static_cast<long>(coeffs_.size()))
      throw DimensionMismatch("correlator vector length mismatch");
    double s = 0.0;
    for (long i = 0; i < corr.size(); ++i) s += coeffs_[i] * corr(i);
    return s;
  }

  /// Exact maximum over all 4^k deterministic +-1 assignments.
  double deterministic_max() const {
    const long nstrat = pow_long(4, parties_);
    double best = -std::numeric_limits<double>::infinity();
    for (long s = 0; s < nstrat; ++s) {
      double v = 0.0;
      for (long c = 0; c < static_cast<long>(coeffs_.size()); ++c)
        if (coeffs_[c] != 0.0)
          v += coeffs_[c] * deterministic_correlator(parties_, s, c);
      best = std::max(best, v);
    }
    return best;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["parties"] = parties_;
    j["settings"] = 2;
    auto& terms = j["terms"] = nlohmann::json::array();
    for (const auto& t : terms_)
      terms.push_back({{"subset", t.subset},
                       {"settings", t.settings},
                       {"coeff", t.coeff}});
    j["local_bound"] = local_bound_;
    return j;
  }

  static BellFunctional from_json(const nlohmann::json& j) {
    std::vector<BellTerm> terms;
    for (const auto& tj : j.at("terms"))
      terms.push_back(BellTerm{tj.at("subset").get<std::vector<std::size_t>>(),
                               tj.at("settings").get<std::vector<int>>(),
                               tj.at("coeff").get<double>()});
    BellFunctional f(j.at("parties").get<std::size_t>(), std::move(terms));
    if (j.contains("local_bound")) {
      const double stored = j.at("local_bound").get<double>();
      if (std::abs(stored - f.local_bound()) > 1e-9)
        throw InvariantViolation("stored local bound does not match");
    }
    return f;
  }

  /// The CHSH expression A0B0 + A0B1 + A1B0 - A1B1 (local bound 2).
  static BellFunctional chsh() {
    return BellFunctional(
        2, {BellTerm{{0, 1}, {0, 0}, 1.0}, BellTerm{{0, 1}, {0, 1}, 1.0},
            BellTerm{{0, 1}, {1, 0}, 1.0}, BellTerm{{0, 1}, {1, 1}, -1.0}});
  }

  /// (1+A) CHSH_BC + 2(1-A), expanded in correlators; local bound 4.
  static BellFunctional tripartite_i() {
    std::vector<BellTerm> terms;
    for (int xb = 0; xb < 2; ++xb)
      for (int xc = 0; xc < 2; ++xc) {
        const double sign = (xb == 1 && xc == 1) ? -1.0 : 1.0;
        terms.push_back(BellTerm{{1, 2}, {xb, xc}, sign});
        terms.push_back(BellTerm{{0, 1, 2}, {0, xb, xc}, sign});
      }
    terms.push_back(BellTerm{{0}, {0}, -2.0});
    terms.push_back(BellTerm{{}, {}, 2.0});
    return BellFunctional(3, std::move(terms));
  }

 private:
  std::size_t parties_;
  std::vector<BellTerm> terms_;
  std::vector<double> coeffs_;
  double local_bound_ = 0.0;
};

}  // namespace persist

#endif
