#ifndef PERSIST_BELL_BEHAVIOR_HPP
#define PERSIST_BELL_BEHAVIOR_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "persist/bell/functional.hpp"
#include "persist/bell/observable.hpp"
#include "persist/errors.hpp"
#include "persist/linalg.hpp"
#include "persist/state.hpp"

namespace persist {

/// All correlators <prod_i O_i> of the scenario on rho, indexed per
/// correlator_index (3^k entries, entry 0 = 1).
inline Eigen::VectorXd correlators(const DensityOperator& rho,
                                   const MeasurementScenario& scenario) {
  scenario.check_register(rho.reg());
  const std::size_t k = scenario.parties();
  if (k > kMaxParties) throw ScenarioTooLarge("more than 6 parties");
  const long ncorr = pow_long(3, k);
  Eigen::VectorXd corr(ncorr);
  // recursive Kronecker build over parties, reusing prefixes
  std::vector<Matrix> prefix(k + 1);
  prefix[0] = Matrix::Identity(1, 1);
  std::vector<int> digits(k, 0);
  for (long c = 0; c < ncorr; ++c) {
    // digits of c, party 0 most significant
    long v = c;
    std::vector<int> nd(k);
    for (std::size_t i = k; i-- > 0;) {
      nd[i] = static_cast<int>(v % 3);
      v /= 3;
    }
    std::size_t first_change = 0;
    if (c > 0) {
      while (first_change < k && nd[first_change] == digits[first_change])
        ++first_change;
    }
    digits = nd;
    for (std::size_t i = first_change; i < k; ++i) {
      const int d = rho.reg().dim(i);
      const Matrix& local =
          digits[i] == 0
              ? Matrix::Identity(d, d).eval()
              : scenario.observable(i, digits[i] - 1).matrix();
      prefix[i + 1] = kron(prefix[i], local);
    }
    corr(c) = (rho.matrix() * prefix[k]).trace().real();
  }
  return corr;
}

/// Joint conditional distribution p(a|x) for binary outcomes (+1 encoded
/// as bit 0) and 2 settings per party.
class BehaviorTable {
 public:
  BehaviorTable(std::size_t parties, Eigen::MatrixXd p)
      : parties_(parties), p_(std::move(p)) {
    const long n = 1L << parties_;
    if (p_.rows() != n || p_.cols() != n)
      throw DimensionMismatch("behavior table has wrong shape");
    for (long x = 0; x < n; ++x) {
      if (p_.row(x).minCoeff() < -1e-12)
        throw InvariantViolation("behavior has negative probability");
      if (std::abs(p_.row(x).sum() - 1.0) > 1e-10)
        throw InvariantViolation("behavior row does not sum to 1");
    }
  }

  /// Reconstruct a behavior from its correlator vector.
  static BehaviorTable from_correlators(std::size_t parties,
                                        const Eigen::VectorXd& corr) {
    const long n = 1L << parties;
    const double scale = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd p(n, n);
    for (long x = 0; x < n; ++x)
      for (long a = 0; a < n; ++a) {
        double acc = 0.0;
        // sum over party subsets S: sign(a,S) * corr(S at settings x)
        for (long s = 0; s < n; ++s) {
          long cidx = 0;
          int sign = 0;
          for (std::size_t i = 0; i < parties; ++i) {
            cidx *= 3;
            if ((s >> (parties - 1 - i)) & 1) {
              cidx += 1 + ((x >> (parties - 1 - i)) & 1);
              sign ^= static_cast<int>((a >> (parties - 1 - i)) & 1);
            }
          }
          acc += (sign ? -1.0 : 1.0) * corr(cidx);
        }
        p(x, a) = acc * scale;
      }
    return BehaviorTable(parties, std::move(p));
  }

  std::size_t parties() const { return parties_; }
  const Eigen::MatrixXd& table() const { return p_; }

  double probability(long setting_bits, long outcome_bits) const {
    return p_(setting_bits, outcome_bits);
  }

  /// Correlator vector recomputed from the probabilities.
  Eigen::VectorXd to_correlators() const {
    const long n = 1L << parties_;
    const long ncorr = pow_long(3, parties_);
    Eigen::VectorXd corr = Eigen::VectorXd::Zero(ncorr);
    for (long c = 0; c < ncorr; ++c) {
      // pick any compatible setting combo for unused parties (setting 0)
      long x = 0;
      long v = c;
      std::vector<int> digit(parties_);
      for (std::size_t i = parties_; i-- > 0;) {
        digit[i] = static_cast<int>(v % 3);
        v /= 3;
      }
      for (std::size_t i = 0; i < parties_; ++i)
        if (digit[i] == 2) x |= 1L << (parties_ - 1 - i);
      double acc = 0.0;
      for (long a = 0; a < n; ++a) {
        int sign = 0;
        for (std::size_t i = 0; i < parties_; ++i)
          if (digit[i] != 0)
            sign ^= static_cast<int>((a >> (parties_ - 1 - i)) & 1);
        acc += (sign ? -1.0 : 1.0) * p_(x, a);
      }
      corr(c) = acc;
    }
    return corr;
  }

  /// Max no-signalling violation: change of a subset marginal under the
  /// other parties' setting choice.
  double no_signalling_defect() const {
    const long n = 1L << parties_;
    double worst = 0.0;
    // marginal of all parties except i must not depend on x_i
    for (std::size_t i = 0; i < parties_; ++i) {
      const long bit = 1L << (parties_ - 1 - i);
      for (long x = 0; x < n; ++x) {
        if (x & bit) continue;
        for (long a_rest = 0; a_rest < n; ++a_rest) {
          if (a_rest & bit) continue;
          double m0 = p_(x, a_rest) + p_(x, a_rest | bit);
          double m1 = p_(x | bit, a_rest) + p_(x | bit, a_rest | bit);
          worst = std::max(worst, std::abs(m0 - m1));
        }
      }
    }
    return worst;
  }

 private:
  std::size_t parties_;
  Eigen::MatrixXd p_;
};

inline BehaviorTable behavior(const DensityOperator& rho,
                              const MeasurementScenario& scenario) {
  return BehaviorTable::from_correlators(scenario.parties(),
                                         correlators(rho, scenario));
}

inline double evaluate_functional(const DensityOperator& rho,
                                  const MeasurementScenario& scenario,
                                  const BellFunctional& f) {
  return f.evaluate_correlators(correlators(rho, scenario));
}

// ---------------------------------------------------------------------------
// CHSH and the paper's composite expressions
// ---------------------------------------------------------------------------

inline double chsh_value(const DensityOperator& rho2,
                         const DichotomicObservable& a0,
                         const DichotomicObservable& a1,
                         const DichotomicObservable& b0,
                         const DichotomicObservable& b1) {
  if (rho2.sites() != 2) throw DimensionMismatch("chsh_value wants 2 sites");
  MeasurementScenario sc({{a0, a1}, {b0, b1}});
  const Eigen::VectorXd corr = correlators(rho2, sc);
  return BellFunctional::chsh().evaluate_correlators(corr);
}

/// Expectation of (1+A) CHSH_BC + 2(1-A); classical bound 4.
inline double tripartite_I(const DensityOperator& rho3,
                           const DichotomicObservable& a,
                           const std::array<DichotomicObservable, 2>& b,
                           const std::array<DichotomicObservable, 2>& c) {
  if (rho3.sites() != 3) throw DimensionMismatch("tripartite_I wants 3 sites");
  MeasurementScenario sc({{a, a}, {b[0], b[1]}, {c[0], c[1]}});
  return BellFunctional::tripartite_i().evaluate_correlators(
      correlators(rho3, sc));
}

struct GmeWitnessSettings {
  // role pairs per party: party A holds (A, A'), B holds (B, B'), C (C, C')
  std::array<DichotomicObservable, 2> a, a_prime;
  std::array<DichotomicObservable, 2> b, b_prime;
  std::array<DichotomicObservable, 2> c, c_prime;
};

struct GmeWitnessResult {
  double s;
  std::array<double, 3> chsh;  // AB, A'C, B'C'
  bool gme_certified;          // S > 4 + 2 sqrt(2)
  bool persistency2_evidence;  // each CHSH > 2
};

/// S = CHSH_AB + CHSH_A'C + CHSH_B'C', each on the matching 2-party
/// marginal; biseparable bound 4 + 2 sqrt(2), local bound 6.
inline GmeWitnessResult gme_witness_S(const DensityOperator& rho3,
                                      const GmeWitnessSettings& st) {
  if (rho3.sites() != 3) throw DimensionMismatch("gme_witness_S wants 3 sites");
  const auto rho_ab = partial_trace(rho3, {2});
  const auto rho_ac = partial_trace(rho3, {1});
  const auto rho_bc = partial_trace(rho3, {0});
  GmeWitnessResult r{};
  r.chsh[0] = chsh_value(rho_ab, st.a[0], st.a[1], st.b[0], st.b[1]);
  r.chsh[1] = chsh_value(rho_ac, st.a_prime[0], st.a_prime[1], st.c[0], st.c[1]);
  r.chsh[2] = chsh_value(rho_bc, st.b_prime[0], st.b_prime[1], st.c_prime[0],
                         st.c_prime[1]);
  r.s = r.chsh[0] + r.chsh[1] + r.chsh[2];
  r.gme_certified = r.s > 4.0 + 2.0 * std::sqrt(2.0);
  r.persistency2_evidence =
      r.chsh[0] > 2.0 && r.chsh[1] > 2.0 && r.chsh[2] > 2.0;
  return r;
}

}  // namespace persist

#endif
