#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "persist/bell/behavior.hpp"
#include "persist/bell/horodecki.hpp"
#include "persist/bell/search.hpp"
#include "persist/persistency.hpp"
#include "persist/states.hpp"

using namespace persist;

namespace {

PersistencyBudget quick_budget() {
  PersistencyBudget b;
  b.search_restarts = 8;
  b.fit_samples = 3000;
  return b;
}

// p|W2><W2| + (1-p)|00><00|
DensityOperator w_pair_mixture(double p) {
  const Matrix w2 = DensityOperator::from_pure(w_state(2)).matrix();
  Matrix m = p * w2;
  m(0, 0) += 1.0 - p;
  return DensityOperator(QuditRegister({2, 2}), m);
}

StateVector append_ancilla_zero(const StateVector& psi) {
  std::vector<int> dims(psi.reg().dims());
  dims.push_back(2);
  Vector amps = Vector::Zero(2 * psi.amplitudes().size());
  for (long i = 0; i < psi.amplitudes().size(); ++i)
    amps(2 * i) = psi.amplitudes()(i);
  return StateVector(QuditRegister(dims), amps);
}

}  // namespace

TEST_CASE("entanglement persistency: W states are maximally persistent") {
  for (int n = 3; n <= 4; ++n) {
    auto pe = persistency_entanglement(StateSource(w_state(n)), quick_budget(),
                                       7);
    CHECK(pe.lo == n - 1);
    CHECK(pe.hi == n - 1);
    CHECK(pe.exact());
  }
}

TEST_CASE("entanglement persistency: GHZ collapses on one loss") {
  auto pe =
      persistency_entanglement(StateSource(ghz_state(4)), quick_budget(), 7);
  CHECK(pe.lo == 1);
  CHECK(pe.hi == 1);
  REQUIRE(pe.sep_subset.has_value());
  CHECK(pe.sep_subset->size() == 1);
}

TEST_CASE("entanglement persistency: six-site chain stops at two") {
  auto pe = persistency_entanglement(StateSource(linear_cluster(6)),
                                     quick_budget(), 7);
  CHECK(pe.lo == 2);
  CHECK(pe.hi == 2);
}

TEST_CASE("entanglement persistency rejects more than eight sites") {
  CHECK_THROWS_AS(persistency_entanglement(StateSource(w_state(9))),
                  TooManySites);
}

TEST_CASE("nonlocality persistency: qudit family at the optimal amplitude") {
  const StateVector psi = psi_max_persistency(3, 0.4518);
  // qutrit-pair residues need more random subspace starts than qubit ones
  PersistencyBudget budget = quick_budget();
  budget.search_restarts = 48;
  auto pnl = persistency_nonlocality(StateSource(psi), budget, 7);
  CHECK(pnl.lower_bound == 2);
  // every certificate re-verifies against the recomputed residue
  StateSource src(psi);
  for (const auto& c : pnl.certs) {
    CHECK(c.removed.size() == 1);
    CHECK(verify_certificate(src.reduce(c.removed), c.cert));
    CHECK(c.cert.value > c.cert.local_bound + 1e-9);
  }
}

TEST_CASE("nonlocality persistency: five-site ring certifies level two") {
  auto pnl = persistency_nonlocality(StateSource(ring_cluster(5)),
                                     quick_budget(), 7);
  CHECK(pnl.lower_bound == 2);
}

TEST_CASE("nonlocality persistency: five-site chain matches closed bounds") {
  auto pnl = persistency_nonlocality(StateSource(linear_cluster(5)),
                                     quick_budget(), 7);
  const ClusterBounds cb = cluster_bounds(5, ClusterTopology::Linear);
  CHECK(pnl.lower_bound == 2);
  CHECK(cb.pnl_lower <= pnl.lower_bound);
  CHECK(pnl.lower_bound <= cb.pe_upper);
}

TEST_CASE("hidden persistency: W state pair residues revive under filters") {
  auto ph = persistency_hidden(StateSource(w_state(4)), quick_budget(), 7);
  CHECK(ph.lower_bound == 3);
  StateSource src(w_state(4));
  for (const auto& c : ph.certs) {
    CHECK(c.success_probability > 0.0);
    CHECK(c.success_probability <= 1.0 + 1e-12);
    for (double e : c.eps) {
      CHECK(e > 0.0);
      CHECK(e <= 1.0);
    }
    // re-verify on the recomputed, re-filtered residue
    const FilterResult fr =
        detail::filter_diagonal(src.reduce(c.removed), c.eps);
    CHECK(std::abs(fr.success_probability - c.success_probability) < 1e-9);
    CHECK(verify_certificate(fr.state, c.cert));
  }
}

TEST_CASE("filtered pair mixture follows the closed-form violation curve") {
  // both sites filtered with diag(eps,1): the W2 weight renormalizes to
  // q = p / ((1-p) eps^2 + p) and the maximal CHSH is 2 sqrt(2) q whenever
  // q >= 1/3
  auto formula = [](double p, double eps) {
    return 2.0 * std::sqrt(2.0) * p / ((1.0 - p) * eps * eps + p);
  };
  const double p0 = 2.0 / 7.0, e0 = 0.05;
  const FilterResult f0 =
      detail::filter_diagonal(w_pair_mixture(p0), {e0, e0});
  CHECK(horodecki_chsh_max(f0.state).value ==
        doctest::Approx(formula(p0, e0)).epsilon(1e-12));
  CHECK(formula(p0, e0) == doctest::Approx(2.810859254406).epsilon(1e-9));
  CHECK(formula(p0, e0) > 2.0);

  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double p = 0.1 + 0.1 * i;
    for (int j = 0; j < 10; ++j) {
      const double eps = 0.05 + 0.04 * j;
      const FilterResult fr =
          detail::filter_diagonal(w_pair_mixture(p), {eps, eps});
      worst = std::max(
          worst, std::abs(horodecki_chsh_max(fr.state).value -
                          formula(p, eps)));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("strength: three-site W threshold and bisection endpoints") {
  auto res = strength(w_state(3), 0, quick_budget(), 7, 1e-3);
  CHECK(res.w == doctest::Approx(0.644).epsilon(0.016));
  CHECK(res.hi - res.lo <= 1e-3 + 1e-12);
  CHECK(res.lo <= res.w);
  CHECK(res.w <= res.hi + 1e-12);

  // bracket validity: pure Bell pair certifies, white noise never does
  SearchOptions opt;
  opt.restarts = 8;
  CHECK(nonlocality_search(DensityOperator::from_pure(bell_state()), 7, opt)
            .has_value());
  DensityOperator mixed(QuditRegister({2, 2}), 0.25 * Matrix::Identity(4, 4));
  CHECK_FALSE(nonlocality_search(mixed, 7, opt).has_value());
}

TEST_CASE("strength: four-site chain with one removal") {
  auto res = strength(linear_cluster(4), 1, quick_budget(), 7, 1e-3);
  CHECK(res.w == doctest::Approx(0.707).epsilon(0.016));
  CHECK(res.per_subset.size() == 4);
  for (double w : res.per_subset) CHECK(w <= res.w + 1e-12);
}

TEST_CASE("strength rejects bad removal counts") {
  CHECK_THROWS_AS(strength(w_state(3), 3), ParameterOutOfRange);
  CHECK_THROWS_AS(strength(w_state(3), -1), ParameterOutOfRange);
}

TEST_CASE("witness value is affine and increasing in the noise weight") {
  const DensityOperator pure = DensityOperator::from_pure(w_state(3));
  SearchOptions opt;
  opt.restarts = 8;
  auto cert = nonlocality_search(pure, 7, opt);
  REQUIRE(cert.has_value());
  auto s_at = [&](double w) {
    return evaluate_functional(mix_with_white_noise(pure, w), cert->scenario,
                               cert->functional);
  };
  const double s1 = s_at(0.3), s2 = s_at(0.5), s3 = s_at(0.7);
  CHECK(s2 == doctest::Approx(0.5 * (s1 + s3)).epsilon(1e-10));
  CHECK(s3 > s2);
  CHECK(s2 > s1);
}

TEST_CASE("closed-form cluster bounds") {
  CHECK(cluster_bounds(6, ClusterTopology::Ring).pnl_lower == 2);
  CHECK(cluster_bounds(6, ClusterTopology::Ring).pe_upper == 4);
  CHECK(cluster_bounds(6, ClusterTopology::Linear).pnl_lower == 2);
  CHECK(cluster_bounds(6, ClusterTopology::Linear).pe_upper == 2);
  CHECK(cluster_bounds(4, ClusterTopology::Ring).pnl_lower == 1);
  CHECK(cluster_bounds(4, ClusterTopology::Ring).pe_upper == 2);
  for (int n = 4; n <= 8; ++n)
    for (auto t : {ClusterTopology::Ring, ClusterTopology::Linear}) {
      const ClusterBounds cb = cluster_bounds(n, t);
      CHECK(cb.pnl_lower >= 1);
      CHECK(cb.pnl_lower <= cb.pe_upper);
      CHECK(cb.pe_upper <= n - 1);
    }
  CHECK_THROWS_AS(cluster_bounds(1, ClusterTopology::Ring),
                  ParameterOutOfRange);
}

TEST_CASE("asymmetry bound") {
  Matrix dummy = Matrix::Identity(4, 4);
  CHECK(asymmetry_bound(2.0, 2.0, dummy) == doctest::Approx(0.0));
  CHECK(asymmetry_bound(1.0, 2.0, dummy) == doctest::Approx(0.0));

  // optimal CHSH operator: A0 = sz, A1 = sx, B0/B1 = (sz +- sx)/sqrt(2)
  const Matrix z = pauli_z(), x = pauli_x();
  const double r = 1.0 / std::sqrt(2.0);
  const Matrix b0 = r * (z + x), b1 = r * (z - x);
  const Matrix chsh_op =
      kron(z, (b0 + b1).eval()) + kron(x, (b0 - b1).eval());
  CHECK(asymmetry_bound(2.0 * std::sqrt(2.0), 2.0, chsh_op) ==
        doctest::Approx((2.0 * std::sqrt(2.0) - 2.0) /
                        (4.0 * std::sqrt(2.0)))
            .epsilon(1e-10));
  CHECK(asymmetry_bound(2.0 * std::sqrt(2.0), 2.0, chsh_op) ==
        doctest::Approx(0.1464).epsilon(1e-3));

  CHECK_THROWS_AS(asymmetry_bound(2.0, 2.0, Matrix::Zero(4, 4)), ZeroOperator);
  CHECK_THROWS_AS(
      asymmetry_bound(std::numeric_limits<double>::infinity(), 2.0, dummy),
      ParameterOutOfRange);
}

TEST_CASE("small-b qudit family: every pair residue stays nonlocal") {
  const StateVector psi = psi_max_persistency(3, 0.15);
  StateSource src(psi);
  SearchOptions opt;
  opt.restarts = 48;
  std::uint64_t idx = 0;
  for (std::size_t rm = 0; rm < 3; ++rm) {
    auto cert = nonlocality_search(src.reduce({rm}), derive_seed(7, idx++),
                                   opt);
    REQUIRE(cert.has_value());
    CHECK(cert->value > cert->local_bound + 1e-9);
  }
}

TEST_CASE("full report: orderings, promotion, schema") {
  const StateVector psi = w_state(3);
  auto rep = analyze_persistency(StateSource(psi), "w:3", quick_budget(), 42);
  CHECK(rep.n == 3);
  CHECK(rep.pe.lo == 2);
  CHECK(rep.pe.hi == 2);
  CHECK(rep.pnl.lower_bound == 1);
  CHECK(rep.pnl_star.lower_bound == 2);
  REQUIRE(rep.strength_w.has_value());
  CHECK(rep.strength_w->w == doctest::Approx(0.644).epsilon(0.016));

  // Eq. (3) chain at the level of computed bounds
  CHECK(rep.pnl.lower_bound <= rep.pnl_star.lower_bound);
  CHECK(rep.pnl_star.lower_bound <= rep.pe.hi);
  CHECK(rep.pe.lo <= rep.pe.hi);
  CHECK(rep.pe.hi <= rep.n - 1);

  const nlohmann::json j = rep.to_json();
  for (const char* key :
       {"spec", "n", "pe", "pnl", "pnl_star", "strength", "budget", "seed"})
    CHECK(j.contains(key));
  CHECK(j["pe"].contains("lo"));
  CHECK(j["pe"].contains("hi"));
  CHECK(j["pe"].contains("sep_subset"));
  CHECK(j["pe"].contains("ent_witnesses"));
  CHECK(j["pnl"].contains("lb"));
  CHECK(j["pnl"].contains("certs"));
  CHECK(j["pnl_star"].contains("lb"));
  CHECK(j["strength"].contains("w"));
  CHECK(j["strength"].contains("bracket"));
  CHECK(j["strength"].contains("k_remove"));
  // timing is deliberately excluded so identical (config, seed) runs give
  // identical bytes
  CHECK_FALSE(j.contains("elapsed_ms"));

  // determinism: same config and seed, same bytes
  auto rep2 = analyze_persistency(StateSource(psi), "w:3", quick_budget(), 42);
  CHECK(rep2.to_json().dump() == j.dump());
}

TEST_CASE("promotion: a plain certificate counts as an identity-filter one") {
  const StateVector psi = psi_max_persistency(3, 0.4518);
  AnalysisSelection sel;
  sel.entanglement = false;
  sel.strength = false;
  PersistencyBudget budget = quick_budget();
  budget.search_restarts = 48;
  auto rep =
      analyze_persistency(StateSource(psi), "psi:3", budget, 7, sel);
  CHECK(rep.pnl_star.lower_bound >= rep.pnl.lower_bound);
  StateSource src(psi);
  for (const auto& c : rep.pnl_star.certs) {
    const FilterResult fr =
        detail::filter_diagonal(src.reduce(c.removed), c.eps);
    CHECK(verify_certificate(fr.state, c.cert));
  }
}

TEST_CASE("appending a product ancilla cannot raise the certified level") {
  const StateVector w3 = w_state(3);
  auto base = persistency_entanglement(StateSource(w3), quick_budget(), 7);
  auto ext = persistency_entanglement(StateSource(append_ancilla_zero(w3)),
                                      quick_budget(), 7);
  CHECK(ext.lo <= base.lo);
}
