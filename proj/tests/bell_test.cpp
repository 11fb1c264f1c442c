#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "persist/bell/behavior.hpp"
#include "persist/bell/horodecki.hpp"
#include "persist/bell/polytope.hpp"
#include "persist/bell/search.hpp"
#include "persist/bell/seesaw.hpp"
#include "persist/random.hpp"
#include "persist/states.hpp"

using namespace persist;

namespace {

DichotomicObservable obs(double nx, double ny, double nz, int d = 2,
                         int i0 = 0, int i1 = 1) {
  return DichotomicObservable::from_bloch(d, {nx, ny, nz}, i0, i1);
}

MeasurementScenario chsh_optimal_scenario() {
  const double s = 1.0 / std::sqrt(2.0);
  return MeasurementScenario({{obs(0, 0, 1), obs(1, 0, 0)},
                              {obs(s, 0, s), obs(-s, 0, s)}});
}

DensityOperator random_two_qubit(Rng& rng) {
  return DensityOperator(QuditRegister({2, 2}), random_density_matrix(4, rng));
}

}  // namespace

TEST_CASE("behavior: product factorization, Bell correlators, white noise") {
  Rng rng(9);
  const DensityOperator a(QuditRegister({2}), random_density_matrix(2, rng));
  const DensityOperator b(QuditRegister({2}), random_density_matrix(2, rng));
  const DensityOperator prod = tensor_product(a, b);
  const MeasurementScenario sc = chsh_optimal_scenario();
  const Eigen::VectorXd c = correlators(prod, sc);
  // base-3 index: digit 0 identity, 1/2 settings; party 0 most significant
  for (int x = 1; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y)
      CHECK(c(3 * x + y) == doctest::Approx(c(3 * x) * c(y)).epsilon(1e-10));

  const DensityOperator phi = DensityOperator::from_pure(bell_state());
  const Eigen::VectorXd cb = correlators(phi, sc);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(cb(4) == doctest::Approx(r));   // A0 B0
  CHECK(cb(5) == doctest::Approx(r));   // A0 B1
  CHECK(cb(7) == doctest::Approx(r));   // A1 B0
  CHECK(cb(8) == doctest::Approx(-r));  // A1 B1

  const DensityOperator mixed(QuditRegister({2, 2}),
                              Matrix::Identity(4, 4) / 4.0);
  const Eigen::VectorXd cm = correlators(mixed, sc);
  CHECK(cm(0) == doctest::Approx(1.0));
  CHECK(cm.tail(8).cwiseAbs().maxCoeff() < 1e-12);
  const BehaviorTable tm = behavior(mixed, sc);
  for (long x = 0; x < 4; ++x)
    for (long o = 0; o < 4; ++o)
      CHECK(tm.probability(x, o) == doctest::Approx(0.25));
}

TEST_CASE("no-signalling holds for measured behaviors") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + t % 2;
    const QuditRegister reg = QuditRegister::uniform(k, 2);
    const DensityOperator rho(reg, random_density_matrix(1L << k, rng));
    const MeasurementScenario sc = MeasurementScenario::random(reg, rng);
    CHECK(behavior(rho, sc).no_signalling_defect() < 1e-9);
  }
}

TEST_CASE("chsh_value: doubled single correlator, psi_theta settings, Eq.(13)") {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const DensityOperator rho = random_two_qubit(rng);
    const DichotomicObservable a = obs(0, 0, 1), b = obs(1, 0, 0);
    const double v = chsh_value(rho, a, a, b, b);
    CHECK(v >= -2.0 - 1e-12);
    CHECK(v <= 2.0 + 1e-12);
  }

  // psi_theta residue with the restricted settings family -> 2.2247
  const double theta = 0.6278;
  const double b = psi_b_from_theta(theta);
  const DensityOperator res = partial_trace(psi_max_persistency(3, b), {0});
  const double beta = std::atan(std::sin(2.0 * theta));
  MeasurementScenario sc({{obs(0, 0, 1, 3, 0, 1), obs(1, 0, 0, 3, 0, 1)},
                          {obs(0, 0, 1, 3, 0, 2),
                           obs(-std::sin(beta), 0, std::cos(beta), 3, 0, 2)}});
  CHECK(evaluate_functional(res, sc, BellFunctional::chsh()) ==
        doctest::Approx(2.2247).epsilon(1e-4));

  // Eq. (13) filtered state at p=0.5, eps=0.1 reaches Eq. (14)'s value
  const double p = 0.5, eps = 0.1;
  Matrix m = p * w_state(2).projector();
  m(0, 0) += 1.0 - p;
  DensityOperator rp(QuditRegister({2, 2}), m);
  Eigen::Matrix2cd f;
  f << eps, 0, 0, 1;
  const DensityOperator rf =
      apply_local_filter(apply_local_filter(rp, 0, f).state, 1, f).state;
  const double expect = 2.0 * std::sqrt(2.0) * p / ((1.0 - p) * eps * eps + p);
  CHECK(horodecki_chsh_max(rf).value == doctest::Approx(expect).epsilon(1e-9));
  CHECK(expect == doctest::Approx(2.8003).epsilon(1e-4));
}

TEST_CASE("horodecki: Tsirelson on Bell pair, products local, settings optimal") {
  const DensityOperator phi = DensityOperator::from_pure(bell_state());
  const HorodeckiResult h = horodecki_chsh_max(phi);
  CHECK(h.value == doctest::Approx(2.0 * std::sqrt(2.0)));
  // returned observables achieve the value
  CHECK(chsh_value(phi, h.a0, h.a1, h.b0, h.b1) ==
        doctest::Approx(h.value).epsilon(1e-9));

  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const DensityOperator prod = tensor_product(
        DensityOperator(QuditRegister({2}), random_density_matrix(2, rng)),
        DensityOperator(QuditRegister({2}), random_density_matrix(2, rng)));
    CHECK(horodecki_chsh_max(prod).value <= 2.0 + 1e-9);
  }

  CHECK_THROWS_AS(
      horodecki_chsh_max(DensityOperator(QuditRegister({3, 3}),
                                         Matrix::Identity(9, 9) / 9.0)),
      NotTwoQubits);
}

TEST_CASE("horodecki vs see-saw oracle equivalence on 100 random states") {
  Rng rng(0xfeed);
  SeesawOptions opt;
  opt.restarts = 8;
  for (int t = 0; t < 100; ++t) {
    const DensityOperator rho = random_two_qubit(rng);
    const double exact = horodecki_chsh_max(rho).value;
    const double ss = seesaw_maximize(rho, BellFunctional::chsh(),
                                      derive_seed(0xabc, t), opt)
                          .value;
    CHECK(std::abs(exact - ss) < 1e-6);
  }
}

TEST_CASE("tripartite_I: deterministic bound, A=-1 reading") {
  // all 2*4*4 = 32 deterministic assignments stay <= 4
  const BellFunctional f = BellFunctional::tripartite_i();
  CHECK(f.local_bound() == doctest::Approx(4.0));
  CHECK(f.deterministic_max() == doctest::Approx(4.0));

  // A = -1 deterministically: value 4 regardless of B, C
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(27);
  corr(0) = 1.0;
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    std::uniform_int_distribution<int> pm(0, 1);
    double bx[3], cx[3];
    bx[0] = cx[0] = 1.0;
    for (int i = 1; i <= 2; ++i) {
      bx[i] = pm(rng) ? 1.0 : -1.0;
      cx[i] = pm(rng) ? 1.0 : -1.0;
    }
    for (int da = 0; da < 3; ++da)
      for (int db = 0; db < 3; ++db)
        for (int dc = 0; dc < 3; ++dc) {
          const double a = da == 0 ? 1.0 : -1.0;  // both A settings -> -1
          corr((da * 3 + db) * 3 + dc) = a * bx[db] * cx[dc];
        }
    corr(0) = 1.0;
    CHECK(f.evaluate_correlators(corr) == doctest::Approx(4.0));
  }
}

TEST_CASE("gme witness: biseparable bound and local bound") {
  const DensityOperator bisep = biseparable_example();
  Rng rng(77);
  const double cap = 4.0 + 2.0 * std::sqrt(2.0);
  for (int t = 0; t < 200; ++t) {
    auto rnd = [&] {
      const auto n = random_bloch_vector(rng);
      std::uniform_int_distribution<int> pick(0, 5);
      int i0 = pick(rng), i1 = pick(rng);
      while (i1 == i0) i1 = pick(rng);
      if (i0 > i1) std::swap(i0, i1);
      return DichotomicObservable::from_bloch(6, n, i0, i1);
    };
    GmeWitnessSettings st{{rnd(), rnd()}, {rnd(), rnd()}, {rnd(), rnd()},
                          {rnd(), rnd()}, {rnd(), rnd()}, {rnd(), rnd()}};
    const GmeWitnessResult r = gme_witness_S(bisep, st);
    CHECK(r.s <= cap + 1e-9);
    CHECK_FALSE(r.gme_certified);
  }
}

TEST_CASE("local polytope: Bell violation witness, local decompositions") {
  const DensityOperator phi = DensityOperator::from_pure(bell_state());
  const Eigen::VectorXd corr = correlators(phi, chsh_optimal_scenario());
  const MembershipResult m = local_polytope_membership(2, corr);
  REQUIRE(std::holds_alternative<NonlocalWitness>(m));
  const NonlocalWitness& w = std::get<NonlocalWitness>(m);
  CHECK(std::abs(w.violation - (2.0 * std::sqrt(2.0) - 2.0) /
                                   2.0 * 2.0) < 2e-6);
  // the functional's enumerated bound matches its stored bound
  CHECK(w.functional.deterministic_max() ==
        doctest::Approx(w.functional.local_bound()).epsilon(1e-9));

  // uniform random-outcome behavior is local
  Eigen::VectorXd uniform = Eigen::VectorXd::Zero(9);
  uniform(0) = 1.0;
  CHECK(std::holds_alternative<LocalDecomposition>(
      local_polytope_membership(2, uniform)));

  // the behavior of a separable state is local, and the decomposition
  // reconstructs the correlators
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const DensityOperator prod = tensor_product(
        tensor_product(
            DensityOperator(QuditRegister({2}), random_density_matrix(2, rng)),
            DensityOperator(QuditRegister({2}), random_density_matrix(2, rng))),
        DensityOperator(QuditRegister({2}), random_density_matrix(2, rng)));
    const MeasurementScenario sc =
        MeasurementScenario::random(prod.reg(), rng);
    const Eigen::VectorXd c3 = correlators(prod, sc);
    const MembershipResult r = local_polytope_membership(3, c3);
    REQUIRE(std::holds_alternative<LocalDecomposition>(r));
    const auto& d = std::get<LocalDecomposition>(r);
    double total = 0.0;
    for (auto [s, wgt] : d.weights) {
      CHECK(wgt >= -1e-12);
      total += wgt;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((d.reconstruct_correlators(3) - c3).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("seesaw: Bell pair, white noise scaling, mixed state zero") {
  const DensityOperator phi = DensityOperator::from_pure(bell_state());
  SeesawOptions opt;
  opt.restarts = 20;
  CHECK(seesaw_maximize(phi, BellFunctional::chsh(), 5, opt).value ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));

  for (double w : {0.3, 0.6, 0.9}) {
    const DensityOperator noisy = mix_with_white_noise(bell_state(), w);
    CHECK(seesaw_maximize(noisy, BellFunctional::chsh(), 6, opt).value ==
          doctest::Approx(2.0 * std::sqrt(2.0) * w).epsilon(1e-6));
  }

  const DensityOperator mixed(QuditRegister({2, 2}),
                              Matrix::Identity(4, 4) / 4.0);
  CHECK(std::abs(seesaw_maximize(mixed, BellFunctional::chsh(), 7, opt).value)
        < 1e-9);
}

TEST_CASE("nonlocality_search: positives, separable-residue negative") {
  const DensityOperator phi = DensityOperator::from_pure(bell_state());
  SearchOptions opt;
  const auto cert = nonlocality_search(phi, 11, opt);
  REQUIRE(cert.has_value());
  CHECK(cert->value - cert->local_bound >= 2.0 * std::sqrt(2.0) - 2.0 - 1e-6);
  CHECK(verify_certificate(phi, *cert));

  // separable three-qubit residue of the 5-chain: nothing to find
  const DensityOperator sep = partial_trace(linear_cluster(5), {0, 4});
  SearchOptions cheap;
  cheap.restarts = 6;
  CHECK_FALSE(nonlocality_search(sep, 12, cheap).has_value());

  // 4-qubit residue of the 6-chain is nonlocal
  const DensityOperator res = partial_trace(linear_cluster(6), {0, 5});
  const auto c4 = nonlocality_search(res, 13, opt);
  REQUIRE(c4.has_value());
  CHECK(verify_certificate(res, *c4));
}

TEST_CASE("dichotomic qudit embedding squares to identity for d=2..7") {
  Rng rng(55);
  for (int d = 2; d <= 7; ++d) {
    for (int t = 0; t < 10; ++t) {
      int i0 = 0, i1 = d > 2 ? 1 + static_cast<int>(rng() % (d - 1)) : 1;
      const DichotomicObservable o =
          DichotomicObservable::from_bloch(d, random_bloch_vector(rng), i0, i1);
      CHECK((o.matrix() * o.matrix() - Matrix::Identity(d, d))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
  }
  CHECK_THROWS_AS(obs(0.5, 0.5, 0.5), ParameterOutOfRange);
}

TEST_CASE("functional JSON round-trip and stored-bound verification") {
  const BellFunctional f = BellFunctional::tripartite_i();
  const BellFunctional g = BellFunctional::from_json(f.to_json());
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd corr(27);
    for (long i = 0; i < 27; ++i)
      corr(i) = std::uniform_real_distribution<double>(-1, 1)(rng);
    corr(0) = 1.0;
    CHECK(f.evaluate_correlators(corr) ==
          doctest::Approx(g.evaluate_correlators(corr)).epsilon(1e-12));
  }
  auto j = f.to_json();
  j["local_bound"] = 3.5;  // wrong stored bound must be rejected
  CHECK_THROWS_AS(BellFunctional::from_json(j), InvariantViolation);
}
