#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "qdiscern/errors.hpp"
#include "qdiscern/experiments.hpp"
#include "test_support.hpp"

using namespace qdiscern;

namespace {

Model random_model(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const HermitianOperator h = testing::random_hermitian(dim, gen);
  return Model{testing::random_state(dim, gen), HamiltonianSchedule::constant(h, 1.0), "random"};
}

}  // namespace

TEST_CASE("qubit model basics") {
  const Model m = qubit_model();
  CHECK(m.energy_variance() == doctest::Approx(1.0));
  CHECK(m.state_at(0.3).fidelity(evolve_constant(pauli::z(), 0.3, 1.0, m.psi0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pi_measurement(m).label == "pi");
  CHECK(sld_measurement(m).label == "sld");
  const auto randoms = random_measurements(m, 3, 9);
  REQUIRE(randoms.size() == 3);
  CHECK(randoms[2].label == "random2");
  CHECK(randoms[0].povm.outcomes() == 2);
}

TEST_CASE("discernibility sweep") {
  const Model m = qubit_model();
  const std::vector<MeasurementChoice> ms{pi_measurement(m), sld_measurement(m)};

  SUBCASE("dt = 0 rows have power alpha*") {
    SweepConfig cfg;
    cfg.dt_values = {0.0};
    cfg.n_values = {1, 5, 20};
    const SweepResult r = discernibility_sweep(m, ms, cfg);
    REQUIRE(r.rows.size() == 6);
    for (const auto& row : r.rows) {
      CHECK(row.exact_power == doctest::Approx(0.05).epsilon(1e-12));
      CHECK(row.method == "exact");
    }
  }

  SUBCASE("one-copy projector power tends to sin^2 dt") {
    SweepConfig cfg;
    cfg.dt_values = {0.1};
    cfg.n_values = {1};
    cfg.alpha_star = 1e-9;
    const SweepResult r = discernibility_sweep(m, {pi_measurement(m)}, cfg);
    CHECK(r.rows[0].exact_power == doctest::Approx(std::sin(0.1) * std::sin(0.1)).epsilon(1e-6));
    CHECK(r.rows[0].exact_power == doctest::Approx(0.00997).epsilon(1e-3));
  }

  SUBCASE("frozen SLD power") {
    SweepConfig cfg;
    cfg.dt_values = {0.05};
    cfg.n_values = {5};
    const SweepResult r = discernibility_sweep(m, {sld_measurement(m)}, cfg);
    CHECK(r.rows[0].exact_power == doctest::Approx(0.074986635385965061).epsilon(1e-12));
    CHECK(r.rows[0].fisher_value == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(r.rows[0].gamma_max_prediction == doctest::Approx(-std::expm1(-2.0 * 5 * 0.0025)).epsilon(1e-14));
  }

  SUBCASE("ordering, ranges and the best-measurement invariant") {
    SweepConfig cfg;
    cfg.dt_values = {0.0, 0.02, 0.1, 0.3};
    cfg.n_values = {1, 3, 10};
    const SweepResult r = discernibility_sweep(m, ms, cfg);
    REQUIRE(r.rows.size() == 24);
    std::size_t i = 0;
    for (const auto& mc : ms) {
      for (double dt : cfg.dt_values) {
        for (std::size_t n : cfg.n_values) {
          CHECK(r.rows[i].label == mc.label);
          CHECK(r.rows[i].dt == dt);
          CHECK(r.rows[i].n == n);
          ++i;
        }
      }
    }
    std::map<std::pair<double, std::size_t>, double> best;
    for (const auto& row : r.rows) {
      CHECK(row.exact_power >= 0.05 - 1e-12);
      CHECK(row.exact_power <= 1.0);
      CHECK(row.gamma_max_prediction >= 0.0);
      CHECK(row.gamma_max_prediction < 1.0);
      double& b = best[{row.dt, row.n}];
      b = std::max(b, row.exact_power);
    }
    for (const auto& row : r.rows) {
      CHECK(best[{row.dt, row.n}] >= row.exact_power - 1e-12);
    }
  }

  SUBCASE("thread count does not change rows") {
    SweepConfig cfg;
    cfg.dt_values = {0.01, 0.05};
    cfg.n_values = {2, 30};
    cfg.threads = 1;
    const SweepResult a = discernibility_sweep(m, ms, cfg);
    cfg.threads = 8;
    const SweepResult b = discernibility_sweep(m, ms, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].exact_power == b.rows[i].exact_power);
      CHECK(a.rows[i].kl_value == b.rows[i].kl_value);
    }
  }

  SUBCASE("infeasible points need Monte Carlo") {
    const Model big = random_model(8, 4);
    SweepConfig cfg;
    cfg.dt_values = {0.05};
    cfg.n_values = {60};
    const std::vector<MeasurementChoice> rnd = random_measurements(big, 1, 1);
    CHECK_THROWS_AS(discernibility_sweep(big, rnd, cfg), InfeasibleEnumeration);
    cfg.monte_carlo_samples = 4096;
    const SweepResult r = discernibility_sweep(big, rnd, cfg);
    CHECK(r.rows[0].method == "monte-carlo");
  }
}

TEST_CASE("measurement optimality study") {
  const OptimalityReport q = measurement_optimality_study(qubit_model(), 500, 17, 4);
  CHECK(q.random_fisher.size() == 500);
  CHECK(q.max_random_fisher <= 4.0 + 1e-8);
  CHECK(q.violations == 0);
  CHECK(q.pi_fisher == doctest::Approx(4.0).epsilon(1e-10));
  REQUIRE(q.sld_fisher.has_value());
  CHECK(*q.sld_fisher == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(q.quantum_fisher == doctest::Approx(4.0).epsilon(1e-10));

  const Model four = random_model(4, 23);
  const OptimalityReport r = measurement_optimality_study(four, 300, 5, 2);
  CHECK(r.violations == 0);
  CHECK(r.max_random_fisher <= r.quantum_fisher_energy + 1e-8);
  CHECK(r.pi_fisher == doctest::Approx(r.quantum_fisher_energy).epsilon(1e-8));

  const Model still{PureState::basis(2, 0), HamiltonianSchedule::constant(pauli::z(), 1.0), "eigenstate"};
  const OptimalityReport s = measurement_optimality_study(still, 50, 1, 1);
  CHECK(s.quantum_fisher_energy == 0.0);
  CHECK_FALSE(s.sld_fisher.has_value());
  CHECK(std::abs(s.pi_fisher) < 1e-12);
  CHECK(s.max_random_fisher < 1e-12);

  const OptimalityReport again = measurement_optimality_study(qubit_model(), 500, 17, 1);
  CHECK(again.random_fisher == q.random_fisher);
}

TEST_CASE("sudden scaling study") {
  std::vector<double> dts;
  for (int k = 0; k <= 20; ++k) {
    dts.push_back(std::pow(10.0, -3.0 + 0.1 * k));
  }
  const SuddenScalingReport q = sudden_scaling_study(qubit_model(), dts);
  CHECK(q.order_ok);
  CHECK(q.slope == doctest::Approx(4.0).epsilon(0.01));
  CHECK(q.points_used == 5);
  for (const auto& row : q.rows) {
    CHECK(std::abs(row.exact - std::sin(row.dt) * std::sin(row.dt)) <= 1e-12);
    CHECK(row.perturbative == doctest::Approx(row.dt * row.dt).epsilon(1e-14));
  }

  const Model still{PureState::basis(2, 0), HamiltonianSchedule::constant(pauli::z(), 1.0), "eigenstate"};
  const SuddenScalingReport e = sudden_scaling_study(still, dts);
  for (const auto& row : e.rows) {
    CHECK(row.exact < 1e-25);
    CHECK(row.perturbative == 0.0);
  }
  CHECK(std::isnan(e.slope));
  CHECK_FALSE(e.order_ok);

  const Model two{testing::plus_state(), HamiltonianSchedule({{pauli::z(), 0.5}, {pauli::x(), 0.5}}), "two"};
  CHECK(sudden_scaling_study(two, dts).slope >= 3.0);

  CVector v(2);
  v << 0.8, Complex(0.0, 0.6);
  const Model generic{PureState(v),
                      HamiltonianSchedule({{pauli::z() + 0.5 * pauli::x(), 1.0}, {pauli::y(), 2.0}}), "generic"};
  const SuddenScalingReport g = sudden_scaling_study(generic, dts);
  CHECK(g.slope >= 3.0);
  CHECK(g.order_ok);
}

TEST_CASE("uncertainty condition") {
  const ConditionResult small = uncertainty_condition(1, 0.1, 1.0, 1.0);
  CHECK(small.value == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(small.satisfied);
  const ConditionResult zero = uncertainty_condition(7, 0.0, 3.0, 1.0);
  CHECK(zero.value == 0.0);
  CHECK(zero.satisfied);
  const ConditionResult big = uncertainty_condition(10000, 0.1, 1.0, 1.0);
  CHECK(big.value == doctest::Approx(200.0).epsilon(1e-14));
  CHECK_FALSE(big.satisfied);
  CHECK(uncertainty_condition(1, 0.1, 1.0, 1.0, 0.01).satisfied == false);
  CHECK_THROWS_AS(uncertainty_condition(1, 0.1, 1.0, 1.0, 0.0), InvalidValue);
}

TEST_CASE("vertex anomaly study") {
  const std::vector<AnomalyRow> rows = vertex_anomaly_study(qubit_model(), {0.02, 1.5707963267948966}, {}, 0.05, 2);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].label == "pi");
  CHECK(rows[0].kl_ratio == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(rows[0].kl == doctest::Approx(-2.0 * std::log(std::cos(0.02))).epsilon(1e-10));
  CHECK(std::isnan(rows[0].beta_ratio));
  CHECK(std::isinf(rows[1].kl));
  CHECK(rows[2].label == "sld");
  CHECK(rows[2].kl_ratio == doctest::Approx(1.0).epsilon(1e-3));
  const double s = std::sin(0.04);
  CHECK(rows[2].kl == doctest::Approx(-0.5 * std::log(1.0 - s * s)).epsilon(1e-10));

  const std::vector<AnomalyRow> past = vertex_anomaly_study(qubit_model(), {1.6}, {}, 0.05, 1);
  CHECK(std::isfinite(past[0].kl));

  const std::vector<AnomalyRow> with_n = vertex_anomaly_study(qubit_model(), {0.05}, {50}, 0.05, 1);
  REQUIRE(with_n.size() == 2);
  CHECK(std::isfinite(with_n[0].beta_exponent));
  CHECK(with_n[0].beta_exponent > 0.0);
}
