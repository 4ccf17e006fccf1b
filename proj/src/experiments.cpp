#include "qdiscern/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdiscern/errors.hpp"
#include "qdiscern/parallel.hpp"

namespace qdiscern {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFisherSlack = 1e-8;

// Prediction helpers that stay defined at dt = 0 with infinite inputs.
double stein_prediction(std::size_t n, double kl) {
  return kl == 0.0 ? 0.0 : power_approx_stein(n, kl);
}

double fisher_prediction(std::size_t n, double fisher, double dt) {
  return dt == 0.0 ? 0.0 : power_approx_fisher(n, fisher, dt);
}

}  // namespace

Model qubit_model(double hbar) {
  return Model{PureState::normalized(CVector::Ones(2)), HamiltonianSchedule::constant(pauli::z(), 1.0, hbar),
               "qubit |+>, H = sigma_z"};
}

MeasurementChoice pi_measurement(const Model& model) {
  return {"pi", projector_test_povm(model.psi0)};
}

MeasurementChoice sld_measurement(const Model& model) {
  return {"sld", sld_optimal_povm(model.psi0, model.generator(), model.hbar())};
}

std::vector<MeasurementChoice> random_measurements(const Model& model, std::size_t count, std::uint64_t seed) {
  std::vector<MeasurementChoice> out;
  out.reserve(count);
  const std::size_t d = model.psi0.dim();
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({"random" + std::to_string(k), random_povm(d, d, derive_seed(seed, k))});
  }
  return out;
}

SweepResult discernibility_sweep(const Model& model, const std::vector<MeasurementChoice>& measurements,
                                 const SweepConfig& config) {
  for (double dt : config.dt_values) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
      throw InvalidValue("sweep dt values must be finite and >= 0");
    }
  }
  const HermitianOperator gen = model.generator();
  const double hbar = model.hbar();
  const double variance = energy_moments(model.psi0, gen).variance;

  SweepResult result;
  result.model_description = model.description;
  result.seed = config.seed;
  result.hbar = hbar;
  result.alpha_star = config.alpha_star;
  result.energy_variance = variance;

  const std::size_t n_meas = measurements.size();
  const std::size_t n_dt = config.dt_values.size();
  const std::size_t n_copies = config.n_values.size();

  std::vector<PureState> states;
  states.reserve(n_dt);
  for (double dt : config.dt_values) {
    states.push_back(model.state_at(dt));
  }
  std::vector<double> fisher(n_meas);
  for (std::size_t m = 0; m < n_meas; ++m) {
    fisher[m] = classical_fisher_analytic(model.psi0, gen, hbar, measurements[m].povm).value;
  }

  result.rows.resize(n_meas * n_dt * n_copies);
  parallel_for(result.rows.size(), config.threads, [&](std::size_t idx) {
    const std::size_t m = idx / (n_dt * n_copies);
    const std::size_t t = (idx / n_copies) % n_dt;
    const std::size_t c = idx % n_copies;
    const double dt = config.dt_values[t];
    const std::size_t n = config.n_values[c];
    const Povm& povm = measurements[m].povm;

    const OutcomeDistribution p0 = outcome_distribution(model.psi0, povm);
    const OutcomeDistribution p1 = outcome_distribution(states[t], povm);

    SweepRow row;
    row.dt = dt;
    row.n = n;
    row.label = measurements[m].label;
    row.kl_value = kl_divergence(p0, p1);
    row.fisher_value = fisher[m];
    row.gamma_max_prediction = gamma_max(n, variance, dt, hbar).value;
    row.stein_prediction = stein_prediction(n, row.kl_value);
    row.fisher_prediction = fisher_prediction(n, fisher[m], dt);

    if (count_vector_total(n, povm.outcomes()) <= kMaxCountVectors) {
      const TestPerformance perf = test_performance(mp_test(p0, p1, n, config.alpha_star), p0, p1);
      row.exact_power = perf.power;
      row.alpha = perf.alpha;
      row.method = "exact";
    } else if (config.monte_carlo_samples > 0) {
      const MonteCarloPerformance mc = monte_carlo_power(p0, p1, n, config.alpha_star, config.monte_carlo_samples,
                                                         derive_seed(config.seed, idx), 1);
      row.exact_power = mc.estimate.power;
      row.alpha = mc.estimate.alpha;
      row.method = "monte-carlo";
    } else {
      // Raises InfeasibleEnumeration with the size in the message.
      mp_test(p0, p1, n, config.alpha_star);
    }
    result.rows[idx] = std::move(row);
  });
  return result;
}

OptimalityReport measurement_optimality_study(const Model& model, std::size_t trials, std::uint64_t seed,
                                              unsigned threads) {
  const HermitianOperator gen = model.generator();
  const double hbar = model.hbar();
  OptimalityReport report;
  report.quantum_fisher = quantum_fisher(model.psi0, gen, hbar);
  report.quantum_fisher_energy = quantum_fisher_energy(model.psi0, gen, hbar);
  report.pi_fisher = classical_fisher_analytic(model.psi0, gen, hbar, projector_test_povm(model.psi0)).value;
  try {
    report.sld_fisher = classical_fisher_analytic(model.psi0, gen, hbar, sld_measurement(model).povm).value;
  } catch (const StationaryState&) {
    report.sld_fisher.reset();
  }

  const std::size_t d = model.psi0.dim();
  report.random_fisher.resize(trials);
  parallel_for(trials, threads, [&](std::size_t k) {
    // Outcome counts cycle through 2 .. 2d.
    const std::size_t outcomes = 2 + k % (2 * d - 1);
    const Povm povm = random_povm(d, outcomes, derive_seed(seed, k));
    report.random_fisher[k] = classical_fisher_analytic(model.psi0, gen, hbar, povm).value;
  });
  report.max_random_fisher = 0.0;
  report.violations = 0;
  for (double j : report.random_fisher) {
    report.max_random_fisher = std::max(report.max_random_fisher, j);
    if (j > report.quantum_fisher + kFisherSlack) {
      ++report.violations;
    }
  }
  return report;
}

SuddenScalingReport sudden_scaling_study(const Model& model, const std::vector<double>& dt_values) {
  SuddenScalingReport report;
  report.rows.reserve(dt_values.size());
  for (double dt : dt_values) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
      throw InvalidValue("dt values must be finite and >= 0");
    }
    const HamiltonianSchedule sched = model.schedule.rescaled(dt);
    SuddenScalingRow row;
    row.dt = dt;
    row.exact = sudden_error_exact(sched, model.psi0);
    row.perturbative = sudden_error_perturbative(sched, model.psi0);
    row.residual = std::abs(row.exact - row.perturbative);
    report.rows.push_back(row);
  }

  std::vector<SuddenScalingRow> usable;
  for (const auto& row : report.rows) {
    if (row.dt > 0.0 && row.residual > kResidualFloor) {
      usable.push_back(row);
    }
  }
  std::sort(usable.begin(), usable.end(), [](const auto& a, const auto& b) { return a.dt < b.dt; });
  if (usable.size() > kSlopeFitPoints) {
    usable.resize(kSlopeFitPoints);
  }
  report.points_used = usable.size();
  if (usable.size() < 2) {
    report.slope = kNaN;
    report.order_ok = false;
    return report;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& row : usable) {
    const double x = std::log(row.dt);
    const double y = std::log(row.residual);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(usable.size());
  report.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  report.order_ok = report.slope >= 3.0;
  return report;
}

ConditionResult uncertainty_condition(std::size_t n, double dt, double energy_variance, double hbar,
                                      double threshold) {
  if (!(threshold > 0.0)) {
    throw InvalidValue("condition threshold must be positive");
  }
  const double value = gamma_max(n, energy_variance, dt, hbar).weak_signal;
  return {value, value <= threshold};
}

std::vector<AnomalyRow> vertex_anomaly_study(const Model& model, const std::vector<double>& dt_values,
                                             const std::vector<std::size_t>& n_values, double alpha_star,
                                             unsigned threads) {
  const std::vector<MeasurementChoice> measurements{pi_measurement(model), sld_measurement(model)};
  const HermitianOperator gen = model.generator();
  const double hbar = model.hbar();
  const std::size_t per_dt = std::max<std::size_t>(1, n_values.size());

  std::vector<AnomalyRow> rows(measurements.size() * dt_values.size() * per_dt);
  parallel_for(rows.size(), threads, [&](std::size_t idx) {
    const std::size_t m = idx / (dt_values.size() * per_dt);
    const std::size_t t = (idx / per_dt) % dt_values.size();
    const std::size_t c = idx % per_dt;
    const Povm& povm = measurements[m].povm;
    const double dt = dt_values[t];

    const OutcomeDistribution p0 = outcome_distribution(model.psi0, povm);
    const OutcomeDistribution p1 = outcome_distribution(model.state_at(dt), povm);
    AnomalyRow row;
    row.label = measurements[m].label;
    row.dt = dt;
    row.kl = kl_divergence(p0, p1);
    row.fisher = classical_fisher_analytic(model.psi0, gen, hbar, povm).value;
    row.fisher_exponent = 0.5 * row.fisher * dt * dt;
    row.kl_ratio = row.kl / row.fisher_exponent;
    if (n_values.empty()) {
      row.n = 0;
      row.beta_exponent = kNaN;
      row.beta_ratio = kNaN;
    } else {
      row.n = n_values[c];
      const double lb = log_beta_star(p0, p1, row.n, alpha_star);
      row.beta_exponent = -lb / static_cast<double>(row.n);
      row.beta_ratio = row.beta_exponent / row.fisher_exponent;
    }
    rows[idx] = std::move(row);
  });
  return rows;
}

}  // namespace qdiscern
