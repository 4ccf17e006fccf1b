// experiments.hpp
// End-to-end studies tying the evolution model to the optimal tests.
//
// A model is a reference state psi0 and a schedule shape. The state at
// offset dt is evolve_schedule(schedule.rescaled(dt), psi0), so the
// generator of the family at t0 is the schedule's average Hamiltonian and
// every Fisher quantity below is taken with respect to it.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdiscern/hypothesis_testing.hpp"
#include "qdiscern/information.hpp"
#include "qdiscern/measurement.hpp"
#include "qdiscern/quantum_core.hpp"

namespace qdiscern {

struct Model {
  PureState psi0;
  HamiltonianSchedule schedule;
  std::string description;

  double hbar() const { return schedule.hbar(); }
  HermitianOperator generator() const { return average_hamiltonian(schedule); }
  double energy_variance() const { return energy_moments(psi0, generator()).variance; }
  PureState state_at(double dt) const { return evolve_schedule(schedule.rescaled(dt), psi0); }
};

// Qubit (|+>, sigma_z) with unit-duration schedule.
Model qubit_model(double hbar = 1.0);

struct MeasurementChoice {
  std::string label;
  Povm povm;
};

MeasurementChoice pi_measurement(const Model& model);
// Throws StationaryState for zero-variance models.
MeasurementChoice sld_measurement(const Model& model);
// `count` POVMs labelled random0, random1, ... with dim outcomes each.
std::vector<MeasurementChoice> random_measurements(const Model& model, std::size_t count, std::uint64_t seed);

struct SweepConfig {
  std::vector<double> dt_values;
  std::vector<std::size_t> n_values;
  double alpha_star = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Used for points beyond the enumeration cap; 0 disables the fallback.
  std::size_t monte_carlo_samples = 0;
};

struct SweepRow {
  double dt;
  std::size_t n;
  std::string label;
  double exact_power;
  double alpha;
  double gamma_max_prediction;
  double stein_prediction;
  double fisher_prediction;
  double fisher_value;
  double kl_value;
  // "exact" or "monte-carlo"
  std::string method;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string model_description;
  std::uint64_t seed;
  double hbar;
  double alpha_star;
  double energy_variance;
};

// Rows ordered by (measurement, dt, n) in input order.
SweepResult discernibility_sweep(const Model& model, const std::vector<MeasurementChoice>& measurements,
                                 const SweepConfig& config);

struct OptimalityReport {
  double quantum_fisher;
  double quantum_fisher_energy;
  double pi_fisher;
  std::optional<double> sld_fisher;
  std::vector<double> random_fisher;
  double max_random_fisher;
  // Random POVMs whose Fisher information exceeds J^s + 1e-8.
  std::size_t violations;
};

OptimalityReport measurement_optimality_study(const Model& model, std::size_t trials, std::uint64_t seed,
                                              unsigned threads = 1);

struct SuddenScalingRow {
  double dt;
  double exact;
  double perturbative;
  double residual;
};

struct SuddenScalingReport {
  std::vector<SuddenScalingRow> rows;
  // Log-log slope of the residual; NaN when fewer than two usable points.
  double slope;
  std::size_t points_used;
  bool order_ok;
};

inline constexpr double kResidualFloor = 1e-13;
inline constexpr std::size_t kSlopeFitPoints = 5;

// Fits the slope on the 5 smallest dt values whose residual exceeds 1e-13.
SuddenScalingReport sudden_scaling_study(const Model& model, const std::vector<double>& dt_values);

struct ConditionResult {
  double value;
  bool satisfied;
};

inline constexpr double kDefaultConditionThreshold = 0.1;

// value = 2 n dt^2 dH2 / hbar^2, satisfied iff value <= threshold.
ConditionResult uncertainty_condition(std::size_t n, double dt, double energy_variance, double hbar,
                                      double threshold = kDefaultConditionThreshold);

struct AnomalyRow {
  std::string label;
  double dt;
  std::size_t n;
  double kl;
  double fisher;
  // J dt^2 / 2
  double fisher_exponent;
  double kl_ratio;
  // -ln(beta_n*) / n
  double beta_exponent;
  double beta_ratio;
};

// Rows for the Pi and SLD measurements, ordered by (measurement, dt, n).
std::vector<AnomalyRow> vertex_anomaly_study(const Model& model, const std::vector<double>& dt_values,
                                             const std::vector<std::size_t>& n_values, double alpha_star,
                                             unsigned threads = 1);

}  // namespace qdiscern
