// quantum_core.hpp
// Pure states, Hermitian operators, piecewise-constant Hamiltonian schedules,
// unitary evolution and the sudden-approximation error probability.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace qdiscern {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Tolerance applied when values enter the library.
inline constexpr double kConstructionTol = 1e-12;
// Tolerance for checks on computed results.
inline constexpr double kCheckTol = 1e-10;

class PureState {
 public:
  // Throws InvalidValue unless dim >= 2 and | ||amplitudes|| - 1 | <= 1e-12.
  explicit PureState(CVector amplitudes);

  // Divides by the norm first; throws on a zero vector.
  static PureState normalized(CVector amplitudes);

  static PureState basis(std::size_t dim, std::size_t index);

  const CVector& amplitudes() const { return amplitudes_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

  // <this|other>
  Complex inner(const PureState& other) const;

  // |<this|other>|^2
  double fidelity(const PureState& other) const;

  CMatrix density() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  CVector amplitudes_;
};

class HermitianOperator {
 public:
  // Throws InvalidValue unless square, non-empty and A == A^dagger within
  // 1e-12 (scaled by max(1, max|A_ij|)).
  explicit HermitianOperator(CMatrix entries);

  // For matrices produced by arithmetic inside the library: checked at the
  // looser post-check tolerance, then symmetrized exactly.
  static HermitianOperator from_computed(const CMatrix& entries);

  static HermitianOperator zero(std::size_t dim);
  static HermitianOperator identity(std::size_t dim);

  const CMatrix& matrix() const { return entries_; }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }

  HermitianOperator operator-() const;
  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);
  friend HermitianOperator operator*(double s, const HermitianOperator& a);

  // <psi|A|psi>, real by Hermiticity.
  double expectation(const PureState& psi) const;

 private:
  struct Unchecked {};
  HermitianOperator(CMatrix entries, Unchecked) : entries_(std::move(entries)) {}

  CMatrix entries_;
};

namespace pauli {
HermitianOperator x();
HermitianOperator y();
HermitianOperator z();
}  // namespace pauli

struct ScheduleSegment {
  HermitianOperator hamiltonian;
  double duration;
};

// Piecewise-constant H(t) on [t0, t0 + total_duration()].
class HamiltonianSchedule {
 public:
  HamiltonianSchedule() = default;
  // Throws InvalidValue on non-positive duration or hbar, DimensionMismatch
  // when segment operators disagree in dimension.
  HamiltonianSchedule(std::vector<ScheduleSegment> segments, double hbar = 1.0, double t0 = 0.0);

  static HamiltonianSchedule constant(HermitianOperator h, double duration, double hbar = 1.0);

  const std::vector<ScheduleSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  // Zero for an empty schedule.
  std::size_t dim() const;
  double hbar() const { return hbar_; }
  double t0() const { return t0_; }
  double total_duration() const;

  // Same segment shapes with every duration scaled so the total becomes
  // `total`. total == 0 gives the empty schedule.
  HamiltonianSchedule rescaled(double total) const;

 private:
  std::vector<ScheduleSegment> segments_;
  double hbar_ = 1.0;
  double t0_ = 0.0;
};

struct EnergyMoments {
  double mean;
  double variance;
};

// exp(-i H dt / hbar) psi via the eigendecomposition of H. Requires dt >= 0.
PureState evolve_constant(const HermitianOperator& h, double dt, double hbar, const PureState& psi);

// Same as evolve_constant but accepts negative times (backwards evolution).
PureState propagate(const HermitianOperator& h, double t, double hbar, const PureState& psi);

// Ordered product of per-segment propagators; the empty schedule is the identity.
PureState evolve_schedule(const HamiltonianSchedule& sched, const PureState& psi);

// sum_i H_i dur_i / total_duration. Throws InvalidValue on zero total duration.
HermitianOperator average_hamiltonian(const HamiltonianSchedule& sched);

EnergyMoments energy_moments(const PureState& psi, const HermitianOperator& h);

// w = <0|U^dagger Q0 U|0>, evaluated as ||Q0 U psi0||^2.
double sudden_error_exact(const HamiltonianSchedule& sched, const PureState& psi0);

// Leading term dt^2 Var(Hbar) / hbar^2; unbounded for large dt.
double sudden_error_perturbative(const HamiltonianSchedule& sched, const PureState& psi0);

}  // namespace qdiscern
