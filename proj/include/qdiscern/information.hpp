// information.hpp
// Kullback divergence, classical and quantum Fisher information for the
// one-parameter family psi(t) = exp(-iH(t - t0)/hbar) psi0.

#pragma once

#include <limits>

#include "qdiscern/measurement.hpp"

namespace qdiscern {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Probabilities at or below this floor count as zero.
inline constexpr double kZeroProbability = 1e-12;

enum class FisherMethod { analytic, finite_difference, vertex_limit };

const char* to_string(FisherMethod method);

// value may be +infinity when an outcome leaves zero probability at first
// order (unreachable for valid POVMs, kept for roundoff-damaged input).
struct FisherReport {
  double value;
  FisherMethod method;
};

// D(p||q) = sum_i p_i ln(p_i / q_i) in nats. +infinity when some q_i is zero
// where p_i is not. Throws DimensionMismatch on length mismatch.
double kl_divergence(const OutcomeDistribution& p, const OutcomeDistribution& q);

// J_M(t0) = sum_x pdot_x^2 / p_x with pdot = Tr(rho_dot M). Outcomes sitting at
// p = pdot = 0 contribute the limit 2 * pddot (method vertex_limit).
FisherReport classical_fisher_analytic(const PureState& psi0, const HermitianOperator& h, double hbar,
                                       const Povm& povm);

// Central differences over +-step around t0. Throws InvalidValue when
// step < 1e-8, where roundoff dominates.
FisherReport classical_fisher_fd(const PureState& psi0, const HermitianOperator& h, double hbar,
                                 const Povm& povm, double step);

// 4 Tr(rho rho_dot^2).
double quantum_fisher(const PureState& psi0, const HermitianOperator& h, double hbar);

// 4 Var(H) / hbar^2.
double quantum_fisher_energy(const PureState& psi0, const HermitianOperator& h, double hbar);

struct ExpansionCheck {
  // D(p_{t0} || p_{t0+dtheta}) / (J/2 dtheta^2): the direction that sets the
  // Stein exponent.
  double ratio;
  // D(p_{t0+dtheta} || p_{t0}) / (J/2 dtheta^2); infinite at vertex models.
  double reverse_ratio;
  double kl;
  double reverse_kl;
  double fisher;
  // False when some outcome has zero probability at t0 but is reached at
  // second order (simplex vertex).
  bool regular;
};

// Throws InvalidValue when J_M(t0) is zero.
ExpansionCheck kl_fisher_expansion_ratio(const PureState& psi0, const HermitianOperator& h, double hbar,
                                         const Povm& povm, double dtheta);

}  // namespace qdiscern
