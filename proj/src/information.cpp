#include "qdiscern/information.hpp"

#include <algorithm>
#include <cmath>

#include "qdiscern/errors.hpp"

namespace qdiscern {

namespace {

// Re Tr(A B) without forming the product.
double trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum().real();
}

struct Derivatives {
  CMatrix rho;
  CMatrix rho_dot;
  CMatrix rho_ddot;
};

Derivatives density_derivatives(const PureState& psi0, const HermitianOperator& h, double hbar) {
  if (psi0.dim() != h.dim()) {
    throw DimensionMismatch("state dimension does not match Hamiltonian dimension");
  }
  if (!(hbar > 0.0)) {
    throw InvalidValue("hbar must be positive");
  }
  const CMatrix& hm = h.matrix();
  Derivatives out;
  out.rho = psi0.density();
  const CMatrix comm = hm * out.rho - out.rho * hm;
  out.rho_dot = Complex(0.0, -1.0 / hbar) * comm;
  out.rho_ddot = (-1.0 / (hbar * hbar)) * (hm * comm - comm * hm);
  return out;
}

void require_matching_povm(const PureState& psi0, const Povm& povm) {
  if (psi0.dim() != povm.dim()) {
    throw DimensionMismatch("state dimension does not match POVM dimension");
  }
}

}  // namespace

const char* to_string(FisherMethod method) {
  switch (method) {
    case FisherMethod::analytic:
      return "analytic";
    case FisherMethod::finite_difference:
      return "finite-difference";
    case FisherMethod::vertex_limit:
      return "vertex-limit";
  }
  return "unknown";
}

double kl_divergence(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("KL divergence of distributions with different outcome counts");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= kZeroProbability) {
      continue;
    }
    if (q[i] <= kZeroProbability) {
      return kInfinity;
    }
    d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

FisherReport classical_fisher_analytic(const PureState& psi0, const HermitianOperator& h, double hbar,
                                       const Povm& povm) {
  require_matching_povm(psi0, povm);
  const Derivatives der = density_derivatives(psi0, h, hbar);
  FisherReport report{0.0, FisherMethod::analytic};
  for (const auto& e : povm.elements()) {
    const double p = trace_product(der.rho, e.matrix());
    const double p_dot = trace_product(der.rho_dot, e.matrix());
    if (p > kZeroProbability) {
      report.value += p_dot * p_dot / p;
    } else if (std::abs(p_dot) <= kZeroProbability) {
      // p(t) ~ pddot (t - t0)^2 / 2, so pdot^2 / p -> 2 pddot.
      const double p_ddot = trace_product(der.rho_ddot, e.matrix());
      report.value += 2.0 * std::max(p_ddot, 0.0);
      report.method = FisherMethod::vertex_limit;
    } else {
      return {kInfinity, FisherMethod::analytic};
    }
  }
  return report;
}

FisherReport classical_fisher_fd(const PureState& psi0, const HermitianOperator& h, double hbar,
                                 const Povm& povm, double step) {
  if (!(step >= 1e-8)) {
    throw InvalidValue("finite-difference step below 1e-8 is roundoff dominated");
  }
  require_matching_povm(psi0, povm);
  const OutcomeDistribution p0 = outcome_distribution(psi0, povm);
  const OutcomeDistribution plus = outcome_distribution(propagate(h, step, hbar, psi0), povm);
  const OutcomeDistribution minus = outcome_distribution(propagate(h, -step, hbar, psi0), povm);

  FisherReport report{0.0, FisherMethod::finite_difference};
  for (std::size_t i = 0; i < p0.size(); ++i) {
    const double p_dot = (plus[i] - minus[i]) / (2.0 * step);
    if (p0[i] > kZeroProbability) {
      report.value += p_dot * p_dot / p0[i];
    } else {
      const double p_ddot = (plus[i] - 2.0 * p0[i] + minus[i]) / (step * step);
      if (p_ddot > kZeroProbability) {
        report.value += 2.0 * p_ddot;
        report.method = FisherMethod::vertex_limit;
      }
    }
  }
  return report;
}

double quantum_fisher(const PureState& psi0, const HermitianOperator& h, double hbar) {
  const Derivatives der = density_derivatives(psi0, h, hbar);
  const double value = 4.0 * trace_product(der.rho, der.rho_dot * der.rho_dot);
  return std::max(value, 0.0);
}

double quantum_fisher_energy(const PureState& psi0, const HermitianOperator& h, double hbar) {
  if (!(hbar > 0.0)) {
    throw InvalidValue("hbar must be positive");
  }
  return 4.0 * energy_moments(psi0, h).variance / (hbar * hbar);
}

ExpansionCheck kl_fisher_expansion_ratio(const PureState& psi0, const HermitianOperator& h, double hbar,
                                         const Povm& povm, double dtheta) {
  if (!(dtheta != 0.0) || !std::isfinite(dtheta)) {
    throw InvalidValue("dtheta must be finite and non-zero");
  }
  const FisherReport fisher = classical_fisher_analytic(psi0, h, hbar, povm);
  if (!(fisher.value > 0.0)) {
    throw InvalidValue("zero Fisher information: expansion ratio undefined");
  }
  const OutcomeDistribution p_ref = outcome_distribution(psi0, povm);
  const OutcomeDistribution p_moved = outcome_distribution(propagate(h, dtheta, hbar, psi0), povm);

  ExpansionCheck out{};
  out.fisher = fisher.value;
  out.kl = kl_divergence(p_ref, p_moved);
  out.reverse_kl = kl_divergence(p_moved, p_ref);
  const double predicted = 0.5 * fisher.value * dtheta * dtheta;
  out.ratio = out.kl / predicted;
  out.reverse_ratio = out.reverse_kl / predicted;

  const Derivatives der = density_derivatives(psi0, h, hbar);
  out.regular = true;
  for (const auto& e : povm.elements()) {
    if (trace_product(der.rho, e.matrix()) <= kZeroProbability &&
        trace_product(der.rho_ddot, e.matrix()) > kZeroProbability) {
      out.regular = false;
    }
  }
  return out;
}

}  // namespace qdiscern
