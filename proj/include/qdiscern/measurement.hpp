// measurement.hpp
// Finite POVMs and the outcome distributions they induce on pure states.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdiscern/quantum_core.hpp"

namespace qdiscern {

class Povm {
 public:
  // Requires m >= 2 elements of equal dimension, each PSD (min eigenvalue
  // >= -1e-10), summing to the identity within 1e-10 entrywise.
  explicit Povm(std::vector<HermitianOperator> elements);

  const std::vector<HermitianOperator>& elements() const { return elements_; }
  std::size_t outcomes() const { return elements_.size(); }
  std::size_t dim() const { return elements_.front().dim(); }

 private:
  std::vector<HermitianOperator> elements_;
};

// Probabilities over outcome indices 0..m-1.
class OutcomeDistribution {
 public:
  // Entries in [-1e-12, 0) are clamped to 0. The sum must be within 1e-9 of
  // one; the stored vector is renormalized to sum to one.
  explicit OutcomeDistribution(std::vector<double> probs);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

// p_i = <psi|M_i|psi>.
OutcomeDistribution outcome_distribution(const PureState& psi, const Povm& povm);

// {|0><0|, Q0 = 1 - |0><0|}.
Povm projector_test_povm(const PureState& psi0);

// Spectral projectors of the symmetric logarithmic derivative L = 2 drho/dt
// with drho/dt = -(i/hbar)[H, |0><0|]. Eigenvalues closer than 1e-9 (relative
// to the largest) share one projector. Throws StationaryState when the
// energy variance vanishes.
Povm sld_optimal_povm(const PureState& psi0, const HermitianOperator& h, double hbar);

// m random PSD matrices A_k = G G^dagger (complex Ginibre G), normalized as
// S^{-1/2} A_k S^{-1/2} with S = sum A_k. Deterministic in `seed`.
Povm random_povm(std::size_t dim, std::size_t outcomes, std::uint64_t seed);

}  // namespace qdiscern
