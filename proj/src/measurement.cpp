#include "qdiscern/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qdiscern/errors.hpp"

namespace qdiscern {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr double kSumTolerance = 1e-9;

}  // namespace

Povm::Povm(std::vector<HermitianOperator> elements) : elements_(std::move(elements)) {
  if (elements_.size() < 2) {
    throw InvalidValue("POVM needs at least two elements");
  }
  const auto d = static_cast<Eigen::Index>(elements_.front().dim());
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    if (e.dim() != elements_.front().dim()) {
      throw DimensionMismatch("POVM element " + std::to_string(i) + " has a different dimension");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(e.matrix(), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kCheckTol) {
      throw InvalidValue("POVM element " + std::to_string(i) + " is not positive semidefinite");
    }
    sum += e.matrix();
  }
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kCheckTol) {
    throw InvalidValue("POVM elements do not sum to the identity");
  }
}

OutcomeDistribution::OutcomeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw InvalidValue("empty outcome distribution");
  }
  for (auto& p : probs_) {
    if (!std::isfinite(p) || p < -kProbabilityFloor || p > 1.0 + kSumTolerance) {
      throw InvalidValue("probability out of range: " + std::to_string(p));
    }
    p = std::max(p, 0.0);
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvalidValue("probabilities sum to " + std::to_string(total) + ", not 1");
  }
  for (auto& p : probs_) {
    p /= total;
  }
}

OutcomeDistribution outcome_distribution(const PureState& psi, const Povm& povm) {
  if (psi.dim() != povm.dim()) {
    throw DimensionMismatch("state dimension does not match POVM dimension");
  }
  std::vector<double> probs;
  probs.reserve(povm.outcomes());
  for (const auto& e : povm.elements()) {
    probs.push_back(e.expectation(psi));
  }
  return OutcomeDistribution(std::move(probs));
}

Povm projector_test_povm(const PureState& psi0) {
  const CMatrix rho = psi0.density();
  const auto d = rho.rows();
  return Povm({HermitianOperator::from_computed(rho),
               HermitianOperator::from_computed(CMatrix::Identity(d, d) - rho)});
}

Povm sld_optimal_povm(const PureState& psi0, const HermitianOperator& h, double hbar) {
  if (psi0.dim() != h.dim()) {
    throw DimensionMismatch("state dimension does not match Hamiltonian dimension");
  }
  if (!(hbar > 0.0)) {
    throw InvalidValue("hbar must be positive");
  }
  const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
  const double var = energy_moments(psi0, h).variance;
  if (std::sqrt(var) <= kCheckTol * scale) {
    throw StationaryState("stationary state: energy variance vanishes, SLD is zero");
  }

  const CMatrix rho = psi0.density();
  const CMatrix rho_dot = Complex(0.0, -1.0 / hbar) * (h.matrix() * rho - rho * h.matrix());
  const CMatrix sld = 2.0 * rho_dot;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(CMatrix(0.5 * (sld + sld.adjoint())));
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();

  const double group_tol = 1e-9 * std::max(1.0, values.cwiseAbs().maxCoeff());
  std::vector<HermitianOperator> elements;
  Eigen::Index start = 0;
  const Eigen::Index d = values.size();
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && values(end) - values(start) <= group_tol) {
      ++end;
    }
    const auto block = vectors.middleCols(start, end - start);
    elements.push_back(HermitianOperator::from_computed(block * block.adjoint()));
    start = end;
  }
  return Povm(std::move(elements));
}

Povm random_povm(std::size_t dim, std::size_t outcomes, std::uint64_t seed) {
  if (dim < 2 || outcomes < 2) {
    throw InvalidValue("random POVM needs dim >= 2 and at least two outcomes");
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);

  std::vector<CMatrix> parts;
  parts.reserve(outcomes);
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < outcomes; ++k) {
    CMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double re = normal(gen);
        const double im = normal(gen);
        g(i, j) = Complex(re, im);
      }
    }
    parts.push_back(g * g.adjoint());
    sum += parts.back();
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(CMatrix(0.5 * (sum + sum.adjoint())));
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  const CMatrix s_inv_sqrt =
      eig.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();

  std::vector<HermitianOperator> elements;
  elements.reserve(outcomes);
  for (const auto& a : parts) {
    elements.push_back(HermitianOperator::from_computed(s_inv_sqrt * a * s_inv_sqrt));
  }
  return Povm(std::move(elements));
}

}  // namespace qdiscern
