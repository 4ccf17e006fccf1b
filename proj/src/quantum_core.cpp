#include "qdiscern/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdiscern/errors.hpp"

namespace qdiscern {

namespace {

double hermiticity_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double entry_scale(const CMatrix& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) +
                            " does not match " + std::to_string(b));
  }
}

}  // namespace

// --- PureState ---

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 2) {
    throw InvalidValue("pure state needs dimension >= 2");
  }
  const double norm = amplitudes_.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kConstructionTol) {
    throw InvalidValue("pure state is not normalized (norm " + std::to_string(norm) + ")");
  }
}

PureState PureState::normalized(CVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidValue("cannot normalize a zero or non-finite vector");
  }
  amplitudes /= norm;
  return PureState(std::move(amplitudes));
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) {
    throw InvalidValue("basis index out of range");
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(v));
}

Complex PureState::inner(const PureState& other) const {
  require_same_dim(dim(), other.dim(), "inner product");
  return amplitudes_.dot(other.amplitudes_);
}

double PureState::fidelity(const PureState& other) const {
  return std::norm(inner(other));
}

// --- HermitianOperator ---

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw InvalidValue("operator must be a non-empty square matrix");
  }
  if (!entries_.allFinite()) {
    throw InvalidValue("operator has non-finite entries");
  }
  if (hermiticity_defect(entries_) > kConstructionTol * entry_scale(entries_)) {
    throw InvalidValue("operator is not Hermitian");
  }
}

HermitianOperator HermitianOperator::from_computed(const CMatrix& entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw InvalidValue("operator must be a non-empty square matrix");
  }
  if (hermiticity_defect(entries) > kCheckTol * entry_scale(entries)) {
    throw InvalidValue("computed operator is not Hermitian");
  }
  return HermitianOperator(CMatrix(0.5 * (entries + entries.adjoint())), Unchecked{});
}

HermitianOperator HermitianOperator::zero(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return HermitianOperator(CMatrix::Zero(d, d));
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return HermitianOperator(CMatrix::Identity(d, d));
}

HermitianOperator HermitianOperator::operator-() const {
  return HermitianOperator(CMatrix(-entries_), Unchecked{});
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator sum");
  return HermitianOperator(CMatrix(a.entries_ + b.entries_), HermitianOperator::Unchecked{});
}

HermitianOperator operator*(double s, const HermitianOperator& a) {
  return HermitianOperator(CMatrix(s * a.entries_), HermitianOperator::Unchecked{});
}

double HermitianOperator::expectation(const PureState& psi) const {
  require_same_dim(dim(), psi.dim(), "expectation");
  return psi.amplitudes().dot(entries_ * psi.amplitudes()).real();
}

namespace pauli {

HermitianOperator x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return HermitianOperator(m);
}

HermitianOperator y() {
  CMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return HermitianOperator(m);
}

HermitianOperator z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return HermitianOperator(m);
}

}  // namespace pauli

// --- HamiltonianSchedule ---

HamiltonianSchedule::HamiltonianSchedule(std::vector<ScheduleSegment> segments, double hbar, double t0)
    : segments_(std::move(segments)), hbar_(hbar), t0_(t0) {
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
    throw InvalidValue("hbar must be positive");
  }
  if (!std::isfinite(t0_)) {
    throw InvalidValue("t0 must be finite");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const double dur = segments_[i].duration;
    if (!(dur > 0.0) || !std::isfinite(dur)) {
      throw InvalidValue("segment " + std::to_string(i) + " has non-positive duration");
    }
    require_same_dim(segments_[i].hamiltonian.dim(), segments_.front().hamiltonian.dim(),
                     "schedule segment");
  }
}

HamiltonianSchedule HamiltonianSchedule::constant(HermitianOperator h, double duration, double hbar) {
  if (duration == 0.0) {
    return HamiltonianSchedule({}, hbar);
  }
  return HamiltonianSchedule({ScheduleSegment{std::move(h), duration}}, hbar);
}

std::size_t HamiltonianSchedule::dim() const {
  return segments_.empty() ? 0 : segments_.front().hamiltonian.dim();
}

double HamiltonianSchedule::total_duration() const {
  double total = 0.0;
  for (const auto& seg : segments_) {
    total += seg.duration;
  }
  return total;
}

HamiltonianSchedule HamiltonianSchedule::rescaled(double total) const {
  if (!(total >= 0.0) || !std::isfinite(total)) {
    throw InvalidValue("rescaled duration must be finite and >= 0");
  }
  if (total == 0.0 || segments_.empty()) {
    return HamiltonianSchedule({}, hbar_, t0_);
  }
  const double factor = total / total_duration();
  std::vector<ScheduleSegment> out;
  out.reserve(segments_.size());
  for (const auto& seg : segments_) {
    out.push_back({seg.hamiltonian, seg.duration * factor});
  }
  return HamiltonianSchedule(std::move(out), hbar_, t0_);
}

// --- evolution ---

PureState propagate(const HermitianOperator& h, double t, double hbar, const PureState& psi) {
  require_same_dim(h.dim(), psi.dim(), "evolution");
  if (!(hbar > 0.0)) {
    throw InvalidValue("hbar must be positive");
  }
  if (t == 0.0) {
    return psi;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h.matrix());
  const CMatrix& v = eig.eigenvectors();
  CVector coeffs = v.adjoint() * psi.amplitudes();
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    const double phase = -eig.eigenvalues()(k) * t / hbar;
    coeffs(k) *= Complex(std::cos(phase), std::sin(phase));
  }
  return PureState::normalized(v * coeffs);
}

PureState evolve_constant(const HermitianOperator& h, double dt, double hbar, const PureState& psi) {
  if (!(dt >= 0.0)) {
    throw InvalidValue("evolution time must be >= 0");
  }
  return propagate(h, dt, hbar, psi);
}

PureState evolve_schedule(const HamiltonianSchedule& sched, const PureState& psi) {
  PureState out = psi;
  for (const auto& seg : sched.segments()) {
    out = evolve_constant(seg.hamiltonian, seg.duration, sched.hbar(), out);
  }
  return out;
}

HermitianOperator average_hamiltonian(const HamiltonianSchedule& sched) {
  const double total = sched.total_duration();
  if (!(total > 0.0)) {
    throw InvalidValue("average Hamiltonian needs a positive total duration");
  }
  const auto d = static_cast<Eigen::Index>(sched.dim());
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& seg : sched.segments()) {
    acc += seg.duration * seg.hamiltonian.matrix();
  }
  return HermitianOperator::from_computed(acc / total);
}

EnergyMoments energy_moments(const PureState& psi, const HermitianOperator& h) {
  require_same_dim(h.dim(), psi.dim(), "energy moments");
  const CVector& a = psi.amplitudes();
  const CVector ha = h.matrix() * a;
  const double mean = a.dot(ha).real();
  // ||(H - mean) psi||^2 is the variance and cannot go negative.
  const double variance = (ha - mean * a).squaredNorm();
  return {mean, variance};
}

double sudden_error_exact(const HamiltonianSchedule& sched, const PureState& psi0) {
  if (sched.empty()) {
    return 0.0;
  }
  require_same_dim(sched.dim(), psi0.dim(), "sudden error");
  const PureState evolved = evolve_schedule(sched, psi0);
  const CVector& a = psi0.amplitudes();
  const CVector& b = evolved.amplitudes();
  const CVector orth = b - a.dot(b) * a;
  return std::clamp(orth.squaredNorm(), 0.0, 1.0);
}

double sudden_error_perturbative(const HamiltonianSchedule& sched, const PureState& psi0) {
  if (sched.empty()) {
    return 0.0;
  }
  require_same_dim(sched.dim(), psi0.dim(), "sudden error");
  const double dt = sched.total_duration();
  const double var = energy_moments(psi0, average_hamiltonian(sched)).variance;
  return dt * dt * var / (sched.hbar() * sched.hbar());
}

}  // namespace qdiscern
