// hypothesis_testing.hpp
// Most powerful tests of H0: p0 against H1: p1 from n i.i.d. discrete
// outcomes, their exact error probabilities, Stein exponents and the
// closed-form power approximations.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qdiscern/measurement.hpp"

namespace qdiscern {

// Upper bound on the number of count vectors enumerated exactly.
inline constexpr std::uint64_t kMaxCountVectors = 2'000'000;

// C(n + m - 1, m - 1), saturating at UINT64_MAX.
std::uint64_t count_vector_total(std::size_t copies, std::size_t outcomes);

// Calls fn(counts) for every vector of m non-negative counts summing to n,
// in lexicographically decreasing order of counts[0], counts[1], ...
void for_each_count_vector(std::size_t copies, std::size_t outcomes,
                           const std::function<void(std::span<const int>)>& fn);

// Equality of log likelihood ratios up to accumulated roundoff. Equal
// infinities compare equal.
bool same_log_ratio(double a, double b);

// Randomized likelihood ratio test: reject H0 when ln L > log_threshold,
// reject with probability boundary_prob when ln L == log_threshold, accept
// otherwise. L = p_n(x|H1) / p_n(x|H0).
struct LikelihoodRatioTest {
  double log_threshold;
  double boundary_prob;
  std::size_t copies;
  std::size_t outcomes;
  double alpha_star;
  // p0 == p1: every sample ties, power equals alpha_star.
  bool uninformative = false;

  double threshold() const;

  static LikelihoodRatioTest always_accept(std::size_t copies, std::size_t outcomes);
  static LikelihoodRatioTest always_reject(std::size_t copies, std::size_t outcomes);
};

struct TestPerformance {
  double alpha;
  double beta;
  double power;
  // ln beta, finite even when beta underflows.
  double log_beta;
};

// Exact most powerful test of size alpha_star by count-vector enumeration.
// Throws InvalidValue for alpha_star outside (0, 1) or mismatched outcome
// counts, InfeasibleEnumeration beyond kMaxCountVectors.
LikelihoodRatioTest mp_test(const OutcomeDistribution& p0, const OutcomeDistribution& p1, std::size_t copies,
                            double alpha_star);

TestPerformance test_performance(const LikelihoodRatioTest& test, const OutcomeDistribution& p0,
                                 const OutcomeDistribution& p1);

// Minimal type-II error of a size-alpha_star test.
double beta_star(const OutcomeDistribution& p0, const OutcomeDistribution& p1, std::size_t copies,
                 double alpha_star);
double log_beta_star(const OutcomeDistribution& p0, const OutcomeDistribution& p1, std::size_t copies,
                     double alpha_star);

struct SteinPoint {
  std::size_t copies;
  double log_beta;
  // (beta_n*)^{1/n}
  double root;
};

struct SteinReport {
  std::vector<SteinPoint> points;
  double kl;
  // exp(-D(p0||p1))
  double reference;
};

SteinReport stein_exponent(const OutcomeDistribution& p0, const OutcomeDistribution& p1, double alpha_star,
                           std::span<const std::size_t> copies_values);

struct MonteCarloPerformance {
  TestPerformance estimate;
  // 95% binomial half-widths.
  double alpha_half_width;
  double beta_half_width;
  // The test calibrated on the H0 calibration sample.
  LikelihoodRatioTest calibrated;
  std::size_t samples;
};

// Samples per independently keyed block; blocks are the unit of parallel work.
inline constexpr std::size_t kMonteCarloBlock = 4096;

// Calibrates the threshold on an H0 sample, then estimates alpha and beta on
// fresh H0 and H1 samples. Output depends only on the arguments, not on
// `threads`. Throws InvalidValue for samples < 1000.
MonteCarloPerformance monte_carlo_power(const OutcomeDistribution& p0, const OutcomeDistribution& p1,
                                        std::size_t copies, double alpha_star, std::size_t samples,
                                        std::uint64_t seed, unsigned threads = 1);

// 1 - exp(-n D).
double power_approx_stein(std::size_t copies, double kl);

// 1 - exp(-(n/2) J dt^2).
double power_approx_fisher(std::size_t copies, double fisher, double dt);

struct GammaMax {
  // 1 - exp(-2 n dt^2 dH2 / hbar^2)
  double value;
  // 2 n dt^2 dH2 / hbar^2
  double weak_signal;
};

GammaMax gamma_max(std::size_t copies, double energy_variance, double dt, double hbar);

}  // namespace qdiscern
