#include "qdiscern/hypothesis_testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qdiscern/errors.hpp"
#include "qdiscern/information.hpp"
#include "qdiscern/parallel.hpp"

namespace qdiscern {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRatioTieTol = 1e-9;

void require_alpha(double alpha_star) {
  if (!(alpha_star > 0.0 && alpha_star < 1.0)) {
    throw InvalidValue("alpha* must lie in (0, 1), got " + std::to_string(alpha_star));
  }
}

void require_pair(const OutcomeDistribution& p0, const OutcomeDistribution& p1) {
  if (p0.size() != p1.size()) {
    throw InvalidValue("p0 and p1 have different outcome counts");
  }
  if (p0.size() < 2) {
    throw InvalidValue("hypothesis test needs at least two outcomes");
  }
}

void require_feasible(std::size_t copies, std::size_t outcomes) {
  if (copies == 0) {
    throw InvalidValue("number of copies must be >= 1");
  }
  const std::uint64_t total = count_vector_total(copies, outcomes);
  if (total > kMaxCountVectors) {
    throw InfeasibleEnumeration("exact enumeration needs " + std::to_string(total) +
                                " count vectors (cap " + std::to_string(kMaxCountVectors) +
                                "); use monte_carlo_power instead");
  }
}

std::vector<double> safe_logs(const OutcomeDistribution& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
  }
  return out;
}

// ln of c_i-weighted product; zero counts never touch -inf logs.
double weighted_log(std::span<const int> counts, const std::vector<double>& logs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      acc += counts[i] * logs[i];
    }
  }
  return acc;
}

double log_ratio(double lp0, double lp1) {
  if (lp0 == kNegInf) {
    return lp1 == kNegInf ? std::numeric_limits<double>::quiet_NaN() : kInfinity;
  }
  if (lp1 == kNegInf) {
    return kNegInf;
  }
  return lp1 - lp0;
}

// One count vector: ln p0_n, ln p1_n, ln L. Vectors impossible under both
// hypotheses are dropped.
struct CountClassEntry {
  double lp0;
  double lp1;
  double llr;
};

std::vector<CountClassEntry> enumerate_entries(const OutcomeDistribution& p0, const OutcomeDistribution& p1,
                                               std::size_t copies) {
  const std::vector<double> l0 = safe_logs(p0);
  const std::vector<double> l1 = safe_logs(p1);
  const double log_n_fact = std::lgamma(static_cast<double>(copies) + 1.0);
  std::vector<CountClassEntry> entries;
  entries.reserve(static_cast<std::size_t>(count_vector_total(copies, p0.size())));
  for_each_count_vector(copies, p0.size(), [&](std::span<const int> counts) {
    double coeff = log_n_fact;
    for (int c : counts) {
      coeff -= std::lgamma(static_cast<double>(c) + 1.0);
    }
    const double a = weighted_log(counts, l0);
    const double b = weighted_log(counts, l1);
    const double llr = log_ratio(a, b);
    if (std::isnan(llr)) {
      return;
    }
    entries.push_back({coeff + a, coeff + b, llr});
  });
  return entries;
}

double log_sum_exp(const std::vector<double>& terms) {
  double hi = kNegInf;
  for (double t : terms) {
    hi = std::max(hi, t);
  }
  if (hi == kNegInf) {
    return kNegInf;
  }
  double acc = 0.0;
  for (double t : terms) {
    acc += std::exp(t - hi);
  }
  return hi + std::log(acc);
}

bool same_distribution(const OutcomeDistribution& p0, const OutcomeDistribution& p1) {
  for (std::size_t i = 0; i < p0.size(); ++i) {
    if (std::abs(p0[i] - p1[i]) > kZeroProbability) {
      return false;
    }
  }
  return true;
}

enum class Verdict { reject, boundary, accept };

Verdict classify(double llr, double log_threshold) {
  if (same_log_ratio(llr, log_threshold)) {
    return Verdict::boundary;
  }
  return llr > log_threshold ? Verdict::reject : Verdict::accept;
}

// Boundary randomization that makes the size exactly alpha_star given the
// masses strictly above and at the threshold.
double boundary_probability(double alpha_star, double mass_above, double mass_at) {
  if (!(mass_at > 0.0)) {
    return 0.0;
  }
  return std::clamp((alpha_star - mass_above) / mass_at, 0.0, 1.0);
}

struct Calibration {
  double log_threshold;
  double boundary_prob;
};

// Walks ratios in descending order, grouping ties, and stops at the first
// group whose H0 mass would overshoot alpha_star.
template <typename MassOf>
Calibration calibrate(const std::vector<double>& sorted_llr, MassOf mass_of, double alpha_star) {
  double cum = 0.0;
  std::size_t i = 0;
  while (i < sorted_llr.size()) {
    const double head = sorted_llr[i];
    double group_mass = 0.0;
    std::size_t j = i;
    while (j < sorted_llr.size() && same_log_ratio(sorted_llr[j], head)) {
      group_mass += mass_of(j);
      ++j;
    }
    if (group_mass > 0.0 && cum + group_mass > alpha_star) {
      return {head, boundary_probability(alpha_star, cum, group_mass)};
    }
    cum += group_mass;
    i = j;
  }
  // Whole H0 mass fits within alpha_star (roundoff only): reject everything.
  return {kNegInf, 1.0};
}

}  // namespace

std::uint64_t count_vector_total(std::size_t copies, std::size_t outcomes) {
  if (outcomes == 0) {
    return 0;
  }
  // C(n + k, k) with k = m - 1, built incrementally; each partial value is
  // itself a binomial coefficient so the division is exact.
  const std::uint64_t k = outcomes - 1;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t factor = copies + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * factor / i;
  }
  return result;
}

void for_each_count_vector(std::size_t copies, std::size_t outcomes,
                           const std::function<void(std::span<const int>)>& fn) {
  if (outcomes == 0) {
    return;
  }
  std::vector<int> counts(outcomes, 0);
  // Recursive walk over compositions of `copies` into `outcomes` parts.
  auto fill = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == outcomes) {
      counts[pos] = remaining;
      fn(counts);
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  fill(fill, 0, static_cast<int>(copies));
}

bool same_log_ratio(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) {
    return a == b;
  }
  return std::abs(a - b) <= kRatioTieTol * std::max({1.0, std::abs(a), std::abs(b)});
}

double LikelihoodRatioTest::threshold() const { return std::exp(log_threshold); }

LikelihoodRatioTest LikelihoodRatioTest::always_accept(std::size_t copies, std::size_t outcomes) {
  return {kInfinity, 0.0, copies, outcomes, 0.0, false};
}

LikelihoodRatioTest LikelihoodRatioTest::always_reject(std::size_t copies, std::size_t outcomes) {
  return {kNegInf, 1.0, copies, outcomes, 1.0, false};
}

LikelihoodRatioTest mp_test(const OutcomeDistribution& p0, const OutcomeDistribution& p1, std::size_t copies,
                            double alpha_star) {
  require_alpha(alpha_star);
  require_pair(p0, p1);
  require_feasible(copies, p0.size());

  std::vector<CountClassEntry> entries = enumerate_entries(p0, p1, copies);
  std::stable_sort(entries.begin(), entries.end(),
                   [](const CountClassEntry& a, const CountClassEntry& b) { return a.llr > b.llr; });
  std::vector<double> llr(entries.size());
  std::transform(entries.begin(), entries.end(), llr.begin(), [](const auto& e) { return e.llr; });

  const Calibration cal = calibrate(llr, [&](std::size_t j) { return std::exp(entries[j].lp0); }, alpha_star);

  // Recompute the randomization with the exact classification used by
  // test_performance so the achieved size matches alpha_star.
  double above = 0.0;
  double at = 0.0;
  for (const auto& e : entries) {
    switch (classify(e.llr, cal.log_threshold)) {
      case Verdict::reject:
        above += std::exp(e.lp0);
        break;
      case Verdict::boundary:
        at += std::exp(e.lp0);
        break;
      case Verdict::accept:
        break;
    }
  }
  LikelihoodRatioTest test;
  test.log_threshold = cal.log_threshold;
  test.boundary_prob = at > 0.0 ? boundary_probability(alpha_star, above, at) : cal.boundary_prob;
  test.copies = copies;
  test.outcomes = p0.size();
  test.alpha_star = alpha_star;
  test.uninformative = same_distribution(p0, p1);
  return test;
}

TestPerformance test_performance(const LikelihoodRatioTest& test, const OutcomeDistribution& p0,
                                 const OutcomeDistribution& p1) {
  require_pair(p0, p1);
  if (test.outcomes != p0.size()) {
    throw InvalidValue("test was built for a different outcome count");
  }
  if (!(test.boundary_prob >= 0.0 && test.boundary_prob <= 1.0)) {
    throw InvalidValue("boundary probability outside [0, 1]");
  }
  require_feasible(test.copies, p0.size());

  const std::vector<CountClassEntry> entries = enumerate_entries(p0, p1, test.copies);
  double alpha = 0.0;
  std::vector<double> accepted_log_p1;
  const double log_keep = test.boundary_prob < 1.0 ? std::log1p(-test.boundary_prob) : kNegInf;
  for (const auto& e : entries) {
    switch (classify(e.llr, test.log_threshold)) {
      case Verdict::reject:
        alpha += std::exp(e.lp0);
        break;
      case Verdict::boundary:
        alpha += test.boundary_prob * std::exp(e.lp0);
        if (log_keep != kNegInf && e.lp1 != kNegInf) {
          accepted_log_p1.push_back(log_keep + e.lp1);
        }
        break;
      case Verdict::accept:
        if (e.lp1 != kNegInf) {
          accepted_log_p1.push_back(e.lp1);
        }
        break;
    }
  }
  TestPerformance perf;
  perf.log_beta = std::min(log_sum_exp(accepted_log_p1), 0.0);
  perf.beta = std::exp(perf.log_beta);
  perf.power = 1.0 - perf.beta;
  perf.alpha = std::clamp(alpha, 0.0, 1.0);
  return perf;
}

double beta_star(const OutcomeDistribution& p0, const OutcomeDistribution& p1, std::size_t copies,
                 double alpha_star) {
  return std::exp(log_beta_star(p0, p1, copies, alpha_star));
}

double log_beta_star(const OutcomeDistribution& p0, const OutcomeDistribution& p1, std::size_t copies,
                     double alpha_star) {
  return test_performance(mp_test(p0, p1, copies, alpha_star), p0, p1).log_beta;
}

SteinReport stein_exponent(const OutcomeDistribution& p0, const OutcomeDistribution& p1, double alpha_star,
                           std::span<const std::size_t> copies_values) {
  require_alpha(alpha_star);
  require_pair(p0, p1);
  for (std::size_t n : copies_values) {
    require_feasible(n, p0.size());
  }
  SteinReport report;
  report.kl = kl_divergence(p0, p1);
  report.reference = std::exp(-report.kl);
  report.points.reserve(copies_values.size());
  for (std::size_t n : copies_values) {
    const double lb = log_beta_star(p0, p1, n, alpha_star);
    report.points.push_back({n, lb, std::exp(lb / static_cast<double>(n))});
  }
  return report;
}

MonteCarloPerformance monte_carlo_power(const OutcomeDistribution& p0, const OutcomeDistribution& p1,
                                        std::size_t copies, double alpha_star, std::size_t samples,
                                        std::uint64_t seed, unsigned threads) {
  require_alpha(alpha_star);
  require_pair(p0, p1);
  if (copies == 0) {
    throw InvalidValue("number of copies must be >= 1");
  }
  if (samples < 1000) {
    throw InvalidValue("Monte Carlo needs at least 1000 samples");
  }
  const std::size_t m = p0.size();
  std::vector<double> llr_per_outcome(m);
  {
    const std::vector<double> l0 = safe_logs(p0);
    const std::vector<double> l1 = safe_logs(p1);
    for (std::size_t i = 0; i < m; ++i) {
      llr_per_outcome[i] = log_ratio(l0[i], l1[i]);
    }
  }
  auto cdf_of = [m](const OutcomeDistribution& p) {
    std::vector<double> cdf(m);
    std::partial_sum(p.probs().begin(), p.probs().end(), cdf.begin());
    return cdf;
  };
  const std::vector<double> cdf0 = cdf_of(p0);
  const std::vector<double> cdf1 = cdf_of(p1);

  const std::size_t blocks = (samples + kMonteCarloBlock - 1) / kMonteCarloBlock;

  // ln L of one sampled sequence, via its count vector so that equal counts
  // give bit-identical ratios.
  auto sample_llr = [&](CounterRng& rng, const std::vector<double>& cdf, const OutcomeDistribution& p,
                        std::vector<int>& counts) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t k = 0; k < copies; ++k) {
      const double u = rng.next_unit();
      std::size_t idx = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (u < cdf[i]) {
          idx = i;
          break;
        }
      }
      if (idx == m) {
        idx = m - 1;
        while (idx > 0 && p[idx] <= 0.0) {
          --idx;
        }
      }
      ++counts[idx];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (counts[i] > 0) {
        acc += counts[i] * llr_per_outcome[i];
      }
    }
    return acc;
  };
  auto block_range = [&](std::size_t b) {
    const std::size_t begin = b * kMonteCarloBlock;
    return std::pair{begin, std::min(samples, begin + kMonteCarloBlock)};
  };

  // Stream 0: calibration sample under H0.
  std::vector<double> calib(samples);
  parallel_for(blocks, threads, [&](std::size_t b) {
    CounterRng rng(derive_seed(seed, 0, b));
    std::vector<int> counts(m);
    const auto [begin, end] = block_range(b);
    for (std::size_t s = begin; s < end; ++s) {
      calib[s] = sample_llr(rng, cdf0, p0, counts);
    }
  });
  std::sort(calib.begin(), calib.end(), std::greater<>());
  const double unit_mass = 1.0 / static_cast<double>(samples);
  const Calibration cal = calibrate(calib, [&](std::size_t) { return unit_mass; }, alpha_star);

  LikelihoodRatioTest test;
  test.log_threshold = cal.log_threshold;
  test.boundary_prob = cal.boundary_prob;
  test.copies = copies;
  test.outcomes = m;
  test.alpha_star = alpha_star;
  test.uninformative = same_distribution(p0, p1);

  // Streams 1 and 2: evaluation under H0 and H1. Integer tallies per block.
  struct Tally {
    std::uint64_t above = 0;
    std::uint64_t at = 0;
  };
  std::vector<Tally> tally0(blocks);
  std::vector<Tally> tally1(blocks);
  parallel_for(2 * blocks, threads, [&](std::size_t job) {
    const bool under_h1 = job >= blocks;
    const std::size_t b = under_h1 ? job - blocks : job;
    CounterRng rng(derive_seed(seed, under_h1 ? 2 : 1, b));
    std::vector<int> counts(m);
    Tally t;
    const auto [begin, end] = block_range(b);
    for (std::size_t s = begin; s < end; ++s) {
      const double llr = under_h1 ? sample_llr(rng, cdf1, p1, counts) : sample_llr(rng, cdf0, p0, counts);
      switch (classify(llr, test.log_threshold)) {
        case Verdict::reject:
          ++t.above;
          break;
        case Verdict::boundary:
          ++t.at;
          break;
        case Verdict::accept:
          break;
      }
    }
    (under_h1 ? tally1 : tally0)[b] = t;
  });
  auto total = [](const std::vector<Tally>& ts) {
    Tally sum;
    for (const auto& t : ts) {
      sum.above += t.above;
      sum.at += t.at;
    }
    return sum;
  };
  const Tally h0 = total(tally0);
  const Tally h1 = total(tally1);
  const double n_samples = static_cast<double>(samples);
  const double alpha_hat =
      (static_cast<double>(h0.above) + test.boundary_prob * static_cast<double>(h0.at)) / n_samples;
  const double power_hat =
      (static_cast<double>(h1.above) + test.boundary_prob * static_cast<double>(h1.at)) / n_samples;

  MonteCarloPerformance out;
  out.estimate.alpha = std::clamp(alpha_hat, 0.0, 1.0);
  out.estimate.beta = std::clamp(1.0 - power_hat, 0.0, 1.0);
  out.estimate.power = 1.0 - out.estimate.beta;
  out.estimate.log_beta = std::log(out.estimate.beta);
  auto half_width = [n_samples](double p) { return 1.96 * std::sqrt(p * (1.0 - p) / n_samples); };
  out.alpha_half_width = half_width(out.estimate.alpha);
  out.beta_half_width = half_width(out.estimate.beta);
  out.calibrated = test;
  out.samples = samples;
  return out;
}

double power_approx_stein(std::size_t copies, double kl) {
  if (!(kl >= 0.0)) {
    throw InvalidValue("KL divergence must be >= 0");
  }
  return -std::expm1(-static_cast<double>(copies) * kl);
}

double power_approx_fisher(std::size_t copies, double fisher, double dt) {
  if (!(fisher >= 0.0)) {
    throw InvalidValue("Fisher information must be >= 0");
  }
  return -std::expm1(-0.5 * static_cast<double>(copies) * fisher * dt * dt);
}

GammaMax gamma_max(std::size_t copies, double energy_variance, double dt, double hbar) {
  if (!(energy_variance >= 0.0) || !(hbar > 0.0)) {
    throw InvalidValue("gamma_max needs variance >= 0 and hbar > 0");
  }
  const double weak = 2.0 * static_cast<double>(copies) * dt * dt * energy_variance / (hbar * hbar);
  return {-std::expm1(-weak), weak};
}

}  // namespace qdiscern
