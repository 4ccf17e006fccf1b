// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are fixed here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qdiscern/cli/commands.hpp"
#include "qdiscern/experiments.hpp"

using namespace qdiscern;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_s > 0.0 && secs > limit_s) {
    out.pass = false;
    out.detail += " [runtime limit exceeded]";
  }
  if (!out.pass) {
    ++failures;
  }
  std::printf("[%s] criterion %d %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

void info(const std::string& text) {
  std::printf("       info: %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CMatrix gaussian_matrix(std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double re = g(gen);
      const double im = g(gen);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

Model random_model(std::size_t d, std::mt19937_64& gen) {
  const CMatrix g = gaussian_matrix(d, gen);
  const HermitianOperator h(CMatrix(0.5 * (g + g.adjoint())));
  const CMatrix s = gaussian_matrix(d, gen);
  return Model{PureState::normalized(s.col(0)), HamiltonianSchedule::constant(h, 1.0), "random"};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  }
  return out;
}

const OutcomeDistribution kFair({0.5, 0.5});

// Worst relative error on (1 - power) against gamma_max over the weak-signal grid.
struct GammaScan {
  double worst;
  std::size_t n;
  double dt;
  std::size_t points;
};

GammaScan gamma_scan(double alpha_star) {
  const Model qubit = qubit_model();
  SweepConfig cfg;
  for (int k = 1; k <= 50; ++k) {
    cfg.dt_values.push_back(0.001 * k);
  }
  for (std::size_t n = 1; n <= 50; ++n) {
    cfg.n_values.push_back(n);
  }
  cfg.alpha_star = alpha_star;
  cfg.threads = 0;
  const SweepResult r = discernibility_sweep(qubit, {sld_measurement(qubit)}, cfg);
  GammaScan scan{0.0, 0, 0.0, 0};
  for (const auto& row : r.rows) {
    const ConditionResult cond = uncertainty_condition(row.n, row.dt, r.energy_variance, r.hbar, 0.1);
    if (!cond.satisfied) {
      continue;
    }
    ++scan.points;
    const double err = rel(1.0 - row.exact_power, 1.0 - row.gamma_max_prediction);
    if (err > scan.worst) {
      scan = {err, row.n, row.dt, scan.points};
    }
  }
  return scan;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// D / (J dtheta^2 / 2) for 20 random models with interior outcome statistics.
std::vector<double> regular_ratios(double step) {
  std::mt19937_64 gen(8008);
  std::vector<double> out;
  std::uint64_t seed = 1;
  while (out.size() < 20) {
    const Model m = random_model(2 + out.size() % 3, gen);
    const Povm povm = random_povm(m.psi0.dim(), 2 + out.size() % 4, seed++);
    const ExpansionCheck c = kl_fisher_expansion_ratio(m.psi0, m.generator(), m.hbar(), povm, step);
    if (c.regular) {
      out.push_back(c.ratio);
    }
  }
  return out;
}

}  // namespace

int main() {
  // 1. Fisher attainment.
  report(1, "Fisher attainment", 10.0, [] {
    const Model q = qubit_model();
    const double js = quantum_fisher_energy(q.psi0, q.generator(), q.hbar());
    const double jpi = classical_fisher_analytic(q.psi0, q.generator(), q.hbar(), pi_measurement(q).povm).value;
    const double jsld = classical_fisher_analytic(q.psi0, q.generator(), q.hbar(), sld_measurement(q).povm).value;
    bool ok = rel(js, 4.0) <= 1e-8 && rel(jpi, 4.0) <= 1e-8 && rel(jsld, 4.0) <= 1e-8;
    std::mt19937_64 gen(1001);
    double worst = 0.0;
    std::size_t models = 0;
    for (std::size_t d : {2u, 3u, 4u, 8u}) {
      for (int k = 0; k < 30; ++k) {
        const Model m = random_model(d, gen);
        const double target = quantum_fisher_energy(m.psi0, m.generator(), m.hbar());
        for (const auto& mc : {pi_measurement(m), sld_measurement(m)}) {
          const double j = classical_fisher_analytic(m.psi0, m.generator(), m.hbar(), mc.povm).value;
          worst = std::max(worst, rel(j, target));
        }
        ++models;
      }
    }
    ok = ok && worst <= 1e-8 && models >= 100;
    return Outcome{ok, "qubit J_pi=" + fmt("%.12g", jpi) + " J_sld=" + fmt("%.12g", jsld) + " J^s=" + fmt("%.12g", js) +
                           "; " + std::to_string(models) + " random models, worst rel gap " + fmt("%.3g", worst)};
  });

  // 2. Information inequality.
  report(2, "information inequality", 30.0, [] {
    std::mt19937_64 gen(2002);
    std::vector<Model> models{qubit_model()};
    for (std::size_t d : {2u, 3u, 4u, 8u}) {
      models.push_back(random_model(d, gen));
      models.push_back(random_model(d, gen));
    }
    std::size_t violations = 0, sampled = 0;
    double worst_excess = -kInfinity;
    for (std::size_t i = 0; i < models.size(); ++i) {
      const OptimalityReport r = measurement_optimality_study(models[i], 200, 50 + i, 0);
      violations += r.violations;
      sampled += r.random_fisher.size();
      worst_excess = std::max(worst_excess, r.max_random_fisher - r.quantum_fisher_energy);
    }
    return Outcome{violations == 0 && worst_excess <= 1e-8,
                   std::to_string(sampled) + " POVMs over " + std::to_string(models.size()) +
                       " models, max (J_M - J^s) = " + fmt("%.3g", worst_excess)};
  });

  // 3. Sudden approximation order.
  report(3, "sudden approximation order", 0.0, [] {
    const std::vector<double> dts = log_grid(1e-3, 1e-1, 21);
    const SuddenScalingReport q = sudden_scaling_study(qubit_model(), dts);
    const Model two{PureState::normalized(CVector::Ones(2)),
                    HamiltonianSchedule({{pauli::z(), 0.5}, {pauli::x(), 0.5}}), "two-segment"};
    const SuddenScalingReport t = sudden_scaling_study(two, dts);
    CVector v(2);
    v << 0.8, Complex(0.0, 0.6);
    const Model generic{PureState(v),
                        HamiltonianSchedule({{pauli::z() + 0.5 * pauli::x(), 1.0}, {pauli::y(), 2.0}}), "generic"};
    const SuddenScalingReport g = sudden_scaling_study(generic, dts);
    double closed = 0.0;
    for (const auto& row : q.rows) {
      closed = std::max(closed, std::abs(row.exact - std::sin(row.dt) * std::sin(row.dt)));
    }
    return Outcome{q.slope >= 3.0 && t.slope >= 3.0 && g.slope >= 3.0 && closed <= 1e-12,
                   "qubit slope " + fmt("%.4f", q.slope) + ", two-segment slopes " + fmt("%.4f", t.slope) + " and " +
                       fmt("%.4f", g.slope) +
                       ", max |w - sin^2| " + fmt("%.2g", closed)};
  });

  // 4. Neyman-Pearson exactness.
  report(4, "Neyman-Pearson exactness", 60.0, [] {
    const OutcomeDistribution p1({0.2, 0.8});
    const TestPerformance perf = test_performance(mp_test(kFair, p1, 2, 0.25), kFair, p1);
    bool ok = std::abs(perf.power - 0.64) <= 1e-12;
    std::mt19937_64 gen(4004);
    std::uniform_real_distribution<double> u(0.02, 0.98), level(0.01, 0.5);
    double worst_gap = -kInfinity;
    std::size_t cases = 0;
    for (int n = 1; n <= 6; ++n) {
      const int pairs = n <= 4 ? 40 : (n == 5 ? 10 : 3);
      for (int t = 0; t < pairs; ++t) {
        const double a = u(gen), b = u(gen), alpha = level(gen);
        const OutcomeDistribution q0({a, 1.0 - a}), q1({b, 1.0 - b});
        const double lrt = test_performance(mp_test(q0, q1, static_cast<std::size_t>(n), alpha), q0, q1).power;
        // Deterministic rules over the 2^n sequences, grouped by count class.
        std::vector<double> s0(n + 1), s1(n + 1);
        std::vector<int> sizes(n + 1);
        for (int c = 0; c <= n; ++c) {
          s0[c] = std::pow(a, n - c) * std::pow(1.0 - a, c);
          s1[c] = std::pow(b, n - c) * std::pow(1.0 - b, c);
          sizes[c] = static_cast<int>(std::round(std::tgamma(n + 1.0) / (std::tgamma(c + 1.0) * std::tgamma(n - c + 1.0))));
        }
        double best = 0.0;
        std::function<void(int, double, double)> walk = [&](int c, double size, double power) {
          if (size > alpha + 1e-12) return;
          if (c > n) {
            best = std::max(best, power);
            return;
          }
          for (int r = 0; r <= sizes[c]; ++r) walk(c + 1, size + r * s0[c], power + r * s1[c]);
        };
        walk(0, 0.0, 0.0);
        worst_gap = std::max(worst_gap, best - lrt);
        ++cases;
      }
    }
    ok = ok && worst_gap <= 1e-12;
    return Outcome{ok, "two-copy power " + fmt("%.15f", perf.power) + "; " + std::to_string(cases) +
                           " exhaustive cases, max (deterministic - LRT) = " + fmt("%.3g", worst_gap)};
  });

  // 5. Stein's lemma.
  report(5, "Stein exponent", 60.0, [] {
    const OutcomeDistribution p1({0.8, 0.2});
    std::vector<std::size_t> ns;
    for (std::size_t n = 10; n <= 200; n += 5) ns.push_back(n);
    const SteinReport r = stein_exponent(kFair, p1, 0.05, ns);
    std::vector<double> x, y;
    for (const auto& p : r.points) {
      x.push_back(static_cast<double>(p.copies));
      y.push_back(p.log_beta);
    }
    const double slope = slope_fit(x, y);
    const double target = -std::log(1.25);
    const double root = r.points.back().root;
    const bool ok = std::abs(slope / target - 1.0) <= 0.10 && root >= 0.76 && root <= 0.84;
    return Outcome{ok, "slope " + fmt("%.5f", slope) + " vs " + fmt("%.5f", target) + " (ratio " +
                           fmt("%.4f", slope / target) + "), root at n=200 " + fmt("%.5f", root) +
                           " vs window [0.76, 0.84]"};
  });
  {
    const OutcomeDistribution p1({0.8, 0.2});
    std::vector<std::size_t> ns;
    for (std::size_t n = 2000; n <= 20000; n += 2000) ns.push_back(n);
    const SteinReport r = stein_exponent(kFair, p1, 0.05, ns);
    std::vector<double> x, y;
    for (const auto& p : r.points) {
      x.push_back(static_cast<double>(p.copies));
      y.push_back(p.log_beta);
    }
    const double slope = slope_fit(x, y);
    info("same fit over n in [2000, 20000]: slope ratio " + fmt("%.4f", slope / -std::log(1.25)) +
         ", root at n=20000 " + fmt("%.5f", r.points.back().root));
  }

  // 6. gamma_max prediction.
  report(6, "gamma_max prediction", 0.0, [] {
    const GammaScan s = gamma_scan(0.05);
    return Outcome{s.worst <= 0.05, "alpha*=0.05, " + std::to_string(s.points) +
                                        " weak-signal points, worst rel error on (1-power) " + fmt("%.4f", s.worst) +
                                        " at n=" + std::to_string(s.n) + " dt=" + fmt("%.3f", s.dt)};
  });
  for (double a : {0.01, 0.03}) {
    const GammaScan s = gamma_scan(a);
    info("alpha*=" + fmt("%.2f", a) + ": worst rel error " + fmt("%.4f", s.worst));
  }

  // 7. Vertex anomaly.
  report(7, "vertex anomaly", 0.0, [] {
    const std::vector<AnomalyRow> rows = vertex_anomaly_study(qubit_model(), {0.02}, {}, 0.05, 1);
    double pi = kInfinity, sld = kInfinity;
    for (const auto& row : rows) {
      if (row.label == "pi") pi = row.kl_ratio;
      if (row.label == "sld") sld = row.kl_ratio;
    }
    const bool ok = std::abs(pi / 0.5 - 1.0) <= 0.05 && std::abs(sld - 1.0) <= 0.05;
    return Outcome{ok, "dt=0.02 ratio pi " + fmt("%.6f", pi) + " (target 0.5), sld " + fmt("%.6f", sld) +
                           " (target 1)"};
  });

  // 8. KL-Fisher expansion at regular points.
  report(8, "KL-Fisher local expansion", 0.0, [] {
    const Model q = qubit_model();
    const ExpansionCheck s = kl_fisher_expansion_ratio(q.psi0, q.generator(), q.hbar(), sld_measurement(q).povm, 1e-2);
    const std::vector<double> r = regular_ratios(1e-2);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    const bool ok = s.regular && s.ratio >= 0.99 && s.ratio <= 1.01 && *lo >= 0.99 && *hi <= 1.01;
    const auto inside = std::count_if(r.begin(), r.end(), [](double x) { return x >= 0.99 && x <= 1.01; });
    return Outcome{ok, "sld qubit " + fmt("%.6f", s.ratio) + "; random regular models in [" + fmt("%.6f", *lo) +
                           ", " + fmt("%.6f", *hi) + "], " + std::to_string(inside) + "/" +
                           std::to_string(r.size()) + " inside [0.99, 1.01]"};
  });
  for (double step : {1e-3, 1e-4}) {
    double worst = 0.0;
    for (double x : regular_ratios(step)) worst = std::max(worst, std::abs(x - 1.0));
    info("dtheta=" + fmt("%.0e", step) + ": max |ratio - 1| over the same models " + fmt("%.3g", worst));
  }

  // 9. Determinism.
  report(9, "determinism", 0.0, [] {
    const fs::path dir = fs::temp_directory_path() / "qdiscern_acceptance";
    fs::create_directories(dir);
    const std::string config = std::string(QDISCERN_SOURCE_DIR) + "/configs/qubit.json";
    std::size_t mismatches = 0, commands = 0;
    for (const auto& cmd : cli::command_names()) {
      std::vector<fs::path> outs;
      for (const char* tag : {"a1", "b1", "c8"}) {
        const fs::path out = dir / (cmd + "_" + tag + ".csv");
        const std::string threads = tag[1] == '8' ? "8" : "1";
        std::ostringstream o, e;
        if (cli::run_cli({cmd, "--config", config, "--seed", "12345", "--threads", threads, "--out", out.string()}, o,
                         e) != cli::kExitOk) {
          return Outcome{false, cmd + " failed: " + e.str()};
        }
        outs.push_back(out);
      }
      for (std::size_t k = 1; k < outs.size(); ++k) {
        if (slurp(outs[0]) != slurp(outs[k]) ||
            slurp(outs[0].string() + ".meta.json") != slurp(outs[k].string() + ".meta.json")) {
          ++mismatches;
        }
      }
      ++commands;
    }
    return Outcome{mismatches == 0, std::to_string(commands) + " commands, repeat and --threads 1 vs 8, " +
                                        std::to_string(mismatches) + " mismatching report pairs"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
