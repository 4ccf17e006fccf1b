#include "qdiscern/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qdiscern/errors.hpp"
#include "qdiscern/parallel.hpp"

namespace qdiscern::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFdStep = 1e-3;

std::string short_number(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::vector<double> positive_dts(const ExperimentConfig& c) {
  std::vector<double> out;
  for (double dt : c.dt_values) {
    if (dt > 0.0) {
      out.push_back(dt);
    }
  }
  return out;
}

}  // namespace

CommandResult cmd_sudden(const ExperimentConfig& config, unsigned /*threads*/) {
  const Model model = build_model(config);
  const SuddenScalingReport rep = sudden_scaling_study(model, config.dt_values);
  CommandResult res{CsvTable({"dt", "w_exact", "w_perturbative", "residual"}), {}, {}};
  for (const auto& row : rep.rows) {
    res.table.add_row({row.dt, row.exact, row.perturbative, row.residual});
  }
  res.meta["fitted_slope"] = std::isfinite(rep.slope) ? nlohmann::json(rep.slope) : nlohmann::json(nullptr);
  res.meta["points_used"] = rep.points_used;
  res.meta["order_at_least_3"] = rep.order_ok;
  std::ostringstream s;
  s << "sudden approximation: " << rep.rows.size() << " dt values, residual log-log slope "
    << (std::isfinite(rep.slope) ? short_number(rep.slope) : std::string("n/a")) << " over "
    << rep.points_used << " points" << (rep.order_ok ? " (order >= 3)" : "") << '\n';
  res.summary = s.str();
  return res;
}

CommandResult cmd_fisher(const ExperimentConfig& config, unsigned /*threads*/) {
  const Model model = build_model(config);
  const std::vector<MeasurementChoice> measurements = build_measurements(config, model);
  const HermitianOperator gen = model.generator();
  const double hbar = model.hbar();
  const double js_trace = quantum_fisher(model.psi0, gen, hbar);
  const double js_energy = quantum_fisher_energy(model.psi0, gen, hbar);

  CommandResult res{CsvTable({"measurement", "outcomes", "method", "classical_fisher", "classical_fisher_fd",
                              "quantum_fisher_trace", "quantum_fisher_energy", "gap"}),
                    {},
                    {}};
  std::ostringstream s;
  s << "quantum Fisher information: " << short_number(js_trace) << " (trace form), "
    << short_number(js_energy) << " (energy variance form)\n";
  for (const auto& m : measurements) {
    const FisherReport analytic = classical_fisher_analytic(model.psi0, gen, hbar, m.povm);
    const FisherReport fd = classical_fisher_fd(model.psi0, gen, hbar, m.povm, kFdStep);
    const double gap = js_trace - analytic.value;
    res.table.add_row({m.label, static_cast<std::uint64_t>(m.povm.outcomes()), std::string(to_string(analytic.method)),
                       analytic.value, fd.value, js_trace, js_energy, gap});
    s << "  " << m.label << ": J_M = " << short_number(analytic.value) << " (" << to_string(analytic.method)
      << "), gap " << short_number(gap) << '\n';
  }
  res.summary = s.str();
  return res;
}

CommandResult cmd_power(const ExperimentConfig& config, unsigned threads) {
  const Model model = build_model(config);
  const std::vector<MeasurementChoice> measurements = build_measurements(config, model);
  SweepConfig sweep;
  sweep.dt_values = config.dt_values;
  sweep.n_values = config.n_values;
  sweep.alpha_star = config.alpha;
  sweep.seed = config.seed;
  sweep.threads = threads;
  sweep.monte_carlo_samples = config.monte_carlo_samples;
  const SweepResult result = discernibility_sweep(model, measurements, sweep);

  CommandResult res{CsvTable({"measurement", "dt", "n", "exact_power", "alpha", "gamma_max", "stein_prediction",
                              "fisher_prediction", "fisher", "kl", "method"}),
                    {},
                    {}};
  for (const auto& r : result.rows) {
    res.table.add_row({r.label, r.dt, static_cast<std::uint64_t>(r.n), r.exact_power, r.alpha,
                       r.gamma_max_prediction, r.stein_prediction, r.fisher_prediction, r.fisher_value, r.kl_value,
                       r.method});
  }
  res.meta["energy_variance"] = result.energy_variance;
  std::ostringstream s;
  s << "discernibility sweep: " << result.rows.size() << " rows, alpha* = " << short_number(config.alpha)
    << ", energy variance " << short_number(result.energy_variance) << '\n';
  res.summary = s.str();
  return res;
}

CommandResult cmd_stein(const ExperimentConfig& config, unsigned threads) {
  CommandResult res{
      CsvTable({"source", "dt", "n", "log_beta", "beta", "root", "reference", "kl"}), {}, {}};
  std::ostringstream s;

  struct Job {
    std::string label;
    double dt;
    OutcomeDistribution p0;
    OutcomeDistribution p1;
  };
  std::vector<Job> jobs;
  if (config.p0 || config.p1) {
    if (!config.p0 || !config.p1) {
      throw ConfigError("/distributions: both p0 and p1 are required");
    }
    try {
      jobs.push_back({"given", kNaN, OutcomeDistribution(*config.p0), OutcomeDistribution(*config.p1)});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("/distributions: ") + e.what());
    }
    if (config.p0->size() != config.p1->size()) {
      throw ConfigError("/distributions: p0 and p1 differ in length");
    }
  } else {
    const Model model = build_model(config);
    for (const auto& m : build_measurements(config, model)) {
      const OutcomeDistribution p0 = outcome_distribution(model.psi0, m.povm);
      for (double dt : config.dt_values) {
        jobs.push_back({m.label, dt, p0, outcome_distribution(model.state_at(dt), m.povm)});
      }
    }
  }
  std::vector<SteinReport> reports(jobs.size(), SteinReport{});
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    reports[i] = stein_exponent(jobs[i].p0, jobs[i].p1, config.alpha, config.n_values);
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (const auto& pt : reports[i].points) {
      res.table.add_row({jobs[i].label, jobs[i].dt, static_cast<std::uint64_t>(pt.copies), pt.log_beta,
                         std::exp(pt.log_beta), pt.root, reports[i].reference, reports[i].kl});
    }
    s << jobs[i].label;
    if (!std::isnan(jobs[i].dt)) {
      s << " dt=" << short_number(jobs[i].dt);
    }
    s << ": exp(-D) = " << short_number(reports[i].reference);
    if (!reports[i].points.empty()) {
      const auto& last = reports[i].points.back();
      s << ", (beta_n*)^(1/n) = " << short_number(last.root) << " at n = " << last.copies;
    }
    s << '\n';
  }
  res.summary = s.str();
  return res;
}

CommandResult cmd_condition(const ExperimentConfig& config, unsigned /*threads*/) {
  const Model model = build_model(config);
  const double variance = model.energy_variance();
  CommandResult res{CsvTable({"n", "dt", "value", "gamma_max", "satisfied"}), {}, {}};
  std::size_t satisfied = 0;
  for (std::size_t n : config.n_values) {
    for (double dt : config.dt_values) {
      const ConditionResult c = uncertainty_condition(n, dt, variance, model.hbar(), config.threshold);
      res.table.add_row({static_cast<std::uint64_t>(n), dt, c.value, gamma_max(n, variance, dt, model.hbar()).value,
                         static_cast<std::uint64_t>(c.satisfied ? 1 : 0)});
      satisfied += c.satisfied ? 1 : 0;
    }
  }
  res.meta["energy_variance"] = variance;
  res.meta["threshold"] = config.threshold;
  std::ostringstream s;
  s << "condition 2 n dt^2 dH^2 / hbar^2 <= " << short_number(config.threshold) << ": satisfied at " << satisfied
    << " of " << res.table.rows().size() << " grid points (dH^2 = " << short_number(variance) << ")\n";
  res.summary = s.str();
  return res;
}

CommandResult cmd_anomaly(const ExperimentConfig& config, unsigned threads) {
  const Model model = build_model(config);
  const std::vector<double> dts = positive_dts(config);
  std::vector<AnomalyRow> rows;
  try {
    rows = vertex_anomaly_study(model, dts, config.n_values, config.alpha, threads);
  } catch (const StationaryState& e) {
    throw ConfigError(std::string("/model: ") + e.what());
  }
  CommandResult res{CsvTable({"measurement", "dt", "n", "kl", "fisher", "fisher_exponent", "kl_ratio",
                              "beta_exponent", "beta_ratio"}),
                    {},
                    {}};
  for (const auto& r : rows) {
    res.table.add_row({r.label, r.dt, static_cast<std::uint64_t>(r.n), r.kl, r.fisher, r.fisher_exponent,
                       r.kl_ratio, r.beta_exponent, r.beta_ratio});
  }
  std::ostringstream s;
  s << "vertex anomaly: D(p_t0||p_t1) / (J dt^2 / 2) at the smallest dt\n";
  if (!dts.empty()) {
    for (const auto& r : rows) {
      if (r.dt == dts.front() && (config.n_values.empty() || r.n == config.n_values.front())) {
        s << "  " << r.label << ": " << short_number(r.kl_ratio) << '\n';
      }
    }
  }
  res.summary = s.str();
  return res;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sudden", "fisher", "power", "stein", "condition", "anomaly"};
  return names;
}

CommandResult run_command(const std::string& name, const ExperimentConfig& config, unsigned threads) {
  if (name == "sudden") return cmd_sudden(config, threads);
  if (name == "fisher") return cmd_fisher(config, threads);
  if (name == "power") return cmd_power(config, threads);
  if (name == "stein") return cmd_stein(config, threads);
  if (name == "condition") return cmd_condition(config, threads);
  if (name == "anomaly") return cmd_anomaly(config, threads);
  throw ConfigError("unknown command " + name);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discernibility of time-evolved pure states via optimal hypothesis tests", "qdiscern"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  std::string format = "csv";
  std::optional<unsigned> threads_flag;
  std::optional<double> threshold;
  std::optional<double> alpha;
  bool normalize_state = false;
  bool dump_config = false;
  std::vector<double> p0, p1, dt_list;
  std::vector<std::size_t> n_list;
  std::vector<std::string> measure_list;

  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed (u64)");
  app.add_option("--out", out_path, "Report path (CSV); metadata goes to <path>.meta.json");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv"}));
  app.add_option("--threads", threads_flag, "Worker cap (fallback: QDISCERN_THREADS)")->check(CLI::PositiveNumber);
  app.add_option("--threshold", threshold, "Threshold standing in for '<< 1'");
  app.add_option("--alpha", alpha, "Test size alpha*");
  app.add_flag("--normalize-state", normalize_state, "Rescale a non-normalized initial state");
  app.add_flag("--dump-config", dump_config, "Print the effective configuration and exit");
  app.add_option("--p0", p0, "Null distribution, comma separated")->delimiter(',');
  app.add_option("--p1", p1, "Alternative distribution, comma separated")->delimiter(',');
  app.add_option("--dt", dt_list, "dt grid, comma separated")->delimiter(',');
  app.add_option("--n", n_list, "copy counts, comma separated")->delimiter(',');
  app.add_option("--measure", measure_list, "measurements: pi, sld, random:<k>")->delimiter(',');

  const std::map<std::string, std::string> blurbs{
      {"sudden", "exact vs perturbative sudden error and the residual slope"},
      {"fisher", "classical Fisher information per measurement against the quantum bound"},
      {"power", "exact most-powerful-test power over the (dt, n) grid"},
      {"stein", "type-II error roots against the Stein reference"},
      {"condition", "time-energy condition value over the grid"},
      {"anomaly", "KL and beta exponents against the Fisher prediction"}};
  for (const auto& name : command_names()) {
    app.add_subcommand(name, blurbs.at(name));
  }

  std::vector<std::string> argv_store{"qdiscern"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig config = config_path.empty() ? default_config() : load_config(config_path);
    if (seed) config.seed = *seed;
    if (out_path) config.out = *out_path;
    config.format = format;
    if (threshold) {
      if (!(*threshold > 0.0)) throw ConfigError("--threshold: must be positive");
      config.threshold = *threshold;
    }
    if (alpha) {
      if (!(*alpha > 0.0 && *alpha < 1.0)) throw ConfigError("--alpha: must lie in (0, 1)");
      config.alpha = *alpha;
    }
    if (normalize_state) config.normalize_state = true;
    if (!p0.empty()) config.p0 = p0;
    if (!p1.empty()) config.p1 = p1;
    if (!dt_list.empty()) {
      for (double dt : dt_list) {
        if (!(dt >= 0.0)) throw ConfigError("--dt: values must be >= 0");
      }
      config.dt_values = dt_list;
    }
    if (!n_list.empty()) {
      for (std::size_t n : n_list) {
        if (n < 1) throw ConfigError("--n: values must be >= 1");
      }
      config.n_values = n_list;
    }
    if (!measure_list.empty()) {
      config.measurements.clear();
      for (const auto& m : measure_list) {
        config.measurements.push_back(parse_measurement_token(m));
      }
    }

    if (dump_config) {
      out << to_json(config).dump(2) << '\n';
      return kExitOk;
    }

    unsigned threads = 0;
    if (threads_flag) {
      threads = *threads_flag;
    } else if (const char* env = std::getenv("QDISCERN_THREADS")) {
      try {
        const long v = std::stol(env);
        threads = v > 0 ? static_cast<unsigned>(v) : 0;
      } catch (const std::exception&) {
        throw ConfigError("QDISCERN_THREADS: expected a positive integer");
      }
    }

    const CommandResult result = run_command(command, config, threads);
    const std::string path = config.out.empty() ? command + ".csv" : config.out;

    nlohmann::json meta = result.meta;
    nlohmann::json cfg = to_json(config);
    cfg.erase("out");
    meta["command"] = command;
    meta["version"] = kVersion;
    meta["config"] = cfg;
    meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION);
    write_report(path, result.table, meta);
    out << result.summary << "report: " << path << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleEnumeration& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace qdiscern::cli
