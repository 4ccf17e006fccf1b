#include "qdiscern/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qdiscern/errors.hpp"
#include "qdiscern/parallel.hpp"

namespace qdiscern::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    fail(path, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    fail(path, "expected a finite number");
  }
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

Complex get_complex(const json& j, const std::string& path) {
  if (j.is_number()) {
    return {get_number(j, path), 0.0};
  }
  if (!j.is_array() || j.size() != 2) {
    fail(path, "expected a [real, imag] pair");
  }
  return {get_number(j[0], path + "/0"), get_number(j[1], path + "/1")};
}

std::vector<Complex> get_complex_list(const json& j, const std::string& path) {
  if (!j.is_array()) {
    fail(path, "expected a list of [real, imag] pairs");
  }
  std::vector<Complex> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_complex(j[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<double> get_number_list(const json& j, const std::string& path) {
  if (!j.is_array()) {
    fail(path, "expected a list of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_number(j[i], path + "/" + std::to_string(i)));
  }
  return out;
}

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

json complex_list_to_json(const std::vector<Complex>& v) {
  json out = json::array();
  for (const auto& c : v) {
    out.push_back(complex_to_json(c));
  }
  return out;
}

std::vector<double> expand_range(const json& j, const std::string& path) {
  if (!j.is_object()) {
    fail(path, "expected an object with start, stop, count");
  }
  for (const char* key : {"start", "stop", "count"}) {
    if (!j.contains(key)) {
      fail(path + "/" + key, "missing");
    }
  }
  const double start = get_number(j["start"], path + "/start");
  const double stop = get_number(j["stop"], path + "/stop");
  const std::uint64_t count = get_unsigned(j["count"], path + "/count");
  const std::string spacing = j.value("spacing", std::string("linear"));
  if (count < 1) {
    fail(path + "/count", "must be >= 1");
  }
  std::vector<double> out;
  if (spacing == "linear") {
    for (std::uint64_t i = 0; i < count; ++i) {
      out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
  } else if (spacing == "log") {
    if (!(start > 0.0 && stop > 0.0)) {
      fail(path, "log spacing needs positive start and stop");
    }
    const double a = std::log10(start);
    const double b = std::log10(stop);
    for (std::uint64_t i = 0; i < count; ++i) {
      out.push_back(count == 1 ? start : std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
    }
  } else {
    fail(path + "/spacing", "expected \"linear\" or \"log\"");
  }
  return out;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.dim = 2;
  const double s = 1.0 / std::sqrt(2.0);
  c.state = {Complex(s, 0.0), Complex(s, 0.0)};
  c.segments = {SegmentSpec{{1.0, 0.0, 0.0, -1.0}, 1.0}};
  c.description = "qubit |+>, H = sigma_z";
  c.measurements = {parse_measurement_token("pi"), parse_measurement_token("sld")};
  c.dt_values = {0.0, 0.01, 0.02, 0.05, 0.1};
  c.n_values = {1, 2, 5, 10, 20, 50};
  return c;
}

MeasurementSpec parse_measurement_token(const std::string& token) {
  MeasurementSpec spec;
  if (token == "pi" || token == "sld") {
    spec.kind = token;
    spec.label = token;
    return spec;
  }
  const std::string prefix = "random:";
  if (token.rfind(prefix, 0) == 0) {
    spec.kind = "random";
    try {
      std::size_t used = 0;
      const long long n = std::stoll(token.substr(prefix.size()), &used);
      if (used != token.size() - prefix.size() || n < 1) {
        throw std::invalid_argument("count");
      }
      spec.count = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      throw ConfigError("measurement \"" + token + "\": expected random:<count> with count >= 1");
    }
    spec.label = "random";
    return spec;
  }
  throw ConfigError("measurement \"" + token + "\": expected pi, sld, random:<count> or an explicit povm");
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) {
    fail("/", "configuration must be a JSON object");
  }
  ExperimentConfig c = default_config();
  static const std::vector<std::string> known{"model", "measurements", "grid", "threshold", "seed", "format",
                                              "out", "normalize_state", "distributions", "trials",
                                              "monte_carlo_samples"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail("/" + key, "unknown field");
    }
  }

  if (doc.contains("model")) {
    const json& m = doc["model"];
    if (!m.is_object()) {
      fail("/model", "expected an object");
    }
    if (!m.contains("state")) {
      fail("/model/state", "missing");
    }
    if (!m.contains("segments")) {
      fail("/model/segments", "missing");
    }
    c.state = get_complex_list(m["state"], "/model/state");
    c.dim = c.state.size();
    if (c.dim < 2) {
      fail("/model/state", "dimension must be >= 2");
    }
    if (m.contains("dim") && get_unsigned(m["dim"], "/model/dim") != c.dim) {
      fail("/model/dim", "does not match the state length");
    }
    c.hbar = m.contains("hbar") ? get_number(m["hbar"], "/model/hbar") : 1.0;
    if (!(c.hbar > 0.0)) {
      fail("/model/hbar", "must be positive");
    }
    c.description = m.value("description", std::string());
    const json& segs = m["segments"];
    if (!segs.is_array() || segs.empty()) {
      fail("/model/segments", "expected a non-empty list");
    }
    c.segments.clear();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string path = "/model/segments/" + std::to_string(i);
      const json& s = segs[i];
      if (!s.is_object() || !s.contains("hamiltonian")) {
        fail(path + "/hamiltonian", "missing");
      }
      SegmentSpec seg;
      seg.entries = get_complex_list(s["hamiltonian"], path + "/hamiltonian");
      if (seg.entries.size() != c.dim * c.dim) {
        fail(path + "/hamiltonian", "expected " + std::to_string(c.dim * c.dim) + " entries (row-major)");
      }
      seg.duration = s.contains("duration") ? get_number(s["duration"], path + "/duration") : 1.0;
      if (!(seg.duration > 0.0)) {
        fail(path + "/duration", "must be positive");
      }
      c.segments.push_back(std::move(seg));
    }
  }

  if (doc.contains("measurements")) {
    const json& ms = doc["measurements"];
    if (!ms.is_array() || ms.empty()) {
      fail("/measurements", "expected a non-empty list");
    }
    c.measurements.clear();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string path = "/measurements/" + std::to_string(i);
      if (ms[i].is_string()) {
        try {
          c.measurements.push_back(parse_measurement_token(ms[i].get<std::string>()));
        } catch (const ConfigError& e) {
          fail(path, e.what());
        }
        continue;
      }
      if (!ms[i].is_object() || !ms[i].contains("povm") || !ms[i]["povm"].is_array()) {
        fail(path, "expected a string or an object with a \"povm\" list");
      }
      MeasurementSpec spec;
      spec.kind = "povm";
      spec.label = ms[i].value("label", "povm" + std::to_string(i));
      const json& elems = ms[i]["povm"];
      for (std::size_t k = 0; k < elems.size(); ++k) {
        spec.elements.push_back(get_complex_list(elems[k], path + "/povm/" + std::to_string(k)));
        if (spec.elements.back().size() != c.dim * c.dim) {
          fail(path + "/povm/" + std::to_string(k), "expected " + std::to_string(c.dim * c.dim) + " entries");
        }
      }
      c.measurements.push_back(std::move(spec));
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_object()) {
      fail("/grid", "expected an object");
    }
    if (g.contains("dt") && g.contains("dt_range")) {
      fail("/grid", "give either dt or dt_range, not both");
    }
    if (g.contains("dt")) {
      c.dt_values = get_number_list(g["dt"], "/grid/dt");
    } else if (g.contains("dt_range")) {
      c.dt_values = expand_range(g["dt_range"], "/grid/dt_range");
    }
    for (std::size_t i = 0; i < c.dt_values.size(); ++i) {
      if (c.dt_values[i] < 0.0) {
        fail("/grid/dt/" + std::to_string(i), "must be >= 0");
      }
    }
    if (g.contains("n")) {
      if (!g["n"].is_array()) {
        fail("/grid/n", "expected a list of integers");
      }
      c.n_values.clear();
      for (std::size_t i = 0; i < g["n"].size(); ++i) {
        const auto n = get_unsigned(g["n"][i], "/grid/n/" + std::to_string(i));
        if (n < 1) {
          fail("/grid/n/" + std::to_string(i), "must be >= 1");
        }
        c.n_values.push_back(static_cast<std::size_t>(n));
      }
    }
    if (g.contains("alpha")) {
      c.alpha = get_number(g["alpha"], "/grid/alpha");
    }
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    fail("/grid/alpha", "must lie in (0, 1)");
  }

  if (doc.contains("threshold")) {
    c.threshold = get_number(doc["threshold"], "/threshold");
    if (!(c.threshold > 0.0)) {
      fail("/threshold", "must be positive");
    }
  }
  if (doc.contains("seed")) {
    c.seed = get_unsigned(doc["seed"], "/seed");
  }
  if (doc.contains("format")) {
    if (!doc["format"].is_string() || doc["format"].get<std::string>() != "csv") {
      fail("/format", "only \"csv\" is supported");
    }
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) {
      fail("/out", "expected a path string");
    }
    c.out = doc["out"].get<std::string>();
  }
  if (doc.contains("normalize_state")) {
    if (!doc["normalize_state"].is_boolean()) {
      fail("/normalize_state", "expected true or false");
    }
    c.normalize_state = doc["normalize_state"].get<bool>();
  }
  if (doc.contains("distributions")) {
    const json& d = doc["distributions"];
    if (!d.is_object() || !d.contains("p0") || !d.contains("p1")) {
      fail("/distributions", "expected an object with p0 and p1");
    }
    c.p0 = get_number_list(d["p0"], "/distributions/p0");
    c.p1 = get_number_list(d["p1"], "/distributions/p1");
  }
  if (doc.contains("trials")) {
    c.trials = static_cast<std::size_t>(get_unsigned(doc["trials"], "/trials"));
  }
  if (doc.contains("monte_carlo_samples")) {
    c.monte_carlo_samples = static_cast<std::size_t>(get_unsigned(doc["monte_carlo_samples"], "/monte_carlo_samples"));
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column pair.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path + ": cannot open configuration file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json doc;
  json model;
  model["dim"] = c.dim;
  model["hbar"] = c.hbar;
  model["description"] = c.description;
  model["state"] = complex_list_to_json(c.state);
  json segs = json::array();
  for (const auto& s : c.segments) {
    segs.push_back({{"hamiltonian", complex_list_to_json(s.entries)}, {"duration", s.duration}});
  }
  model["segments"] = segs;
  doc["model"] = model;

  json ms = json::array();
  for (const auto& m : c.measurements) {
    if (m.kind == "povm") {
      json elems = json::array();
      for (const auto& e : m.elements) {
        elems.push_back(complex_list_to_json(e));
      }
      ms.push_back({{"label", m.label}, {"povm", elems}});
    } else if (m.kind == "random") {
      ms.push_back("random:" + std::to_string(m.count));
    } else {
      ms.push_back(m.kind);
    }
  }
  doc["measurements"] = ms;
  doc["grid"] = {{"dt", c.dt_values}, {"n", c.n_values}, {"alpha", c.alpha}};
  doc["threshold"] = c.threshold;
  doc["seed"] = c.seed;
  doc["format"] = c.format;
  doc["out"] = c.out;
  doc["normalize_state"] = c.normalize_state;
  if (c.p0 && c.p1) {
    doc["distributions"] = {{"p0", *c.p0}, {"p1", *c.p1}};
  }
  doc["trials"] = c.trials;
  doc["monte_carlo_samples"] = c.monte_carlo_samples;
  return doc;
}

namespace {

CMatrix to_matrix(const std::vector<Complex>& entries, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index col = 0; col < d; ++col) {
      m(r, col) = entries[static_cast<std::size_t>(r * d + col)];
    }
  }
  return m;
}

}  // namespace

Model build_model(const ExperimentConfig& c) {
  CVector amps(static_cast<Eigen::Index>(c.dim));
  for (std::size_t i = 0; i < c.dim; ++i) {
    amps(static_cast<Eigen::Index>(i)) = c.state[i];
  }
  std::optional<PureState> psi;
  try {
    psi = c.normalize_state ? PureState::normalized(amps) : PureState(amps);
  } catch (const InvalidValue& e) {
    fail("/model/state", std::string(e.what()) + (c.normalize_state ? "" : " (pass --normalize-state to rescale)"));
  }
  std::vector<ScheduleSegment> segments;
  for (std::size_t i = 0; i < c.segments.size(); ++i) {
    try {
      segments.push_back({HermitianOperator(to_matrix(c.segments[i].entries, c.dim)), c.segments[i].duration});
    } catch (const std::invalid_argument& e) {
      fail("/model/segments/" + std::to_string(i) + "/hamiltonian", e.what());
    }
  }
  try {
    return Model{*psi, HamiltonianSchedule(std::move(segments), c.hbar),
                 c.description.empty() ? "custom model" : c.description};
  } catch (const std::invalid_argument& e) {
    fail("/model", e.what());
  }
}

std::vector<MeasurementChoice> build_measurements(const ExperimentConfig& c, const Model& model) {
  std::vector<MeasurementChoice> out;
  for (std::size_t i = 0; i < c.measurements.size(); ++i) {
    const auto& m = c.measurements[i];
    const std::string path = "/measurements/" + std::to_string(i);
    if (m.kind == "pi") {
      out.push_back(pi_measurement(model));
    } else if (m.kind == "sld") {
      try {
        out.push_back(sld_measurement(model));
      } catch (const StationaryState& e) {
        fail(path, e.what());
      }
    } else if (m.kind == "random") {
      for (auto& r : random_measurements(model, m.count, derive_seed(c.seed, 0x5eed, i))) {
        out.push_back(std::move(r));
      }
    } else {
      std::vector<HermitianOperator> elems;
      try {
        for (const auto& e : m.elements) {
          elems.emplace_back(to_matrix(e, c.dim));
        }
        out.push_back({m.label, Povm(std::move(elems))});
      } catch (const std::invalid_argument& e) {
        fail(path, e.what());
      }
    }
  }
  return out;
}

}  // namespace qdiscern::cli
