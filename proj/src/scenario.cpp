#include "nonrecip/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "nonrecip/numkernel.hpp"

namespace nonrecip::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int resolved_site(const ScenarioConfig& config) {
  const int dim = model::dimension(config.model);
  return config.initial_site == 0 ? dim : config.initial_site;
}

bool wants_left(const ScenarioConfig& c) {
  return c.observe_left || c.observe_biorthogonal || c.observe_signed_log;
}
bool wants_bi(const ScenarioConfig& c) { return c.observe_biorthogonal || c.observe_signed_log; }

}  // namespace

void validate(const ScenarioConfig& config) {
  model::validate(config.model);
  if (!(config.dt > 0.0)) throw ConfigError("dt: must be > 0, got " + fmt17(config.dt));
  if (!(config.t_max > config.dt))
    throw ConfigError("t_max: must exceed dt, got t_max=" + fmt17(config.t_max) +
                      " dt=" + fmt17(config.dt));
  if (!(config.rk4_substep > 0.0)) throw ConfigError("rk4_substep: must be > 0");
  if (config.jobs < 1) throw ConfigError("jobs: must be >= 1");

  const int dim = model::dimension(config.model);
  if (config.initial_state.size() != 0) {
    if (config.initial_state.size() != dim)
      throw ConfigError("initial_state: has " + std::to_string(config.initial_state.size()) +
                        " entries, model dimension is " + std::to_string(dim));
    if (config.initial_state.norm() == 0.0)
      throw ConfigError("initial_state: zero vector cannot be normalized");
  } else {
    const int site = resolved_site(config);
    if (site < 1 || site > dim)
      throw ConfigError("initial_site: " + std::to_string(site) + " outside [1, " +
                        std::to_string(dim) + "]");
  }

  for (const FitRequest& fit : config.fits) {
    if (!(fit.t_lo < fit.t_hi))
      throw ConfigError("fits: window must satisfy t_lo < t_hi for series " + fit.series);
    const bool is_site = fit.series.rfind("site:", 0) == 0;
    const bool is_left_site = fit.series.rfind("left_site:", 0) == 0;
    if (fit.series != "norm" && !is_site && !is_left_site)
      throw ConfigError("fits: unknown series \"" + fit.series +
                        "\" (expected norm, site:<j> or left_site:<j>)");
    if (is_site || is_left_site) {
      const int j = std::atoi(fit.series.substr(fit.series.find(':') + 1).c_str());
      if (j < 1 || j > dim)
        throw ConfigError("fits: site index in \"" + fit.series + "\" outside [1, " +
                          std::to_string(dim) + "]");
    }
    if (is_left_site && !wants_left(config))
      throw ConfigError("fits: series \"" + fit.series + "\" requires observing left states");
  }
}

std::vector<double> time_grid(const ScenarioConfig& config) {
  const auto steps = static_cast<long>(std::floor(config.t_max / config.dt + 1e-9));
  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k)
    times[static_cast<std::size_t>(k)] = static_cast<double>(k) * config.dt;
  return times;
}

Vector initial_vector(const ScenarioConfig& config) {
  const int dim = model::dimension(config.model);
  if (config.initial_state.size() != 0) return config.initial_state.normalized();
  Vector v = Vector::Zero(dim);
  v(resolved_site(config) - 1) = 1.0;
  return v;
}

dynamics::PropagateOptions propagate_options(const ScenarioConfig& config) {
  dynamics::PropagateOptions options;
  options.method = config.method;
  options.rk4_substep = config.rk4_substep;
  return options;
}

// --- config file -----------------------------------------------------------

namespace {

[[noreturn]] void bad_key(const std::string& key, const char* expected) {
  throw ConfigError("config." + key + ": expected " + expected);
}

double get_number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) bad_key(key, "a number");
  return j.at(key).get<double>();
}

model::HamiltonianSpec model_from_json(const json& m) {
  model::HamiltonianSpec spec;
  for (const auto& [key, value] : m.items()) {
    if (key == "family")
      spec.family = model::family_from_string(value.get<std::string>());
    else if (key == "n")
      spec.n = value.get<int>();
    else if (key == "t_l")
      spec.t_l = get_number(m, key);
    else if (key == "t_r")
      spec.t_r = get_number(m, key);
    else if (key == "gamma")
      spec.gamma = get_number(m, key);
    else if (key == "beta")
      spec.beta = get_number(m, key);
    else if (key == "gamma0")
      spec.gamma0 = get_number(m, key);
    else if (key == "g")
      spec.g = get_number(m, key);
    else if (key == "c")
      spec.c = get_number(m, key);
    else
      throw ConfigError("config.model." + key + ": unknown key");
  }
  return spec;
}

FitRequest fit_from_json(const json& f) {
  FitRequest fit;
  fit.series = f.at("series").get<std::string>();
  const auto kind = f.at("kind").get<std::string>();
  if (kind == "exp")
    fit.kind = FitRequest::Kind::exp;
  else if (kind == "power")
    fit.kind = FitRequest::Kind::power;
  else
    throw ConfigError("config.fits.kind: expected exp|power, got " + kind);
  const auto& window = f.at("window");
  if (!window.is_array() || window.size() != 2) bad_key("fits.window", "[t_lo, t_hi]");
  fit.t_lo = window[0].get<double>();
  fit.t_hi = window[1].get<double>();
  return fit;
}

void apply_observe_token(ScenarioConfig& config, const std::string& token) {
  if (token == "right") return;  // always on
  if (token == "left")
    config.observe_left = true;
  else if (token == "biorthogonal")
    config.observe_biorthogonal = true;
  else if (token == "signed_log")
    config.observe_signed_log = true;
  else
    throw ConfigError("observe: unknown token \"" + token +
                      "\" (expected right|left|biorthogonal|signed_log)");
}

}  // namespace

ScenarioConfig parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  ScenarioConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "model")
      config.model = model_from_json(value);
    else if (key == "initial_site")
      config.initial_site = value.get<int>();
    else if (key == "initial_state") {
      if (!value.is_array() || value.empty()) bad_key(key, "an array of [re, im] pairs");
      config.initial_state.resize(static_cast<Eigen::Index>(value.size()));
      for (std::size_t j = 0; j < value.size(); ++j) {
        const auto& entry = value[j];
        if (!entry.is_array() || entry.size() != 2) bad_key(key, "an array of [re, im] pairs");
        config.initial_state(static_cast<Eigen::Index>(j)) =
            Complex(entry[0].get<double>(), entry[1].get<double>());
      }
    } else if (key == "t_max")
      config.t_max = get_number(doc, key);
    else if (key == "dt")
      config.dt = get_number(doc, key);
    else if (key == "method")
      config.method = dynamics::method_from_string(value.get<std::string>());
    else if (key == "rk4_substep")
      config.rk4_substep = get_number(doc, key);
    else if (key == "observe") {
      if (!value.is_array()) bad_key(key, "an array of tokens");
      for (const auto& token : value) apply_observe_token(config, token.get<std::string>());
    } else if (key == "fits") {
      if (!value.is_array()) bad_key(key, "an array of fit requests");
      for (const auto& f : value) config.fits.push_back(fit_from_json(f));
    } else if (key == "output") {
      if (value.contains("path")) config.out = value.at("path").get<std::string>();
      if (value.contains("format")) {
        const auto format = value.at("format").get<std::string>();
        if (format == "csv")
          config.format = Format::csv;
        else if (format == "json")
          config.format = Format::json;
        else
          throw ConfigError("config.output.format: expected csv|json, got " + format);
      }
    } else if (key == "jobs")
      config.jobs = value.get<int>();
    else
      throw ConfigError("config." + key + ": unknown key");
  }
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str());
}

// --- presets ---------------------------------------------------------------

namespace {

struct PresetDef {
  const char* name;
  double beta;
  double t_r;
  double gamma;
  int init_site;
  double t_max;
  const char* observe;  // "", "left", "bi", "slog"
  bool direct;          // expm-direct instead of expm-step
  const char* fit;      // "", "norm_exp", "site1_power"
};

// All presets share N = 10, t_l = 1, dt = 0.01. Time spans are desk-scale
// choices: long enough for the published behavior, short enough that the
// conserved biorthogonal norm stays at double-precision accuracy.
constexpr PresetDef kPresets[] = {
    {"fig2a", 1.0, 0.0, 0.0, 10, 50.0, "", false, "norm_exp"},
    {"fig2b", 0.0, 0.0, 0.0, 10, 100.0, "", false, "site1_power"},
    {"fig2c", 1.0, 0.0, 0.5, 10, 50.0, "", false, "norm_exp"},
    {"fig2d", 0.0, 0.0, 0.5, 10, 100.0, "", false, "norm_exp"},
    {"fig2e", 1.0, 0.0, 0.0, 1, 50.0, "", false, "norm_exp"},
    {"fig2f", 0.0, 0.0, 0.0, 1, 100.0, "", false, ""},
    {"fig3a", 1.0, 0.0, 0.0, 10, 50.0, "left", false, ""},
    {"fig3b", 0.0, 0.0, 0.0, 10, 100.0, "left", false, ""},
    {"fig3c", 1.0, 0.0, 0.5, 10, 50.0, "left", false, ""},
    {"fig3d", 0.0, 0.0, 0.5, 10, 100.0, "left", false, ""},
    {"fig4a", 1.0, 0.0, 0.0, 10, 5.0, "bi", true, ""},
    {"fig4b", 0.0, 0.0, 0.0, 10, 10.0, "bi", true, ""},
    {"fig4c", 1.0, 0.5, 0.0, 10, 10.0, "bi", true, ""},
    {"fig4d", 0.0, 0.5, 0.0, 10, 20.0, "bi", true, ""},
    {"fig5a", 1.0, 0.5, 0.0, 10, 10.0, "", true, ""},
    {"fig5b", 1.0, 0.5, 0.0, 10, 10.0, "left", true, ""},
    {"fig5c", 1.0, 0.5, 0.0, 10, 10.0, "slog", true, ""},
    {"fig5d", 0.0, 0.5, 0.0, 10, 40.0, "", true, ""},
    {"fig5e", 0.0, 0.5, 0.0, 10, 40.0, "left", true, ""},
    {"fig5f", 0.0, 0.5, 0.0, 10, 40.0, "bi", true, ""},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const PresetDef& def : kPresets) names.emplace_back(def.name);
  return names;
}

ScenarioConfig preset(const std::string& name) {
  for (const PresetDef& def : kPresets) {
    if (name != def.name) continue;
    ScenarioConfig config;
    config.model.family = model::Family::chain;
    config.model.n = 10;
    config.model.t_l = 1.0;
    config.model.t_r = def.t_r;
    config.model.gamma = def.gamma;
    config.model.beta = def.beta;
    config.initial_site = def.init_site;
    config.t_max = def.t_max;
    config.dt = 0.01;
    config.method = def.direct ? dynamics::Method::expm_direct : dynamics::Method::expm_step;
    const std::string observe = def.observe;
    config.observe_left = observe == "left";
    config.observe_biorthogonal = observe == "bi";
    config.observe_signed_log = observe == "slog";
    const std::string fit = def.fit;
    if (fit == "norm_exp") config.fits.push_back({"norm", FitRequest::Kind::exp, 20.0, 50.0});
    if (fit == "site1_power")
      config.fits.push_back({"site:1", FitRequest::Kind::power, 10.0, 100.0});
    config.out = name + ".csv";
    return config;
  }
  throw ConfigError("unknown figure preset \"" + name + "\" (see `figure --list`)");
}

// --- spectrum --------------------------------------------------------------

std::string run_spectrum_json(const ScenarioConfig& config) {
  validate(config);
  const Matrix h = model::build(config.model);
  const auto sd = spectral::analyze(h);

  ordered_json doc;
  doc["spec"] = {{"family", model::to_string(config.model.family)},
                 {"n", model::dimension(config.model)},
                 {"t_l", config.model.t_l},
                 {"t_r", config.model.t_r},
                 {"gamma", config.model.gamma},
                 {"beta", config.model.beta},
                 {"gamma0", config.model.gamma0},
                 {"g", config.model.g},
                 {"c", config.model.c}};

  ordered_json eigenvalues = ordered_json::array();
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    eigenvalues.push_back({{"re", sd.eigenvalues(k).real()}, {"im", sd.eigenvalues(k).imag()}});
  doc["eigenvalues"] = std::move(eigenvalues);

  doc["defective"] = sd.defective;
  if (std::isfinite(sd.eigvec_condition))
    doc["eigvec_condition"] = sd.eigvec_condition;
  else
    doc["eigvec_condition"] = nullptr;  // numerically singular eigenvector matrix

  ordered_json predicates;
  predicates["hermitian"] = model::is_hermitian(h);
  predicates["normal"] = model::is_normal(h);
  const auto& m = config.model;
  if (m.family == model::Family::chain && m.beta == 0.0 && m.t_l > 0.0 && m.t_r > 0.0) {
    const auto gauge = model::gauge_transform(m);
    const Matrix eta = gauge.s.adjoint() * gauge.s;
    predicates["pseudo_hermitian_gauge"] = model::check_pseudo_hermitian(h, eta);
  } else {
    predicates["pseudo_hermitian_gauge"] = nullptr;  // no constructed eta for this spec
  }
  predicates["spectrum_real"] = spectral::spectrum_is_real(sd);
  doc["predicates"] = std::move(predicates);

  doc["max_growth_rate"] = spectral::max_growth_rate(sd);
  return doc.dump(2) + "\n";
}

// --- evolve ----------------------------------------------------------------

namespace {

Eigen::VectorXd fit_series(const ScenarioConfig& config, const dynamics::ObservableSeries& obs,
                           const std::string& series) {
  if (series == "norm") return obs.euclidean_norm;
  const auto j = static_cast<Eigen::Index>(
      std::atoi(series.substr(series.find(':') + 1).c_str()) - 1);
  if (series.rfind("site:", 0) == 0) return obs.per_site_amplitude.col(j);
  return obs.left_amplitude.col(j);
}

}  // namespace

EvolveResult run_evolve(const ScenarioConfig& config) {
  validate(config);
  const Matrix h = model::build(config.model);
  const auto times = time_grid(config);
  const Vector x0 = initial_vector(config);
  const auto options = propagate_options(config);

  EvolveResult result;
  result.traj = dynamics::propagate(h, x0, times, options);
  if (wants_left(config)) {
    auto adj = dynamics::propagate_adjoint(h, x0, times, options);
    result.traj.phi = std::move(adj.phi);
  }
  result.traj.spec = config.model;
  result.obs = dynamics::observables(result.traj);

  for (const FitRequest& fit : config.fits) {
    const Eigen::VectorXd values = fit_series(config, result.obs, fit.series);
    const std::span<const double> v{values.data(), static_cast<std::size_t>(values.size())};
    const double slope = fit.kind == FitRequest::Kind::exp
                             ? dynamics::fit_exponential_rate(times, v, fit.t_lo, fit.t_hi)
                             : dynamics::fit_power_exponent(times, v, fit.t_lo, fit.t_hi);
    result.fit_results.emplace_back(fit, slope);
  }
  return result;
}

namespace {

std::vector<std::string> evolve_columns(const ScenarioConfig& config) {
  std::vector<std::string> columns{"t", "j", "re_x", "im_x", "abs_x"};
  if (wants_left(config)) {
    columns.insert(columns.end(), {"re_y", "im_y", "abs_y"});
  }
  if (wants_bi(config)) {
    columns.insert(columns.end(), {"re_yx", "im_yx"});
  }
  columns.emplace_back("norm_euclid");
  if (wants_bi(config)) columns.emplace_back("bi_norm");
  if (config.observe_signed_log) columns.emplace_back("signed_log_yx");
  return columns;
}

std::vector<double> evolve_row(const ScenarioConfig& config, const EvolveResult& result,
                               Eigen::Index k, Eigen::Index j) {
  const auto& traj = result.traj;
  const auto& obs = result.obs;
  const Complex x = traj.psi[static_cast<std::size_t>(k)](j);
  std::vector<double> row{obs.times[static_cast<std::size_t>(k)], static_cast<double>(j + 1),
                          x.real(), x.imag(), std::abs(x)};
  if (wants_left(config)) {
    const Complex y = traj.phi[static_cast<std::size_t>(k)](j);
    row.insert(row.end(), {y.real(), y.imag(), std::abs(y)});
  }
  if (wants_bi(config)) {
    const Complex yx = obs.bi_overlap(k, j);
    row.insert(row.end(), {yx.real(), yx.imag()});
  }
  row.push_back(obs.euclidean_norm(k));
  if (wants_bi(config)) row.push_back(obs.bi_norm(k).real());
  if (config.observe_signed_log) row.push_back(obs.signed_log_overlap(k, j));
  return row;
}

}  // namespace

std::string render_evolve_csv(const ScenarioConfig& config, const EvolveResult& result) {
  const auto columns = evolve_columns(config);
  std::string out;
  const auto samples = static_cast<Eigen::Index>(result.obs.times.size());
  const Eigen::Index sites = result.obs.per_site_amplitude.cols();
  out.reserve(static_cast<std::size_t>(samples * sites) * columns.size() * 12);

  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c];
  }
  out += '\n';

  for (Eigen::Index k = 0; k < samples; ++k) {
    for (Eigen::Index j = 0; j < sites; ++j) {
      const auto row = evolve_row(config, result, k, j);
      out += fmt17(row[0]);
      out += ',';
      out += std::to_string(j + 1);
      for (std::size_t c = 2; c < row.size(); ++c) {
        out += ',';
        out += fmt17(row[c]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string render_evolve_json(const ScenarioConfig& config, const EvolveResult& result) {
  ordered_json doc;
  doc["columns"] = evolve_columns(config);
  ordered_json rows = ordered_json::array();
  const auto samples = static_cast<Eigen::Index>(result.obs.times.size());
  const Eigen::Index sites = result.obs.per_site_amplitude.cols();
  for (Eigen::Index k = 0; k < samples; ++k)
    for (Eigen::Index j = 0; j < sites; ++j) rows.push_back(evolve_row(config, result, k, j));
  doc["rows"] = std::move(rows);
  return doc.dump() + "\n";
}

// --- scan ------------------------------------------------------------------

namespace {

std::string canonical_param(const std::string& name) {
  if (name == "gamma") return "gamma";
  if (name == "t_r" || name == "tr") return "t_r";
  if (name == "beta") return "beta";
  throw ConfigError("scan: axis parameter must be gamma, t_r or beta, got \"" + name + "\"");
}

ScanRow scan_point(ScenarioConfig config, const std::string& param, double value) {
  if (param == "gamma")
    config.model.gamma = value;
  else if (param == "t_r")
    config.model.t_r = value;
  else
    config.model.beta = value;
  validate(config);

  const Matrix h = model::build(config.model);
  const auto sd = spectral::analyze(h);

  ScanRow row;
  row.value = value;
  row.max_growth_rate = spectral::max_growth_rate(sd);
  row.defective = sd.defective;

  const auto times = time_grid(config);
  const auto traj = dynamics::propagate(h, initial_vector(config), times, propagate_options(config));
  const auto obs = dynamics::observables(traj);
  const std::span<const double> norm{obs.euclidean_norm.data(),
                                     static_cast<std::size_t>(obs.euclidean_norm.size())};

  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    row.fitted_rate = dynamics::fit_exponential_rate(times, norm, 20.0,
                                                     std::min(50.0, config.t_max));
  } catch (const Error&) {
    row.fitted_rate = nan;
  }
  try {
    row.fitted_power =
        dynamics::fit_power_exponent(times, norm, 10.0, std::min(100.0, config.t_max));
  } catch (const Error&) {
    row.fitted_power = nan;
  }
  const auto peak = dynamics::peak_transient(times, norm);
  row.peak_t = peak.t;
  row.peak_value = peak.value;
  return row;
}

}  // namespace

std::vector<ScanRow> run_scan(const ScenarioConfig& config, const ScanAxis& axis) {
  const std::string param = canonical_param(axis.param);
  if (axis.values.size() < 2) throw ConfigError("scan: axis needs >= 2 points");
  validate(config);

  std::vector<ScanRow> rows(axis.values.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, config.jobs));
  for (std::size_t start = 0; start < axis.values.size(); start += jobs) {
    const std::size_t stop = std::min(axis.values.size(), start + jobs);
    std::vector<std::future<ScanRow>> batch;
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, scan_point, config, param, axis.values[i]));
    for (std::size_t i = start; i < stop; ++i) rows[i] = batch[i - start].get();
  }
  return rows;
}

std::string render_scan_csv(const ScanAxis& axis, const std::vector<ScanRow>& rows) {
  const std::string param = canonical_param(axis.param);
  std::string out = "param,value,max_growth_rate,defective,fitted_rate,fitted_power,peak_t,peak_value\n";
  for (const ScanRow& row : rows) {
    out += param;
    out += ',';
    out += fmt17(row.value);
    out += ',';
    out += fmt17(row.max_growth_rate);
    out += ',';
    out += row.defective ? '1' : '0';
    out += ',';
    out += fmt17(row.fitted_rate);
    out += ',';
    out += fmt17(row.fitted_power);
    out += ',';
    out += fmt17(row.peak_t);
    out += ',';
    out += fmt17(row.peak_value);
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);  // best effort
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                        ec.message());
}

}  // namespace nonrecip::cli
