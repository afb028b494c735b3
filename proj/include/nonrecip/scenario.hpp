#pragma once

// Scenario configs, figure presets, and the spectrum/evolve/scan runners
// behind the command-line front end. Everything here is deterministic:
// identical configs produce byte-identical output files.

#include <filesystem>
#include <string>
#include <vector>

#include "nonrecip/dynamics.hpp"
#include "nonrecip/model.hpp"
#include "nonrecip/spectral.hpp"
#include "nonrecip/types.hpp"

namespace nonrecip::cli {

enum class Format { csv, json };

struct FitRequest {
  std::string series;  // "norm", "site:<j>" or "left_site:<j>" (1-based j)
  enum class Kind { exp, power } kind = Kind::exp;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct ScenarioConfig {
  model::HamiltonianSpec model;

  // 1-based localized initial site; 0 means "last site" (the paper's
  // canonical master-site choice). Ignored when initial_state is nonempty.
  int initial_site = 0;
  Vector initial_state;  // explicit amplitudes; normalized to unit norm on use

  double t_max = 100.0;
  double dt = 0.01;
  dynamics::Method method = dynamics::Method::expm_step;
  double rk4_substep = 1e-3;

  // The right evolution is always computed; these request extras.
  bool observe_left = false;
  bool observe_biorthogonal = false;  // implies left
  bool observe_signed_log = false;    // implies biorthogonal

  std::vector<FitRequest> fits;

  std::string out;
  Format format = Format::csv;
  int jobs = 1;
};

void validate(const ScenarioConfig& config);            // throws ConfigError
std::vector<double> time_grid(const ScenarioConfig&);   // 0, dt, 2 dt, ..., <= t_max
Vector initial_vector(const ScenarioConfig&);           // unit-norm initial state
dynamics::PropagateOptions propagate_options(const ScenarioConfig&);

// Config file I/O (JSON, lower_snake_case keys; see README for the schema).
ScenarioConfig parse_config_json(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Figure presets fig2a..fig5f encode the published parameter sets
// (N = 10, t_l = 1, t_r in {0, 0.5}, gamma in {0, 0.5}, beta in {0, 1},
// initial site in {1, 10}) plus desk-scale time grids and fit windows.
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);  // throws ConfigError

// --- runners -------------------------------------------------------------

// Eigenvalues, structure predicates and growth rate as a JSON document.
std::string run_spectrum_json(const ScenarioConfig& config);

struct EvolveResult {
  dynamics::StateTrajectory traj;
  dynamics::ObservableSeries obs;
  std::vector<std::pair<FitRequest, double>> fit_results;
};
EvolveResult run_evolve(const ScenarioConfig& config);
std::string render_evolve_csv(const ScenarioConfig& config, const EvolveResult& result);
std::string render_evolve_json(const ScenarioConfig& config, const EvolveResult& result);

struct ScanAxis {
  std::string param;           // "gamma", "t_r" or "beta"
  std::vector<double> values;  // >= 2 points
};

struct ScanRow {
  double value = 0.0;
  double max_growth_rate = 0.0;
  bool defective = false;
  double fitted_rate = 0.0;      // exp fit of ||x(t)|| over [20, 50] (NaN if unavailable)
  double fitted_power = 0.0;     // power fit of ||x(t)|| over [10, 100] (NaN if unavailable)
  double peak_t = 0.0;
  double peak_value = 0.0;
};

std::vector<ScanRow> run_scan(const ScenarioConfig& config, const ScanAxis& axis);
std::string render_scan_csv(const ScanAxis& axis, const std::vector<ScanRow>& rows);

// Write via temp file + rename so readers never observe partial output.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Full command-line front end; returns the process exit code
// (0 ok, 2 config error, 3 numerical failure, 4 I/O error).
int run_cli(int argc, const char* const* argv);

}  // namespace nonrecip::cli
