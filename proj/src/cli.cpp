#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nonrecip/scenario.hpp"

namespace nonrecip::cli {

namespace {

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int parse_init(const std::string& text) {
  std::string body = text;
  if (body.rfind("site:", 0) == 0) body = body.substr(5);
  try {
    std::size_t used = 0;
    const int site = std::stoi(body, &used);
    if (used != body.size()) throw std::invalid_argument(body);
    return site;
  } catch (const std::exception&) {
    throw ConfigError("--init: expected site:<k>, got \"" + text + "\"");
  }
}

// Common options shared by the subcommands; only flags the user actually
// passed are applied on top of the base config (defaults, config file, or
// figure preset).
struct CommonFlags {
  std::string model_name, init, method_name, observe, out, format_name, config_path;
  int n = 0, jobs = 0;
  double t_l = 0, t_r = 0, gamma = 0, beta = 0, gamma0 = 0, g = 0, c = 0;
  double t_max = 0, dt = 0, rk4_substep = 0;

  CLI::Option *o_model = nullptr, *o_n = nullptr, *o_tl = nullptr, *o_tr = nullptr,
              *o_gamma = nullptr, *o_beta = nullptr, *o_gamma0 = nullptr, *o_g = nullptr,
              *o_c = nullptr, *o_init = nullptr, *o_tmax = nullptr, *o_dt = nullptr,
              *o_method = nullptr, *o_substep = nullptr, *o_observe = nullptr, *o_out = nullptr,
              *o_format = nullptr, *o_jobs = nullptr, *o_config = nullptr;

  void attach(CLI::App* cmd) {
    o_config = cmd->add_option("--config", config_path, "JSON scenario config file");
    o_model = cmd->add_option("--model", model_name, "Model family: chain|jordan2|jordan2-loss|pt2");
    o_n = cmd->add_option("--n", n, "Chain length");
    o_tl = cmd->add_option("--tl", t_l, "Leftward hopping t_l");
    o_tr = cmd->add_option("--tr", t_r, "Rightward hopping t_r");
    o_gamma = cmd->add_option("--gamma", gamma, "Net loss gamma");
    o_beta = cmd->add_option("--beta", beta, "Boundary parameter (1 PBC, 0 OBC)");
    o_gamma0 = cmd->add_option("--gamma0", gamma0, "pt2 net loss gamma0");
    o_g = cmd->add_option("--g", g, "pt2 gain/loss");
    o_c = cmd->add_option("--c", c, "pt2 coupling");
    o_init = cmd->add_option("--init", init, "Initial state, site:<k> (1-based)");
    o_tmax = cmd->add_option("--t-max", t_max, "Final time");
    o_dt = cmd->add_option("--dt", dt, "Sample spacing");
    o_method = cmd->add_option("--method", method_name, "expm-step|expm-direct|rk4");
    o_substep = cmd->add_option("--rk4-substep", rk4_substep, "Fixed rk4 substep");
    o_observe = cmd->add_option("--observe", observe,
                                "Comma list of right,left,biorthogonal,signed_log");
    o_out = cmd->add_option("--out", out, "Output path");
    o_format = cmd->add_option("--format", format_name, "csv|json");
    o_jobs = cmd->add_option("--jobs", jobs, "Max concurrent scan points");
  }

  ScenarioConfig base() const {
    if (o_config->count() > 0) return load_config(config_path);
    return ScenarioConfig{};
  }

  void apply(ScenarioConfig& config) const {
    if (o_model->count()) config.model.family = model::family_from_string(model_name);
    if (o_n->count()) config.model.n = n;
    if (o_tl->count()) config.model.t_l = t_l;
    if (o_tr->count()) config.model.t_r = t_r;
    if (o_gamma->count()) config.model.gamma = gamma;
    if (o_beta->count()) config.model.beta = beta;
    if (o_gamma0->count()) config.model.gamma0 = gamma0;
    if (o_g->count()) config.model.g = g;
    if (o_c->count()) config.model.c = c;
    if (o_init->count()) {
      config.initial_site = parse_init(init);
      config.initial_state.resize(0);
    }
    if (o_tmax->count()) config.t_max = t_max;
    if (o_dt->count()) config.dt = dt;
    if (o_method->count()) config.method = dynamics::method_from_string(method_name);
    if (o_substep->count()) config.rk4_substep = rk4_substep;
    if (o_observe->count()) {
      config.observe_left = config.observe_biorthogonal = config.observe_signed_log = false;
      for (const auto& token : split_csv_list(observe)) apply_observe_token_public(config, token);
    }
    if (o_out->count()) config.out = out;
    if (o_format->count()) {
      if (format_name == "csv")
        config.format = Format::csv;
      else if (format_name == "json")
        config.format = Format::json;
      else
        throw ConfigError("--format: expected csv|json, got " + format_name);
    }
    if (o_jobs->count()) config.jobs = jobs;
  }

  static void apply_observe_token_public(ScenarioConfig& config, const std::string& token) {
    if (token == "right") return;
    if (token == "left")
      config.observe_left = true;
    else if (token == "biorthogonal")
      config.observe_biorthogonal = true;
    else if (token == "signed_log")
      config.observe_signed_log = true;
    else
      throw ConfigError("--observe: unknown token \"" + token + "\"");
  }
};

void emit_evolve(const ScenarioConfig& config, const std::string& default_out) {
  ScenarioConfig cfg = config;
  if (cfg.out.empty()) cfg.out = default_out;
  const EvolveResult result = run_evolve(cfg);
  const std::string content = cfg.format == Format::csv ? render_evolve_csv(cfg, result)
                                                        : render_evolve_json(cfg, result);
  write_atomic(cfg.out, content);
  for (const auto& [fit, value] : result.fit_results) {
    std::cout << "fit " << fit.series << ' '
              << (fit.kind == FitRequest::Kind::exp ? "exp" : "power") << " [" << fit.t_lo << ", "
              << fit.t_hi << "] = " << value << '\n';
  }
  std::cout << "wrote " << cfg.out << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Nonreciprocal lattice Hamiltonians: spectra, biorthogonal eigenstructure, "
               "and time evolution"};
  app.require_subcommand(1);

  auto* cmd_spectrum = app.add_subcommand("spectrum", "Eigenvalues and structure predicates (JSON)");
  auto* cmd_evolve = app.add_subcommand("evolve", "Propagate a state and write observables (CSV/JSON)");
  auto* cmd_scan = app.add_subcommand("scan", "Sweep gamma, t_r or beta and tabulate growth measures");
  auto* cmd_figure = app.add_subcommand("figure", "Run a bundled figure preset");

  CommonFlags spectrum_flags, evolve_flags, scan_flags, figure_flags;
  spectrum_flags.attach(cmd_spectrum);
  evolve_flags.attach(cmd_evolve);
  scan_flags.attach(cmd_scan);
  figure_flags.attach(cmd_figure);

  std::string scan_param, scan_values;
  cmd_scan->add_option("--param", scan_param, "Axis parameter: gamma|t_r|beta")->required();
  cmd_scan->add_option("--values", scan_values, "Comma list of axis values (>= 2)")->required();

  std::string figure_name;
  bool figure_list = false;
  cmd_figure->add_option("preset", figure_name, "Preset name, e.g. fig2b");
  cmd_figure->add_flag("--list", figure_list, "List available presets");

  try {
    app.parse(argc, argv);

    if (cmd_spectrum->parsed()) {
      ScenarioConfig config = spectrum_flags.base();
      spectrum_flags.apply(config);
      const std::string doc = run_spectrum_json(config);
      if (config.out.empty())
        std::cout << doc;
      else
        write_atomic(config.out, doc);
      return 0;
    }

    if (cmd_evolve->parsed()) {
      ScenarioConfig config = evolve_flags.base();
      evolve_flags.apply(config);
      emit_evolve(config, config.format == Format::json ? "evolve.json" : "evolve.csv");
      return 0;
    }

    if (cmd_scan->parsed()) {
      ScenarioConfig config = scan_flags.base();
      scan_flags.apply(config);
      if (config.format == Format::json) throw ConfigError("scan: only csv output is supported");
      ScanAxis axis;
      axis.param = scan_param;
      for (const auto& token : split_csv_list(scan_values)) {
        try {
          axis.values.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw ConfigError("--values: not a number: \"" + token + "\"");
        }
      }
      const auto rows = run_scan(config, axis);
      const std::string out = config.out.empty() ? "scan.csv" : config.out;
      write_atomic(out, render_scan_csv(axis, rows));
      std::cout << "wrote " << out << '\n';
      return 0;
    }

    // figure
    if (figure_list) {
      for (const auto& name : preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (figure_name.empty())
      throw ConfigError("figure: preset name required (or --list to enumerate)");
    ScenarioConfig config = preset(figure_name);
    if (figure_flags.o_config->count() > 0)
      throw ConfigError("figure: --config cannot be combined with a preset");
    figure_flags.apply(config);
    emit_evolve(config, config.out);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nonrecip::cli
