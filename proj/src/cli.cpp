#include "dce/cli.hpp"

#include "dce/analytic.hpp"
#include "dce/dynamics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace dce {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

json tolerances_json(const Tolerances& t) {
  return {{"relative", t.relative},
          {"destructive_residual", t.destructive_residual},
          {"phase_flatness", t.phase_flatness},
          {"normalization", t.normalization},
          {"floor", t.floor}};
}

json diagnostics_json(const IntegrationDiagnostics& d) {
  return {{"steps", d.steps},
          {"step_size", d.step_size},
          {"error_estimate", d.error_estimate},
          {"halvings", d.halvings}};
}

json base_metadata(const RunManifest& m) {
  json meta;
  meta["tool"] = std::string("dce ") + kVersion;
  meta["command"] = std::string(to_string(m.command));
  meta["config"] = to_json(m.config);
  meta["truncation"] = to_json(m.trunc);
  meta["defaulted"] = m.defaulted;
  meta["engines"] = {{"analytic", "first-order secular resonance 1.0"},
                     {"numeric", "lawson-rk4 with step halving 1.0"}};
  meta["tolerances"] = tolerances_json(kTolerances);
  return meta;
}

RunOutput spectrum_command(const RunManifest& m) {
  RunOutput out;
  const auto sol = evolve_fundamental(m.config, m.trunc);
  const auto pair = extract_bogoliubov(sol);
  const Spectrum numeric = numeric_spectrum(pair);
  const Spectrum analytic = photon_spectrum(m.config, m.trunc.k_max);
  const auto defects = normalization_defect(pair);

  auto& t = out.table;
  t.metadata = base_metadata(m);
  t.metadata["integrator"] = diagnostics_json(sol.diagnostics);
  t.metadata["analytic_secular"] = analytic.secular;
  t.metadata["max_normalization_defect"] = *std::max_element(defects.begin(), defects.end());
  t.metadata["warnings"] = analytic.warnings;
  t.columns = {"k", "engine", "N_k"};
  for (int k = 1; k <= m.trunc.k_max; ++k) {
    t.rows.push_back({k, "analytic", analytic.at(k)});
    t.rows.push_back({k, "numeric", numeric.at(k)});
  }
  out.notes = analytic.warnings;
  return out;
}

RunOutput scan_command(const RunManifest& m, ScanAxis axis, const std::vector<double>& grid) {
  RunOutput out;
  ScanSpec spec{m.config, m.trunc, axis, grid, m.engines};
  const ScanResult result = run_scan(spec, m.threads);

  auto& t = out.table;
  t.metadata = base_metadata(m);
  t.metadata["axis"] = std::string(to_string(axis));
  json points = json::array();
  for (const auto& p : result.points) {
    json entry = {{"axis_value", p.axis_value}, {"engine", std::string(to_string(p.engine))}, {"ok", p.ok}};
    if (p.engine == Engine::Numeric) entry["integrator"] = diagnostics_json(p.diagnostics);
    if (!p.ok) {
      entry["error"] = p.error;
      out.notes.push_back("point " + format_number(p.axis_value) + " (" +
                          std::string(to_string(p.engine)) + ") failed: " + p.error);
    }
    points.push_back(std::move(entry));
  }
  t.metadata["points"] = std::move(points);
  t.metadata["failed_points"] = result.failures();

  // Fringe fits for equal-frequency phase scans.
  const auto hl = resonant_harmonic(m.config.gamma_left);
  const auto hr = resonant_harmonic(m.config.gamma_right);
  const bool numeric = std::find(m.engines.begin(), m.engines.end(), Engine::Numeric) != m.engines.end();
  if (axis == ScanAxis::PhaseDelta && numeric && hl && hr && *hl == *hr && result.failures() == 0) {
    json fits = json::array();
    for (int k = 1; k <= *hl - 1 && k <= m.trunc.k_max; ++k) {
      const auto series = result.series(Engine::Numeric, k);
      const auto fit = fit_fringe(grid, series, *hl);
      fits.push_back({{"k", k}, {"amplitude", fit.amplitude}, {"relative_residual", fit.relative_residual}});
    }
    t.metadata["fringe_fit"] = std::move(fits);
  }

  t.columns = {"axis_value", "engine", "k", "N_k"};
  for (const auto& r : result.rows) {
    t.rows.push_back({r.axis_value, std::string(to_string(r.engine)), r.k, r.photons});
  }
  return out;
}

RunOutput additivity_command(const RunManifest& m) {
  RunOutput out;
  const auto report = additivity_check(m.config, m.trunc, m.threads);
  auto& t = out.table;
  t.metadata = base_metadata(m);
  t.metadata["max_deviation"] = report.max_deviation;
  t.metadata["tail_deviation"] = report.tail_deviation;
  t.metadata["tolerance"] = report.tolerance;
  t.metadata["passed"] = report.passed;
  t.columns = {"k", "N_k_both", "N_k_left", "N_k_right", "deviation"};
  for (int k = 1; k <= m.trunc.k_max; ++k) {
    Table::Cell deviation = nullptr;
    if (k <= report.deviation.size()) deviation = report.deviation(k - 1);
    t.rows.push_back({k, report.both.at(k), report.left_only.at(k), report.right_only.at(k), deviation});
  }
  out.passed = report.passed;
  if (!report.passed) {
    out.notes.push_back("additivity deviation " + format_number(report.max_deviation) + " exceeds " +
                        format_number(report.tolerance));
  }
  return out;
}

RunOutput convergence_command(const RunManifest& m) {
  RunOutput out;
  std::vector<int> k_list = m.k_list.empty() ? std::vector<int>{m.trunc.k_max} : m.k_list;
  std::vector<int> steps_list =
      m.steps_list.empty() ? std::vector<int>{m.trunc.steps_per_fastest_period,
                                              2 * m.trunc.steps_per_fastest_period}
                           : m.steps_list;
  const auto rows = convergence_report(m.config, k_list, steps_list);
  auto& t = out.table;
  t.metadata = base_metadata(m);
  t.columns = {"k_max", "steps_per_fastest_period", "steps", "drift", "normalization_defect",
               "peak_N_k", "runtime_s", "flag"};
  for (const auto& r : rows) {
    Table::Cell drift = nullptr;
    if (r.drift) drift = *r.drift;
    Table::Cell peak = nullptr;
    Table::Cell defect = nullptr;
    if (r.resolvable) {
      peak = r.photons.maxCoeff();
      defect = r.normalization_defect;
    }
    t.rows.push_back({r.k_max, r.steps_per_fastest_period, r.steps, drift, defect, peak,
                      r.runtime_seconds, r.flag});
    if (!r.flag.empty()) out.notes.push_back("K=" + std::to_string(r.k_max) + ": " + r.flag);
  }
  return out;
}

void comparison_rows(Table& t, const EngineComparison& report) {
  t.columns = {"k", "analytic", "numeric", "error", "error_kind", "passed"};
  for (const auto& mode : report.modes) {
    t.rows.push_back({mode.k, mode.analytic, mode.numeric, mode.error,
                      mode.relative ? "relative" : "absolute", mode.passed});
  }
}

RunOutput compare_command(const RunManifest& m) {
  RunOutput out;
  const auto report = compare_engines(m.config, m.trunc);
  auto& t = out.table;
  t.metadata = base_metadata(m);
  t.metadata["integrator"] = diagnostics_json(report.integration);
  t.metadata["reference_scale"] = report.reference_scale;
  t.metadata["absolute_tolerance"] = report.absolute_tolerance;
  t.metadata["passed"] = report.passed;
  comparison_rows(t, report);
  out.passed = report.passed;
  if (!report.passed) out.notes.push_back("engine comparison failed: " + report.diagnostics);
  return out;
}

RunOutput validate_command(const RunManifest& m) {
  RunOutput out;
  auto& t = out.table;
  t.metadata = base_metadata(m);
  t.columns = {"check", "value", "threshold", "passed"};
  auto add = [&](const std::string& name, Table::Cell value, double threshold, bool passed) {
    t.rows.push_back({name, std::move(value), threshold, passed});
    if (!passed) {
      out.passed = false;
      out.notes.push_back("check failed: " + name);
    }
  };

  // Free evolution over the same window must be a pure phase rotation.
  CavityConfig free_cfg = m.config;
  free_cfg.epsilon = 0.0;
  const auto free_sol = evolve_fundamental(free_cfg, m.trunc);
  const Eigen::MatrixXcd expected =
      (free_generator<double>(free_cfg, m.trunc.k_max) * free_cfg.t_final).array().exp().matrix().asDiagonal();
  const double free_error = (free_sol.phi_T - expected).cwiseAbs().maxCoeff();
  add("free_evolution", free_error, 10.0 * m.trunc.rel_tolerance,
      free_error <= 10.0 * m.trunc.rel_tolerance);

  const auto sol = evolve_fundamental(m.config, m.trunc);
  t.metadata["integrator"] = diagnostics_json(sol.diagnostics);
  add("integrator_error", sol.diagnostics.error_estimate, m.trunc.rel_tolerance,
      sol.diagnostics.error_estimate <= m.trunc.rel_tolerance);

  const auto pair = extract_bogoliubov(sol);
  const auto defects = normalization_defect(pair);
  const double defect = *std::max_element(defects.begin(), defects.end());
  add("normalization_defect", defect, kTolerances.normalization, defect <= kTolerances.normalization);

  const Spectrum numeric = numeric_spectrum(pair);
  const double lowest = numeric.photons.minCoeff();
  add("nonnegative_spectrum", lowest, 0.0, lowest >= 0.0);

  const Spectrum analytic = photon_spectrum(m.config, m.trunc.k_max);
  const bool resonant = analytic.secular || m.config.epsilon == 0.0 ||
                        (m.config.a_left == 0.0 && m.config.a_right == 0.0);
  if (resonant) {
    const auto report = compare_engines(m.config, m.trunc, numeric);
    double worst = 0.0;
    for (const auto& mode : report.modes) {
      worst = std::max(worst, mode.relative ? mode.error / kTolerances.relative
                                            : mode.error / std::max(report.absolute_tolerance, 1e-300));
    }
    add("engine_agreement", worst, 1.0, report.passed);
  } else {
    t.rows.push_back({"engine_agreement", nullptr, 1.0, true});
    out.notes.push_back("engine_agreement skipped: no integer resonance");
  }
  t.metadata["passed"] = out.passed;
  return out;
}

std::vector<double> linear_grid(double from, double to, int points) {
  if (points < 1) throw std::invalid_argument("--points must be >= 1");
  if (points == 1) return {from};
  if (!(to > from)) throw std::invalid_argument("--to must exceed --from");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = from + (to - from) * i / (points - 1);
  return grid;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Spectrum: return "spectrum";
    case Command::PhaseScan: return "phase-scan";
    case Command::FreqScan: return "freq-scan";
    case Command::Additivity: return "additivity";
    case Command::Convergence: return "convergence";
    case Command::Compare: return "compare";
    case Command::Validate: return "validate";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::Spectrum, Command::PhaseScan, Command::FreqScan, Command::Additivity,
                    Command::Convergence, Command::Compare, Command::Validate}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

RunOutput execute(const RunManifest& m) {
  switch (m.command) {
    case Command::Spectrum: return spectrum_command(m);
    case Command::PhaseScan: return scan_command(m, ScanAxis::PhaseDelta, phase_grid(m.points));
    case Command::FreqScan:
      return scan_command(m, ScanAxis::GammaRight, linear_grid(m.grid_from, m.grid_to, m.points));
    case Command::Additivity: return additivity_command(m);
    case Command::Convergence: return convergence_command(m);
    case Command::Compare: return compare_command(m);
    case Command::Validate: return validate_command(m);
  }
  throw std::logic_error("unhandled command");
}

int run(const RunManifest& m, std::ostream& out, std::ostream& err) {
  RunOutput result;
  try {
    result = execute(m);
  } catch (const ConfigError& e) {
    err << "dce: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IntegrationError& e) {
    const auto& d = e.diagnostics();
    err << "dce: integration failed: " << e.what() << " (error estimate " << d.error_estimate << ", "
        << d.steps << " steps)\n";
    return kExitCheckFailed;
  } catch (const std::invalid_argument& e) {
    err << "dce: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "dce: " << e.what() << '\n';
    return kExitUsage;
  }

  const std::string text =
      m.output_format == OutputFormat::Json ? result.table.to_json() : result.table.to_csv();
  if (m.output_path.empty()) {
    out << text;
    out.flush();
  } else {
    try {
      write_atomic(m.output_path, text);
    } catch (const std::exception& e) {
      err << "dce: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  if (!m.quiet) {
    for (const auto& note : result.notes) err << "dce: " << note << '\n';
    if (!m.output_path.empty()) {
      err << "dce: wrote " << result.table.rows.size() << " rows to " << m.output_path << '\n';
    }
  }
  return result.passed ? kExitOk : kExitCheckFailed;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photon production between two oscillating cavity walls", "dce"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string output_path;
  std::string format;
  bool quiet = false;
  unsigned threads = 0;
  int points = 16;
  double grid_from = 1.0;
  double grid_to = 6.0;
  std::vector<std::string> engine_names;
  std::vector<int> k_list;
  std::vector<int> steps_list;

  app.add_option("--config", config_path, "Config file (key = value lines or JSON)");
  app.add_option("--out", output_path, "Output path (default: stdout)");
  app.add_option("--format", format, "csv or json (default: from --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quiet", quiet, "Only machine-readable output");
  app.add_option("--threads", threads, "Worker threads for scans (0: all cores)");

  std::map<std::string, std::string> overrides;
  std::vector<std::pair<std::string, CLI::Option*>> override_options;
  for (const auto& key : config_keys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    override_options.emplace_back(key, app.add_option(flag, overrides[key], "Override " + key));
  }

  const char* descriptions[][2] = {
      {"spectrum", "Analytic and numeric photon spectrum"},
      {"phase-scan", "Scan the phase difference over [0, 2pi)"},
      {"freq-scan", "Scan gamma_right over [--from, --to]"},
      {"additivity", "Check that unequal-frequency walls add independently"},
      {"convergence", "Fixed-step refinement study over K and step density"},
      {"compare", "Compare analytic and numeric spectra against tolerances"},
      {"validate", "Run the full battery of consistency checks"}};
  for (const auto& [name, help] : descriptions) {
    auto* sub = app.add_subcommand(name, help);
    const std::string n = name;
    if (n == "phase-scan" || n == "freq-scan") {
      sub->add_option("--points", points, "Number of grid points");
      sub->add_option("--engines", engine_names, "analytic,numeric")
          ->delimiter(',')
          ->check(CLI::IsMember({"analytic", "numeric"}));
    }
    if (n == "freq-scan") {
      sub->add_option("--from", grid_from, "First gamma_right");
      sub->add_option("--to", grid_to, "Last gamma_right");
    }
    if (n == "convergence") {
      sub->add_option("--k-list", k_list, "Comma-separated K values")->delimiter(',');
      sub->add_option("--steps-list", steps_list, "Comma-separated steps per fastest period")
          ->delimiter(',');
    }
  }

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dce: " << e.what() << '\n';
    return kExitUsage;
  }

  RunManifest m;
  m.command = *parse_command(app.get_subcommands().front()->get_name());
  m.quiet = quiet;
  m.threads = threads;
  m.points = points;
  m.grid_from = grid_from;
  m.grid_to = grid_to;
  m.k_list = k_list;
  m.steps_list = steps_list;
  if (!engine_names.empty()) {
    m.engines.clear();
    for (const auto& e : engine_names) m.engines.push_back(parse_engine(e));
  }
  m.output_path = output_path;
  if (!format.empty()) {
    m.output_format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  } else {
    m.output_format = std::filesystem::path(output_path).extension() == ".json" ? OutputFormat::Json
                                                                                 : OutputFormat::Csv;
  }

  try {
    ConfigEntries entries;
    if (!config_path.empty()) entries = read_entries(read_file(config_path));
    for (const auto& [key, option] : override_options) {
      if (option->count() > 0) entries[key] = overrides[key];
    }
    const ParsedConfig parsed = parse_entries(entries);
    m.config = parsed.config;
    m.trunc = parsed.trunc;
    m.defaulted = parsed.defaulted;
  } catch (const ConfigError& e) {
    err << "dce: config error: " << e.what() << '\n';
    return kExitUsage;
  }

  return run(m, out, err);
}

}  // namespace dce
