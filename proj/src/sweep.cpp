#include "dce/sweep.hpp"

#include "dce/analytic.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace dce {

namespace {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

int resonant_span(const CavityConfig& cfg) {
  int span = 0;
  for (Side side : {Side::Left, Side::Right}) {
    if (const auto h = resonant_harmonic(cfg.gamma(side))) span = std::max(span, *h - 1);
  }
  return span;
}

}  // namespace

std::string_view to_string(ScanAxis axis) {
  switch (axis) {
    case ScanAxis::PhaseDelta: return "phase_delta";
    case ScanAxis::GammaRight: return "gamma_right";
    case ScanAxis::Epsilon: return "epsilon";
    case ScanAxis::TFinal: return "t_final";
  }
  return "?";
}

std::string_view to_string(Engine engine) {
  return engine == Engine::Analytic ? "analytic" : "numeric";
}

ScanAxis parse_axis(std::string_view name) {
  for (ScanAxis a : {ScanAxis::PhaseDelta, ScanAxis::GammaRight, ScanAxis::Epsilon, ScanAxis::TFinal}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown scan axis: " + std::string(name));
}

Engine parse_engine(std::string_view name) {
  if (name == "analytic") return Engine::Analytic;
  if (name == "numeric") return Engine::Numeric;
  throw std::invalid_argument("unknown engine: " + std::string(name));
}

void ScanSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("scan grid must be nonempty");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw std::invalid_argument("scan grid must be strictly increasing");
  }
  if (engines.empty()) throw std::invalid_argument("scan needs at least one engine");
}

CavityConfig apply_axis(const CavityConfig& base, ScanAxis axis, double value) {
  CavityConfig cfg = base;
  switch (axis) {
    case ScanAxis::PhaseDelta:
      cfg.phi_left = value;
      cfg.phi_right = 0.0;
      break;
    case ScanAxis::GammaRight: cfg.gamma_right = value; break;
    case ScanAxis::Epsilon: cfg.epsilon = value; break;
    case ScanAxis::TFinal: cfg.t_final = value; break;
  }
  return cfg;
}

std::size_t ScanResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const ScanPoint& p) { return !p.ok; }));
}

std::vector<double> ScanResult::series(Engine engine, int k) const {
  std::vector<double> out;
  for (const auto& p : points) {
    if (p.engine != engine) continue;
    double value = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
      if (r.axis_value == p.axis_value && r.engine == engine && r.k == k) value = r.photons;
    }
    out.push_back(value);
  }
  return out;
}

ScanResult run_scan(const ScanSpec& spec, unsigned threads) {
  spec.validate();
  std::vector<Engine> engines = spec.engines;
  std::sort(engines.begin(), engines.end());
  engines.erase(std::unique(engines.begin(), engines.end()), engines.end());

  const std::size_t tasks = spec.grid.size() * engines.size();
  std::vector<ScanPoint> points(tasks);
  std::vector<Eigen::VectorXd> spectra(tasks);

  parallel_for(tasks, threads, [&](std::size_t i) {
    ScanPoint& p = points[i];
    p.axis_value = spec.grid[i / engines.size()];
    p.engine = engines[i % engines.size()];
    try {
      const CavityConfig cfg = apply_axis(spec.base, spec.axis, p.axis_value);
      cfg.validate();
      spec.trunc.validate_for(cfg);
      if (p.engine == Engine::Analytic) {
        spectra[i] = photon_spectrum(cfg, spec.trunc.k_max).photons;
      } else {
        spectra[i] = simulate_spectrum(cfg, spec.trunc, &p.diagnostics).photons;
      }
    } catch (const IntegrationError& e) {
      p.ok = false;
      p.error = e.what();
      p.diagnostics = e.diagnostics();
    } catch (const std::exception& e) {
      p.ok = false;
      p.error = e.what();
    }
  });

  ScanResult result{spec.axis, spec.base, spec.trunc, {}, std::move(points)};
  for (std::size_t i = 0; i < tasks; ++i) {
    if (!result.points[i].ok) continue;
    for (Eigen::Index k = 0; k < spectra[i].size(); ++k) {
      result.rows.push_back({result.points[i].axis_value, result.points[i].engine,
                             static_cast<int>(k) + 1, spectra[i](k)});
    }
  }
  return result;
}

ScanResult phase_scan(const ScanSpec& spec, unsigned threads) {
  if (spec.axis != ScanAxis::PhaseDelta) {
    throw std::invalid_argument("phase_scan requires the phase_delta axis");
  }
  return run_scan(spec, threads);
}

std::vector<double> phase_grid(int points) {
  if (points < 1) throw std::invalid_argument("phase grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * i / points;
  return grid;
}

FringeFit fit_fringe(std::span<const double> phases, std::span<const double> photons, int gamma) {
  if (phases.size() != photons.size() || phases.empty()) {
    throw std::invalid_argument("fit_fringe: phases and photons must be nonempty and equal length");
  }
  const double sign = gamma % 2 == 0 ? 1.0 : -1.0;
  double ff = 0.0, nf = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double f = 1.0 - sign * std::cos(phases[i]);
    ff += f * f;
    nf += photons[i] * f;
    nn += photons[i] * photons[i];
  }
  FringeFit fit;
  fit.amplitude = ff > 0.0 ? nf / ff : 0.0;
  double rr = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double r = photons[i] - fit.amplitude * (1.0 - sign * std::cos(phases[i]));
    rr += r * r;
  }
  fit.relative_residual = nn > 0.0 ? std::sqrt(rr / nn) : 0.0;
  return fit;
}

AdditivityReport additivity_check(const CavityConfig& cfg, const Truncation& trunc, unsigned threads) {
  const auto hl = resonant_harmonic(cfg.gamma_left);
  const auto hr = resonant_harmonic(cfg.gamma_right);
  if (!hl || !hr || *hl == *hr) {
    throw std::domain_error("additivity_check: requires distinct integer gamma_left and gamma_right");
  }
  CavityConfig left = cfg;
  left.a_right = 0.0;
  CavityConfig right = cfg;
  right.a_left = 0.0;
  const CavityConfig runs[] = {cfg, left, right};
  std::vector<Spectrum> spectra(3);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(3, threads, [&](std::size_t i) {
    try {
      spectra[i] = simulate_spectrum(runs[i], trunc);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  AdditivityReport report;
  report.both = std::move(spectra[0]);
  report.left_only = std::move(spectra[1]);
  report.right_only = std::move(spectra[2]);
  const Eigen::VectorXd residual =
      (report.both.photons - report.left_only.photons - report.right_only.photons).cwiseAbs();
  const int span = std::min<int>(resonant_span(cfg), static_cast<int>(residual.size()));
  report.deviation = Eigen::VectorXd::Zero(span);
  for (int k = 0; k < span; ++k) {
    report.deviation(k) = residual(k) / std::max(report.both.photons(k), kTolerances.floor);
  }
  report.max_deviation = span > 0 ? report.deviation.maxCoeff() : 0.0;
  if (residual.size() > span) report.tail_deviation = residual.tail(residual.size() - span).maxCoeff();
  report.passed = report.max_deviation <= report.tolerance;
  return report;
}

std::vector<ConvergenceRow> convergence_report(const CavityConfig& cfg, std::span<const int> k_list,
                                               std::span<const int> steps_list) {
  if (k_list.empty() || steps_list.empty()) {
    throw std::invalid_argument("convergence_report: k and step lists must be nonempty");
  }
  cfg.validate();
  std::vector<ConvergenceRow> rows;
  std::optional<std::size_t> previous;
  for (int k_max : k_list) {
    for (int steps : steps_list) {
      ConvergenceRow row;
      row.k_max = k_max;
      row.steps_per_fastest_period = steps;
      Truncation trunc;
      trunc.k_max = k_max;
      trunc.steps_per_fastest_period = steps;
      trunc.validate();
      if (k_max < required_modes(cfg)) {
        row.resolvable = false;
        row.flag = "resonant partner modes absent: k_max < " + std::to_string(required_modes(cfg));
        rows.push_back(std::move(row));
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      row.steps = base_step_count(cfg, trunc);
      FundamentalSolution sol;
      sol.phi_T = propagate(cfg, trunc, row.steps);
      sol.t_final = cfg.t_final;
      sol.trunc = trunc;
      sol.cfg = cfg;
      const auto pair = extract_bogoliubov(sol);
      row.photons = numeric_spectrum(pair).photons;
      const auto defects = normalization_defect(pair);
      row.normalization_defect = *std::max_element(defects.begin(), defects.end());
      row.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(std::move(row));

      ConvergenceRow& current = rows.back();
      if (previous) {
        const Eigen::VectorXd& before = rows[*previous].photons;
        const Eigen::Index common = std::min(current.photons.size(), before.size());
        const double peak = std::max(current.photons.maxCoeff(), kTolerances.floor);
        current.drift =
            (current.photons.head(common) - before.head(common)).cwiseAbs().maxCoeff() / peak;
      }
      previous = rows.size() - 1;
    }
  }
  return rows;
}

EngineComparison compare_engines(const CavityConfig& cfg, const Truncation& trunc,
                                 const Tolerances& tol) {
  IntegrationDiagnostics diagnostics;
  const Spectrum numeric = simulate_spectrum(cfg, trunc, &diagnostics);
  auto report = compare_engines(cfg, trunc, numeric, tol);
  report.integration = diagnostics;
  return report;
}

EngineComparison compare_engines(const CavityConfig& cfg, const Truncation& trunc,
                                 const Spectrum& numeric, const Tolerances& tol) {
  EngineComparison report;
  report.tolerances = tol;

  // Constructive peak: the analytic maximum over the two extreme phase differences.
  for (double delta : {0.0, std::numbers::pi}) {
    CavityConfig probe = cfg;
    probe.phi_left = delta;
    probe.phi_right = 0.0;
    const auto s = photon_spectrum(probe, trunc.k_max);
    report.reference_scale = std::max(report.reference_scale, s.photons.maxCoeff());
  }
  report.absolute_tolerance =
      report.reference_scale > 0.0 ? tol.destructive_residual * report.reference_scale : tol.floor;

  const Spectrum analytic = photon_spectrum(cfg, trunc.k_max);

  std::ostringstream failures;
  report.passed = true;
  for (int k = 1; k <= trunc.k_max; ++k) {
    ModeComparison m;
    m.k = k;
    m.analytic = analytic.at(k);
    m.numeric = numeric.at(k);
    m.relative = m.analytic > 0.0;
    if (m.relative) {
      m.error = std::abs(m.numeric - m.analytic) / m.analytic;
      m.passed = m.error <= tol.relative;
    } else {
      m.error = std::abs(m.numeric - m.analytic);
      m.passed = m.error <= report.absolute_tolerance;
    }
    if (!m.passed) {
      report.passed = false;
      failures << "k=" << k << (m.relative ? " relative" : " absolute") << " error " << m.error
               << " exceeds " << (m.relative ? tol.relative : report.absolute_tolerance) << "; ";
    }
    report.modes.push_back(m);
  }
  report.diagnostics = failures.str();
  return report;
}

}  // namespace dce
