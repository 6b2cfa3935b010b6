// Parameter scans and cross-engine validation reports.
//
// Scans fan out over grid points on a small thread pool; every point is an
// independent pure computation and results are gathered by grid index, so
// output never depends on scheduling. A failing point is recorded with its
// diagnostics and the scan continues.

#pragma once

#include "dce/core.hpp"
#include "dce/dynamics.hpp"
#include "dce/spectrum.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dce {

/// Calibration constants for every pass/fail decision in this module.
struct Tolerances {
  double relative = 0.05;              // engine agreement, additivity, fringe fit
  double destructive_residual = 1e-2;  // fraction of the constructive peak
  double phase_flatness = 0.02;        // unequal-frequency phase independence
  double normalization = 1e-3;         // Bogoliubov normalization defect
  double floor = 1e-12;                // guards divisions by empty modes
};

inline constexpr Tolerances kTolerances{};

enum class ScanAxis { PhaseDelta, GammaRight, Epsilon, TFinal };
enum class Engine { Analytic, Numeric };

std::string_view to_string(ScanAxis axis);
std::string_view to_string(Engine engine);
ScanAxis parse_axis(std::string_view name);
Engine parse_engine(std::string_view name);

struct ScanSpec {
  CavityConfig base;
  Truncation trunc;
  ScanAxis axis = ScanAxis::PhaseDelta;
  std::vector<double> grid;
  std::vector<Engine> engines{Engine::Analytic, Engine::Numeric};

  /// Grid nonempty and strictly increasing, engines nonempty.
  void validate() const;
};

/// base with the axis field replaced; the phase axis sets phi_left = value, phi_right = 0.
CavityConfig apply_axis(const CavityConfig& base, ScanAxis axis, double value);

struct ScanRow {
  double axis_value;
  Engine engine;
  int k;
  double photons;
};

struct ScanPoint {
  double axis_value = 0.0;
  Engine engine = Engine::Analytic;
  bool ok = true;
  std::string error;
  IntegrationDiagnostics diagnostics;
};

struct ScanResult {
  ScanAxis axis = ScanAxis::PhaseDelta;
  CavityConfig base;
  Truncation trunc;
  std::vector<ScanRow> rows;     // sorted by (axis_value, engine, k)
  std::vector<ScanPoint> points;  // one per (grid point, engine), same order

  std::size_t failures() const;
  /// N_k along the grid for one engine; NaN where the point failed.
  std::vector<double> series(Engine engine, int k) const;
};

/// threads == 0 uses the hardware concurrency.
ScanResult run_scan(const ScanSpec& spec, unsigned threads = 0);
ScanResult phase_scan(const ScanSpec& spec, unsigned threads = 0);

/// Phase grid {2 pi i / points : i = 0..points-1}.
std::vector<double> phase_grid(int points);

struct FringeFit {
  double amplitude = 0.0;
  double relative_residual = 0.0;  // |N - A f| / |N| with f = 1 - (-1)^gamma cos(phase)
};

FringeFit fit_fringe(std::span<const double> phases, std::span<const double> photons, int gamma);

struct AdditivityReport {
  Spectrum both;
  Spectrum left_only;
  Spectrum right_only;
  Eigen::VectorXd deviation;  // per resonant mode k = 1..max(gamma)-1
  double max_deviation = 0.0;
  double tail_deviation = 0.0;  // max |N - N_L - N_R| beyond the resonant modes, absolute
  double tolerance = kTolerances.relative;
  bool passed = false;
};

/// Requires two distinct integer gammas; throws std::domain_error otherwise.
AdditivityReport additivity_check(const CavityConfig& cfg, const Truncation& trunc,
                                  unsigned threads = 0);

struct ConvergenceRow {
  int k_max = 0;
  int steps_per_fastest_period = 0;
  std::int64_t steps = 0;
  bool resolvable = true;  // false: k_max below the resonant partner modes
  Eigen::VectorXd photons;
  std::optional<double> drift;  // max_k |N_k - N_k(prev)| / max_k N_k
  double normalization_defect = 0.0;
  double runtime_seconds = 0.0;
  std::string flag;
};

/// One fixed-step run per (K, steps) pair, in the order given. Drift compares
/// each resolvable row with the previous resolvable row.
std::vector<ConvergenceRow> convergence_report(const CavityConfig& cfg, std::span<const int> k_list,
                                               std::span<const int> steps_list);

struct ModeComparison {
  int k = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;
  bool relative = false;  // relative error where analytic N_k > 0, else absolute
  bool passed = false;
};

struct EngineComparison {
  std::vector<ModeComparison> modes;
  double reference_scale = 0.0;  // constructive analytic peak
  double absolute_tolerance = 0.0;
  Tolerances tolerances;
  IntegrationDiagnostics integration;
  bool passed = false;
  std::string diagnostics;
};

EngineComparison compare_engines(const CavityConfig& cfg, const Truncation& trunc,
                                 const Tolerances& tol = kTolerances);

/// Same comparison against an already computed numeric spectrum.
EngineComparison compare_engines(const CavityConfig& cfg, const Truncation& trunc,
                                 const Spectrum& numeric, const Tolerances& tol = kTolerances);

}  // namespace dce
