// Numerical integration of the truncated coupled-mode system
//
//   dX/dt = V0 X + epsilon V1(t) X,    0 <= t <= T,
//
// for the full 2K x 2K fundamental matrix, followed by Bogoliubov extraction
// against the static-cavity modes. The engine knows nothing about resonance
// selection rules; it is the independent check on the analytic module.
//
// Integration runs in the interaction picture Y = exp(-V0 t) X, so the free
// rotation is exact and fourth-order Runge-Kutta only sees the O(epsilon)
// coupling (Lawson RK4). The step is h = (2 pi / omega_K) / steps_per_fastest_period,
// rounded so that an integer number of steps spans [0, T], and is halved until
// two successive resolutions agree to rel_tolerance.

#pragma once

#include "dce/core.hpp"
#include "dce/spectrum.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dce {

struct IntegrationDiagnostics {
  std::int64_t steps = 0;       // steps of the accepted solution
  double step_size = 0.0;
  double error_estimate = 0.0;  // max|Phi_2N - Phi_N| / max|Phi_2N|
  int halvings = 0;             // step halvings performed
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, IntegrationDiagnostics diagnostics)
      : std::runtime_error(what), diagnostics_(diagnostics) {}
  const IntegrationDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  IntegrationDiagnostics diagnostics_;
};

/// State-transition matrix X(T) = phi_T X(0), interleaved layout.
struct FundamentalSolution {
  Eigen::MatrixXcd phi_T;
  double t_final = 0.0;
  Truncation trunc;
  CavityConfig cfg;
  IntegrationDiagnostics diagnostics;
};

/// alpha(n-1, k-1) = alpha_nk, beta(n-1, k-1) = beta_nk, de-rotated at T.
struct BogoliubovPair {
  Eigen::MatrixXcd alpha;
  Eigen::MatrixXcd beta;
  CavityConfig cfg;
  Truncation trunc;
};

/// Number of steps of the base resolution (before any halving).
std::int64_t base_step_count(const CavityConfig& cfg, const Truncation& trunc);

/// phi_T from exactly `steps` Lawson-RK4 steps, no error control.
Eigen::MatrixXcd propagate(const CavityConfig& cfg, const Truncation& trunc, std::int64_t steps);

/// Throws ConfigError for invalid inputs and IntegrationError when the
/// tolerance cannot be met within the step budget.
FundamentalSolution evolve_fundamental(const CavityConfig& cfg, const Truncation& trunc);

BogoliubovPair extract_bogoliubov(const FundamentalSolution& sol);

/// N_k = sum_n |beta_nk|^2 over all retained n.
Spectrum numeric_spectrum(const BogoliubovPair& pair);

/// d_n = |sum_k (|alpha_nk|^2 - |beta_nk|^2) - 1| per initial mode n.
std::vector<double> normalization_defect(const BogoliubovPair& pair);

/// Convenience: evolve, extract and sum in one call.
Spectrum simulate_spectrum(const CavityConfig& cfg, const Truncation& trunc,
                           IntegrationDiagnostics* diagnostics = nullptr);

}  // namespace dce
