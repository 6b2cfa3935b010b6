// Closed-form first-order resonance results: the secular Bogoliubov coefficient
// and the photon numbers built from it. Everything here is exact arithmetic on
// the config; nothing is integrated.
//
// Resonance requires an integer frequency ratio gamma. Non-integer ratios have
// no secular term and give exactly zero.

#pragma once

#include "dce/core.hpp"
#include "dce/spectrum.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace dce {

inline constexpr double kIntegerTolerance = 1e-9;
/// Beyond these the first-order secular result is not trustworthy.
inline constexpr double kMaxSecularStrength = 0.3;  // epsilon * omega_1 * T
inline constexpr double kMinDrivePeriods = 20.0;    // omega_1 * T

/// round(gamma) when |gamma - round(gamma)| <= kIntegerTolerance.
std::optional<int> resonant_harmonic(double gamma);

/// Human-readable warnings when the config is outside the secular regime.
std::vector<std::string> validity_warnings(const CavityConfig& cfg);

struct AnalyticBeta {
  int n = 1;
  int k = 1;
  std::complex<double> value;
  bool secular = false;  // false: no resonant term for this (n, k)
};

/// First-order secular beta_nk, using the printed phase convention.
AnalyticBeta beta_first_order(int n, int k, const CavityConfig& cfg);

/// N_nk from the single-wall parts and their interference term.
double photon_number_pair(int n, int k, const CavityConfig& cfg);

/// N_k for k = 1..mode_count. mode_count <= 0 selects ceil(max gamma).
Spectrum photon_spectrum(const CavityConfig& cfg, int mode_count = 0);

/// Coefficient of cos(phi_left - phi_right) relative to N_k^L + N_k^R.
/// Requires gamma_left == gamma_right, integer; throws std::domain_error otherwise.
double interference_visibility(const CavityConfig& cfg);

}  // namespace dce
