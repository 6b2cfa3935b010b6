#pragma once

#include "dce/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace dce {

enum class Provenance { Analytic, Numeric };

std::string_view to_string(Provenance p);

/// Per-mode photon numbers N_k, stored at photons(k - 1).
struct Spectrum {
  Eigen::VectorXd photons;
  Provenance provenance = Provenance::Analytic;
  CavityConfig config;
  /// False when no wall drives an integer resonance ("no secular term").
  bool secular = true;
  std::vector<std::string> warnings;

  int mode_count() const { return static_cast<int>(photons.size()); }
  /// N_k, or 0 for modes beyond the stored range.
  double at(int k) const {
    return (k >= 1 && k <= mode_count()) ? photons(k - 1) : 0.0;
  }
  /// Mode with the largest N_k (lowest k on ties).
  int peak_mode() const;
};

}  // namespace dce
