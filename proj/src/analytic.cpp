#include "dce/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dce {

std::string_view to_string(Provenance p) {
  return p == Provenance::Analytic ? "analytic" : "numeric";
}

int Spectrum::peak_mode() const {
  if (photons.size() == 0) return 0;
  Eigen::Index best = 0;
  photons.maxCoeff(&best);
  return static_cast<int>(best) + 1;
}

std::optional<int> resonant_harmonic(double gamma) {
  const double r = std::round(gamma);
  if (std::abs(gamma - r) <= kIntegerTolerance) return static_cast<int>(r);
  return std::nullopt;
}

std::vector<std::string> validity_warnings(const CavityConfig& cfg) {
  std::vector<std::string> out;
  const double w1t = cfg.omega1() * cfg.t_final;
  if (cfg.epsilon * w1t > kMaxSecularStrength) {
    std::ostringstream os;
    os << "epsilon*omega1*T = " << cfg.epsilon * w1t << " exceeds " << kMaxSecularStrength
       << "; first-order secular result may be inaccurate";
    out.push_back(os.str());
  }
  if (w1t < kMinDrivePeriods) {
    std::ostringstream os;
    os << "omega1*T = " << w1t << " is below " << kMinDrivePeriods
       << "; non-secular terms are not negligible";
    out.push_back(os.str());
  }
  return out;
}

namespace {

double parity(int m) { return m % 2 == 0 ? 1.0 : -1.0; }

double half_strength(const CavityConfig& cfg) {
  return 0.5 * cfg.epsilon * cfg.omega1() * cfg.t_final;
}

// Harmonic gamma of a wall if it resonantly pairs modes n and k (n + k == gamma).
std::optional<int> pairing(const CavityConfig& cfg, Side side, int n, int k) {
  const auto h = resonant_harmonic(cfg.gamma(side));
  if (!h || *h - k < 1 || n != *h - k) return std::nullopt;
  return h;
}

// Single-wall N_k^A, zero outside 1 <= k <= gamma - 1.
double single_wall(const CavityConfig& cfg, Side side, int k) {
  const auto h = resonant_harmonic(cfg.gamma(side));
  if (!h || k < 1 || k > *h - 1) return 0.0;
  const double a = cfg.amplitude(side);
  const double s = half_strength(cfg);
  return s * s * k * (*h - k) * a * a;
}

void check_modes(int n, int k, const char* who) {
  if (n < 1 || k < 1) throw std::domain_error(std::string(who) + ": n and k must be >= 1");
}

}  // namespace

AnalyticBeta beta_first_order(int n, int k, const CavityConfig& cfg) {
  check_modes(n, k, "beta_first_order");
  AnalyticBeta b{n, k, {0.0, 0.0}, false};
  const double scale = half_strength(cfg) * std::sqrt(static_cast<double>(k) * n);
  if (const auto h = pairing(cfg, Side::Right, n, k)) {
    b.value += scale * parity(*h) * cfg.a_right * std::polar(1.0, cfg.phi_right);
    b.secular = true;
  }
  if (pairing(cfg, Side::Left, n, k)) {
    b.value -= scale * cfg.a_left * std::polar(1.0, cfg.phi_left);
    b.secular = true;
  }
  return b;
}

double photon_number_pair(int n, int k, const CavityConfig& cfg) {
  check_modes(n, k, "photon_number_pair");
  const double s2 = half_strength(cfg) * half_strength(cfg);
  double left = 0.0;
  double right = 0.0;
  if (pairing(cfg, Side::Left, n, k)) left = s2 * k * n * cfg.a_left * cfg.a_left;
  const auto hr = pairing(cfg, Side::Right, n, k);
  if (hr) right = s2 * k * n * cfg.a_right * cfg.a_right;
  double total = left + right;
  if (left > 0.0 && right > 0.0) {
    total -= 2.0 * parity(*hr) * std::sqrt(left) * std::sqrt(right) * std::cos(cfg.phase_delta());
  }
  return std::max(total, 0.0);
}

Spectrum photon_spectrum(const CavityConfig& cfg, int mode_count) {
  if (mode_count <= 0) mode_count = std::max(1, required_modes(cfg));
  Spectrum spec;
  spec.provenance = Provenance::Analytic;
  spec.config = cfg;
  spec.warnings = validity_warnings(cfg);
  spec.photons = Eigen::VectorXd::Zero(mode_count);

  const auto hl = resonant_harmonic(cfg.gamma_left);
  const auto hr = resonant_harmonic(cfg.gamma_right);
  spec.secular = (hl && *hl >= 2 && cfg.a_left > 0) || (hr && *hr >= 2 && cfg.a_right > 0);
  if (!spec.secular) spec.warnings.emplace_back("no secular term: no integer resonance is driven");

  const bool interfere = hl && hr && *hl == *hr;
  for (int k = 1; k <= mode_count; ++k) {
    const double nl = single_wall(cfg, Side::Left, k);
    const double nr = single_wall(cfg, Side::Right, k);
    double total = nl + nr;
    if (interfere && nl > 0.0 && nr > 0.0) {
      total -= parity(*hr) * 2.0 * std::sqrt(nl) * std::sqrt(nr) * std::cos(cfg.phase_delta());
    }
    spec.photons(k - 1) = std::max(total, 0.0);
  }
  return spec;
}

double interference_visibility(const CavityConfig& cfg) {
  const auto hl = resonant_harmonic(cfg.gamma_left);
  const auto hr = resonant_harmonic(cfg.gamma_right);
  if (!hl || !hr || *hl != *hr) {
    throw std::domain_error(
        "interference_visibility: requires gamma_left == gamma_right, both integer");
  }
  const double denom = cfg.a_left * cfg.a_left + cfg.a_right * cfg.a_right;
  if (denom == 0.0) return 0.0;
  return -parity(*hr) * 2.0 * cfg.a_left * cfg.a_right / denom;
}

}  // namespace dce
