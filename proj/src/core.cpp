#include "dce/core.hpp"

#include <algorithm>
#include <sstream>

namespace dce {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& constraint) {
  throw ConfigError(key, key + " must be " + constraint);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void CavityConfig::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"lambda", lambda},         {"epsilon", epsilon},         {"a_left", a_left},
      {"a_right", a_right},       {"gamma_left", gamma_left},   {"gamma_right", gamma_right},
      {"phi_left", phi_left},     {"phi_right", phi_right},     {"t_final", t_final}};
  for (const auto& [key, value] : fields) {
    if (!finite(value)) fail(key, "finite");
  }
  if (!(lambda > 0)) fail("lambda", "> 0");
  if (!(epsilon >= 0)) fail("epsilon", ">= 0");
  if (!(t_final > 0)) fail("t_final", "> 0");
  if (!(a_left >= 0)) fail("a_left", ">= 0");
  if (!(a_right >= 0)) fail("a_right", ">= 0");
  if (!(gamma_left > 0)) fail("gamma_left", "> 0");
  if (!(gamma_right > 0)) fail("gamma_right", "> 0");
  if (!(epsilon * std::max(a_left, a_right) < kSmallMotionBound)) {
    std::ostringstream os;
    os << "small-motion bound violated: epsilon * max(a_left, a_right) = "
       << epsilon * std::max(a_left, a_right) << " must be < " << kSmallMotionBound;
    throw ConfigError("epsilon", os.str());
  }
}

void Truncation::validate() const {
  if (k_max < 1) fail("k_max", ">= 1");
  if (steps_per_fastest_period < kMinStepsPerPeriod) {
    fail("steps_per_fastest_period", ">= " + std::to_string(kMinStepsPerPeriod));
  }
  if (!(rel_tolerance > 0) || !finite(rel_tolerance)) fail("rel_tolerance", "> 0");
}

void Truncation::validate_for(const CavityConfig& cfg) const {
  validate();
  const int need = required_modes(cfg);
  if (k_max < need) {
    fail("k_max", ">= ceil(max(gamma_left, gamma_right)) = " + std::to_string(need));
  }
}

int required_modes(const CavityConfig& cfg) {
  return static_cast<int>(std::ceil(std::max(cfg.gamma_left, cfg.gamma_right)));
}

Truncation default_truncation(const CavityConfig& cfg) {
  Truncation t;
  t.k_max = std::max(16, 4 * required_modes(cfg));
  return t;
}

double mode_frequency(int k, const CavityConfig& cfg) {
  if (k < 1) throw std::domain_error("mode_frequency: k must be >= 1");
  return k * std::numbers::pi / cfg.lambda;
}

double coupling_g(Side side, int j, int k) {
  if (j < 1 || k < 1) throw std::domain_error("coupling_g: indices must be >= 1");
  if (j == k) return 0.0;
  const double g = 2.0 * j * k / (static_cast<double>(k) * k - static_cast<double>(j) * j);
  if (side == Side::Right && (j + k) % 2 != 0) return -g;
  return g;
}

double wall_position(Side side, double t, const CavityConfig& cfg) {
  const double rest = side == Side::Left ? 0.0 : cfg.lambda;
  if (t < 0.0 || t > cfg.t_final) return rest;
  const double displacement =
      cfg.epsilon * cfg.amplitude(side) * std::sin(cfg.drive_frequency(side) * t + cfg.phase(side));
  return rest + cfg.lambda * displacement;
}

ModeBasis::ModeBasis(double lambda, int k_max) : lambda_(lambda), k_max_(k_max) {
  if (!(lambda > 0)) throw std::domain_error("ModeBasis: lambda must be > 0");
  if (k_max < 1) throw std::domain_error("ModeBasis: k_max must be >= 1");
}

double ModeBasis::omega(int k) const {
  if (k < 1 || k > k_max_) throw std::domain_error("ModeBasis::omega: k out of range");
  return k * std::numbers::pi / lambda_;
}

Eigen::VectorXd ModeBasis::omegas() const {
  return Eigen::VectorXd::LinSpaced(k_max_, 1.0, k_max_) * (std::numbers::pi / lambda_);
}

double ModeBasis::profile(int k, double x, double left, double right) const {
  if (k < 1 || k > k_max_) throw std::domain_error("ModeBasis::profile: k out of range");
  const double width = right - left;
  return std::sqrt(2.0 / width) * std::sin(k * std::numbers::pi * (x - left) / width);
}

double ModeBasis::profile_at(int k, double x, double t, const CavityConfig& cfg) const {
  return profile(k, x, wall_position(Side::Left, t, cfg), wall_position(Side::Right, t, cfg));
}

}  // namespace dce
