// Cavity parameters, static mode data, wall trajectories and the coupled-mode
// matrices for a 1D cavity with two independently oscillating walls.
//
// State layout: every 2K-dimensional vector or matrix in this library uses the
// interleaved quadrature order (1-, 1+, 2-, 2+, ..., K-, K+). Use slot() rather
// than computing offsets by hand.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dce {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using MatrixXc = MatrixX<std::complex<Scalar>>;
template <typename Scalar>
using VectorXc = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

enum class Side { Left, Right };

/// Thrown when a configuration value violates a parameter invariant. key()
/// names the offending field using the flat config schema.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Upper bound on epsilon * max(a_left, a_right).
inline constexpr double kSmallMotionBound = 0.1;

/// Physical parameters of one run. Frequencies are given as ratios
/// gamma = Omega / omega_1; the walls move only on [0, t_final].
struct CavityConfig {
  double lambda = std::numbers::pi;
  double epsilon = 0.0;
  double a_left = 0.0;
  double a_right = 0.0;
  double gamma_left = 1.0;
  double gamma_right = 1.0;
  double phi_left = 0.0;
  double phi_right = 0.0;
  double t_final = 1.0;

  double omega1() const { return std::numbers::pi / lambda; }
  double amplitude(Side side) const { return side == Side::Left ? a_left : a_right; }
  double gamma(Side side) const { return side == Side::Left ? gamma_left : gamma_right; }
  double phase(Side side) const { return side == Side::Left ? phi_left : phi_right; }
  double drive_frequency(Side side) const { return gamma(side) * omega1(); }
  double phase_delta() const { return phi_left - phi_right; }

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  bool operator==(const CavityConfig&) const = default;
};

/// Numerical controls for the coupled-mode integration.
struct Truncation {
  int k_max = 16;
  int steps_per_fastest_period = 16;
  double rel_tolerance = 1e-6;

  void validate() const;
  /// Also checks that k_max retains every resonant partner mode of cfg.
  void validate_for(const CavityConfig& cfg) const;

  bool operator==(const Truncation&) const = default;
};

inline constexpr int kMinStepsPerPeriod = 16;

/// ceil(max(gamma_left, gamma_right)): the smallest admissible k_max.
int required_modes(const CavityConfig& cfg);

/// K = max(16, 4 * ceil(max gamma)) with the default step policy.
Truncation default_truncation(const CavityConfig& cfg);

/// Row/column of quadrature (k, sigma) in the interleaved layout, k >= 1.
constexpr Eigen::Index slot(int k, int sigma) noexcept {
  return 2 * static_cast<Eigen::Index>(k - 1) + (sigma > 0 ? 1 : 0);
}

/// omega_k = k pi / Lambda. Throws std::domain_error for k < 1.
double mode_frequency(int k, const CavityConfig& cfg);

/// Antisymmetric wall coupling 2jk / (k^2 - j^2), with the extra (-1)^(j+k)
/// for the right wall. Zero on the diagonal.
double coupling_g(Side side, int j, int k);

/// Wall position at time t. Outside [0, t_final] the walls rest at 0 and lambda.
double wall_position(Side side, double t, const CavityConfig& cfg);

/// Static-cavity sine modes, re-normalised to the instantaneous wall positions.
class ModeBasis {
 public:
  ModeBasis(double lambda, int k_max);

  double lambda() const noexcept { return lambda_; }
  int k_max() const noexcept { return k_max_; }

  double omega(int k) const;
  Eigen::VectorXd omegas() const;

  /// sqrt(2/(R-L)) sin(k pi (x-L)/(R-L)).
  double profile(int k, double x, double left, double right) const;
  double profile_at(int k, double x, double t, const CavityConfig& cfg) const;

 private:
  double lambda_;
  int k_max_;
};

/// Coupling matrices g^L and g^R, indexed [j-1][k-1].
template <typename Scalar = double>
struct CouplingTables {
  MatrixX<Scalar> g_left;
  MatrixX<Scalar> g_right;

  int k_max() const { return static_cast<int>(g_left.rows()); }
  const MatrixX<Scalar>& operator()(Side side) const {
    return side == Side::Left ? g_left : g_right;
  }
};

template <typename Scalar = double>
CouplingTables<Scalar> coupling_tables(int k_max) {
  if (k_max < 1) throw std::domain_error("coupling_tables: k_max must be >= 1");
  CouplingTables<Scalar> tables{MatrixX<Scalar>::Zero(k_max, k_max),
                                MatrixX<Scalar>::Zero(k_max, k_max)};
  for (int j = 1; j <= k_max; ++j) {
    for (int k = 1; k <= k_max; ++k) {
      if (j == k) continue;
      const Scalar g = Scalar(2 * j * k) / Scalar(k * k - j * j);
      tables.g_left(j - 1, k - 1) = g;
      tables.g_right(j - 1, k - 1) = ((j + k) % 2 == 0) ? g : -g;
    }
  }
  return tables;
}

/// Diagonal entries i sigma omega_k of the free generator, interleaved.
template <typename Scalar = double>
VectorXc<Scalar> free_generator(const CavityConfig& cfg, int k_max) {
  VectorXc<Scalar> d(2 * k_max);
  const Scalar w1 = std::numbers::pi_v<Scalar> / static_cast<Scalar>(cfg.lambda);
  for (int k = 1; k <= k_max; ++k) {
    d(slot(k, -1)) = std::complex<Scalar>(0, -Scalar(k) * w1);
    d(slot(k, +1)) = std::complex<Scalar>(0, Scalar(k) * w1);
  }
  return d;
}

template <typename Scalar = double>
MatrixXc<Scalar> free_matrix(const CavityConfig& cfg, const Truncation& trunc) {
  return free_generator<Scalar>(cfg, trunc.k_max).asDiagonal();
}

/// One harmonic of the perturbation generator, c * exp(i frequency t), stored in
/// factored form: entry (k sigma, j sigma') = sigma * (symmetric + sigma' * antisymmetric).
/// Every 2x2 (k, j) block of the interleaved matrix has this rank-one shape.
template <typename Scalar = double>
struct PerturbationHarmonic {
  Scalar frequency;
  MatrixXc<Scalar> symmetric;
  MatrixXc<Scalar> antisymmetric;
};

/// The four harmonics (right s=+, right s=-, left s=+, left s=-) whose sum is
/// V1(t). The omega_1 prefactor and the minus sign of the left wall are folded in.
template <typename Scalar = double>
std::vector<PerturbationHarmonic<Scalar>> perturbation_harmonics(
    const CavityConfig& cfg, const CouplingTables<Scalar>& tables) {
  using C = std::complex<Scalar>;
  const int K = tables.k_max();
  const Scalar w1 = std::numbers::pi_v<Scalar> / static_cast<Scalar>(cfg.lambda);
  std::vector<PerturbationHarmonic<Scalar>> out;
  out.reserve(4);
  for (Side side : {Side::Right, Side::Left}) {
    const Scalar a = static_cast<Scalar>(cfg.amplitude(side));
    const Scalar gamma = static_cast<Scalar>(cfg.gamma(side));
    const Scalar wall_sign = side == Side::Right ? Scalar(1) : Scalar(-1);
    const auto& g = tables(side);
    for (int s : {+1, -1}) {
      const C prefactor =
          wall_sign * w1 * a * std::polar(Scalar(1), Scalar(s) * static_cast<Scalar>(cfg.phase(side)));
      PerturbationHarmonic<Scalar> h{Scalar(s) * gamma * w1, MatrixXc<Scalar>::Zero(K, K),
                                     MatrixXc<Scalar>::Zero(K, K)};
      for (int k = 1; k <= K; ++k) {
        for (int j = 1; j <= K; ++j) {
          const Scalar coupling = gamma * g(k - 1, j - 1) * std::sqrt(Scalar(j) / Scalar(k));
          Scalar sym = coupling * Scalar(s) * gamma / (Scalar(4) * Scalar(j));
          if (j == k) sym -= Scalar(s) * Scalar(k) / Scalar(2);
          h.symmetric(k - 1, j - 1) = prefactor * sym;
          h.antisymmetric(k - 1, j - 1) = prefactor * (coupling / Scalar(2));
        }
      }
      out.push_back(std::move(h));
    }
  }
  return out;
}

/// Expands a factored K x K pair into the dense interleaved 2K x 2K matrix.
template <typename Derived1, typename Derived2>
auto expand_interleaved(const Eigen::MatrixBase<Derived1>& symmetric,
                        const Eigen::MatrixBase<Derived2>& antisymmetric) {
  using Scalar = typename Derived1::Scalar;
  const Eigen::Index K = symmetric.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense(2 * K, 2 * K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index j = 0; j < K; ++j) {
      const Scalar p = symmetric(k, j);
      const Scalar q = antisymmetric(k, j);
      dense(2 * k, 2 * j) = -(p - q);
      dense(2 * k, 2 * j + 1) = -(p + q);
      dense(2 * k + 1, 2 * j) = p - q;
      dense(2 * k + 1, 2 * j + 1) = p + q;
    }
  }
  return dense;
}

/// V1(t) as a dense 2K x 2K matrix (multiply by epsilon for the full coupling).
/// Requires 0 <= t <= t_final.
template <typename Scalar = double>
MatrixXc<Scalar> perturbation_matrix(double t, const CavityConfig& cfg, const Truncation& trunc,
                                     const CouplingTables<Scalar>& tables) {
  if (!(t >= 0.0 && t <= cfg.t_final)) {
    throw std::domain_error("perturbation_matrix: t must lie in [0, t_final]");
  }
  if (tables.k_max() != trunc.k_max) {
    throw std::invalid_argument("perturbation_matrix: coupling tables do not match k_max");
  }
  const int K = trunc.k_max;
  MatrixXc<Scalar> sym = MatrixXc<Scalar>::Zero(K, K);
  MatrixXc<Scalar> anti = MatrixXc<Scalar>::Zero(K, K);
  for (const auto& h : perturbation_harmonics<Scalar>(cfg, tables)) {
    const auto phase = std::polar(Scalar(1), h.frequency * static_cast<Scalar>(t));
    sym += phase * h.symmetric;
    anti += phase * h.antisymmetric;
  }
  return expand_interleaved(sym, anti);
}

}  // namespace dce
