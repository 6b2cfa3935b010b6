#include "dce/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dce {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

constexpr std::int64_t kMaxSteps = std::int64_t{1} << 26;

// Interaction-picture generator in block layout (K minus rows, then K plus rows).
//
// For a state Y, epsilon * exp(-V0 t) V1(t) exp(V0 t) Y has minus rows -c.U and
// plus rows conj(c).U, where c_k = exp(i omega_k t) and U = M(t) exp(V0 t) Y with
// M(t) = [P - Q | P + Q] summed over the drive harmonics.
class Generator {
 public:
  Generator(const CavityConfig& cfg, int k_max)
      : K_(k_max), epsilon_(cfg.epsilon), omegas_(ModeBasis(cfg.lambda, k_max).omegas()) {
    const auto tables = coupling_tables<double>(k_max);
    for (const auto& h : perturbation_harmonics<double>(cfg, tables)) {
      MatrixXcd block(K_, 2 * K_);
      block.leftCols(K_) = h.symmetric - h.antisymmetric;
      block.rightCols(K_) = h.symmetric + h.antisymmetric;
      frequencies_.push_back(h.frequency);
      blocks_.push_back(std::move(block));
    }
  }

  struct Frame {
    MatrixXcd coupling;  // M(t) exp(V0 t), K x 2K
    VectorXcd rotation;  // c_k = exp(i omega_k t)
  };

  Frame frame(double t) const {
    Frame f{MatrixXcd::Zero(K_, 2 * K_), VectorXcd(K_)};
    for (std::size_t m = 0; m < blocks_.size(); ++m) {
      f.coupling += std::polar(1.0, frequencies_[m] * t) * blocks_[m];
    }
    for (Index k = 0; k < K_; ++k) f.rotation(k) = std::polar(1.0, omegas_(k) * t);
    f.coupling.leftCols(K_) = f.coupling.leftCols(K_) * f.rotation.conjugate().asDiagonal();
    f.coupling.rightCols(K_) = f.coupling.rightCols(K_) * f.rotation.asDiagonal();
    f.rotation *= epsilon_;
    return f;
  }

  // out = F(t, y) for the given frame.
  void apply(const Frame& f, const MatrixXcd& y, MatrixXcd& u, MatrixXcd& out) const {
    u.noalias() = f.coupling * y;
    out.topRows(K_).noalias() = -(f.rotation.asDiagonal() * u);
    out.bottomRows(K_).noalias() = f.rotation.conjugate().asDiagonal() * u;
  }

  int k_max() const { return K_; }
  const Eigen::VectorXd& omegas() const { return omegas_; }

 private:
  int K_;
  double epsilon_;
  Eigen::VectorXd omegas_;
  std::vector<double> frequencies_;
  std::vector<MatrixXcd> blocks_;
};

// Block layout index -> interleaved slot.
Index interleaved_index(Index block_index, int K) {
  return block_index < K ? slot(static_cast<int>(block_index) + 1, -1)
                         : slot(static_cast<int>(block_index - K) + 1, +1);
}

MatrixXcd lawson_rk4(const Generator& gen, double t_final, std::int64_t steps) {
  const int K = gen.k_max();
  const Index dim = 2 * K;
  MatrixXcd y = MatrixXcd::Identity(dim, dim);
  const double h = t_final / static_cast<double>(steps);

  MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), stage(dim, dim);
  MatrixXcd u(K, dim);
  auto start = gen.frame(0.0);
  for (std::int64_t i = 0; i < steps; ++i) {
    const double t0 = static_cast<double>(i) * h;
    const double t1 = static_cast<double>(i + 1) * h;
    const auto mid = gen.frame(0.5 * (t0 + t1));
    auto end = gen.frame(t1);

    gen.apply(start, y, u, k1);
    stage = y + (0.5 * h) * k1;
    gen.apply(mid, stage, u, k2);
    stage = y + (0.5 * h) * k2;
    gen.apply(mid, stage, u, k3);
    stage = y + h * k3;
    gen.apply(end, stage, u, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    start = std::move(end);
  }

  // X(T) = exp(V0 T) Y(T), then permute block layout back to interleaved.
  MatrixXcd phi(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    const double w = gen.omegas()(r % K);
    const cd free_phase = std::polar(1.0, r < K ? -w * t_final : w * t_final);
    const Index ri = interleaved_index(r, K);
    for (Index c = 0; c < dim; ++c) phi(ri, interleaved_index(c, K)) = free_phase * y(r, c);
  }
  return phi;
}

bool is_free(const CavityConfig& cfg) {
  return cfg.epsilon == 0.0 || (cfg.a_left == 0.0 && cfg.a_right == 0.0);
}

double relative_difference(const MatrixXcd& fine, const MatrixXcd& coarse) {
  const double scale = fine.cwiseAbs().maxCoeff();
  return (fine - coarse).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

std::int64_t base_step_count(const CavityConfig& cfg, const Truncation& trunc) {
  const double fastest = mode_frequency(trunc.k_max, cfg);
  const double h0 = 2.0 * std::numbers::pi / fastest / trunc.steps_per_fastest_period;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(cfg.t_final / h0)));
}

Eigen::MatrixXcd propagate(const CavityConfig& cfg, const Truncation& trunc, std::int64_t steps) {
  cfg.validate();
  trunc.validate();
  if (steps < 1) throw std::domain_error("propagate: steps must be >= 1");
  return lawson_rk4(Generator(cfg, trunc.k_max), cfg.t_final, steps);
}

FundamentalSolution evolve_fundamental(const CavityConfig& cfg, const Truncation& trunc) {
  cfg.validate();
  trunc.validate_for(cfg);

  FundamentalSolution sol;
  sol.t_final = cfg.t_final;
  sol.trunc = trunc;
  sol.cfg = cfg;

  std::int64_t steps = base_step_count(cfg, trunc);
  const Generator gen(cfg, trunc.k_max);
  if (is_free(cfg)) {
    // The coupling vanishes identically; any step count gives the same result.
    sol.phi_T = lawson_rk4(gen, cfg.t_final, 1);
    sol.diagnostics = {steps, cfg.t_final / static_cast<double>(steps), 0.0, 0};
    return sol;
  }

  MatrixXcd coarse = lawson_rk4(gen, cfg.t_final, steps);
  IntegrationDiagnostics diag;
  double previous_error = std::numeric_limits<double>::infinity();
  while (true) {
    if (2 * steps > kMaxSteps) {
      std::ostringstream os;
      os << "evolve_fundamental: tolerance " << trunc.rel_tolerance << " not reached; error estimate "
         << diag.error_estimate << " after " << steps << " steps";
      throw IntegrationError(os.str(), diag);
    }
    steps *= 2;
    MatrixXcd fine = lawson_rk4(gen, cfg.t_final, steps);
    diag.steps = steps;
    diag.step_size = cfg.t_final / static_cast<double>(steps);
    diag.error_estimate = relative_difference(fine, coarse);
    ++diag.halvings;
    if (!std::isfinite(diag.error_estimate)) {
      throw IntegrationError("evolve_fundamental: non-finite state", diag);
    }
    if (diag.error_estimate <= trunc.rel_tolerance) {
      sol.phi_T = std::move(fine);
      break;
    }
    // Past the first few halvings a non-decreasing estimate means round-off dominates.
    if (diag.halvings >= 3 && diag.error_estimate >= previous_error) {
      std::ostringstream os;
      os << "evolve_fundamental: error estimate stalled at " << diag.error_estimate
         << " above tolerance " << trunc.rel_tolerance << " after " << steps << " steps";
      throw IntegrationError(os.str(), diag);
    }
    previous_error = diag.error_estimate;
    coarse = std::move(fine);
  }
  sol.diagnostics = diag;
  return sol;
}

BogoliubovPair extract_bogoliubov(const FundamentalSolution& sol) {
  const int K = sol.trunc.k_max;
  BogoliubovPair pair{MatrixXcd(K, K), MatrixXcd(K, K), sol.cfg, sol.trunc};
  for (int n = 1; n <= K; ++n) {
    const Index column = slot(n, -1);
    for (int k = 1; k <= K; ++k) {
      const double wt = mode_frequency(k, sol.cfg) * sol.t_final;
      pair.alpha(n - 1, k - 1) = std::polar(1.0, wt) * sol.phi_T(slot(k, -1), column);
      pair.beta(n - 1, k - 1) = std::polar(1.0, -wt) * sol.phi_T(slot(k, +1), column);
    }
  }
  return pair;
}

Spectrum numeric_spectrum(const BogoliubovPair& pair) {
  Spectrum spec;
  spec.provenance = Provenance::Numeric;
  spec.config = pair.cfg;
  spec.photons = pair.beta.cwiseAbs2().colwise().sum().transpose();
  return spec;
}

std::vector<double> normalization_defect(const BogoliubovPair& pair) {
  const Eigen::VectorXd norms =
      (pair.alpha.cwiseAbs2() - pair.beta.cwiseAbs2()).rowwise().sum();
  std::vector<double> out(static_cast<std::size_t>(norms.size()));
  for (Index n = 0; n < norms.size(); ++n) out[static_cast<std::size_t>(n)] = std::abs(norms(n) - 1.0);
  return out;
}

Spectrum simulate_spectrum(const CavityConfig& cfg, const Truncation& trunc,
                           IntegrationDiagnostics* diagnostics) {
  const auto sol = evolve_fundamental(cfg, trunc);
  if (diagnostics) *diagnostics = sol.diagnostics;
  return numeric_spectrum(extract_bogoliubov(sol));
}

}  // namespace dce
