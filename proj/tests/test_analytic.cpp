#include "dce/analytic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dce;
using std::numbers::pi;

namespace {

CavityConfig benchmark(double gamma_left, double gamma_right) {
  CavityConfig c;
  c.epsilon = 1e-4;
  c.t_final = 1000.0;
  c.gamma_left = gamma_left;
  c.gamma_right = gamma_right;
  return c;
}

CavityConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> gamma(1, 12);
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> phase(-2 * pi, 2 * pi);
  std::uniform_real_distribution<double> eps(1e-6, 1e-3);
  std::uniform_real_distribution<double> time(50.0, 3000.0);
  std::uniform_real_distribution<double> lambda(0.5, 5.0);
  CavityConfig c;
  c.lambda = lambda(rng);
  c.epsilon = eps(rng);
  c.t_final = time(rng);
  c.a_left = amp(rng);
  c.a_right = amp(rng);
  c.gamma_left = gamma(rng);
  c.gamma_right = gamma(rng);
  c.phi_left = phase(rng);
  c.phi_right = phase(rng);
  return c;
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("resonant_harmonic") {
  CHECK(resonant_harmonic(2.0) == 2);
  CHECK(resonant_harmonic(3.0 + 1e-10) == 3);
  CHECK_FALSE(resonant_harmonic(2.5).has_value());
  CHECK_FALSE(resonant_harmonic(2.0 + 1e-6).has_value());
}

TEST_CASE("single-wall secular coefficient") {
  CavityConfig c = benchmark(2.0, 2.0);
  c.a_right = 1.0;
  const auto b = beta_first_order(1, 1, c);
  CHECK(b.secular);
  CHECK(b.value.real() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(b.value.imag()) < 1e-15);
  CHECK(photon_number_pair(1, 1, c) == doctest::Approx(2.5e-3).epsilon(1e-12));

  CHECK_FALSE(beta_first_order(2, 1, c).secular);
  CHECK(beta_first_order(2, 1, c).value == std::complex<double>(0.0, 0.0));
  CHECK_THROWS_AS(beta_first_order(0, 1, c), std::domain_error);
}

TEST_CASE("spectrum examples") {
  CavityConfig c = benchmark(4.0, 4.0);
  c.a_right = 1.0;
  const auto s = photon_spectrum(c);
  REQUIRE(s.mode_count() == 4);
  CHECK(s.at(1) == doctest::Approx(0.0075).epsilon(1e-12));
  CHECK(s.at(2) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(s.at(3) == doctest::Approx(0.0075).epsilon(1e-12));
  CHECK(s.at(4) == 0.0);
  CHECK(s.at(99) == 0.0);
  CHECK(s.peak_mode() == 2);
  CHECK(s.provenance == Provenance::Analytic);
  CHECK(s.secular);

  CavityConfig both = benchmark(2.0, 2.0);
  both.a_left = both.a_right = 1.0;
  both.phi_left = pi;
  CHECK(photon_spectrum(both).at(1) == doctest::Approx(0.01).epsilon(1e-12));

  SUBCASE("opposite phase at gamma = 3 cancels the (2, 1) pair") {
    CavityConfig c3 = benchmark(3.0, 3.0);
    c3.a_left = c3.a_right = 1.0;
    c3.phi_left = pi;
    CHECK(std::abs(beta_first_order(2, 1, c3).value) < 1e-15);
  }

  SUBCASE("off resonance is exactly zero and flagged") {
    CavityConfig off = benchmark(2.5, 2.5);
    off.a_right = 1.0;
    const auto z = photon_spectrum(off);
    CHECK(z.mode_count() == 3);
    CHECK(z.photons.isZero(0.0));
    CHECK_FALSE(z.secular);
    CHECK_FALSE(z.warnings.empty());
  }

  SUBCASE("long-time warning") {
    CavityConfig strong = c;
    strong.epsilon = 1e-3;
    CHECK_FALSE(validity_warnings(strong).empty());
    CHECK(validity_warnings(c).empty());
  }
}

TEST_CASE("interference_visibility") {
  CavityConfig c = benchmark(2.0, 2.0);
  c.a_left = c.a_right = 1.0;
  CHECK(interference_visibility(c) == doctest::Approx(-1.0));
  c.gamma_left = c.gamma_right = 3.0;
  CHECK(interference_visibility(c) == doctest::Approx(1.0));
  c.a_left = 0.0;
  CHECK(interference_visibility(c) == 0.0);
  c.a_right = 0.0;
  CHECK(interference_visibility(c) == 0.0);
  c.gamma_left = 2.0;
  CHECK_THROWS_AS(interference_visibility(c), std::domain_error);
  c.gamma_left = c.gamma_right = 2.5;
  CHECK_THROWS_AS(interference_visibility(c), std::domain_error);

  // N_k = (N^L + N^R)(1 + V cos(dphi)).
  CavityConfig d = benchmark(4.0, 4.0);
  d.a_left = 0.3;
  d.a_right = 0.9;
  const double V = interference_visibility(d);
  CavityConfig l = d, r = d;
  l.a_right = 0.0;
  r.a_left = 0.0;
  for (double dphi : {0.0, 0.4, 1.7, pi}) {
    d.phi_left = dphi;
    for (int k = 1; k <= 3; ++k) {
      const double sum = photon_spectrum(l).at(k) + photon_spectrum(r).at(k);
      CHECK(photon_spectrum(d).at(k) == doctest::Approx(sum * (1 + V * std::cos(dphi))).epsilon(1e-12));
    }
  }
}

TEST_CASE("pair numbers agree with the coefficients") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_config(rng);
    for (int n = 1; n <= 16; ++n) {
      for (int k = 1; k <= 16; ++k) {
        const double pair = photon_number_pair(n, k, c);
        CHECK(pair >= 0.0);
        CHECK(close(pair, std::norm(beta_first_order(n, k, c).value), 1e-12));
        CHECK(close(pair, photon_number_pair(k, n, c), 1e-12));
      }
    }
  }
}

TEST_CASE("spectrum invariants") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_config(rng);
    const auto s = photon_spectrum(c, 24);
    REQUIRE(s.mode_count() == 24);

    // N_k is the sum of its pair numbers.
    for (int k = 1; k <= 24; ++k) {
      double sum = 0.0;
      for (int n = 1; n <= 24; ++n) sum += photon_number_pair(n, k, c);
      CHECK(close(s.at(k), sum, 1e-12));
    }

    // Nothing at or above max(gamma).
    const int top = static_cast<int>(std::max(c.gamma_left, c.gamma_right));
    for (int k = top; k <= 24; ++k) CHECK(s.at(k) == 0.0);

    // Equal gammas: symmetric about gamma/2, peaked at the middle.
    if (c.gamma_left == c.gamma_right) {
      const int g = top;
      for (int k = 1; k < g; ++k) CHECK(close(s.at(k), s.at(g - k), 1e-12));
      if (s.photons.maxCoeff() > 0) CHECK(s.peak_mode() == g / 2);
    }

    // Common phase shift.
    CavityConfig shifted = c;
    shifted.phi_left += 0.8125;
    shifted.phi_right += 0.8125;
    const auto s2 = photon_spectrum(shifted, 24);
    CHECK((s.photons - s2.photons).cwiseAbs().maxCoeff() <= 1e-12 * std::max(s.photons.maxCoeff(), 1e-300));

    // 2 pi periodicity in the phase difference.
    CavityConfig wrapped = c;
    wrapped.phi_left += 2 * pi;
    const auto s3 = photon_spectrum(wrapped, 24);
    CHECK((s.photons - s3.photons).cwiseAbs().maxCoeff() <= 1e-12 * std::max(s.photons.maxCoeff(), 1e-300));

    // (epsilon T)^2 scaling.
    CavityConfig scaled = c;
    scaled.epsilon = 2 * c.epsilon;
    scaled.t_final = c.t_final / 2;
    const auto s4 = photon_spectrum(scaled, 24);
    CHECK((s.photons - s4.photons).cwiseAbs().maxCoeff() == 0.0);
    scaled.t_final = c.t_final;
    const auto s5 = photon_spectrum(scaled, 24);
    for (int k = 1; k <= 24; ++k) CHECK(close(s5.at(k), 4 * s.at(k), 1e-12));
  }
}

TEST_CASE("unequal gammas add without interference") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 100; ++trial) {
    const auto c = random_config(rng);
    if (c.gamma_left == c.gamma_right) continue;
    ++checked;
    CavityConfig l = c, r = c;
    l.a_right = 0.0;
    r.a_left = 0.0;
    const auto both = photon_spectrum(c, 16);
    const auto sum = photon_spectrum(l, 16).photons + photon_spectrum(r, 16).photons;
    CHECK((both.photons - sum).cwiseAbs().maxCoeff() <= 1e-12 * std::max(sum.maxCoeff(), 1e-300));
    CavityConfig moved = c;
    moved.phi_left += 1.3;
    CHECK((photon_spectrum(moved, 16).photons - both.photons).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(sum.maxCoeff(), 1e-300));
  }
  CHECK(checked == 100);
}
