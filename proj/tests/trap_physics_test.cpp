#include <doctest.h>

#include <cmath>
#include <random>

#include "phonon_hop/trap_physics.hpp"

using namespace phonon_hop;

namespace {

constexpr double kMassCa = kConstants.ca40_mass;
constexpr double kUm = 1e-6;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TrapConfig trap(double fy, double fz) {
  TrapConfig t;
  t.omega_y = kTwoPi * fy;
  t.omega_z = kTwoPi * fz;
  return t;
}

// Equilibrium separation from the force balance m ω² d/2 = e²/(4πε₀ d²), by bisection.
double bisect_separation(double omega_z, double mass) {
  const double ke = kConstants.coulomb_constant();
  auto imbalance = [&](double d) { return mass * omega_z * omega_z * 0.5 * d - ke / (d * d); };
  double lo = 1e-9;
  double hi = 1e-2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (imbalance(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("length-scale convention reproduces the tabulated separations") {
  const double fz[] = {213e3, 140e3, 105e3, 50e3};
  const double d0[] = {12.5, 16.4, 20.1, 32.6};
  for (int i = 0; i < 4; ++i) {
    CAPTURE(fz[i]);
    const double d = axial_freq_to_distance(kTwoPi * fz[i], kMassCa, DistanceConvention::LengthScale);
    CHECK(rel(d, d0[i] * kUm) < 0.01);
  }
}

TEST_CASE("exact separation matches the force-balance bisection oracle") {
  for (double fz : {50e3, 105e3, 140e3, 213e3, 1e6}) {
    const double omega = kTwoPi * fz;
    CHECK(rel(axial_freq_to_distance(omega, kMassCa, DistanceConvention::Exact),
              bisect_separation(omega, kMassCa)) < 1e-12);
  }
  const double d = axial_freq_to_distance(kTwoPi * 213e3, kMassCa, DistanceConvention::Exact);
  CHECK(d / kUm == doctest::Approx(15.7).epsilon(0.005));
  CHECK(rel(distance_to_axial_freq(15.7 * kUm, kMassCa, DistanceConvention::Exact), kTwoPi * 213e3) <
        0.01);
}

TEST_CASE("james-fit convention uses 2.018 / 2^0.559") {
  const double omega = kTwoPi * 140e3;
  const double l = axial_length_scale(omega, kMassCa);
  CHECK(rel(axial_freq_to_distance(omega, kMassCa, DistanceConvention::JamesFit),
            l * 2.018 / std::pow(2.0, 0.559)) < 1e-15);
}

TEST_CASE("separation scales as omega_z^(-2/3) and round-trips") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> log_f(std::log(1e3), std::log(1e7));
  for (auto conv : {DistanceConvention::Exact, DistanceConvention::LengthScale,
                    DistanceConvention::JamesFit}) {
    for (int i = 0; i < 200; ++i) {
      const double omega = kTwoPi * std::exp(log_f(gen));
      const double d = axial_freq_to_distance(omega, kMassCa, conv);
      CHECK(rel(distance_to_axial_freq(d, kMassCa, conv), omega) < 1e-12);
      CHECK(rel(axial_freq_to_distance(4.0 * omega, kMassCa, conv), d / std::pow(4.0, 2.0 / 3.0)) <
            1e-12);
      CHECK(axial_freq_to_distance(1.01 * omega, kMassCa, conv) < d);
    }
  }
  CHECK(rel(distance_to_axial_freq(32.6 * kUm, kMassCa, DistanceConvention::LengthScale),
            kTwoPi * 50e3) < 0.01);
}

TEST_CASE("distance conversions reject non-positive inputs") {
  CHECK_THROWS_AS(axial_freq_to_distance(0.0, kMassCa), DomainError);
  CHECK_THROWS_AS(axial_freq_to_distance(-1.0, kMassCa), DomainError);
  CHECK_THROWS_AS(axial_freq_to_distance(1e6, 0.0), DomainError);
  CHECK_THROWS_AS(distance_to_axial_freq(0.0, kMassCa), DomainError);
  CHECK_THROWS_AS(distance_to_axial_freq(-1e-6, kMassCa), DomainError);
  CHECK_THROWS_AS(distance_convention_from_string("bogus"), DomainError);
  CHECK(distance_convention_from_string("length_scale") == DistanceConvention::LengthScale);
}

TEST_CASE("mode spectrum of the two-ion chain") {
  const ModeSpectrum s = mode_spectrum(trap(2.87e6, 213e3));
  CHECK(s.omega_stretch / kTwoPi == doctest::Approx(368.9e3).epsilon(1e-4));
  CHECK(s.omega_rock / kTwoPi == doctest::Approx(2.862e6).epsilon(1e-4));
  CHECK(rel(s.omega_stretch, std::sqrt(3.0) * s.omega_com_z) < 1e-12);
  CHECK(rel(s.omega_rock, std::sqrt(s.omega_com_y * s.omega_com_y - s.omega_com_z * s.omega_com_z)) <
        1e-12);
  CHECK(s.kappa / kTwoPi == doctest::Approx(7.9e3).epsilon(0.01));

  SUBCASE("decoupled-ion limit") {
    const ModeSpectrum w = mode_spectrum(trap(2.87e6, 10.0));
    CHECK(rel(w.omega_rock, w.omega_com_y) < 1e-10);
    CHECK(w.kappa < 1e-3);
  }
  SUBCASE("zigzag configuration is rejected") {
    CHECK_THROWS_AS(mode_spectrum(trap(200e3, 213e3)), ConfigurationError);
    CHECK_THROWS_AS(mode_spectrum(trap(213e3, 213e3)), ConfigurationError);
    TrapConfig cold = trap(2.87e6, 213e3);
    cold.axial_temperature = -1.0;
    CHECK_THROWS_AS(cold.validate(), ConfigurationError);
  }
}

TEST_CASE("hopping rate: separation form equals omega_z^2 / (2 omega_y)") {
  CHECK(hopping_rate(trap(2.87e6, 213e3)) / kTwoPi == doctest::Approx(7.9e3).epsilon(0.01));
  CHECK(hopping_rate(trap(2.87e6, 50e3)) / kTwoPi == doctest::Approx(0.44e3).epsilon(0.02));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> fy(1e6, 10e6);
  std::uniform_real_distribution<double> fz(10e3, 900e3);
  for (int i = 0; i < 500; ++i) {
    const TrapConfig t = trap(fy(gen), fz(gen));
    CHECK(rel(hopping_rate(t), t.omega_z * t.omega_z / (2.0 * t.omega_y)) < 1e-10);
  }

  const TrapConfig base = trap(2.87e6, 140e3);
  CHECK(rel(hopping_rate(trap(2 * 2.87e6, 140e3)), 0.5 * hopping_rate(base)) < 1e-12);
}

TEST_CASE("rocking/COM splitting agrees with kappa on the experimental sets") {
  for (double fz : {213e3, 140e3, 105e3, 50e3}) {
    const ModeSpectrum s = mode_spectrum(trap(2.87e6, fz));
    CHECK(std::abs((s.omega_com_y - s.omega_rock) - s.kappa) / s.kappa < 0.01);
  }
  for (double fy : {2.43e6, 2.64e6, 2.87e6, 3.11e6}) {
    const ModeSpectrum s = mode_spectrum(trap(fy, 140e3));
    CHECK(std::abs((s.omega_com_y - s.omega_rock) - s.kappa) / s.kappa < 0.01);
  }
}

TEST_CASE("doppler temperature") {
  CHECK(doppler_temperature(kTwoPi * 20.4e6) == doctest::Approx(490e-6).epsilon(0.01));
  CHECK(doppler_temperature(kTwoPi * 10.2e6) == doctest::Approx(245e-6).epsilon(0.01));
  CHECK(rel(doppler_temperature(2.0 * kTwoPi * 20.4e6), 2.0 * doppler_temperature(kTwoPi * 20.4e6)) <
        1e-15);
  CHECK_THROWS_AS(doppler_temperature(0.0), DomainError);
}

TEST_CASE("thermal velocity and stretch occupation") {
  const long double kb = kConstants.boltzmann;
  const long double m = kMassCa;
  const double v = rms_velocity(490e-6, kMassCa);
  CHECK(rel(v, static_cast<double>(std::sqrt(kb * 490e-6L / m))) < 1e-14);
  CHECK(rms_velocity(0.0, kMassCa) == 0.0);
  CHECK(rel(rms_velocity(4 * 490e-6, kMassCa), 2.0 * v) < 1e-14);
  CHECK_THROWS_AS(rms_velocity(-1e-6, kMassCa), DomainError);

  const double ws = kTwoPi * 368.9e3;
  const double n = mean_stretch_occupation(v, ws, kMassCa);
  CHECK(n == doctest::Approx(27.7).epsilon(0.002));
  CHECK(rel(n, thermal_occupation(490e-6, ws)) < 1e-12);
  CHECK(mean_stretch_occupation(0.0, ws, kMassCa) == 0.0);
  CHECK(rel(mean_stretch_occupation(v, 2 * ws, kMassCa), 0.5 * n) < 1e-14);
  CHECK_THROWS_AS(mean_stretch_occupation(v, 0.0, kMassCa), DomainError);
}

TEST_CASE("modified Lamb-Dicke parameter") {
  const double k = kTwoPi / 729e-9;
  const double t = 490e-6;
  auto ld = [&](double fz) {
    const double w = kTwoPi * fz;
    return modified_lamb_dicke(k, 1.0, w, kMassCa, thermal_occupation(t, w));
  };
  CHECK(ld(213e3) / ld(50e3) == doctest::Approx(1.0 / 4.26).epsilon(1e-12));
  CHECK(ld(213e3) > 0.1);
  CHECK(ld(213e3) < 10.0);
  CHECK(modified_lamb_dicke(k, 1.0, kTwoPi * 213e3, kMassCa, 0.0) == 0.0);
  CHECK_THROWS_AS(modified_lamb_dicke(k, 1.5, kTwoPi * 213e3, kMassCa, 1.0), DomainError);
  CHECK_THROWS_AS(modified_lamb_dicke(k, 1.0, 0.0, kMassCa, 1.0), DomainError);
}

TEST_CASE("formulas are scalar-generic") {
  BasicTrapConfig<long double> tl;
  tl.omega_y = kTwoPi * 2.87e6L;
  tl.omega_z = kTwoPi * 213e3L;
  const auto sl = mode_spectrum(tl);
  const auto sd = mode_spectrum(trap(2.87e6, 213e3));
  CHECK(rel(static_cast<double>(sl.kappa), sd.kappa) < 1e-12);
  CHECK(rel(static_cast<double>(sl.omega_rock), sd.omega_rock) < 1e-14);
}

TEST_CASE("operations are pure") {
  const TrapConfig t = trap(2.64e6, 140e3);
  const ModeSpectrum a = mode_spectrum(t);
  const ModeSpectrum b = mode_spectrum(t);
  CHECK(a.kappa == b.kappa);
  CHECK(a.omega_rock == b.omega_rock);
}
