#pragma once

namespace phonon_hop {

/// CODATA-2018 values, SI units.
struct PhysicalConstants {
  double elementary_charge = 1.602176634e-19;      // C
  double vacuum_permittivity = 8.8541878128e-12;   // F/m
  double reduced_planck = 1.054571817e-34;         // J s
  double boltzmann = 1.380649e-23;                 // J/K
  double fine_structure = 7.2973525693e-3;
  double speed_of_light = 299792458.0;             // m/s
  double atomic_mass_unit = 1.66053906660e-27;     // kg
  double ca40_mass = 39.9625909 * 1.66053906660e-27;  // kg
  double pi = 3.141592653589793238462643383279502884;

  /// e² / (4π ε₀), the Coulomb coupling in J m.
  constexpr double coulomb_constant() const {
    return elementary_charge * elementary_charge / (4.0 * pi * vacuum_permittivity);
  }
};

inline constexpr PhysicalConstants kConstants{};

inline constexpr double kTwoPi = 2.0 * kConstants.pi;

/// S1/2 - P1/2 natural linewidth of 40Ca+ (Γ/2π, Hz).
inline constexpr double kCa40LinewidthHz = 20.4e6;

}  // namespace phonon_hop
