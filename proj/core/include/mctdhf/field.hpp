#pragma once

#include <iosfwd>

#include "mctdhf/common.hpp"

namespace mctdhf {

namespace units {
inline constexpr double kSpeedOfLight = 137.035999;        // a.u.
inline constexpr double kBohrMeters = 5.29177210903e-11;   // m
inline constexpr double kIntensityAu = 3.50944758e16;      // W/cm^2

double omega_from_wavelength_nm(double nm);
double field_from_intensity(double w_per_cm2);
}  // namespace units

/// Linearly polarized pulse E(t) = E0 f(t) sin(omega t) pol with a triangular
/// envelope rising linearly over the first half of n_cycles optical cycles
/// and falling over the second half. Zero outside [0, T].
struct Pulse {
  double omega = 0.057;
  double e0 = 0.0;
  int n_cycles = 2;
  Point polarization{1.0, 0.0, 0.0};

  static Pulse from_wavelength(double wavelength_nm, double intensity_w_cm2, int n_cycles = 2,
                               Point polarization = {1.0, 0.0, 0.0});

  double duration() const;
  double envelope(double t) const;
  /// Scalar amplitude along the polarization.
  double field_amplitude(double t) const;
  /// A = -int_0^t E, closed form.
  double potential_amplitude(double t) const;

  Point electric_field(double t) const;
  Point vector_potential(double t) const;

  /// Two-column "t E_pol" samples over [0, T].
  void write_samples(std::ostream& os, int n_samples) const;
};

}  // namespace mctdhf
