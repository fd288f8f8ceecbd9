#include "mctdhf/field.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace mctdhf {

double units::omega_from_wavelength_nm(double nm) {
  const double lambda_au = nm * 1e-9 / kBohrMeters;
  return 2.0 * kPi * kSpeedOfLight / lambda_au;
}

double units::field_from_intensity(double w_per_cm2) { return std::sqrt(w_per_cm2 / kIntensityAu); }

Pulse Pulse::from_wavelength(double wavelength_nm, double intensity_w_cm2, int n_cycles, Point polarization) {
  Pulse p;
  p.omega = units::omega_from_wavelength_nm(wavelength_nm);
  p.e0 = units::field_from_intensity(intensity_w_cm2);
  p.n_cycles = n_cycles;
  p.polarization = polarization;
  return p;
}

double Pulse::duration() const { return 2.0 * kPi * n_cycles / omega; }

double Pulse::envelope(double t) const {
  const double tt = duration();
  if (t <= 0.0 || t >= tt) return 0.0;
  const double half = 0.5 * tt;
  return t <= half ? t / half : (tt - t) / half;
}

double Pulse::field_amplitude(double t) const { return e0 * envelope(t) * std::sin(omega * t); }

double Pulse::potential_amplitude(double t) const {
  if (t <= 0.0) return 0.0;
  const double tt = duration();
  const double half = 0.5 * tt;
  const double w = omega;
  // int (a + b s) sin(w s) ds = -(a + b s) cos(w s)/w + b sin(w s)/w^2
  auto prim = [w](double a, double b, double s) { return -(a + b * s) * std::cos(w * s) / w + b * std::sin(w * s) / (w * w); };
  double integral = 0.0;
  const double t1 = std::min(t, half);
  integral += prim(0.0, 1.0 / half, t1) - prim(0.0, 1.0 / half, 0.0);
  if (t > half) {
    const double t2 = std::min(t, tt);
    integral += prim(tt / half, -1.0 / half, t2) - prim(tt / half, -1.0 / half, half);
  }
  return -e0 * integral;
}

Point Pulse::electric_field(double t) const {
  const double f = field_amplitude(t);
  return {f * polarization[0], f * polarization[1], f * polarization[2]};
}

Point Pulse::vector_potential(double t) const {
  const double a = potential_amplitude(t);
  return {a * polarization[0], a * polarization[1], a * polarization[2]};
}

void Pulse::write_samples(std::ostream& os, int n_samples) const {
  os << "# t[au] E[au]\n";
  const double tt = duration();
  for (int i = 0; i < n_samples; ++i) {
    const double t = tt * i / std::max(1, n_samples - 1);
    os << fmt::format("{:.17g} {:.17g}\n", t, field_amplitude(t));
  }
}

}  // namespace mctdhf
