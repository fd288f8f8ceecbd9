#include "mctdhf/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fftw3.h>
#include <fmt/format.h>

namespace mctdhf {

SpectrumWindow parse_window(const std::string& s) {
  if (s == "none") return SpectrumWindow::none;
  if (s == "hann") return SpectrumWindow::hann;
  throw ConfigError(fmt::format("unknown window '{}' (none|hann)", s));
}

SpectrumQuantity parse_quantity(const std::string& s) {
  if (s == "dipole") return SpectrumQuantity::dipole;
  if (s == "velocity") return SpectrumQuantity::velocity;
  if (s == "acceleration") return SpectrumQuantity::acceleration;
  throw ConfigError(fmt::format("unknown spectrum quantity '{}' (dipole|velocity|acceleration)", s));
}

namespace {

// Central differences inside, one-sided second-order at the ends.
std::vector<double> differentiate(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return out;
}

std::vector<double> second_derivative(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  const double h2 = dt * dt;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  return out;
}

}  // namespace

Spectrum hhg_spectrum(const std::vector<double>& dipole, double dt, SpectrumWindow window,
                      SpectrumQuantity quantity) {
  const std::size_t n = dipole.size();
  if (n < 8) throw TooFewSamples(fmt::format("spectrum needs at least 8 samples, got {}", n));
  if (!(dt > 0.0)) throw ConfigError("spectrum sample spacing must be positive");

  std::vector<double> q;
  switch (quantity) {
    case SpectrumQuantity::dipole: q = dipole; break;
    case SpectrumQuantity::velocity: q = differentiate(dipole, dt); break;
    case SpectrumQuantity::acceleration: q = second_derivative(dipole, dt); break;
  }
  if (window == SpectrumWindow::hann)
    for (std::size_t i = 0; i < n; ++i) q[i] *= 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1)));

  const std::size_t nc = n / 2 + 1;
  std::vector<double> in(q);
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);

  Spectrum s;
  s.omega.resize(nc);
  s.intensity.resize(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    s.omega[k] = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(n) * dt);
    s.intensity[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  fftw_destroy_plan(plan);
  fftw_free(out);

  const double mx = *std::max_element(s.intensity.begin(), s.intensity.end());
  if (mx > 0.0)
    for (double& v : s.intensity) v /= mx;
  return s;
}

void write_spectrum(std::ostream& os, const Spectrum& s, double omega0) {
  if (omega0 > 0.0)
    os << "# omega[au] harmonic intensity[normalized]\n";
  else
    os << "# omega[au] intensity[normalized]\n";
  for (std::size_t k = 0; k < s.omega.size(); ++k) {
    if (omega0 > 0.0)
      os << fmt::format("{:.17g} {:.17g} {:.17g}\n", s.omega[k], s.omega[k] / omega0, s.intensity[k]);
    else
      os << fmt::format("{:.17g} {:.17g}\n", s.omega[k], s.intensity[k]);
  }
}

}  // namespace mctdhf
