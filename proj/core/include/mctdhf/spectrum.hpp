#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mctdhf/common.hpp"

namespace mctdhf {

enum class SpectrumWindow { none, hann };
/// What is transformed: the dipole itself, its first or its second time
/// derivative (central differences).
enum class SpectrumQuantity { dipole, velocity, acceleration };

SpectrumWindow parse_window(const std::string& s);
SpectrumQuantity parse_quantity(const std::string& s);

struct Spectrum {
  std::vector<double> omega;
  std::vector<double> intensity;  ///< normalized to max 1 unless identically zero
};

/// |FFT[w(t) q(t)]|^2 for a uniformly sampled dipole with spacing dt.
/// Throws TooFewSamples below 8 samples.
Spectrum hhg_spectrum(const std::vector<double>& dipole, double dt, SpectrumWindow window = SpectrumWindow::hann,
                      SpectrumQuantity quantity = SpectrumQuantity::acceleration);

/// "omega intensity" columns, plus harmonic order when omega0 > 0.
void write_spectrum(std::ostream& os, const Spectrum& s, double omega0 = 0.0);

}  // namespace mctdhf
