#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mctdhf/model.hpp"
#include "mctdhf/parallel.hpp"
#include "mctdhf/propagator.hpp"
#include "mctdhf/spectrum.hpp"

namespace mctdhf {

enum class InitialGuess { core, gaussian };

/// Everything a batch run needs. Lengths in bohr, times in atomic units;
/// the pulse takes wavelength in nm and intensity in W/cm^2 (or omega/e0
/// directly in atomic units).
struct RunConfig {
  std::string text;  ///< the configuration as read
  ModelSpec model;

  double dt = 0.01;
  int steps = 0;
  PropagatorOptions propagator;

  bool imaginary = true;
  ImaginaryOptions imag;
  InitialGuess guess = InitialGuess::core;
  double gaussian_alpha = 0.5;
  Point gaussian_center{0.0, 0.0, 0.0};

  std::filesystem::path output_dir = "run";
  int output_cadence = 1;
  int checkpoint_cadence = 0;  ///< 0: only at the end
  SpectrumWindow window = SpectrumWindow::hann;
  SpectrumQuantity quantity = SpectrumQuantity::acceleration;
  int spectrum_axis = 0;

  int threads = 0;  ///< 0: OpenMP default
  parallel::Reduction reduction = parallel::Reduction::deterministic;
};

/// Parses and validates INI text. Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t config_hash(const std::string& text);

}  // namespace mctdhf
