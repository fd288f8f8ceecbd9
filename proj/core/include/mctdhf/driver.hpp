#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mctdhf/checkpoint.hpp"
#include "mctdhf/config.hpp"
#include "mctdhf/observables.hpp"

namespace mctdhf {

struct RunOutcome {
  std::vector<ObservableRecord> records;
  WaveFunction final_state;
  std::optional<ImaginaryResult> imaginary;
  std::map<int, int> krylov_histogram;  ///< orbital + CI Arnoldi dims used
};

/// Full pipeline into cfg.output_dir: config echo, mesh, field samples,
/// imaginary-time trace, observables, spectrum and checkpoints. With a
/// checkpoint the ground-state stage is skipped and the real-time loop
/// continues from the stored step; earlier observable lines are kept.
RunOutcome run(const RunConfig& cfg, const Checkpoint* resume_from = nullptr);

/// CLI entry points; return the process exit status
/// (0 ok, 1 configuration error, 2 runtime error).
int run_command(const std::filesystem::path& config);
int resume_command(const std::filesystem::path& checkpoint);
int spectrum_command(const std::filesystem::path& observables, const std::string& window,
                     const std::string& quantity, const std::string& column, double omega0,
                     const std::optional<std::filesystem::path>& out);
int mesh_dump_command(const std::filesystem::path& config, const std::optional<std::filesystem::path>& out,
                      const std::optional<std::filesystem::path>& vtk);

}  // namespace mctdhf
