#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mctdhf/model.hpp"

namespace mctdhf {

/// Full state needed to continue a run: the configuration text travels with
/// the checkpoint so that `resume` needs nothing else.
struct Checkpoint {
  std::int64_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  std::uint64_t config_hash = 0;
  std::string config_text;
  WaveFunction state;
  WaveFunction initial;  ///< reference for the survival overlap
};

/// Written to a temporary file and renamed into place.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
/// Throws CheckpointError on a bad magic, version, size or hash mismatch.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace mctdhf
