#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mctdhf/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MCTDHF simulator on adaptive finite element meshes"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  std::string config, checkpoint, observables;
  auto* run = app.add_subcommand("run", "imaginary-time ground state, real-time propagation, spectrum");
  run->add_option("config", config, "run configuration (INI)")->required();

  auto* resume = app.add_subcommand("resume", "continue a run from a checkpoint");
  resume->add_option("checkpoint", checkpoint, "checkpoint file")->required();

  std::string window = "none", quantity = "acceleration", column = "d_x", out_path;
  double omega0 = 0.0;
  auto* spectrum = app.add_subcommand("spectrum", "HHG spectrum of an observable file");
  spectrum->add_option("file", observables, "observables file")->required();
  spectrum->add_option("--window", window, "none or hann")->capture_default_str();
  spectrum->add_option("--quantity", quantity, "dipole, velocity or acceleration")->capture_default_str();
  spectrum->add_option("--column", column, "dipole column")->capture_default_str();
  spectrum->add_option("--omega0", omega0, "driving frequency; adds a harmonic-order column");
  spectrum->add_option("-o,--output", out_path, "output file (stdout if omitted)");

  std::string vtk_path, mesh_out;
  auto* mesh = app.add_subcommand("mesh-dump", "build the adapted mesh and write its leaves");
  mesh->add_option("config", config, "run configuration (INI)")->required();
  mesh->add_option("-o,--output", mesh_out, "text output (stdout if omitted)");
  mesh->add_option("--vtk", vtk_path, "also write a VTK legacy file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  // stdout is reserved for data
  spdlog::set_default_logger(spdlog::stderr_color_mt("mctdhf"));
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");

  auto opt = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };
  if (*run) return mctdhf::run_command(config);
  if (*resume) return mctdhf::resume_command(checkpoint);
  if (*spectrum) return mctdhf::spectrum_command(observables, window, quantity, column, omega0, opt(out_path));
  return mctdhf::mesh_dump_command(config, opt(mesh_out), opt(vtk_path));
}
