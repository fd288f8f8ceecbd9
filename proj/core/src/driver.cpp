#include "mctdhf/driver.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/parallel.hpp"
#include "mctdhf/spectrum.hpp"

namespace mctdhf {

namespace fs = std::filesystem;

namespace {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    spdlog::error("stage '{}' failed: {}", name, e.what());
    throw;
  }
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream os(p, std::ios::out | mode);
  if (!os) throw Error(fmt::format("cannot write '{}'", p.string()));
  return os;
}

// Keeps the header and all records strictly before t_cut.
std::string kept_observable_lines(const fs::path& p, double t_cut) {
  std::ifstream is(p);
  std::string out, line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') {
      std::istringstream ls(line);
      double t = 0.0;
      ls >> t;
      if (!(t < t_cut)) break;
    }
    out += line;
    out += '\n';
  }
  return out;
}

void write_spectrum_file(const RunConfig& cfg, const std::vector<ObservableRecord>& all) {
  const std::size_t n = all.size();
  if (n < 8) {
    spdlog::info("spectrum skipped: {} records", n);
    return;
  }
  std::vector<double> d;
  d.reserve(n);
  for (const auto& r : all) d.push_back(r.dipole[cfg.spectrum_axis]);
  const Spectrum s = hhg_spectrum(d, cfg.dt * cfg.output_cadence, cfg.window, cfg.quantity);
  auto os = open_out(cfg.output_dir / "spectrum.txt");
  write_spectrum(os, s, cfg.model.pulse ? cfg.model.pulse->omega : 0.0);
}

int guarded(const std::function<void()>& f) {
  try {
    f();
    return 0;
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("runtime error: {}", e.what());
    return 2;
  }
}

}  // namespace

RunOutcome run(const RunConfig& cfg, const Checkpoint* resume_from) {
  parallel::set_threads(cfg.threads);
  parallel::set_reduction(cfg.reduction);
  fs::create_directories(cfg.output_dir);
  const fs::path dir = cfg.output_dir;
  {
    auto os = open_out(dir / "config.cfg", std::ios::binary | std::ios::trunc);
    os << cfg.text;
  }

  auto model = stage("model", [&] { return std::make_unique<Model>(cfg.model); });
  {
    auto os = open_out(dir / "mesh.txt");
    model->mesh().write_text(os);
  }
  if (cfg.model.pulse) {
    auto os = open_out(dir / "field.txt");
    cfg.model.pulse->write_samples(os, 2001);
  }

  RunOutcome out;
  WaveFunction wf, initial;
  std::int64_t start = 0;
  if (resume_from) {
    if (model->n_orbitals() != static_cast<int>(resume_from->state.orbitals.size()) ||
        resume_from->state.orbitals.front().size() != static_cast<Eigen::Index>(model->n_free()) ||
        resume_from->state.ci.size() != static_cast<Eigen::Index>(model->determinants().dimension()))
      throw CheckpointError("checkpoint does not match the model built from its configuration");
    wf = resume_from->state;
    initial = resume_from->initial;
    start = resume_from->step;
  } else {
    wf = stage("initial guess", [&] {
      const int m = model->n_orbitals();
      auto orb = cfg.guess == InitialGuess::core ? model->core_orbitals(m)
                                                 : model->gaussian_orbitals(m, cfg.gaussian_alpha, cfg.gaussian_center);
      return model->initial_state(std::move(orb));
    });
    if (cfg.imaginary) {
      out.imaginary = stage("imaginary time", [&] { return propagate_imaginary(*model, wf, cfg.imag); });
      auto os = open_out(dir / "imaginary.txt");
      os << "# step E[hartree]\n";
      for (std::size_t k = 0; k < out.imaginary->energies.size(); ++k)
        os << fmt::format("{} {:.17g}\n", k, out.imaginary->energies[k]);
    }
    initial = wf;
  }

  const fs::path obs_path = dir / "observables.txt";
  std::ofstream obs;
  if (resume_from) {
    const std::string kept = kept_observable_lines(obs_path, resume_from->t - 0.5 * cfg.dt);
    obs = open_out(obs_path);
    if (kept.empty())
      write_observable_header(obs, cfg.model.box.dim);
    else
      obs << kept;
  } else {
    obs = open_out(obs_path);
    write_observable_header(obs, cfg.model.box.dim);
  }

  const std::uint64_t hash = config_hash(cfg.text);
  auto checkpoint = [&](std::int64_t step, const fs::path& name) {
    Checkpoint ck;
    ck.step = step;
    ck.t = static_cast<double>(step) * cfg.dt;
    ck.dt = cfg.dt;
    ck.config_hash = hash;
    ck.config_text = cfg.text;
    ck.state = wf;
    ck.initial = initial;
    write_checkpoint(dir / name, ck);
  };

  stage("real time", [&] {
    for (std::int64_t n = start;; ++n) {
      const double t = static_cast<double>(n) * cfg.dt;
      const FrozenCoupling fc = FrozenCoupling::freeze(*model, wf, t, cfg.propagator.eom);
      if (n % cfg.output_cadence == 0) {
        const ObservableRecord rec = observables_step(*model, fc, initial);
        write_observable_record(obs, rec, cfg.model.box.dim);
        obs.flush();
        out.records.push_back(rec);
      }
      if (cfg.checkpoint_cadence > 0 && n > start && n % cfg.checkpoint_cadence == 0 && n < cfg.steps)
        checkpoint(n, fmt::format("checkpoint_{:08d}.bin", n));
      if (n >= cfg.steps) break;
      const StepResult sr = real_time_step(*model, wf, fc, cfg.dt, cfg.propagator);
      if (!model->orbitals_complete()) ++out.krylov_histogram[sr.orbitals.dim_used];
      ++out.krylov_histogram[sr.ci.dim_used];
      const int worst = std::max(sr.orbitals.dim_used, sr.ci.dim_used);
      if (worst >= cfg.propagator.m_max)
        spdlog::warn("step {}: Krylov dimension reached the ceiling {} (estimate {:.2e} / {:.2e})", n,
                     cfg.propagator.m_max, sr.orbitals.error_estimate, sr.ci.error_estimate);
    }
    return 0;
  });
  checkpoint(std::max<std::int64_t>(start, cfg.steps), "checkpoint.bin");
  obs.close();

  std::string hist;
  for (const auto& [dim, count] : out.krylov_histogram) hist += fmt::format(" {}:{}", dim, count);
  if (!hist.empty()) spdlog::info("Krylov dimension histogram (dim:count){}", hist);

  stage("spectrum", [&] {
    std::ifstream is(obs_path);
    const ObservableTable table = read_observables(is);
    std::vector<ObservableRecord> all;
    const int col = table.column(fmt::format("d_{}", "xyz"[cfg.spectrum_axis]));
    for (const auto& row : table.rows) {
      ObservableRecord r;
      r.t = row[0];
      r.dipole[cfg.spectrum_axis] = row[static_cast<std::size_t>(col)];
      all.push_back(r);
    }
    write_spectrum_file(cfg, all);
    return 0;
  });
  out.final_state = wf;
  return out;
}

int run_command(const fs::path& config) {
  return guarded([&] {
    const RunConfig cfg = load_config(config);
    run(cfg);
  });
}

int resume_command(const fs::path& checkpoint) {
  return guarded([&] {
    const Checkpoint ck = read_checkpoint(checkpoint);
    const RunConfig cfg = parse_config(ck.config_text);
    if (ck.dt != cfg.dt) throw CheckpointError("checkpoint time step differs from its configuration");
    run(cfg, &ck);
  });
}

int spectrum_command(const fs::path& observables, const std::string& window, const std::string& quantity,
                     const std::string& column, double omega0, const std::optional<fs::path>& out) {
  return guarded([&] {
    std::ifstream is(observables);
    if (!is) throw ConfigError(fmt::format("cannot open '{}'", observables.string()));
    const ObservableTable table = read_observables(is);
    const auto t = table.series("t");
    const auto d = table.series(column);
    if (t.size() < 2) throw TooFewSamples("need at least two samples to infer the spacing");
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i < t.size(); ++i)
      if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(t[i])))
        throw ConfigError("observable samples are not uniformly spaced");
    const Spectrum s = hhg_spectrum(d, dt, parse_window(window), parse_quantity(quantity));
    if (out) {
      auto os = open_out(*out);
      write_spectrum(os, s, omega0);
    } else {
      write_spectrum(std::cout, s, omega0);
    }
  });
}

int mesh_dump_command(const fs::path& config, const std::optional<fs::path>& out,
                      const std::optional<fs::path>& vtk) {
  return guarded([&] {
    const RunConfig cfg = load_config(config);
    const Mesh mesh = build_mesh(cfg.model);
    spdlog::info("mesh: {} leaves, max level {}", mesh.n_leaves(), mesh.max_level());
    if (out) {
      auto os = open_out(*out);
      mesh.write_text(os);
    } else {
      mesh.write_text(std::cout);
    }
    if (vtk) {
      auto os = open_out(*vtk);
      mesh.write_vtk(os);
    }
  });
}

}  // namespace mctdhf
