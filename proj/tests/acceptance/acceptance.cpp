// Acceptance suite: one line per criterion, "criterion N: PASS|FAIL  detail".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/config.hpp"
#include "mctdhf/driver.hpp"
#include "mctdhf/krylov.hpp"
#include "mctdhf/meanfield.hpp"
#include "mctdhf/observables.hpp"
#include "mctdhf/propagator.hpp"
#include "mctdhf/spectrum.hpp"
#include "oracles.hpp"

using namespace mctdhf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ModelSpec helium(int orbitals, double half_width, double cell, int order) {
  ModelSpec s;
  s.box.dim = 1;
  s.box.lo[0] = -half_width;
  s.box.hi[0] = half_width;
  s.coarse_size = cell;
  s.order = order;
  s.nuclei.centers.push_back({2.0, {0.0, 0.0, 0.0}});
  s.nuclei.softening = 1.0;
  s.meanfield.softening = 1.0;
  s.n_alpha = 1;
  s.n_beta = 1;
  s.n_orbitals = orbitals;
  return s;
}

// the exactness system: 47 master dofs
ModelSpec small_helium(int orbitals) { return helium(orbitals, 12.0, 3.0, 6); }

double ground_state(const Model& m, WaveFunction& wf, double tol = 1e-12, double dtau = 0.1) {
  ImaginaryOptions io;
  io.dtau = dtau;
  io.tol_energy = tol;
  io.max_steps = 20000;
  const auto res = propagate_imaginary(m, wf, io);
  return res.energies.back();
}

SimulationBox cube(double half) {
  SimulationBox b;
  b.dim = 3;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = -half;
    b.hi[a] = half;
  }
  return b;
}

Outcome exactness() {
  const auto probe = std::make_unique<Model>(small_helium(1));
  const int n = static_cast<int>(probe->n_free());
  const Model m(small_helium(n));
  const oracle::TwoElectron1D ref(m, 1.0);

  WaveFunction wf = m.initial_state(m.core_orbitals(n));
  const double e = ground_state(m, wf, 1e-14, 0.5);
  const double de = std::abs(e - ref.ground_energy());

  // non-stationary start: ground state plus two excited configurations
  WaveFunction w0 = wf;
  w0.ci[1] += 0.4;
  w0.ci[static_cast<Eigen::Index>(n) + 1] += cplx(0.0, 0.3);
  w0.ci[2 * static_cast<Eigen::Index>(n)] -= 0.2;
  w0.ci.normalize();
  const CVec y0 = ref.amplitudes(w0);
  WaveFunction w = w0;
  const double dt = 0.05;
  PropagatorOptions po;
  po.tol = 1e-12;
  double worst = 0.0;
  for (int step = 1; step <= 50; ++step) {
    const auto fc = FrozenCoupling::freeze(m, w, (step - 1) * dt);
    real_time_step(m, w, fc, dt, po);
    const cplx s = wavefunction_overlap(m, w0, w);
    const cplx s_ref = y0.dot(ref.propagate(y0, step * dt));
    worst = std::max(worst, std::abs(s - s_ref));
  }
  return {de < 1e-8 && worst < 1e-8,
          fmt::format("dofs {} E {:.12f} oracle {:.12f} |dE| {:.2e}; max autocorrelation error {:.2e} over 50 steps",
                      n, e, ref.ground_energy(), de, worst)};
}

Outcome small_m() {
  std::vector<double> e;
  for (int m_orb = 1; m_orb <= 4; ++m_orb) {
    const Model m(small_helium(m_orb));
    WaveFunction wf = m.initial_state(m.core_orbitals(m_orb));
    e.push_back(ground_state(m, wf, 1e-13, 0.1));
  }
  const auto probe = std::make_unique<Model>(small_helium(1));
  const oracle::TwoElectron1D ref(*probe, 1.0);
  bool ok = true;
  for (std::size_t k = 1; k < e.size(); ++k) ok = ok && e[k] <= e[k - 1] + 1e-10;
  ok = ok && e.back() >= ref.ground_energy() - 1e-9;
  return {ok, fmt::format("E(M=1..4) = {:.10f} {:.10f} {:.10f} {:.10f}; exact {:.10f}", e[0], e[1], e[2], e[3],
                          ref.ground_energy())};
}

Outcome propagator() {
  std::mt19937 gen(20240611);
  std::normal_distribution<double> g;
  double worst = 0.0;
  int max_dim = 0;
  for (int k = 0; k < 50; ++k) {
    CMat a(64, 64);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) a(i, j) = cplx(g(gen), g(gen)) / 8.0;
    CVec v(64);
    for (int i = 0; i < 64; ++i) v[i] = cplx(g(gen), g(gen));
    const LinearMap op = [&a](const CVec& x, CVec& y) { y = a * x; };
    for (double dt : {0.01, 0.1}) {
      StepReport rep;
      const CVec w = arnoldi_exp(op, v, dt, 64, 1e-10, &rep);
      const CVec ref = oracle::dense_exp(a, dt) * v;
      worst = std::max(worst, (w - ref).norm() / ref.norm());
      max_dim = std::max(max_dim, rep.dim_used);
    }
  }
  return {worst < 1e-9, fmt::format("max relative error {:.2e}, max Krylov dimension {}", worst, max_dim)};
}

struct Drift {
  double de = 0.0, dn = 0.0, ortho = 0.0;
};

Drift field_free_drift(const Model& m, WaveFunction wf, int steps, double dt) {
  PropagatorOptions po;
  Drift d;
  double e0 = 0.0;
  const double n0 = wf.ci.norm();
  for (int step = 0; step <= steps; ++step) {
    const auto fc = FrozenCoupling::freeze(m, wf, step * dt);
    const double e = fc.total_energy().real();
    if (step == 0) e0 = e;
    d.de = std::max(d.de, std::abs(e - e0));
    d.dn = std::max(d.dn, std::abs(wf.ci.norm() - n0));
    d.ortho = std::max(d.ortho, m.orthonormality_error(wf.orbitals));
    if (step == steps) break;
    real_time_step(m, wf, fc, dt, po);
  }
  return d;
}

Outcome conservation() {
  const Model m(helium(3, 20.0, 2.5, 6));
  WaveFunction wf = m.initial_state(m.core_orbitals(3));
  ground_state(m, wf, 1e-10);
  const Drift g = field_free_drift(m, wf, 1000, 0.01);
  // reported only: a kicked state drifts by O(dt) through the frozen projector
  const RVec& x = m.coordinates()[0];
  const FeSpace& s = m.space();
  for (auto& o : wf.orbitals)
    for (Eigen::Index i = 0; i < o.size(); ++i) o[i] *= std::exp(cplx(0.0, 0.5 * x[s.raw_of(static_cast<int>(i))]));
  const Drift k = field_free_drift(m, wf, 1000, 0.01);
  return {g.de < 1e-6 && g.dn < 1e-8 && g.ortho < 1e-7,
          fmt::format("ground state: max |dE| {:.2e}, max |d|C|| {:.2e}, max orthonormality drift {:.2e}; "
                      "kicked state (not gated): |dE| {:.2e}, |d|C|| {:.2e}, orthonormality {:.2e}",
                      g.de, g.dn, g.ortho, k.de, k.dn, k.ortho)};
}

double dipole_at(const Model& m, const WaveFunction& start, double dt, double t_end) {
  WaveFunction wf = start;
  const int steps = static_cast<int>(std::lround(t_end / dt));
  PropagatorOptions po;
  po.tol = 1e-12;
  for (int n = 0; n < steps; ++n) {
    const auto fc = FrozenCoupling::freeze(m, wf, n * dt);
    real_time_step(m, wf, fc, dt, po);
  }
  const auto fc = FrozenCoupling::freeze(m, wf, steps * dt);
  return observables_step(m, fc, start).dipole[0];
}

Outcome first_order() {
  ModelSpec spec = helium(3, 20.0, 2.5, 6);
  spec.pulse = Pulse{};
  spec.pulse->omega = 0.5;
  spec.pulse->e0 = 0.2;
  spec.pulse->n_cycles = 1;
  const Model m(spec);
  WaveFunction wf = m.initial_state(m.core_orbitals(3));
  ground_state(m, wf, 1e-10);
  const double t_end = 5.0;
  const double ref = dipole_at(m, wf, 2.5e-4, t_end);
  std::vector<double> dts{0.04, 0.02, 0.01}, err;
  for (double dt : dts) err.push_back(std::abs(dipole_at(m, wf, dt, t_end) - ref));
  // least-squares slope of log(err) against log(dt)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < dts.size(); ++k) {
    const double lx = std::log(dts[k]), ly = std::log(err[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nk = static_cast<double>(dts.size());
  const double slope = (nk * sxy - sx * sy) / (nk * sxx - sx * sx);
  return {std::abs(slope - 1.0) <= 0.2,
          fmt::format("errors {:.3e} {:.3e} {:.3e} (dt 0.04/0.02/0.01), fitted order {:.3f}, local orders {:.3f} {:.3f}",
                      err[0], err[1], err[2], slope, std::log2(err[0] / err[1]), std::log2(err[1] / err[2]))};
}

double poisson_error(const Mesh& mesh, int order, double alpha) {
  const FeSpace s = FeSpace::build(std::make_shared<const Mesh>(mesh), order);
  MeanFieldOptions opts;
  opts.poisson_tol = 1e-12;
  const MeanField mf(s, opts);
  CVec rho(static_cast<Eigen::Index>(s.n_raw()));
  for (std::size_t i = 0; i < s.n_raw(); ++i) {
    const Point& x = s.raw_points()[i];
    rho[static_cast<Eigen::Index>(i)] = std::pow(alpha / kPi, 1.5) * std::exp(-alpha * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  }
  const CVec w = mf.potential(rho);
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < s.n_raw(); ++i) {
    const Point& x = s.raw_points()[i];
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double exact = r < 1e-12 ? 2.0 * std::sqrt(alpha / kPi) : std::erf(std::sqrt(alpha) * r) / r;
    err = std::max(err, std::abs(w[static_cast<Eigen::Index>(i)] - exact));
    peak = std::max(peak, exact);
  }
  return err / peak;
}

Mesh refine_near_origin(Mesh m, double radius, int passes) {
  for (int k = 0; k < passes; ++k) {
    std::vector<int> r;
    for (int leaf : m.leaves()) {
      const Point a = m.anchor(leaf);
      const double h = m.size(leaf);
      bool near = true;
      for (int ax = 0; ax < 3; ++ax) near = near && a[ax] <= radius && a[ax] + h >= -radius;
      if (near) r.push_back(leaf);
    }
    m.refine(r);
    m.balance();
  }
  return m;
}

Mesh refine_all(Mesh m) {
  const std::vector<int> all(m.leaves().begin(), m.leaves().end());
  m.refine(all);
  return m;
}

Outcome poisson() {
  const Mesh base = refine_near_origin(Mesh::build_uniform(cube(8.0), 4.0), 2.0, 2);
  const int order = 4;
  const double e1 = poisson_error(base, order, 1.0);
  const double e2 = poisson_error(refine_all(base), order, 1.0);
  return {e1 < 1e-3 && e2 < e1,
          fmt::format("L-inf relative error {:.3e} ({} leaves), {:.3e} after global refinement", e1, base.n_leaves(), e2)};
}

struct HydrogenResult {
  double energy = 0.0;
  std::size_t dofs = 0;
  std::size_t leaves = 0;
};

HydrogenResult hydrogen(const Mesh& mesh, int order) {
  ModelSpec s;
  s.box = mesh.box();
  s.coarse_size = mesh.coarse_size();
  s.order = order;
  s.nuclei.centers.push_back({1.0, {0.0, 0.0, 0.0}});
  s.nuclear_quadrature = NuclearQuadrature::refined;
  s.n_alpha = 1;
  s.n_beta = 0;
  s.n_orbitals = 1;
  const Model m(s, std::make_shared<const Mesh>(mesh));
  const CVec phi = m.core_orbitals(1)[0];
  const CSparse h = m.operators().kinetic + m.operators().potential;
  return {(phi.dot(h * phi) / m.inner(phi, phi)).real(), m.n_free(), mesh.n_leaves()};
}

Outcome adaptivity() {
  const double half = 16.0;
  const int order = 2;
  RefinementPolicy pol;
  pol.threshold = 0.02;
  pol.min_size = 0.125;
  pol.max_size = 8.0;
  pol.order = order;
  Nuclei nuc;
  nuc.centers.push_back({1.0, {0.0, 0.0, 0.0}});
  const Mesh adapted = refine_adapt(Mesh::build_uniform(cube(half), 8.0), coulomb_target(nuc, 3), pol);
  const HydrogenResult a = hydrogen(adapted, order);
  // smallest uniform mesh with at least as many dofs
  double cell = 8.0;
  while (true) {
    const std::size_t per_axis = static_cast<std::size_t>(std::lround(2 * half / cell)) * order - 1;
    if (per_axis * per_axis * per_axis >= a.dofs) break;
    cell *= 0.5;
  }
  const HydrogenResult u = hydrogen(Mesh::build_uniform(cube(half), cell), order);
  const double ea = std::abs(a.energy + 0.5), eu = std::abs(u.energy + 0.5);
  return {ea < 5e-3 && eu >= 2.0 * ea,
          fmt::format("adapted: {} leaves, {} dofs, E {:.6f} (err {:.2e}); uniform h={}: {} dofs, E {:.6f} (err {:.2e}); "
                      "gain {:.1f}x",
                      a.leaves, a.dofs, a.energy, ea, cell, u.dofs, u.energy, eu, eu / ea)};
}

struct EcsTrace {
  std::vector<double> norm, energy;
};

EcsTrace ionize(double theta) {
  ModelSpec spec = helium(2, 40.0, 2.5, 6);
  if (theta > 0.0) {
    EcsConfig ecs;
    ecs.r0[0] = 25.0;
    ecs.theta = theta;
    spec.ecs = ecs;
  }
  spec.pulse = Pulse{};
  spec.pulse->omega = 1.0;
  spec.pulse->e0 = 0.15;
  spec.pulse->n_cycles = 6;
  const Model m(spec);
  // ground state without the absorber, then switch it on
  ModelSpec bare = spec;
  bare.ecs.reset();
  const Model m0(bare);
  WaveFunction wf = m0.initial_state(m0.core_orbitals(2));
  ground_state(m0, wf, 1e-10);
  EcsTrace tr;
  const double dt = 0.02;
  const int steps = static_cast<int>(std::lround(2.0 * spec.pulse->duration() / dt));
  PropagatorOptions po;
  for (int n = 0; n <= steps; ++n) {
    const auto fc = FrozenCoupling::freeze(m, wf, n * dt);
    tr.norm.push_back(wf.ci.norm());
    tr.energy.push_back(fc.total_energy().real());
    if (n == steps) break;
    real_time_step(m, wf, fc, dt, po);
  }
  return tr;
}

Outcome ecs() {
  const EcsTrace on = ionize(0.35);
  const EcsTrace off = ionize(0.0);
  double rise = 0.0;
  for (std::size_t k = 1; k < on.norm.size(); ++k) rise = std::max(rise, on.norm[k] - on.norm[k - 1]);
  const double loss = 1.0 - on.norm.back() / on.norm.front();
  double off_drift = 0.0;
  for (double v : off.norm) off_drift = std::max(off_drift, std::abs(v - off.norm.front()));
  // after the pulse: count sign changes of the energy increments
  auto turns = [](const std::vector<double>& e) {
    int n = 0;
    const std::size_t half = e.size() / 2;
    for (std::size_t k = half + 2; k < e.size(); ++k)
      if ((e[k] - e[k - 1]) * (e[k - 1] - e[k - 2]) < 0.0) ++n;
    return n;
  };
  return {rise <= 1e-10 && loss >= 0.01,
          fmt::format("ECS: max step-to-step norm rise {:.2e}, norm loss {:.2f}%, post-pulse energy turns {}; "
                      "theta=0: norm drift {:.2e}, post-pulse energy {:.6f} -> {:.6f}, turns {}",
                      rise, 100.0 * loss, turns(on.energy), off_drift, off.energy[off.energy.size() / 2],
                      off.energy.back(), turns(off.energy))};
}

Outcome hhg() {
  std::ifstream f(std::string(MCTDHF_SOURCE_DIR) + "/configs/helium1d.cfg");
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  const std::string dir = (std::filesystem::temp_directory_path() / "mctdhf_acceptance_hhg").string();
  text.replace(text.find("directory = run-helium1d"), std::string("directory = run-helium1d").size(),
               "directory = " + dir);
  const RunConfig cfg = parse_config(text);
  const RunOutcome out = run(cfg);
  std::vector<double> d;
  for (const auto& r : out.records) d.push_back(r.dipole[0]);
  const Spectrum s = hhg_spectrum(d, cfg.dt * cfg.output_cadence, cfg.window, cfg.quantity);
  const double w0 = cfg.model.pulse->omega;
  const double dw = s.omega[1] - s.omega[0];
  auto at = [&](double w) {
    const double k = w / dw;
    const auto i = static_cast<std::size_t>(k);
    if (i + 1 >= s.intensity.size()) return s.intensity.back();
    return s.intensity[i] + (k - i) * (s.intensity[i + 1] - s.intensity[i]);
  };
  auto peak = [&](double lo, double hi) {
    double best = 0.0;
    for (std::size_t i = 0; i < s.omega.size(); ++i)
      if (s.omega[i] >= lo && s.omega[i] <= hi) best = std::max(best, s.intensity[i]);
    return best;
  };
  // harmonics 1..Q: odd peaks against the intensity at the even positions
  const int q_max = 15;
  double worst_db = INFINITY, log_odd = 0.0, log_even = 0.0;
  int n_odd = 0, n_even = 0;
  for (int q = 1; q <= q_max; ++q) {
    if (q % 2) {
      log_odd += std::log10(peak((q - 0.25) * w0, (q + 0.25) * w0));
      ++n_odd;
    } else {
      log_even += std::log10(at(q * w0));
      ++n_even;
    }
  }
  for (int q = 2; q < q_max; q += 2) {
    const double odd = std::min(peak((q - 1.25) * w0, (q - 0.75) * w0), peak((q + 0.75) * w0, (q + 1.25) * w0));
    worst_db = std::min(worst_db, 10.0 * std::log10(odd / at(q * w0)));
  }
  const double mean_db = 10.0 * (log_odd / n_odd - log_even / n_even);
  std::filesystem::remove_all(dir);
  return {mean_db >= 20.0,
          fmt::format("harmonics 1..{}: mean odd-over-even contrast {:.1f} dB, weakest neighbour contrast {:.1f} dB, "
                      "{} samples",
                      q_max, mean_db, worst_db, d.size())};
}

Outcome water() {
  const std::string path = std::string(MCTDHF_SOURCE_DIR) + "/configs/water.cfg";
  const RunConfig full = load_config(path);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  const std::string dir = (std::filesystem::temp_directory_path() / "mctdhf_acceptance_water").string();
  auto set = [&](const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    if (pos == std::string::npos) throw std::runtime_error("water.cfg lacks '" + from + "'");
    text.replace(pos, from.size(), to);
  };
  set("steps = 1200", "steps = 10");
  set("directory = run-water", "directory = " + dir);
  set("[imaginary]\n", "[imaginary]\nenabled = false\nguess = gaussian\ngaussian_alpha = 0.5\n");
  const RunConfig smoke = parse_config(text);
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutcome out = run(smoke);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool finite = true;
  for (const auto& r : out.records) finite = finite && std::isfinite(r.norm) && std::isfinite(r.energy.real());
  std::filesystem::remove_all(dir);
  return {out.records.size() == 2 && finite,
          fmt::format("validated ({} nuclei, {}x{}x{} box); 10-step smoke run in {:.0f} s, |C| {:.12f}",
                      full.model.nuclei.centers.size(), full.model.box.hi[0] - full.model.box.lo[0],
                      full.model.box.hi[1] - full.model.box.lo[1], full.model.box.hi[2] - full.model.box.lo[2], secs,
                      out.records.back().norm)};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"exactness vs two-electron oracle", exactness},
    {"small-M monotone convergence", small_m},
    {"Arnoldi vs dense exponential", propagator},
    {"field-free conservation", conservation},
    {"first-order time accuracy", first_order},
    {"3D Poisson Gaussian benchmark", poisson},
    {"adaptive vs uniform hydrogen", adaptivity},
    {"ECS absorption", ecs},
    {"HHG odd/even selection rule", hhg},
    {"water configuration smoke run", water},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(0, 10));
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  int failed = 0;
  for (std::size_t k = 0; k < kCriteria.size(); ++k) {
    if (only != 0 && static_cast<int>(k) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu: %s  %s: %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", kCriteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
