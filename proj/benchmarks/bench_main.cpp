#include <map>
#include <memory>
#include <random>

#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include "mctdhf/krylov.hpp"
#include "mctdhf/propagator.hpp"

using namespace mctdhf;

namespace {
ModelSpec helium(int orbitals, int order) {
  ModelSpec s;
  s.box.dim = 1;
  s.box.lo[0] = -30.0;
  s.box.hi[0] = 30.0;
  s.coarse_size = 2.5;
  s.order = order;
  s.nuclei.centers.push_back({2.0, {0.0, 0.0, 0.0}});
  s.nuclei.softening = 1.0;
  s.n_alpha = 1;
  s.n_beta = 1;
  s.n_orbitals = orbitals;
  return s;
}

const Model& model(int orbitals) {
  static std::map<int, std::unique_ptr<Model>> cache;
  auto& m = cache[orbitals];
  if (!m) {
    spdlog::set_level(spdlog::level::warn);
    m = std::make_unique<Model>(helium(orbitals, 6));
  }
  return *m;
}

WaveFunction state(const Model& m) {
  WaveFunction wf = m.initial_state(m.core_orbitals(m.n_orbitals()));
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < wf.ci.size(); ++i) wf.ci[i] = cplx(g(rng), g(rng));
  wf.ci.normalize();
  return wf;
}
}  // namespace

static void BM_sigma(benchmark::State& st) {
  const Model& m = model(static_cast<int>(st.range(0)));
  const WaveFunction wf = state(m);
  const auto fc = FrozenCoupling::freeze(m, wf, 0.0);
  CVec out;
  for (auto _ : st) {
    out = fc.ci_rhs(wf.ci);
    benchmark::DoNotOptimize(out.data());
  }
  st.counters["ci_dim"] = static_cast<double>(wf.ci.size());
}
BENCHMARK(BM_sigma)->Arg(4)->Arg(8)->Arg(12);

static void BM_apply_G(benchmark::State& st) {
  const Model& m = model(static_cast<int>(st.range(0)));
  const WaveFunction wf = state(m);
  const auto fc = FrozenCoupling::freeze(m, wf, 0.0);
  const CVec v = stack(wf.orbitals);
  CVec out;
  for (auto _ : st) {
    fc.apply_G(v, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.counters["dofs"] = static_cast<double>(m.n_free());
}
BENCHMARK(BM_apply_G)->Arg(2)->Arg(4)->Arg(8);

static void BM_freeze(benchmark::State& st) {
  const Model& m = model(static_cast<int>(st.range(0)));
  const WaveFunction wf = state(m);
  for (auto _ : st) benchmark::DoNotOptimize(FrozenCoupling::freeze(m, wf, 0.0).total_energy());
}
BENCHMARK(BM_freeze)->Arg(2)->Arg(4);

static void BM_poisson3d(benchmark::State& st) {
  ModelSpec s;
  s.box.dim = 3;
  for (int a = 0; a < 3; ++a) {
    s.box.lo[a] = -8.0;
    s.box.hi[a] = 8.0;
  }
  s.coarse_size = 4.0;
  s.order = static_cast<int>(st.range(0));
  s.n_alpha = 1;
  s.n_beta = 0;
  s.n_orbitals = 1;
  spdlog::set_level(spdlog::level::warn);
  const Model m(s);
  const auto orb = m.gaussian_orbitals(1, 0.5, {0.0, 0.0, 0.0});
  const CVec rho = m.mean_field().pair_density(orb[0], orb[0]);
  for (auto _ : st) benchmark::DoNotOptimize(m.mean_field().potential(rho).data());
  st.counters["cg_iterations"] = m.mean_field().last_iterations();
}
BENCHMARK(BM_poisson3d)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_arnoldi(benchmark::State& st) {
  const auto n = static_cast<Eigen::Index>(st.range(0));
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  CMat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng)) / std::sqrt(static_cast<double>(n));
  CVec v = CVec::Ones(n).normalized();
  const LinearMap op = [&](const CVec& in, CVec& out) { out.noalias() = a * in; };
  for (auto _ : st) benchmark::DoNotOptimize(arnoldi_exp(op, v, 0.1, 30, 1e-10).data());
}
BENCHMARK(BM_arnoldi)->Arg(64)->Arg(1024);
BENCHMARK_MAIN();
