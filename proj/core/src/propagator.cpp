#include "mctdhf/propagator.hpp"

#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace mctdhf {

namespace {

void step_orbitals(const Model& model, WaveFunction& wf, const FrozenCoupling& fc, cplx dt, int m_max, double tol,
                   StepReport* report) {
  if (model.orbitals_complete()) return;
  const LinearMap g = [&fc](const CVec& in, CVec& out) { fc.apply_G(in, out); };
  const InnerProduct ip = [&model](const CVec& a, const CVec& b) { return model.stacked_inner(a, b); };
  const CVec next = arnoldi_exp(g, stack(wf.orbitals), dt, m_max, tol, report, &ip);
  wf.orbitals = unstack(next, model.n_orbitals());
}

void step_ci(const FrozenCoupling& fc, WaveFunction& wf, cplx dt, int m_max, double tol, StepReport* report) {
  const CiHamiltonian& h = fc.ci_hamiltonian();
  const LinearMap op = [&h](const CVec& in, CVec& out) { out = h.apply(in); };
  wf.ci = arnoldi_exp(op, wf.ci, dt, m_max, tol, report);
}

}  // namespace

StepResult real_time_step(const Model& model, WaveFunction& wf, const FrozenCoupling& fc, double dt,
                          const PropagatorOptions& opts) {
  StepResult res;
  if (!opts.symmetric_split) {
    step_orbitals(model, wf, fc, dt, opts.m_max, opts.tol, &res.orbitals);
    if (opts.reorthonormalize) model.lowdin(wf.orbitals);
    step_ci(fc, wf, dt, opts.m_max, opts.tol, &res.ci);
    return res;
  }
  StepReport half;
  step_ci(fc, wf, 0.5 * dt, opts.m_max, opts.tol, &half);
  step_orbitals(model, wf, fc, dt, opts.m_max, opts.tol, &res.orbitals);
  if (opts.reorthonormalize) model.lowdin(wf.orbitals);
  const FrozenCoupling fc2 = FrozenCoupling::freeze(model, wf, fc.time() + dt, opts.eom);
  step_ci(fc2, wf, 0.5 * dt, opts.m_max, opts.tol, &res.ci);
  res.ci.dim_used = std::max(res.ci.dim_used, half.dim_used);
  res.ci.error_estimate += half.error_estimate;
  return res;
}

ImaginaryResult propagate_imaginary(const Model& model, WaveFunction& wf, const ImaginaryOptions& opts) {
  ImaginaryResult res;
  const cplx dt(0.0, -opts.dtau);
  wf.ci /= wf.ci.norm();
  FrozenCoupling fc = FrozenCoupling::freeze(model, wf, 0.0, opts.eom);
  res.energies.push_back(fc.total_energy().real());
  for (int step = 1; step <= opts.max_steps; ++step) {
    step_ci(fc, wf, dt, opts.m_max, opts.krylov_tol, nullptr);
    wf.ci /= wf.ci.norm();
    if (!model.orbitals_complete()) {
      step_orbitals(model, wf, fc, dt, opts.m_max, opts.krylov_tol, nullptr);
      model.lowdin(wf.orbitals);
    }
    fc = FrozenCoupling::freeze(model, wf, 0.0, opts.eom);
    const double e = fc.total_energy().real();
    if (!std::isfinite(e)) throw NonFinite("imaginary-time energy is not finite");
    const double de = e - res.energies.back();
    res.energies.push_back(e);
    res.steps = step;
    spdlog::debug("imag step {} E = {:.15f} dE = {:.3e}", step, e, de);
    if (step >= opts.min_steps && std::abs(de) < opts.tol_energy) {
      res.converged = true;
      spdlog::info("imaginary time converged in {} steps, E = {:.12f}", step, e);
      return res;
    }
  }
  const double last = res.energies.size() > 1 ? res.energies.back() - res.energies[res.energies.size() - 2] : NAN;
  throw NoConvergence(fmt::format("imaginary time did not converge in {} steps (last dE = {:.3e})", opts.max_steps, last));
}

}  // namespace mctdhf
