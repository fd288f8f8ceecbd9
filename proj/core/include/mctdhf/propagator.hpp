#pragma once

#include <vector>

#include "mctdhf/eom.hpp"
#include "mctdhf/krylov.hpp"
#include "mctdhf/model.hpp"

namespace mctdhf {

struct PropagatorOptions {
  int m_max = 30;
  double tol = 1e-10;
  /// C half step, orbital step, refreeze, C half step.
  bool symmetric_split = false;
  /// Loewdin after the orbital step; the frozen projector lets the overlap drift by O(dt^2).
  bool reorthonormalize = true;
  EomOptions eom;
};

struct StepResult {
  StepReport orbitals;
  StepReport ci;
};

/// One real-time step from t to t + dt starting from the snapshot fc, which
/// must have been frozen from wf at t. Orbitals move first (Arnoldi on G in
/// the stacked M inner product), then C (Arnoldi on the frozen CI Hamiltonian).
StepResult real_time_step(const Model& model, WaveFunction& wf, const FrozenCoupling& fc, double dt,
                          const PropagatorOptions& opts = {});

struct ImaginaryOptions {
  double dtau = 0.05;
  double tol_energy = 1e-10;
  int max_steps = 5000;
  int m_max = 30;
  double krylov_tol = 1e-12;
  /// Steps without an energy check at the start; |dE| < tol must then hold once.
  int min_steps = 2;
  EomOptions eom;
};

struct ImaginaryResult {
  std::vector<double> energies;
  int steps = 0;
  bool converged = false;
};

/// Relaxes wf toward the ground state with exp(-H tau) steps: C by Arnoldi
/// then renormalized, orbitals by Arnoldi on G then Loewdin-orthonormalized,
/// both from one snapshot per step. Throws NoConvergence after max_steps.
ImaginaryResult propagate_imaginary(const Model& model, WaveFunction& wf, const ImaginaryOptions& opts = {});

}  // namespace mctdhf
