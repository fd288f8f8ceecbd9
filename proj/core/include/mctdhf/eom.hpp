#pragma once

#include <memory>
#include <vector>

#include "mctdhf/ci.hpp"
#include "mctdhf/common.hpp"
#include "mctdhf/meanfield.hpp"
#include "mctdhf/model.hpp"

namespace mctdhf {

struct EomOptions {
  /// Eigenvalues of D below cutoff * |C|^2 are dropped from its pseudo-inverse.
  double dinv_cutoff = 1e-8;
  /// G v_p = Q (M^-1 F v_p - sum_q v_q lambda_qp) with the snapshot multipliers
  /// lambda_qp = <phi_q|M^-1 F phi_p>. The shift vanishes on the snapshot, so the
  /// right-hand side is unchanged, but it removes the orbital-energy term from
  /// the O(dt^2) local error of the frozen-projector exponential.
  bool multiplier_shift = true;
};

/// Snapshot of everything the equations of motion need at one instant:
/// RDMs, the D pseudo-inverse, mean fields, orbital integrals and the
/// one-body Hamiltonian at A(t). Within a step the orbital map G and the CI
/// Hamiltonian are treated as constant linear operators.
class FrozenCoupling {
 public:
  static FrozenCoupling freeze(const Model& model, const WaveFunction& wf, double t, const EomOptions& opts = {});

  const Model& model() const { return *model_; }
  double time() const { return t_; }
  const Point& vector_potential() const { return a_; }
  const std::vector<CVec>& orbitals() const { return orbitals_; }
  const CVec& ci() const { return ci_; }
  const CMat& d() const { return d_; }
  const Rdm2& p() const { return p_; }
  const CMat& dinv() const { return dinv_; }
  const MeanFieldTable& table() const { return table_; }
  const OrbitalIntegrals& integrals() const { return ints_; }
  const CiHamiltonian& ci_hamiltonian() const { return *hci_; }
  const CSparse& h1() const { return h1_; }
  /// Number of D eigenvalues dropped by the pseudo-inverse.
  int dropped_modes() const { return dropped_; }
  /// Snapshot multipliers lambda_qp (zero when the shift is disabled).
  const CMat& multipliers() const { return lambda_; }

  /// out = G in on stacked orbitals (M blocks of n_free).
  void apply_G(const CVec& in, CVec& out) const;
  /// d/dt of the stacked orbitals: -i G phi.
  CVec orbital_rhs(const CVec& stacked) const;
  /// d/dt C = -i H C.
  CVec ci_rhs(const CVec& c) const;
  /// sum D h + 1/2 sum P g for C / |C|.
  cplx total_energy() const { return energy_; }

 private:
  /// Weak-form F v per orbital slot (H1 plus mean-field contraction).
  std::vector<CVec> weak_rhs(const CVec& in) const;

  const Model* model_ = nullptr;
  double t_ = 0.0;
  Point a_{0.0, 0.0, 0.0};
  std::vector<CVec> orbitals_;
  CVec ci_;
  CMat d_;
  Rdm2 p_;
  CMat dinv_;
  int dropped_ = 0;
  CMat lambda_;
  MeanFieldTable table_;
  OrbitalIntegrals ints_;
  std::shared_ptr<CiHamiltonian> hci_;
  CSparse h1_;
  std::vector<CVec> u_;  ///< U_pq at raw nodes, index p*M+q
  cplx energy_ = 0.0;
};

}  // namespace mctdhf
