#pragma once

// Reference computations that share no code path with the solver beyond the
// one-body operators and node geometry.

#include <vector>

#include "mctdhf/model.hpp"

namespace oracle {

using mctdhf::cplx;
using mctdhf::CMat;
using mctdhf::CVec;
using mctdhf::RMat;
using mctdhf::RVec;

/// exp(-i A dt) by Eigen's scaling-and-squaring matrix exponential.
CMat dense_exp(const CMat& a, cplx dt);

/// Exact two-electron problem (one alpha, one beta) on a 1D lumped-mass mesh:
/// H = h x 1 + 1 x h + v(x1 - x2) in the symmetrized basis y = sqrt(W1 W2) psi.
class TwoElectron1D {
 public:
  TwoElectron1D(const mctdhf::Model& model, double ee_softening);

  double ground_energy() const { return values_[0]; }
  /// Symmetrized two-particle amplitudes of an MCTDHF wave function.
  CVec amplitudes(const mctdhf::WaveFunction& wf) const;
  CVec propagate(const CVec& y, double t) const;

 private:
  int n_ = 0;
  RVec sqrt_w_;
  RVec values_;
  RMat vectors_;
};

/// Lowest eigenvalue of the dense pencil (H, M), H Hermitian part only.
double lowest_generalized(const mctdhf::CSparse& h, const mctdhf::RSparse& m);

}  // namespace oracle
