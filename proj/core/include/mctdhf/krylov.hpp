#pragma once

#include <functional>

#include "mctdhf/common.hpp"

namespace mctdhf {

/// out = A in.
using LinearMap = std::function<void(const CVec& in, CVec& out)>;
/// Inner product <a, b>, antilinear in a.
using InnerProduct = std::function<cplx(const CVec& a, const CVec& b)>;

struct StepReport {
  int dim_used = 0;
  double error_estimate = 0.0;
  bool happy_breakdown = false;
};

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
CMat expm(const CMat& a);

enum class ExpMethod { pade, eigen };

/// exp(-i H dt) e_1 for a small dense matrix.
CVec exp_hessenberg(const CMat& h, cplx dt, ExpMethod method = ExpMethod::pade);

/// Short-iterative Arnoldi approximation of exp(-i A dt) v.
///
/// The Krylov space grows until the error estimate
///   beta |dt| h_{m+1,m} |[exp(-i H_m dt)]_{m,1}|
/// drops below tol or m reaches m_max. Each new vector is orthogonalized twice
/// by modified Gram-Schmidt in the given inner product (Euclidean if null).
/// Imaginary-time propagation exp(-A tau) corresponds to dt = -i tau.
CVec arnoldi_exp(const LinearMap& a, const CVec& v, cplx dt, int m_max, double tol, StepReport* report = nullptr,
                 const InnerProduct* inner = nullptr);

struct EigenPair {
  double value = 0.0;
  CVec vector;
  int iterations = 0;
};

/// Lowest eigenpair of an operator that is self-adjoint in the given inner
/// product (e.g. M^{-1} H with the M inner product), by explicitly restarted
/// Lanczos with full reorthogonalization. Converged when the Ritz residual
/// norm is below tol.
EigenPair lanczos_lowest(const LinearMap& a, const CVec& start, const InnerProduct* inner, double tol,
                         int krylov_dim = 60, int max_restarts = 200);

}  // namespace mctdhf
