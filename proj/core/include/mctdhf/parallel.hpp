#pragma once

#include "mctdhf/common.hpp"

namespace mctdhf::parallel {

/// Summation order used by reductions.
///
/// `deterministic` splits every reduction into fixed-size chunks whose
/// partial sums are combined in index order, so results do not depend on the
/// number of threads. `fast` lets OpenMP choose the order.
enum class Reduction { deterministic, fast };

void set_reduction(Reduction mode);
Reduction reduction();

/// Sets the worker count; `MCTDHF_NUM_THREADS` in the environment wins over
/// the requested value when present.
void set_threads(int requested);
int threads();

/// Hermitian inner product a^H b.
cplx dot(const CVec& a, const CVec& b);
double squared_norm(const CVec& a);

/// y = A x, rows in parallel.
void multiply(const CSparse& a, const CVec& x, CVec& y);
void multiply(const RSparse& a, const CVec& x, CVec& y);
void multiply(const RSparse& a, const RVec& x, RVec& y);

}  // namespace mctdhf::parallel
