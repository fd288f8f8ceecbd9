#include "mctdhf/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include <omp.h>

namespace mctdhf::parallel {
namespace {

Reduction g_reduction = Reduction::deterministic;
constexpr Eigen::Index kChunk = 4096;

template <class Matrix, class Vector>
void csr_multiply(const Matrix& a, const Vector& x, Vector& y) {
  y.resize(a.rows());
  const auto* outer = a.outerIndexPtr();
  const auto* inner = a.innerIndexPtr();
  const auto* values = a.valuePtr();
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static) if (rows > 2048)
  for (Eigen::Index r = 0; r < rows; ++r) {
    typename Vector::Scalar acc{};
    for (auto k = outer[r]; k < outer[r + 1]; ++k) acc += values[k] * x[inner[k]];
    y[r] = acc;
  }
}

}  // namespace

void set_reduction(Reduction mode) { g_reduction = mode; }
Reduction reduction() { return g_reduction; }

void set_threads(int requested) {
  int n = requested;
  if (const char* env = std::getenv("MCTDHF_NUM_THREADS")) {
    const int from_env = std::atoi(env);
    if (from_env > 0) n = from_env;
  }
  if (n > 0) omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

cplx dot(const CVec& a, const CVec& b) {
  const Eigen::Index n = a.size();
  if (g_reduction == Reduction::fast || n <= kChunk) return a.dot(b);
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  std::vector<cplx> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kChunk;
    const Eigen::Index len = std::min(kChunk, n - begin);
    partial[static_cast<std::size_t>(c)] = a.segment(begin, len).dot(b.segment(begin, len));
  }
  cplx sum{};
  for (const auto& p : partial) sum += p;
  return sum;
}

double squared_norm(const CVec& a) { return dot(a, a).real(); }

void multiply(const CSparse& a, const CVec& x, CVec& y) { csr_multiply(a, x, y); }

void multiply(const RSparse& a, const CVec& x, CVec& y) {
  y.resize(a.rows());
  const auto* outer = a.outerIndexPtr();
  const auto* inner = a.innerIndexPtr();
  const auto* values = a.valuePtr();
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static) if (rows > 2048)
  for (Eigen::Index r = 0; r < rows; ++r) {
    cplx acc{};
    for (auto k = outer[r]; k < outer[r + 1]; ++k) acc += values[k] * x[inner[k]];
    y[r] = acc;
  }
}

void multiply(const RSparse& a, const RVec& x, RVec& y) { csr_multiply(a, x, y); }

}  // namespace mctdhf::parallel
