#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "mctdhf/krylov.hpp"

using namespace mctdhf;

namespace {
CMat random_matrix(int n, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * cplx(g(gen), g(gen));
  return a;
}

// exp(-i A dt) through a (non-normal) eigendecomposition
CMat eig_exp(const CMat& a, cplx dt) {
  Eigen::ComplexEigenSolver<CMat> es(a);
  const CVec e = (-kI * dt * es.eigenvalues()).array().exp();
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().inverse();
}

LinearMap dense_map(const CMat& a) {
  return [a](const CVec& x, CVec& y) { y = a * x; };
}
}  // namespace

TEST_CASE("expm agrees with the eigendecomposition path") {
  for (int n : {1, 2, 5, 12, 30}) {
    const CMat a = random_matrix(n, 3u + static_cast<unsigned>(n), 2.0);
    const CMat e1 = expm(a);
    const CMat e2 = eig_exp(a, cplx(0.0, 1.0));
    CHECK((e1 - e2).norm() < 1e-11 * e2.norm());
  }
  CMat nil = CMat::Zero(2, 2);
  nil(0, 1) = 3.0;
  const CMat e = expm(nil);
  CHECK(std::abs(e(0, 1) - 3.0) < 1e-15);
  CHECK(std::abs(e(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("exp_hessenberg methods agree") {
  const CMat h = random_matrix(12, 9);
  const CVec a = exp_hessenberg(h, 0.3, ExpMethod::pade);
  const CVec b = exp_hessenberg(h, 0.3, ExpMethod::eigen);
  CHECK((a - b).norm() < 1e-12 * a.norm());
  CHECK(std::abs(exp_hessenberg(CMat::Constant(1, 1, 2.0), 0.5)[0] - std::exp(-kI * 1.0)) < 1e-15);
}

TEST_CASE("Arnoldi on trivial operators") {
  const int n = 16;
  CVec v = CVec::Random(n);
  StepReport rep;
  const CVec w = arnoldi_exp(dense_map(CMat::Identity(n, n)), v, 0.3, 20, 1e-10, &rep);
  CHECK((w - std::exp(-kI * 0.3) * v).norm() < 1e-13);
  CHECK(rep.dim_used == 1);
  CHECK(rep.happy_breakdown);

  CMat d = CMat::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  const CVec u = CVec::Ones(3) / std::sqrt(3.0);
  const CVec r = arnoldi_exp(dense_map(d), u, 0.7, 10, 1e-12, &rep);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(r[k] - std::exp(-kI * 0.7 * double(k + 1)) / std::sqrt(3.0)) < 1e-12);
}

TEST_CASE("Arnoldi matches the dense exponential on random non-Hermitian systems") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const CMat a = random_matrix(64, 100 + seed, 0.5);
    const CVec v = random_matrix(64, 200 + seed).col(0);
    for (double dt : {0.01, 0.05, 0.1}) {
      StepReport rep;
      const CVec w = arnoldi_exp(dense_map(a), v, dt, 40, 1e-10, &rep);
      const CVec ref = eig_exp(a, dt) * v;
      CHECK((w - ref).norm() < 1e-9 * ref.norm());
      CHECK(rep.dim_used <= 40);
      CHECK(rep.error_estimate <= 1e-10);
    }
  }
}

TEST_CASE("error decreases spectrally with the subspace dimension") {
  const CMat a = random_matrix(64, 42, 0.5);
  const CVec v = random_matrix(64, 43).col(0);
  const CVec ref = eig_exp(a, 0.1) * v;
  double prev = INFINITY;
  for (int m = 4; m <= 16; m += 2) {
    const CVec w = arnoldi_exp(dense_map(a), v, 0.1, m, 1e-300);
    const double err = (w - ref).norm() / ref.norm();
    CHECK(err < prev);
    if (err > 1e-14) CHECK(err < 0.2 * prev);
    prev = err;
  }
}

TEST_CASE("unitary steps preserve the norm and imaginary time damps") {
  CMat h = random_matrix(40, 8);
  h = 0.5 * (h + h.adjoint()).eval();
  const CVec v = random_matrix(40, 9).col(0);
  const CVec w = arnoldi_exp(dense_map(h), v, 0.2, 30, 1e-12);
  CHECK(std::abs(w.norm() - v.norm()) < 1e-12 * v.norm());

  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const CVec damped = arnoldi_exp(dense_map(h), v, cplx(0.0, -0.2), 30, 1e-12);
  const CVec ref = es.eigenvectors() * (-0.2 * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                   es.eigenvectors().adjoint() * v;
  CHECK((damped - ref).norm() < 1e-10 * ref.norm());
}

TEST_CASE("a custom inner product is honoured") {
  // A self-adjoint in <x, y> = x^H M y
  const int n = 20;
  RMat m = RMat::Random(n, n);
  m = (m * m.transpose() + n * RMat::Identity(n, n)).eval();
  CMat s = random_matrix(n, 5);
  s = 0.5 * (s + s.adjoint()).eval();
  const CMat a = m.cast<cplx>().inverse() * s;
  InnerProduct ip = [&m](const CVec& x, const CVec& y) { return x.dot(m.cast<cplx>() * y); };
  const CVec v = random_matrix(n, 6).col(0);
  const CVec w = arnoldi_exp(dense_map(a), v, 0.3, 25, 1e-12, nullptr, &ip);
  CHECK((w - eig_exp(a, 0.3) * v).norm() < 1e-10 * v.norm());
  CHECK(std::abs(std::sqrt(ip(w, w).real()) - std::sqrt(ip(v, v).real())) < 1e-11);

  const EigenPair ep = lanczos_lowest(dense_map(a), CVec::Ones(n), &ip, 1e-10);
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(s, m.cast<cplx>());
  CHECK(ep.value == doctest::Approx(ges.eigenvalues()[0]).epsilon(1e-10));
}

TEST_CASE("non-finite operator output is reported") {
  LinearMap bad = [](const CVec& x, CVec& y) { y = x * NAN; };
  CHECK_THROWS_AS(arnoldi_exp(bad, CVec::Ones(4), 0.1, 5, 1e-10), NonFinite);
}
