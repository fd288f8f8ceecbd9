#include "mctdhf/krylov.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/parallel.hpp"

namespace mctdhf {

CMat expm(const CMat& a) {
  // Higham (2005), degree 13.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const CMat x = a / std::ldexp(1.0, s);
  const CMat id = CMat::Identity(n, n);
  const CMat x2 = x * x, x4 = x2 * x2, x6 = x4 * x2;
  const CMat u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
  const CMat v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  CMat r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

CVec exp_hessenberg(const CMat& h, cplx dt, ExpMethod method) {
  const Eigen::Index m = h.rows();
  const CMat arg = (-kI * dt) * h;
  if (method == ExpMethod::pade) return expm(arg).col(0);
  Eigen::ComplexEigenSolver<CMat> es(arg);
  const CMat& vecs = es.eigenvectors();
  const CVec coef = vecs.partialPivLu().solve(CVec::Unit(m, 0));
  return vecs * es.eigenvalues().array().exp().matrix().cwiseProduct(coef);
}

CVec arnoldi_exp(const LinearMap& a, const CVec& v, cplx dt, int m_max, double tol, StepReport* report,
                 const InnerProduct* inner) {
  auto ip = [&](const CVec& x, const CVec& y) { return inner ? (*inner)(x, y) : parallel::dot(x, y); };
  auto nrm = [&](const CVec& x) { return std::sqrt(std::max(0.0, ip(x, x).real())); };

  StepReport rep;
  const double beta = nrm(v);
  if (beta == 0.0) {
    if (report) *report = rep;
    return v;
  }
  std::vector<CVec> basis;
  basis.reserve(static_cast<std::size_t>(m_max) + 1);
  basis.push_back(v / beta);
  CMat h = CMat::Zero(m_max + 1, m_max);
  CVec w(v.size());
  CVec small;
  int m = 0;
  for (int j = 0; j < m_max; ++j) {
    a(basis[static_cast<std::size_t>(j)], w);
    if (!w.allFinite()) throw NonFinite("linear map produced non-finite values in Arnoldi iteration");
    const double wnorm0 = nrm(w);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const cplx c = ip(basis[static_cast<std::size_t>(i)], w);
        h(i, j) += c;
        w -= c * basis[static_cast<std::size_t>(i)];
      }
    const double hn = nrm(w);
    m = j + 1;
    small = exp_hessenberg(h.topLeftCorner(m, m), dt);
    if (hn <= 1e-13 * wnorm0 || hn == 0.0) {
      rep.happy_breakdown = true;
      rep.error_estimate = 0.0;
      break;
    }
    h(j + 1, j) = hn;
    rep.error_estimate = beta * std::abs(dt) * hn * std::abs(small[m - 1]);
    if (rep.error_estimate <= tol) break;
    basis.push_back(w / hn);
  }
  rep.dim_used = m;
  if (m == m_max && rep.error_estimate > tol)
    spdlog::warn("Arnoldi reached m_max = {} with error estimate {:.3e} > {:.1e}", m_max, rep.error_estimate, tol);
  CVec out = CVec::Zero(v.size());
  for (int i = 0; i < m; ++i) out += (beta * small[i]) * basis[static_cast<std::size_t>(i)];
  if (report) *report = rep;
  return out;
}

EigenPair lanczos_lowest(const LinearMap& a, const CVec& start, const InnerProduct* inner, double tol, int krylov_dim,
                         int max_restarts) {
  auto ip = [&](const CVec& x, const CVec& y) { return inner ? (*inner)(x, y) : parallel::dot(x, y); };
  auto nrm = [&](const CVec& x) { return std::sqrt(std::max(0.0, ip(x, x).real())); };

  EigenPair out;
  CVec x = start / nrm(start);
  CVec w(start.size());
  for (int restart = 0; restart < max_restarts; ++restart) {
    std::vector<CVec> basis{x};
    RMat t = RMat::Zero(krylov_dim, krylov_dim);
    int m = 0;
    for (int j = 0; j < krylov_dim; ++j) {
      a(basis[static_cast<std::size_t>(j)], w);
      ++out.iterations;
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const cplx c = ip(basis[static_cast<std::size_t>(i)], w);
          if (pass == 0 && i == j) t(j, j) = c.real();
          w -= c * basis[static_cast<std::size_t>(i)];
        }
      m = j + 1;
      const double b = nrm(w);
      if (j + 1 == krylov_dim || b < 1e-14) break;
      t(j + 1, j) = t(j, j + 1) = b;
      basis.push_back(w / b);
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(t.topLeftCorner(m, m));
    const RVec y = es.eigenvectors().col(0);
    x.setZero();
    for (int i = 0; i < m; ++i) x += y[i] * basis[static_cast<std::size_t>(i)];
    x /= nrm(x);
    out.value = es.eigenvalues()[0];
    a(x, w);
    ++out.iterations;
    const double theta = ip(x, w).real();
    const double res = nrm(CVec(w - theta * x));
    out.value = theta;
    spdlog::debug("lanczos restart {}: value {:.12f}, residual {:.3e}", restart, theta, res);
    if (res < tol) {
      out.vector = x;
      return out;
    }
  }
  throw NoConvergence(fmt::format("Lanczos did not converge in {} restarts", max_restarts));
}

}  // namespace mctdhf
