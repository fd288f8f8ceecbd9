#include "mctdhf/meanfield.hpp"

#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/operators.hpp"

namespace mctdhf {

MeanField::MeanField(const FeSpace& space, MeanFieldOptions opts) : space_(&space), opts_(opts) {
  const auto nf = static_cast<Eigen::Index>(space.n_free());
  const auto nb = static_cast<Eigen::Index>(space.n_boundary());
  if (space.dim() == 3) {
    const RSparse k = laplace_matrix(space);
    k_ff_ = k.topLeftCorner(nf, nf);
    k_fb_ = k.topRightCorner(nf, nb);
    inv_diag_ = k_ff_.diagonal().cwiseInverse();
    if (opts_.poisson_max_iter <= 0) opts_.poisson_max_iter = static_cast<int>(10 * nf + 100);
  } else if (space.n_raw() <= opts_.dense_kernel_limit) {
    const auto n = static_cast<Eigen::Index>(space.n_raw());
    kernel_.resize(n, n);
    const auto& pts = space.raw_points();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double r2 = opts_.softening;
        for (int a = 0; a < space.dim(); ++a) {
          const double dx = pts[static_cast<std::size_t>(i)][a] - pts[static_cast<std::size_t>(j)][a];
          r2 += dx * dx;
        }
        kernel_(i, j) = 1.0 / std::sqrt(r2);
      }
  }
}

CVec MeanField::pair_density(const CVec& phi_r, const CVec& phi_s) const {
  const RSparse& e = space_->expand_free();
  const CVec ur = e * phi_r;
  const CVec us = e * phi_s;
  return ur.conjugate().cwiseProduct(us);
}

CVec MeanField::boundary_dirichlet(const CVec& density) const {
  const FeSpace& s = *space_;
  const auto& pts = s.raw_points();
  const RVec& w = s.raw_weights();
  // Only nodes carrying density contribute.
  const double cut = 1e-300 + 1e-16 * density.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> src;
  for (Eigen::Index i = 0; i < density.size(); ++i)
    if (std::abs(density[i]) > cut) src.push_back(i);

  CVec out = CVec::Zero(static_cast<Eigen::Index>(s.n_boundary()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < out.size(); ++b) {
    const Point& xb = pts[static_cast<std::size_t>(s.raw_of(static_cast<int>(s.n_free() + b)))];
    cplx acc = 0.0;
    for (Eigen::Index i : src) {
      const Point& x = pts[static_cast<std::size_t>(i)];
      double r2 = 0.0;
      for (int a = 0; a < s.dim(); ++a) r2 += (xb[a] - x[a]) * (xb[a] - x[a]);
      const double r = std::sqrt(r2);
      if (r < 1e-10) continue;
      acc += w[i] * density[i] / r;
    }
    out[b] = acc;
  }
  return out;
}

CVec MeanField::solve_poisson(const CVec& density, const CVec& dirichlet) const {
  return poisson_impl(density, dirichlet, last_iterations_);
}

CVec MeanField::poisson_impl(const CVec& density, const CVec& dirichlet, int& iterations) const {
  const FeSpace& s = *space_;
  const RVec& w = s.raw_weights();
  CVec rhs = (4.0 * kPi) * (s.expand_free().transpose() * w.cwiseProduct(density).eval());
  if (dirichlet.size() > 0) rhs -= k_fb_ * dirichlet;
  CVec x = CVec::Zero(rhs.size());
  const auto rep = conjugate_gradient(k_ff_, inv_diag_, rhs, x, opts_.poisson_tol, opts_.poisson_max_iter);
  iterations = rep.iterations;
  if (rep.relative_residual > opts_.poisson_tol)
    throw NoConvergence(fmt::format("Poisson solve stalled at residual {:.3e} after {} iterations",
                                    rep.relative_residual, rep.iterations));
  spdlog::trace("poisson: {} iterations, residual {:.2e}", rep.iterations, rep.relative_residual);
  CVec raw = s.expand_free() * x;
  if (dirichlet.size() > 0) raw += s.expand_boundary() * dirichlet;
  return raw;
}

CVec MeanField::potential(const CVec& density) const { return potential_impl(density, last_iterations_); }

CVec MeanField::potential_impl(const CVec& density, int& iterations) const {
  const FeSpace& s = *space_;
  iterations = 0;
  if (s.dim() == 3) return poisson_impl(density, boundary_dirichlet(density), iterations);
  const CVec src = s.raw_weights().cwiseProduct(density);
  if (kernel_.size() > 0) return kernel_ * src;
  const auto& pts = s.raw_points();
  CVec out(density.size());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    cplx acc = 0.0;
    for (Eigen::Index j = 0; j < src.size(); ++j) {
      if (src[j] == cplx(0.0, 0.0)) continue;
      double r2 = opts_.softening;
      for (int a = 0; a < s.dim(); ++a) {
        const double dx = pts[static_cast<std::size_t>(i)][a] - pts[static_cast<std::size_t>(j)][a];
        r2 += dx * dx;
      }
      acc += src[j] / std::sqrt(r2);
    }
    out[i] = acc;
  }
  return out;
}

MeanFieldTable MeanField::build_table(const std::vector<CVec>& orbitals) const {
  MeanFieldTable t;
  const int m = static_cast<int>(orbitals.size());
  t.n_orbitals = m;
  t.w.resize(static_cast<std::size_t>(m * m));
  std::vector<std::pair<int, int>> pairs;
  for (int r = 0; r < m; ++r)
    for (int s = r; s < m; ++s) pairs.emplace_back(r, s);
  int total_iter = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : total_iter)
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [r, s] = pairs[k];
    int it = 0;
    t.at(r, s) = potential_impl(
        pair_density(orbitals[static_cast<std::size_t>(r)], orbitals[static_cast<std::size_t>(s)]), it);
    total_iter += it;
  }
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < r; ++s) t.at(r, s) = t.at(s, r).conjugate();
  if (space_->dim() == 3) spdlog::debug("mean-field table: {} Poisson solves, {} CG iterations", pairs.size(), total_iter);
  return t;
}

}  // namespace mctdhf
