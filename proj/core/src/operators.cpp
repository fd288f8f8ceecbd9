#include "mctdhf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/parallel.hpp"

namespace mctdhf {

namespace {

using CTrip = Eigen::Triplet<cplx>;

CSparse to_sparse(Eigen::Index n, const std::vector<CTrip>& t) {
  CSparse a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

// Raw-node operator -> free-dof operator in the ECS-rescaled basis.
CSparse condense_free(const FeSpace& space, CSparse raw) {
  const CVec& s = space.ecs_node_scale();
  if (space.ecs().active()) {
    for (Eigen::Index i = 0; i < raw.outerSize(); ++i)
      for (CSparse::InnerIterator it(raw, i); it; ++it) it.valueRef() /= s[it.row()] * s[it.col()];
  }
  const CSparse e = space.expand_free().cast<cplx>();
  CSparse out = CSparse(e.transpose()) * raw * e;
  out.prune(cplx(0.0, 0.0), 0.0);
  return out;
}

// Full local V on one cell by composite Gauss-Legendre quadrature, splitting
// boxes that contain a nucleus down to `max_depth` levels.
RMat refined_cell_potential(const FeSpace& space, std::size_t leaf_pos, const Nuclei& nuclei) {
  const Mesh& mesh = space.mesh();
  const int d = space.dim();
  const int n = space.order() + 1;
  const int per = space.nodes_per_cell();
  const int leaf = mesh.leaves()[leaf_pos];
  const Point anchor = mesh.anchor(leaf);
  const double h = mesh.size(leaf);
  const auto gl = gauss_legendre(space.order() + 4);
  const int nq = gl.size();
  int nqd = 1;
  for (int a = 0; a < d; ++a) nqd *= nq;
  const int max_depth = d == 3 ? 12 : 20;

  RMat local = RMat::Zero(per, per);
  RVec b(per);
  double vals[3 * 16];

  auto contains = [&](const Point& lo, double hs) {
    for (const auto& nu : nuclei.centers) {
      bool in = true;
      for (int a = 0; a < d; ++a) {
        const double tol = 1e-12 * hs;
        if (nu.position[a] < lo[a] - tol || nu.position[a] > lo[a] + hs + tol) in = false;
      }
      if (in) return true;
    }
    return false;
  };

  std::function<void(const Point&, double, int)> integrate = [&](const Point& lo, double hs, int depth) {
    if (depth < max_depth && contains(lo, hs)) {
      for (int ch = 0; ch < (1 << d); ++ch) {
        Point clo = lo;
        for (int a = 0; a < d; ++a)
          if ((ch >> a) & 1) clo[a] += 0.5 * hs;
        integrate(clo, 0.5 * hs, depth + 1);
      }
      return;
    }
    for (int q = 0; q < nqd; ++q) {
      Point x{0.0, 0.0, 0.0};
      double w = 1.0;
      int rem = q;
      for (int a = 0; a < d; ++a) {
        const auto k = static_cast<std::size_t>(rem % nq);
        rem /= nq;
        x[a] = lo[a] + 0.5 * hs * (gl.nodes[k] + 1.0);
        w *= 0.5 * hs * gl.weights[k];
      }
      for (int a = 0; a < d; ++a) space.basis().values(2.0 * (x[a] - anchor[a]) / h - 1.0, vals + a * n);
      for (int k = 0; k < per; ++k) {
        double v = 1.0;
        int r2 = k;
        for (int a = 0; a < d; ++a) {
          v *= vals[a * n + r2 % n];
          r2 /= n;
        }
        b[k] = v;
      }
      const double pot = nuclei.potential(x, d);
      local.noalias() += (w * pot) * b * b.transpose();
    }
  };
  integrate(anchor, h, 0);
  return local;
}

bool needs_refined(const FeSpace& space, std::size_t leaf_pos, const Nuclei& nuclei) {
  const Mesh& mesh = space.mesh();
  const int leaf = mesh.leaves()[leaf_pos];
  const Point an = mesh.anchor(leaf);
  const double h = mesh.size(leaf);
  for (const auto& nu : nuclei.centers) {
    double d2 = 0.0;
    for (int a = 0; a < space.dim(); ++a) {
      const double lo = an[a], hi = an[a] + h;
      const double dx = nu.position[a] < lo ? lo - nu.position[a] : nu.position[a] > hi ? nu.position[a] - hi : 0.0;
      d2 += dx * dx;
    }
    if (std::sqrt(d2) <= 0.5 * h) return true;
  }
  return false;
}

}  // namespace

cplx Nuclei::potential(const std::array<cplx, 3>& z, int dim) const {
  cplx v = 0.0;
  for (const auto& nu : centers) {
    cplx r2 = softening;
    for (int a = 0; a < dim; ++a) {
      const cplx dz = z[a] - nu.position[a];
      r2 += dz * dz;
    }
    v -= nu.charge / std::sqrt(r2);
  }
  return v;
}

double Nuclei::potential(const Point& x, int dim) const {
  double v = 0.0;
  for (const auto& nu : centers) {
    double r2 = softening;
    for (int a = 0; a < dim; ++a) {
      const double dx = x[a] - nu.position[a];
      r2 += dx * dx;
    }
    v -= nu.charge / std::sqrt(r2);
  }
  return v;
}

CSparse OneBodyOperators::hamiltonian(const Point& a) const {
  CSparse h = kinetic + potential;
  for (int ax = 0; ax < 3; ++ax)
    if (a[ax] != 0.0 && gradient[ax].nonZeros() > 0) h -= (kI * a[ax]) * gradient[ax];
  return h;
}

RSparse mass_matrix(const FeSpace& space) {
  const RSparse& e = space.expand_all();
  RSparse out = RSparse(e.transpose()) * space.raw_weights().asDiagonal() * e;
  out.prune(0.0, 0.0);
  return out;
}

RSparse laplace_matrix(const FeSpace& space) {
  const Mesh& mesh = space.mesh();
  const int d = space.dim();
  const int n = space.order() + 1;
  const int per = space.nodes_per_cell();
  const auto& w = space.rule().weights;
  const auto& s1d = space.reference_stiffness();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.n_leaves() * static_cast<std::size_t>(per * d * n));
  for (std::size_t li = 0; li < mesh.n_leaves(); ++li) {
    const double h = mesh.size(mesh.leaves()[li]);
    const auto nodes = space.cell_nodes(li);
    for (int k = 0; k < per; ++k) {
      int j[3] = {0, 0, 0};
      int rem = k, stride[3] = {1, n, n * n};
      for (int a = 0; a < d; ++a) {
        j[a] = rem % n;
        rem /= n;
      }
      for (int a = 0; a < d; ++a) {
        double pref = 2.0 / h;
        for (int b = 0; b < d; ++b)
          if (b != a) pref *= 0.5 * h * w[static_cast<std::size_t>(j[b])];
        for (int jj = 0; jj < n; ++jj) {
          const int l = k + (jj - j[a]) * stride[a];
          trip.emplace_back(nodes[static_cast<std::size_t>(k)], nodes[static_cast<std::size_t>(l)],
                            pref * s1d[static_cast<std::size_t>(j[a] * n + jj)]);
        }
      }
    }
  }
  const auto nr = static_cast<Eigen::Index>(space.n_raw());
  RSparse raw(nr, nr);
  raw.setFromTriplets(trip.begin(), trip.end());
  const RSparse& e = space.expand_all();
  RSparse out = RSparse(e.transpose()) * raw * e;
  out.prune(0.0, 0.0);
  return out;
}

OneBodyOperators assemble_one_body(const FeSpace& space, const Nuclei& nuclei, NuclearQuadrature quad) {
  const Mesh& mesh = space.mesh();
  const int d = space.dim();
  const int n = space.order() + 1;
  const int per = space.nodes_per_cell();
  const auto& w = space.rule().weights;
  const auto& s1d = space.reference_stiffness();
  const auto& dm = space.basis().derivative_matrix();

  std::vector<CTrip> tt, tv;
  std::array<std::vector<CTrip>, 3> tg;
  tt.reserve(mesh.n_leaves() * static_cast<std::size_t>(per * d * n));

  const bool singular = nuclei.softening == 0.0 && !nuclei.centers.empty();
  std::size_t refined_cells = 0;

  for (std::size_t li = 0; li < mesh.n_leaves(); ++li) {
    const double h = mesh.size(mesh.leaves()[li]);
    const auto nodes = space.cell_nodes(li);
    std::array<cplx, 3> jac{1.0, 1.0, 1.0};
    bool scaled = false;
    for (int a = 0; a < d; ++a) {
      jac[static_cast<std::size_t>(a)] = space.ecs_jacobian(li, a);
      scaled = scaled || jac[static_cast<std::size_t>(a)] != cplx(1.0, 0.0);
    }
    const bool refined = quad == NuclearQuadrature::refined && d >= 2 && !scaled &&
                         needs_refined(space, li, nuclei);
    if (refined) {
      ++refined_cells;
      const RMat local = refined_cell_potential(space, li, nuclei);
      for (int k = 0; k < per; ++k)
        for (int l = 0; l < per; ++l)
          if (local(k, l) != 0.0)
            tv.emplace_back(nodes[static_cast<std::size_t>(k)], nodes[static_cast<std::size_t>(l)], local(k, l));
    }

    for (int k = 0; k < per; ++k) {
      int j[3] = {0, 0, 0};
      int rem = k, stride[3] = {1, n, n * n};
      for (int a = 0; a < d; ++a) {
        j[a] = rem % n;
        rem /= n;
      }
      const int rk = nodes[static_cast<std::size_t>(k)];
      cplx wk = 1.0;
      for (int a = 0; a < d; ++a) wk *= 0.5 * h * w[static_cast<std::size_t>(j[a])] * jac[static_cast<std::size_t>(a)];

      if (!refined && !nuclei.centers.empty()) {
        const Point& x = space.raw_points()[static_cast<std::size_t>(rk)];
        if (singular) {
          for (const auto& nu : nuclei.centers) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += (x[a] - nu.position[a]) * (x[a] - nu.position[a]);
            if (std::sqrt(r2) < 1e-6)
              throw SingularPotential(fmt::format(
                  "basis node ({}, {}, {}) coincides with a nucleus; use a softening or refined nuclear quadrature",
                  x[0], x[1], x[2]));
          }
        }
        tv.emplace_back(rk, rk, wk * nuclei.potential(space.complex_coordinate(x), d));
      }

      for (int a = 0; a < d; ++a) {
        cplx pref = 1.0;
        for (int b = 0; b < d; ++b)
          if (b != a) pref *= 0.5 * h * w[static_cast<std::size_t>(j[b])] * jac[static_cast<std::size_t>(b)];
        const cplx tpref = 0.5 * pref * 2.0 / (h * jac[static_cast<std::size_t>(a)]);
        const cplx gpref = pref * w[static_cast<std::size_t>(j[a])];
        for (int jj = 0; jj < n; ++jj) {
          const int rl = nodes[static_cast<std::size_t>(k + (jj - j[a]) * stride[a])];
          tt.emplace_back(rk, rl, tpref * s1d[static_cast<std::size_t>(j[a] * n + jj)]);
          const double dkl = dm[static_cast<std::size_t>(j[a] * n + jj)];
          if (dkl != 0.0) tg[static_cast<std::size_t>(a)].emplace_back(rk, rl, gpref * dkl);
        }
      }
    }
  }
  if (refined_cells > 0) spdlog::debug("refined nuclear quadrature on {} cells", refined_cells);

  const auto nr = static_cast<Eigen::Index>(space.n_raw());
  OneBodyOperators ops;
  {
    const RSparse& e = space.expand_free();
    ops.mass = RSparse(e.transpose()) * space.raw_weights().asDiagonal() * e;
    ops.mass.prune(0.0, 0.0);
  }
  ops.kinetic = condense_free(space, to_sparse(nr, tt));
  ops.potential = condense_free(space, to_sparse(nr, tv));
  const auto nf = static_cast<Eigen::Index>(space.n_free());
  for (int a = 0; a < 3; ++a) {
    if (a < d) {
      // lumped face quadrature on hanging faces leaves a small symmetric part
      const CSparse g = condense_free(space, to_sparse(nr, tg[static_cast<std::size_t>(a)]));
      ops.gradient[static_cast<std::size_t>(a)] = 0.5 * (g - CSparse(g.transpose()));
      ops.gradient[static_cast<std::size_t>(a)].prune(cplx(0.0, 0.0));
    } else
      ops.gradient[static_cast<std::size_t>(a)].resize(nf, nf);
  }
  return ops;
}

MassSolver::MassSolver(RSparse m, double tol, int max_iter) : m_(std::move(m)), tol_(tol), max_iter_(max_iter) {
  m_.makeCompressed();
  inv_diag_ = RVec::Zero(m_.rows());
  diagonal_ = true;
  for (Eigen::Index i = 0; i < m_.outerSize(); ++i)
    for (RSparse::InnerIterator it(m_, i); it; ++it) {
      if (it.col() == i)
        inv_diag_[i] = 1.0 / it.value();
      else if (it.value() != 0.0)
        diagonal_ = false;
    }
  if (max_iter_ <= 0) max_iter_ = static_cast<int>(2 * m_.rows() + 100);
}

CgReport conjugate_gradient(const RSparse& a, const RVec& inv_diag, const CVec& b, CVec& x,
                            double tol, int max_iter) {
  CgReport rep;
  const double bnorm = std::sqrt(parallel::squared_norm(b));
  if (bnorm == 0.0) {
    x.setZero(b.size());
    return rep;
  }
  CVec ap(b.size());
  parallel::multiply(a, x, ap);
  CVec r = b - ap;
  double rnorm = std::sqrt(parallel::squared_norm(r));
  CVec z = inv_diag.cwiseProduct(r);
  CVec p = z;
  cplx rz = parallel::dot(r, z);
  while (rnorm > tol * bnorm && rep.iterations < max_iter) {
    parallel::multiply(a, p, ap);
    const cplx alpha = rz / parallel::dot(p, ap);
    x += alpha * p;
    r -= alpha * ap;
    ++rep.iterations;
    rnorm = std::sqrt(parallel::squared_norm(r));
    if (rnorm <= tol * bnorm) break;
    z = inv_diag.cwiseProduct(r);
    const cplx rz_new = parallel::dot(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rep.relative_residual = rnorm / bnorm;
  return rep;
}

CVec MassSolver::solve(const CVec& b) const {
  if (diagonal_) return inv_diag_.cwiseProduct(b);
  CVec x = CVec::Zero(b.size());
  const auto rep = conjugate_gradient(m_, inv_diag_, b, x, tol_, max_iter_);
  CVec ax(b.size());
  parallel::multiply(m_, x, ax);
  const double bnorm = std::sqrt(parallel::squared_norm(b));
  const double res = std::sqrt(parallel::squared_norm(CVec(ax - b)));
  if (!(res <= 1e-12 * bnorm))
    throw NoConvergence(
        fmt::format("mass solve residual {:.3e} after {} iterations", res / bnorm, rep.iterations));
  return x;
}

RVec MassSolver::solve(const RVec& b) const {
  if (diagonal_) return inv_diag_.cwiseProduct(b);
  return solve(CVec(b.cast<cplx>())).real();
}

RVec project(const FeSpace& space, const std::function<double(const Point&)>& f) {
  RVec fr(static_cast<Eigen::Index>(space.n_raw()));
  for (std::size_t r = 0; r < space.n_raw(); ++r) fr[static_cast<Eigen::Index>(r)] = f(space.raw_points()[r]);
  const RVec load = space.expand_all().transpose() * space.raw_weights().cwiseProduct(fr);
  return MassSolver(mass_matrix(space)).solve(load);
}

std::function<double(const Point&)> coulomb_target(const Nuclei& nuclei, int dim) {
  return [nuclei, dim](const Point& x) {
    double v = 0.0;
    for (const auto& nu : nuclei.centers) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += (x[a] - nu.position[a]) * (x[a] - nu.position[a]);
      v -= nu.charge / std::max(std::sqrt(r2), 1e-8);
    }
    return v;
  };
}

void write_coordinate(std::ostream& os, const CSparse& a) {
  for (Eigen::Index i = 0; i < a.outerSize(); ++i)
    for (CSparse::InnerIterator it(a, i); it; ++it)
      os << fmt::format("{} {} {:.17g} {:.17g}\n", it.row(), it.col(), it.value().real(), it.value().imag());
}

}  // namespace mctdhf
