#include "mctdhf/model.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/krylov.hpp"
#include "mctdhf/parallel.hpp"

namespace mctdhf {

Mesh build_mesh(const ModelSpec& spec) {
  Mesh mesh = Mesh::build_uniform(spec.box, spec.coarse_size);
  if (std::isfinite(spec.refinement.threshold) || spec.refinement.max_size < spec.coarse_size) {
    mesh = refine_adapt(std::move(mesh), coulomb_target(spec.nuclei, spec.box.dim), spec.refinement);
  }
  return mesh;
}

Model::Model(const ModelSpec& spec) : spec_(spec) { build(std::make_shared<const Mesh>(build_mesh(spec))); }

Model::Model(const ModelSpec& spec, std::shared_ptr<const Mesh> mesh) : spec_(spec) {
  spec_.box = mesh->box();
  build(std::move(mesh));
}

void Model::build(std::shared_ptr<const Mesh> mesh) {
  mesh_ = std::move(mesh);
  dets_ = DeterminantSpace::enumerate(spec_.n_alpha, spec_.n_beta, spec_.n_orbitals, spec_.max_ci_dimension);
  space_ = std::make_unique<FeSpace>(FeSpace::build(mesh_, spec_.order, spec_.ecs));
  if (static_cast<std::size_t>(spec_.n_orbitals) > space_->n_free())
    throw ConfigError(fmt::format("{} orbitals requested but the space has only {} free dofs", spec_.n_orbitals,
                                  space_->n_free()));
  ops_ = assemble_one_body(*space_, spec_.nuclei, spec_.nuclear_quadrature);
  mass_ = MassSolver(ops_.mass, spec_.mass_tol);
  meanfield_ = std::make_unique<MeanField>(*space_, spec_.meanfield);
  coords_.assign(3, RVec::Zero(static_cast<Eigen::Index>(space_->n_raw())));
  for (std::size_t r = 0; r < space_->n_raw(); ++r)
    for (int a = 0; a < 3; ++a) coords_[static_cast<std::size_t>(a)][static_cast<Eigen::Index>(r)] = space_->raw_points()[r][a];
  spdlog::info("model: {} leaves, {} free dofs, {} hanging, CI dimension {}", mesh_->n_leaves(), space_->n_free(),
               space_->n_slaves(), dets_.dimension());
}

Point Model::vector_potential(double t) const {
  if (!spec_.pulse) return {0.0, 0.0, 0.0};
  return spec_.pulse->vector_potential(t);
}

cplx Model::inner(const CVec& x, const CVec& y) const {
  CVec my(y.size());
  parallel::multiply(ops_.mass, y, my);
  return parallel::dot(x, my);
}

cplx Model::stacked_inner(const CVec& x, const CVec& y) const {
  const auto n = static_cast<Eigen::Index>(n_free());
  const Eigen::Index m = x.size() / n;
  cplx acc = 0.0;
  for (Eigen::Index p = 0; p < m; ++p) acc += inner(x.segment(p * n, n), y.segment(p * n, n));
  return acc;
}

void Model::lowdin(std::vector<CVec>& orbitals) const {
  const int m = static_cast<int>(orbitals.size());
  CMat s(m, m);
  for (int p = 0; p < m; ++p)
    for (int q = p; q < m; ++q) {
      s(p, q) = inner(orbitals[static_cast<std::size_t>(p)], orbitals[static_cast<std::size_t>(q)]);
      s(q, p) = std::conj(s(p, q));
    }
  Eigen::SelfAdjointEigenSolver<CMat> es(s);
  if (es.eigenvalues().minCoeff() <= 1e-14 * es.eigenvalues().maxCoeff())
    throw SingularDensity("orbital overlap matrix is singular");
  const CMat x = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                 es.eigenvectors().adjoint();
  std::vector<CVec> out(orbitals.size(), CVec::Zero(orbitals.front().size()));
  for (int q = 0; q < m; ++q)
    for (int p = 0; p < m; ++p) out[static_cast<std::size_t>(q)] += x(p, q) * orbitals[static_cast<std::size_t>(p)];
  orbitals = std::move(out);
}

double Model::orthonormality_error(const std::vector<CVec>& orbitals) const {
  double err = 0.0;
  for (std::size_t p = 0; p < orbitals.size(); ++p)
    for (std::size_t q = 0; q < orbitals.size(); ++q) {
      const cplx s = inner(orbitals[p], orbitals[q]);
      err = std::max(err, std::abs(s - (p == q ? 1.0 : 0.0)));
    }
  return err;
}

std::vector<CVec> Model::core_orbitals(int n) const {
  const auto nf = static_cast<Eigen::Index>(n_free());
  const CSparse h = ops_.kinetic + ops_.potential;
  std::vector<CVec> out;
  if (nf <= 4000) {
    CMat hd = CMat(h);
    hd = 0.5 * (hd + hd.adjoint()).eval();
    const RMat md = RMat(ops_.mass);
    // reduce to standard form with the Cholesky factor of M
    Eigen::LLT<RMat> llt(md);
    const RMat l = llt.matrixL();
    const CMat linv = l.triangularView<Eigen::Lower>().solve(RMat::Identity(nf, nf)).cast<cplx>();
    const CMat a = linv * hd * linv.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> se(0.5 * (a + a.adjoint()));
    const CMat lt_inv = linv.adjoint();
    for (int k = 0; k < n; ++k) out.push_back(lt_inv * se.eigenvectors().col(k));
  } else {
    // Successive Lanczos with deflation against the converged vectors.
    for (int k = 0; k < n; ++k) {
      const auto project_out = [&](CVec& v) {
        for (const auto& o : out) v -= inner(o, v) * o;
      };
      LinearMap op = [&](const CVec& x, CVec& y) {
        CVec xx = x;
        project_out(xx);
        y = mass_.solve(CVec(h * xx));
        project_out(y);
      };
      InnerProduct ip = [&](const CVec& a, const CVec& b) { return inner(a, b); };
      CVec start = CVec::Ones(nf);
      for (Eigen::Index i = 0; i < nf; ++i) start[i] += 0.1 * std::sin(1.0 + i);
      project_out(start);
      auto ep = lanczos_lowest(op, start, &ip, 1e-6);
      out.push_back(ep.vector);
    }
  }
  lowdin(out);
  return out;
}

std::vector<CVec> Model::gaussian_orbitals(int n, double alpha, const Point& center) const {
  const int d = space_->dim();
  std::vector<std::array<int, 3>> powers{{0, 0, 0}};
  for (int deg = 1; static_cast<int>(powers.size()) < n; ++deg)
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; b <= deg - a; ++b) {
        const int c = deg - a - b;
        if ((d < 2 && b > 0) || (d < 3 && c > 0)) continue;
        powers.push_back({a, b, c});
      }
  std::vector<CVec> out;
  const auto nf = static_cast<Eigen::Index>(n_free());
  for (int k = 0; k < n; ++k) {
    CVec v(nf);
    const auto& pw = powers[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < nf; ++i) {
      const Point& x = space_->raw_points()[static_cast<std::size_t>(space_->raw_of(static_cast<int>(i)))];
      double r2 = 0.0, poly = 1.0;
      for (int a = 0; a < d; ++a) {
        const double dx = x[a] - center[a];
        r2 += dx * dx;
        poly *= std::pow(dx, pw[static_cast<std::size_t>(a)]);
      }
      v[i] = poly * std::exp(-alpha * r2);
    }
    out.push_back(v);
  }
  lowdin(out);
  return out;
}

WaveFunction Model::initial_state(std::vector<CVec> orbitals) const {
  WaveFunction wf;
  wf.orbitals = std::move(orbitals);
  wf.ci = CVec::Zero(static_cast<Eigen::Index>(dets_.dimension()));
  wf.ci[0] = 1.0;
  return wf;
}

CVec stack(const std::vector<CVec>& orbitals) {
  const Eigen::Index n = orbitals.front().size();
  CVec out(n * static_cast<Eigen::Index>(orbitals.size()));
  for (std::size_t p = 0; p < orbitals.size(); ++p) out.segment(static_cast<Eigen::Index>(p) * n, n) = orbitals[p];
  return out;
}

std::vector<CVec> unstack(const CVec& stacked, int n_orbitals) {
  const Eigen::Index n = stacked.size() / n_orbitals;
  std::vector<CVec> out;
  for (int p = 0; p < n_orbitals; ++p) out.push_back(stacked.segment(p * n, n));
  return out;
}

}  // namespace mctdhf
