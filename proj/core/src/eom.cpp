#include "mctdhf/eom.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/parallel.hpp"

namespace mctdhf {

FrozenCoupling FrozenCoupling::freeze(const Model& model, const WaveFunction& wf, double t, const EomOptions& opts) {
  FrozenCoupling fc;
  fc.model_ = &model;
  fc.t_ = t;
  fc.a_ = model.vector_potential(t);
  fc.orbitals_ = wf.orbitals;
  fc.ci_ = wf.ci;
  const int m = model.n_orbitals();
  const DeterminantSpace& dets = model.determinants();

  fc.d_ = rdm1(dets, wf.ci);
  fc.p_ = rdm2(dets, wf.ci);
  const double c2 = wf.ci.squaredNorm();
  if (!(c2 > 0.0)) throw SingularDensity("CI vector has zero norm");

  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (fc.d_ + fc.d_.adjoint()));
  RVec inv = RVec::Zero(m);
  for (int k = 0; k < m; ++k) {
    if (es.eigenvalues()[k] > opts.dinv_cutoff * c2)
      inv[k] = 1.0 / es.eigenvalues()[k];
    else
      ++fc.dropped_;
  }
  if (fc.dropped_ == m) throw SingularDensity("one-body density has no eigenvalue above the cutoff");
  if (fc.dropped_ > 0) spdlog::trace("D pseudo-inverse dropped {} of {} modes", fc.dropped_, m);
  fc.dinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();

  fc.h1_ = model.operators().hamiltonian(fc.a_);
  fc.table_ = model.mean_field().build_table(wf.orbitals);
  fc.ints_ = compute_integrals(model.space(), wf.orbitals, fc.h1_, fc.table_);
  fc.hci_ = std::make_shared<CiHamiltonian>(dets, fc.ints_);
  fc.energy_ = energy_from_rdms(fc.d_, fc.p_, fc.ints_) / c2;

  if (!model.orbitals_complete()) {
    // U_pq = sum_rs Lambda[p][q][r][s] W^r_s with
    // Lambda[p][q][r][s] = sum_o Dinv(o, p) P^{qs}_{or}.
    const auto nr = static_cast<Eigen::Index>(model.space().n_raw());
    fc.u_.assign(static_cast<std::size_t>(m * m), CVec::Zero(nr));
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        CVec& u = fc.u_[static_cast<std::size_t>(p * m + q)];
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s) {
            cplx lam = 0.0;
            for (int o = 0; o < m; ++o) lam += fc.dinv_(o, p) * fc.p_.at(q, s, o, r);
            if (std::abs(lam) > 0.0) u += lam * fc.table_.at(r, s);
          }
      }
  }
  fc.lambda_ = CMat::Zero(m, m);
  if (opts.multiplier_shift && !model.orbitals_complete()) {
    const std::vector<CVec> y = fc.weak_rhs(stack(wf.orbitals));
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        fc.lambda_(q, p) = parallel::dot(wf.orbitals[static_cast<std::size_t>(q)], y[static_cast<std::size_t>(p)]);
  }
  return fc;
}

std::vector<CVec> FrozenCoupling::weak_rhs(const CVec& in) const {
  const Model& model = *model_;
  const FeSpace& space = model.space();
  const int m = model.n_orbitals();
  const auto nf = static_cast<Eigen::Index>(model.n_free());
  const RSparse& e = space.expand_free();
  const RVec& w = space.raw_weights();
  std::vector<CVec> raw(static_cast<std::size_t>(m));
  for (int q = 0; q < m; ++q) raw[static_cast<std::size_t>(q)] = e * in.segment(q * nf, nf);

  std::vector<CVec> y(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static) if (m > 1)
  for (int p = 0; p < m; ++p) {
    CVec yp(nf);
    parallel::multiply(h1_, CVec(in.segment(p * nf, nf)), yp);
    CVec acc = CVec::Zero(raw[0].size());
    for (int q = 0; q < m; ++q) acc += u_[static_cast<std::size_t>(p * m + q)].cwiseProduct(raw[static_cast<std::size_t>(q)]);
    yp += e.transpose() * w.cwiseProduct(acc).eval();
    y[static_cast<std::size_t>(p)] = std::move(yp);
  }
  return y;
}

void FrozenCoupling::apply_G(const CVec& in, CVec& out) const {
  const Model& model = *model_;
  const int m = model.n_orbitals();
  const auto nf = static_cast<Eigen::Index>(model.n_free());
  out.resize(in.size());
  if (model.orbitals_complete()) {
    out.setZero();
    return;
  }
  const std::vector<CVec> y = weak_rhs(in);
  // Q v_q for the multiplier shift
  std::vector<CVec> qv;
  if (lambda_.size() > 0 && lambda_.cwiseAbs().maxCoeff() > 0.0) {
    qv.resize(static_cast<std::size_t>(m));
    for (int q = 0; q < m; ++q) {
      CVec v = in.segment(q * nf, nf);
      for (int r = 0; r < m; ++r) {
        const CVec& cr = orbitals_[static_cast<std::size_t>(r)];
        v -= model.inner(cr, in.segment(q * nf, nf)) * cr;
      }
      qv[static_cast<std::size_t>(q)] = std::move(v);
    }
  }
  for (int p = 0; p < m; ++p) {
    const CVec& yp = y[static_cast<std::size_t>(p)];
    CVec gp = model.mass().solve(yp);
    for (int q = 0; q < m; ++q) {
      const CVec& cq = orbitals_[static_cast<std::size_t>(q)];
      gp -= parallel::dot(cq, yp) * cq;
    }
    for (std::size_t q = 0; q < qv.size(); ++q) gp -= lambda_(static_cast<Eigen::Index>(q), p) * qv[q];
    out.segment(p * nf, nf) = gp;
  }
}

CVec FrozenCoupling::orbital_rhs(const CVec& stacked) const {
  CVec g;
  apply_G(stacked, g);
  return -kI * g;
}

CVec FrozenCoupling::ci_rhs(const CVec& c) const { return -kI * hci_->apply(c); }

}  // namespace mctdhf
