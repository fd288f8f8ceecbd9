#include "mctdhf/ci.hpp"

#include <bit>
#include <functional>

#include <fmt/format.h>

namespace mctdhf {

namespace {

int popcount_below(std::uint64_t s, int orb) {
  const std::uint64_t mask = (orb == 0) ? 0 : ((std::uint64_t{1} << orb) - 1);
  return std::popcount(s & mask);
}

}  // namespace

StringSpace::StringSpace(int n_electrons, int n_orbitals) : n_el_(n_electrons), n_orb_(n_orbitals) {
  if (n_orbitals < 1 || n_orbitals > 63) throw ConfigError(fmt::format("orbital count {} not in 1..63", n_orbitals));
  if (n_electrons < 0 || n_electrons > n_orbitals)
    throw ConfigError(fmt::format("{} electrons do not fit into {} orbitals", n_electrons, n_orbitals));
  std::vector<int> occ(static_cast<std::size_t>(n_electrons));
  std::function<void(int, int)> gen = [&](int pos, int start) {
    if (pos == n_electrons) {
      std::uint64_t s = 0;
      for (int o : occ) s |= std::uint64_t{1} << o;
      strings_.push_back(s);
      return;
    }
    for (int o = start; o <= n_orbitals - (n_electrons - pos); ++o) {
      occ[static_cast<std::size_t>(pos)] = o;
      gen(pos + 1, o + 1);
    }
  };
  gen(0, 0);
  for (std::size_t i = 0; i < strings_.size(); ++i) lookup_.emplace(strings_[i], static_cast<int>(i));

  exc_.resize(strings_.size());
  for (std::size_t i = 0; i < strings_.size(); ++i) {
    const std::uint64_t s = strings_[i];
    for (int o = 0; o < n_orbitals; ++o) {
      if (!((s >> o) & 1)) continue;
      const std::uint64_t t = s & ~(std::uint64_t{1} << o);
      const int s1 = popcount_below(s, o);
      for (int v = 0; v < n_orbitals; ++v) {
        if ((t >> v) & 1) continue;
        const std::uint64_t u = t | (std::uint64_t{1} << v);
        const int s2 = popcount_below(t, v);
        exc_[i].push_back({lookup_.at(u), v, o, ((s1 + s2) % 2) ? -1 : 1});
      }
    }
  }
}

int StringSpace::index(std::uint64_t s) const {
  auto it = lookup_.find(s);
  return it == lookup_.end() ? -1 : it->second;
}

DeterminantSpace DeterminantSpace::enumerate(int n_alpha, int n_beta, int n_orbitals, std::size_t max_dimension) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  if (n_alpha < 0 || n_beta < 0 || n_alpha > n_orbitals || n_beta > n_orbitals)
    throw ConfigError(fmt::format("({}, {}) electrons do not fit into {} orbitals", n_alpha, n_beta, n_orbitals));
  const double dim = binom(n_orbitals, n_alpha) * binom(n_orbitals, n_beta);
  if (dim > static_cast<double>(max_dimension))
    throw Overflow(fmt::format("determinant space dimension {:.0f} exceeds cap {}", dim, max_dimension));
  DeterminantSpace d;
  d.alpha_ = StringSpace(n_alpha, n_orbitals);
  d.beta_ = StringSpace(n_beta, n_orbitals);
  return d;
}

OrbitalIntegrals compute_integrals(const FeSpace& space, const std::vector<CVec>& orbitals, const CSparse& h1,
                                   const MeanFieldTable& table) {
  const int m = static_cast<int>(orbitals.size());
  OrbitalIntegrals ints;
  ints.n = m;
  const auto nf = static_cast<Eigen::Index>(space.n_free());
  CMat phi(nf, m);
  for (int p = 0; p < m; ++p) phi.col(p) = orbitals[static_cast<std::size_t>(p)];
  const CMat hphi = h1 * phi;
  ints.h = phi.adjoint() * hphi;

  const CMat u = space.expand_free() * phi;
  const RVec& w = space.raw_weights();
  const auto nr = u.rows();
  CMat a(nr, m * m), b(nr, m * m);
  for (int p = 0; p < m; ++p)
    for (int s = 0; s < m; ++s) a.col(p * m + s) = w.cwiseProduct(u.col(p).conjugate()).cwiseProduct(u.col(s));
  for (int q = 0; q < m; ++q)
    for (int r = 0; r < m; ++r) b.col(q * m + r) = table.at(q, r);
  const CMat g = a.transpose() * b;
  ints.g.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int s = 0; s < m; ++s)
        for (int r = 0; r < m; ++r)
          ints.g_at(p, q, s, r) = 0.5 * (g(p * m + s, q * m + r) + g(q * m + r, p * m + s));
  return ints;
}

CiHamiltonian::CiHamiltonian(const DeterminantSpace& space, const OrbitalIntegrals& ints)
    : space_(&space), n_(ints.n) {
  const int n = n_;
  if (n != space.n_orbitals()) throw Error("integral and determinant space orbital counts differ");
  eri_.resize(static_cast<std::size_t>(n) * n * n * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) eri_[static_cast<std::size_t>(((p * n + q) * n + r) * n + s)] = ints.g_at(p, r, q, s);
  auto eri = [&](int p, int q, int r, int s) { return eri_[static_cast<std::size_t>(((p * n + q) * n + r) * n + s)]; };

  CMat k = ints.h;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r) k(p, q) -= 0.5 * eri(p, r, r, q);

  auto build = [&](const StringSpace& ss) {
    CMat hs = CMat::Zero(ss.size(), ss.size());
    for (int j = 0; j < ss.size(); ++j)
      for (const auto& e1 : ss.excitations(j)) {
        hs(e1.target, j) += static_cast<double>(e1.sign) * k(e1.create, e1.annihilate);
        for (const auto& e2 : ss.excitations(e1.target))
          hs(e2.target, j) +=
              0.5 * static_cast<double>(e1.sign * e2.sign) * eri(e2.create, e2.annihilate, e1.create, e1.annihilate);
      }
    return hs;
  };
  h_alpha_ = build(space.alpha());
  h_beta_ = build(space.beta());
}

CVec CiHamiltonian::apply(const CVec& c) const {
  const StringSpace& sa = space_->alpha();
  const StringSpace& sb = space_->beta();
  const int na = sa.size(), nb = sb.size();
  const int n = n_;
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> cm(c.data(), na, nb);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out = h_alpha_ * cm;
  out.noalias() += cm * h_beta_.transpose();
  if (sa.n_electrons() > 0 && sb.n_electrons() > 0) {
    // <Ia|E_pq|Ja> = sign of E_qp |Ia> -> Ja, so walk excitations out of the target.
#pragma omp parallel for schedule(dynamic)
    for (int ia = 0; ia < na; ++ia) {
      for (const auto& ea : sa.excitations(ia)) {
        const int ja = ea.target;
        const cplx* eri_pq = eri_.data() + static_cast<std::size_t>((ea.annihilate * n + ea.create) * n * n);
        for (int ib = 0; ib < nb; ++ib) {
          cplx acc = 0.0;
          for (const auto& eb : sb.excitations(ib))
            acc += static_cast<double>(eb.sign) * eri_pq[eb.annihilate * n + eb.create] * cm(ja, eb.target);
          out(ia, ib) += static_cast<double>(ea.sign) * acc;
        }
      }
    }
  }
  return Eigen::Map<const CVec>(out.data(), c.size());
}

CMat CiHamiltonian::dense() const {
  const auto dim = static_cast<Eigen::Index>(space_->dimension());
  CMat h(dim, dim);
  CVec e = CVec::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    h.col(j) = apply(e);
    e[j] = 0.0;
  }
  return h;
}

CVec sigma(const DeterminantSpace& space, const OrbitalIntegrals& ints, const CVec& c) {
  return CiHamiltonian(space, ints).apply(c);
}

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// S_a(I, J) = sum_b conj C(I, b) C(J, b); S_b(I, J) = sum_a conj C(a, I) C(a, J).
void overlap_blocks(const DeterminantSpace& space, const CVec& c, CMat& sa, CMat& sb) {
  const int na = space.alpha().size(), nb = space.beta().size();
  Eigen::Map<const RowMat> cm(c.data(), na, nb);
  sa = cm.conjugate() * cm.transpose();
  sb = cm.adjoint() * cm;
}

}  // namespace

CMat rdm1(const DeterminantSpace& space, const CVec& c) {
  const int n = space.n_orbitals();
  CMat sa, sb;
  overlap_blocks(space, c, sa, sb);
  CMat d = CMat::Zero(n, n);
  auto accumulate = [&](const StringSpace& ss, const CMat& s) {
    for (int j = 0; j < ss.size(); ++j)
      for (const auto& e : ss.excitations(j)) d(e.annihilate, e.create) += static_cast<double>(e.sign) * s(e.target, j);
  };
  accumulate(space.alpha(), sa);
  accumulate(space.beta(), sb);
  return d;
}

Rdm2 rdm2(const DeterminantSpace& space, const CVec& c) {
  const int n = space.n_orbitals();
  const std::size_t n4 = static_cast<std::size_t>(n) * n * n * n;
  auto idx = [n](int a, int b, int cc, int d) { return static_cast<std::size_t>(((a * n + b) * n + cc) * n + d); };
  const StringSpace& sa_s = space.alpha();
  const StringSpace& sb_s = space.beta();
  const int na = sa_s.size(), nb = sb_s.size();

  // term(a, d, b, c) = <E_ad E_bc>
  std::vector<cplx> term(n4, 0.0);
  CMat sa, sb;
  overlap_blocks(space, c, sa, sb);
  auto same_spin = [&](const StringSpace& ss, const CMat& s) {
    for (int j = 0; j < ss.size(); ++j)
      for (const auto& e1 : ss.excitations(j))
        for (const auto& e2 : ss.excitations(e1.target))
          term[idx(e2.create, e2.annihilate, e1.create, e1.annihilate)] +=
              static_cast<double>(e1.sign * e2.sign) * s(e2.target, j);
  };
  same_spin(sa_s, sa);
  same_spin(sb_s, sb);

  if (sa_s.n_electrons() > 0 && sb_s.n_electrons() > 0) {
    Eigen::Map<const RowMat> cm(c.data(), na, nb);
    std::vector<cplx> x(n4, 0.0);  // x(a, d, b, c) = <E^a_ad E^b_bc>
    for (int ja = 0; ja < na; ++ja)
      for (const auto& ea : sa_s.excitations(ja))
        for (int jb = 0; jb < nb; ++jb) {
          const cplx cj = cm(ja, jb);
          if (cj == cplx(0.0, 0.0)) continue;
          for (const auto& eb : sb_s.excitations(jb))
            x[idx(ea.create, ea.annihilate, eb.create, eb.annihilate)] +=
                static_cast<double>(ea.sign * eb.sign) * std::conj(cm(ea.target, eb.target)) * cj;
        }
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d)
        for (int b = 0; b < n; ++b)
          for (int cc = 0; cc < n; ++cc) term[idx(a, d, b, cc)] += x[idx(a, d, b, cc)] + x[idx(b, cc, a, d)];
  }

  const CMat d1 = rdm1(space, c);  // <E_ac> = D(c, a)
  Rdm2 out;
  out.n = n;
  out.p.assign(n4, 0.0);
  // Gamma(a, b, c, d) = <E_ad E_bc> - delta_bd <E_ac>;  P^{pq}_{sr} = Gamma(s, r, q, p).
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc)
        for (int d = 0; d < n; ++d) {
          cplx gm = term[idx(a, d, b, cc)];
          if (b == d) gm -= d1(cc, a);
          out.p[idx(d, cc, a, b)] = gm;
        }
  return out;
}

cplx energy_from_rdms(const CMat& d, const Rdm2& p, const OrbitalIntegrals& ints) {
  const int n = ints.n;
  cplx e = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) e += d(a, b) * ints.h(b, a);
  cplx e2 = 0.0;
  for (int pp = 0; pp < n; ++pp)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < n; ++s)
        for (int r = 0; r < n; ++r) e2 += p.at(pp, q, s, r) * ints.g_at(s, r, pp, q);
  return e + 0.5 * e2;
}

}  // namespace mctdhf
