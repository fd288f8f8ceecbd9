#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <random>

#include <doctest.h>

#include "mctdhf/ci.hpp"
#include "mctdhf/meanfield.hpp"
#include "mctdhf/operators.hpp"

using namespace mctdhf;

namespace {

// Integrals with all physical symmetries from random orbitals on a grid and a
// real symmetric kernel.
OrbitalIntegrals random_integrals(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  const int k = 9;
  CMat phi(k, n);
  for (int i = 0; i < k; ++i)
    for (int p = 0; p < n; ++p) phi(i, p) = cplx(g(gen), g(gen));
  RMat kern(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) kern(i, j) = 1.0 / std::sqrt((i - j) * (i - j) + 1.0);
  OrbitalIntegrals ints;
  ints.n = n;
  CMat h(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) h(p, q) = cplx(g(gen), g(gen));
  ints.h = 0.5 * (h + h.adjoint());
  ints.g.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < n; ++s)
        for (int r = 0; r < n; ++r) {
          cplx v = 0.0;
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
              v += std::conj(phi(i, p)) * phi(i, s) * kern(i, j) * std::conj(phi(j, q)) * phi(j, r);
          ints.g_at(p, q, s, r) = v;
        }
  return ints;
}

// Second quantization on spin-orbital bit masks (alpha 0..n-1, beta n..2n-1).
int apply_annihilate(std::uint64_t& d, int o) {
  if (!((d >> o) & 1)) return 0;
  const int below = std::popcount(d & ((1ull << o) - 1));
  d &= ~(1ull << o);
  return below % 2 ? -1 : 1;
}
int apply_create(std::uint64_t& d, int o) {
  if ((d >> o) & 1) return 0;
  const int below = std::popcount(d & ((1ull << o) - 1));
  d |= 1ull << o;
  return below % 2 ? -1 : 1;
}

CMat brute_force_hamiltonian(const DeterminantSpace& space, const OrbitalIntegrals& ints) {
  const int n = ints.n;
  const int na = space.alpha().size(), nb = space.beta().size();
  std::map<std::uint64_t, int> index;
  std::vector<std::uint64_t> dets;
  for (int ia = 0; ia < na; ++ia)
    for (int ib = 0; ib < nb; ++ib) {
      const std::uint64_t d = space.alpha().string(ia) | (space.beta().string(ib) << n);
      index[d] = static_cast<int>(dets.size());
      dets.push_back(d);
    }
  const int dim = static_cast<int>(dets.size());
  CMat h = CMat::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int sp = 0; sp < 2; ++sp)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          std::uint64_t d = dets[static_cast<std::size_t>(j)];
          int sg = apply_annihilate(d, q + sp * n);
          if (!sg) continue;
          sg *= apply_create(d, p + sp * n);
          if (!sg) continue;
          h(index.at(d), j) += static_cast<double>(sg) * ints.h(p, q);
        }
    // 1/2 sum (pq|rs) a+_p s a+_r t a_s t a_q s, (pq|rs) = g(p, r, q, s)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
              for (int s = 0; s < n; ++s) {
                std::uint64_t d = dets[static_cast<std::size_t>(j)];
                int sg = apply_annihilate(d, q + s1 * n);
                if (!sg) continue;
                sg *= apply_annihilate(d, s + s2 * n);
                if (!sg) continue;
                sg *= apply_create(d, r + s2 * n);
                if (!sg) continue;
                sg *= apply_create(d, p + s1 * n);
                if (!sg) continue;
                h(index.at(d), j) += 0.5 * static_cast<double>(sg) * ints.g_at(p, r, q, s);
              }
  }
  return h;
}

}  // namespace

TEST_CASE("string spaces") {
  const StringSpace s(2, 5);
  CHECK(s.size() == 10);
  for (int i = 0; i < s.size(); ++i) {
    CHECK(s.index(s.string(i)) == i);
    CHECK(s.excitations(i).size() == 2u + 2u * 3u);
    if (i > 0) CHECK(s.string(i) != s.string(i - 1));
  }
  CHECK(s.string(0) == 0b00011u);
  CHECK(DeterminantSpace::enumerate(2, 1, 4).dimension() == 24u);
  CHECK_THROWS_AS(DeterminantSpace::enumerate(5, 5, 20, 1000), Overflow);
  CHECK(DeterminantSpace::enumerate(0, 1, 3).dimension() == 3u);
}

TEST_CASE("sigma and the dense Hamiltonian match brute-force second quantization") {
  for (auto [na, nb, n] : std::vector<std::array<int, 3>>{{1, 1, 3}, {2, 1, 4}, {2, 2, 4}, {3, 1, 4}, {0, 2, 3}}) {
    const auto space = DeterminantSpace::enumerate(na, nb, n);
    const auto ints = random_integrals(n, 11u + static_cast<unsigned>(na * 7 + nb * 3 + n));
    const CMat oracle = brute_force_hamiltonian(space, ints);
    const CiHamiltonian hci(space, ints);
    const CMat dense = hci.dense();
    CHECK((dense - oracle).norm() < 1e-10 * oracle.norm());
    CHECK((dense - dense.adjoint()).norm() < 1e-10 * dense.norm());
    const CVec c = CVec::Random(static_cast<Eigen::Index>(space.dimension()));
    CHECK((sigma(space, ints, c) - oracle * c).norm() < 1e-10 * (oracle * c).norm());
    CHECK((hci.apply(c) - oracle * c).norm() < 1e-10 * (oracle * c).norm());
  }
}

TEST_CASE("density matrices contract to the energy") {
  const int na = 2, nb = 2, n = 4;
  const auto space = DeterminantSpace::enumerate(na, nb, n);
  const auto ints = random_integrals(n, 5);
  CVec c = CVec::Random(static_cast<Eigen::Index>(space.dimension()));
  c.normalize();
  const CMat d = rdm1(space, c);
  const Rdm2 p = rdm2(space, c);
  CHECK(std::abs(d.trace() - cplx(na + nb)) < 1e-12);
  CHECK((d - d.adjoint()).norm() < 1e-12);
  cplx tr2 = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) tr2 += p.at(a, b, a, b);
  CHECK(std::abs(tr2 - cplx((na + nb) * (na + nb - 1))) < 1e-12);
  const CMat h = brute_force_hamiltonian(space, ints);
  const cplx e = c.dot(h * c);
  CHECK(std::abs(energy_from_rdms(d, p, ints) - e) < 1e-11);

  // D(p, q) = <a+_q a_p> by direct construction
  OrbitalIntegrals one;
  one.n = n;
  one.g.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      one.h = CMat::Zero(n, n);
      one.h(b, a) = 1.0;  // operator a+_b a_a
      const CMat op = brute_force_hamiltonian(space, one);
      CHECK(std::abs(c.dot(op * c) - d(a, b)) < 1e-12);
    }
}

TEST_CASE("integrals from a mean-field table agree with nodal double quadrature") {
  SimulationBox b;
  b.dim = 1;
  b.lo[0] = -5.0;
  b.hi[0] = 5.0;
  auto mesh = std::make_shared<const Mesh>(Mesh::build_uniform(b, 2.5));
  const FeSpace s = FeSpace::build(mesh, 4);
  const MeanField mf(s, MeanFieldOptions{});
  Nuclei nuc;
  nuc.centers.push_back({2.0, {0.0, 0.0, 0.0}});
  nuc.softening = 1.0;
  const auto ops = assemble_one_body(s, nuc);
  const int n = 3;
  std::vector<CVec> orb;
  for (int k = 0; k < n; ++k) orb.push_back(CVec::Random(static_cast<Eigen::Index>(s.n_free())));
  const auto table = mf.build_table(orb);
  const CSparse h1 = ops.kinetic + ops.potential;
  const auto ints = compute_integrals(s, orb, h1, table);

  std::vector<CVec> raw;
  for (const auto& o : orb) raw.push_back(s.expand_free() * o);
  const RVec& w = s.raw_weights();
  const auto& x = s.raw_points();
  const Eigen::Index nr = w.size();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      CHECK(std::abs(ints.h(p, q) - orb[static_cast<std::size_t>(p)].dot(h1 * orb[static_cast<std::size_t>(q)])) < 1e-10);
      for (int ss = 0; ss < n; ++ss)
        for (int r = 0; r < n; ++r) {
          cplx v = 0.0;
          for (Eigen::Index i = 0; i < nr; ++i)
            for (Eigen::Index j = 0; j < nr; ++j) {
              const double dx = x[static_cast<std::size_t>(i)][0] - x[static_cast<std::size_t>(j)][0];
              v += w[i] * w[j] * std::conj(raw[static_cast<std::size_t>(p)][i]) * raw[static_cast<std::size_t>(ss)][i] /
                   std::sqrt(dx * dx + 1.0) * std::conj(raw[static_cast<std::size_t>(q)][j]) * raw[static_cast<std::size_t>(r)][j];
            }
          CHECK(std::abs(ints.g_at(p, q, ss, r) - v) < 1e-10 * std::max(1.0, std::abs(v)));
        }
    }
}
