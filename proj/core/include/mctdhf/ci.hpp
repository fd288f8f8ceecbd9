#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mctdhf/common.hpp"
#include "mctdhf/fe_space.hpp"
#include "mctdhf/meanfield.hpp"

namespace mctdhf {

/// E_{create,annihilate} |source> = sign |target>, string-wise.
struct Excitation {
  int target;
  int create;
  int annihilate;
  int sign;
};

/// Occupation strings of one spin. Strings are ordered lexicographically by
/// their sorted occupied-orbital lists.
class StringSpace {
 public:
  StringSpace() = default;
  StringSpace(int n_electrons, int n_orbitals);

  int n_electrons() const { return n_el_; }
  int n_orbitals() const { return n_orb_; }
  int size() const { return static_cast<int>(strings_.size()); }
  std::uint64_t string(int i) const { return strings_[static_cast<std::size_t>(i)]; }
  int index(std::uint64_t s) const;
  /// All single replacements (including o -> o) out of string i.
  const std::vector<Excitation>& excitations(int i) const { return exc_[static_cast<std::size_t>(i)]; }

 private:
  int n_el_ = 0;
  int n_orb_ = 0;
  std::vector<std::uint64_t> strings_;
  std::unordered_map<std::uint64_t, int> lookup_;
  std::vector<std::vector<Excitation>> exc_;
};

/// Full-CI determinant space; CI index = alpha_index * n_beta_strings + beta_index.
class DeterminantSpace {
 public:
  static constexpr std::size_t kDefaultCap = 20'000'000;

  static DeterminantSpace enumerate(int n_alpha, int n_beta, int n_orbitals,
                                    std::size_t max_dimension = kDefaultCap);

  int n_alpha() const { return alpha_.n_electrons(); }
  int n_beta() const { return beta_.n_electrons(); }
  int n_electrons() const { return n_alpha() + n_beta(); }
  int n_orbitals() const { return alpha_.n_orbitals(); }
  std::size_t dimension() const {
    return static_cast<std::size_t>(alpha_.size()) * static_cast<std::size_t>(beta_.size());
  }
  const StringSpace& alpha() const { return alpha_; }
  const StringSpace& beta() const { return beta_; }

 private:
  StringSpace alpha_, beta_;
};

/// Orbital-basis integrals.
///  h(p, q)          = <phi_p | H1 | phi_q>
///  g(p, q, s, r)    = g^{pq}_{sr} = int int phi_p*(1) phi_q*(2) phi_r(2) phi_s(1) / r12
///                   = <phi_p | W^q_r | phi_s>
/// In chemists' notation (ij|kl) = g(i, k, j, l).
struct OrbitalIntegrals {
  int n = 0;
  CMat h;
  std::vector<cplx> g;

  cplx& g_at(int p, int q, int s, int r) { return g[static_cast<std::size_t>(((p * n + q) * n + s) * n + r)]; }
  cplx g_at(int p, int q, int s, int r) const { return g[static_cast<std::size_t>(((p * n + q) * n + s) * n + r)]; }
};

/// h from an operator on free dofs; g from the mean-field table by nodal
/// quadrature, symmetrized as (g^{pq}_{sr} + g^{qp}_{rs}) / 2.
OrbitalIntegrals compute_integrals(const FeSpace& space, const std::vector<CVec>& orbitals,
                                   const CSparse& h1, const MeanFieldTable& table);

/// Precomputed string Hamiltonians for repeated sigma evaluations with fixed
/// integrals.
class CiHamiltonian {
 public:
  CiHamiltonian(const DeterminantSpace& space, const OrbitalIntegrals& ints);

  /// sigma = H C.
  CVec apply(const CVec& c) const;
  /// Dense matrix, for small spaces and tests.
  CMat dense() const;

 private:
  const DeterminantSpace* space_;
  int n_;
  std::vector<cplx> eri_;  ///< (pq|rs) at ((p*n+q)*n+r)*n+s
  CMat h_alpha_, h_beta_;
};

CVec sigma(const DeterminantSpace& space, const OrbitalIntegrals& ints, const CVec& c);

/// D(p, q) = D^p_q = sum_sigma <a+_{q sigma} a_{p sigma}>.
CMat rdm1(const DeterminantSpace& space, const CVec& c);

/// Two-body density P^{pq}_{sr} = sum <a+_{s} a+_{r} a_{q} a_{p}> stored at
/// index ((p*n+q)*n+s)*n+r.
struct Rdm2 {
  int n = 0;
  std::vector<cplx> p;
  cplx at(int p_, int q, int s, int r) const { return p[static_cast<std::size_t>(((p_ * n + q) * n + s) * n + r)]; }
};
Rdm2 rdm2(const DeterminantSpace& space, const CVec& c);

/// E = sum D^p_q h^q_p + 1/2 sum P^{pq}_{sr} g^{sr}_{pq}.
cplx energy_from_rdms(const CMat& d, const Rdm2& p, const OrbitalIntegrals& ints);

}  // namespace mctdhf
