#pragma once

#include <vector>

#include "mctdhf/common.hpp"
#include "mctdhf/fe_space.hpp"

namespace mctdhf {

/// W[r][s] at the raw nodes: the potential generated by conj(phi_r) phi_s.
struct MeanFieldTable {
  int n_orbitals = 0;
  std::vector<CVec> w;

  const CVec& at(int r, int s) const { return w[static_cast<std::size_t>(r * n_orbitals + s)]; }
  CVec& at(int r, int s) { return w[static_cast<std::size_t>(r * n_orbitals + s)]; }
};

struct MeanFieldOptions {
  double poisson_tol = 1e-10;
  int poisson_max_iter = 0;  ///< 0: 10 * n_free + 100
  /// Soft-core parameter of the electron-electron kernel in 1D/2D.
  double softening = 1.0;
  /// Largest raw-node count for which the 1D/2D kernel is kept as a dense matrix.
  std::size_t dense_kernel_limit = 4096;
};

/// Electron-electron mean fields.
///
/// In 3D the potential solves -lap W = 4 pi rho with Dirichlet data from the
/// direct Coulomb integral over the density; in 1D/2D it is the direct
/// quadrature of the soft-core kernel 1/sqrt(|x-x'|^2 + eps). Orbitals are
/// free-dof coefficient vectors; densities and potentials live on raw nodes.
class MeanField {
 public:
  MeanField() = default;
  MeanField(const FeSpace& space, MeanFieldOptions opts);

  /// conj(phi_r) * phi_s at every raw node.
  CVec pair_density(const CVec& phi_r, const CVec& phi_s) const;

  /// Direct Coulomb integral of the raw-node density at every boundary master.
  CVec boundary_dirichlet(const CVec& density) const;

  /// Poisson solve with the given boundary values; returns raw-node W.
  CVec solve_poisson(const CVec& density, const CVec& dirichlet) const;

  /// Dimension-appropriate potential of a raw-node density.
  CVec potential(const CVec& density) const;

  MeanFieldTable build_table(const std::vector<CVec>& orbitals) const;

  int last_iterations() const { return last_iterations_; }

 private:
  CVec poisson_impl(const CVec& density, const CVec& dirichlet, int& iterations) const;
  CVec potential_impl(const CVec& density, int& iterations) const;

  const FeSpace* space_ = nullptr;
  MeanFieldOptions opts_;
  RSparse k_ff_, k_fb_;
  RVec inv_diag_;
  RMat kernel_;  ///< dense soft-core kernel (1D/2D) when small enough
  mutable int last_iterations_ = 0;
};

}  // namespace mctdhf
