#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mctdhf/ci.hpp"
#include "mctdhf/common.hpp"
#include "mctdhf/fe_space.hpp"
#include "mctdhf/field.hpp"
#include "mctdhf/meanfield.hpp"
#include "mctdhf/mesh.hpp"
#include "mctdhf/operators.hpp"

namespace mctdhf {

struct ModelSpec {
  SimulationBox box;
  double coarse_size = 1.0;
  /// Kelly refinement toward the nuclear Coulomb potential; skipped when the
  /// threshold is infinite.
  RefinementPolicy refinement;
  int order = 4;
  Nuclei nuclei;
  NuclearQuadrature nuclear_quadrature = NuclearQuadrature::lobatto;
  std::optional<EcsConfig> ecs;
  int n_alpha = 1;
  int n_beta = 1;
  int n_orbitals = 1;
  MeanFieldOptions meanfield;
  double mass_tol = 1e-14;
  std::optional<Pulse> pulse;
  std::size_t max_ci_dimension = DeterminantSpace::kDefaultCap;
};

/// M orbitals over the free dofs and the CI vector.
struct WaveFunction {
  std::vector<CVec> orbitals;
  CVec ci;
};

/// Everything that stays fixed during a simulation: mesh, FE space,
/// one-body operators, mass solver, mean-field machinery, determinant space.
class Model {
 public:
  explicit Model(const ModelSpec& spec);
  /// Builds on an existing mesh (spec.box / refinement are ignored).
  Model(const ModelSpec& spec, std::shared_ptr<const Mesh> mesh);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const { return spec_; }
  const Mesh& mesh() const { return *mesh_; }
  const FeSpace& space() const { return *space_; }
  const OneBodyOperators& operators() const { return ops_; }
  const MassSolver& mass() const { return mass_; }
  const MeanField& mean_field() const { return *meanfield_; }
  const DeterminantSpace& determinants() const { return dets_; }
  int n_orbitals() const { return spec_.n_orbitals; }
  std::size_t n_free() const { return space_->n_free(); }
  /// True when the orbitals span the whole discrete space (orbital motion is void).
  bool orbitals_complete() const { return static_cast<std::size_t>(spec_.n_orbitals) == space_->n_free(); }

  Point vector_potential(double t) const;

  /// x^H M y.
  cplx inner(const CVec& x, const CVec& y) const;
  /// Stacked sum_p x_p^H M y_p.
  cplx stacked_inner(const CVec& x, const CVec& y) const;
  /// Raw-node values of each coordinate axis.
  const std::vector<RVec>& coordinates() const { return coords_; }

  /// Lowest n eigenvectors of (T + V, M) (Hermitian part), M-orthonormal.
  std::vector<CVec> core_orbitals(int n) const;
  /// Gaussians exp(-alpha |r - c|^2) times low-order monomials, orthonormalized.
  std::vector<CVec> gaussian_orbitals(int n, double alpha, const Point& center) const;
  /// Orbitals plus the lowest determinant (first alpha and beta strings).
  WaveFunction initial_state(std::vector<CVec> orbitals) const;

  /// phi <- phi S^{-1/2}, S = phi^H M phi.
  void lowdin(std::vector<CVec>& orbitals) const;
  /// Max |<phi_p|phi_q> - delta_pq|.
  double orthonormality_error(const std::vector<CVec>& orbitals) const;

 private:
  void build(std::shared_ptr<const Mesh> mesh);

  ModelSpec spec_;
  std::shared_ptr<const Mesh> mesh_;
  std::unique_ptr<FeSpace> space_;
  OneBodyOperators ops_;
  MassSolver mass_;
  std::unique_ptr<MeanField> meanfield_;
  DeterminantSpace dets_;
  std::vector<RVec> coords_;
};

Mesh build_mesh(const ModelSpec& spec);

CVec stack(const std::vector<CVec>& orbitals);
std::vector<CVec> unstack(const CVec& stacked, int n_orbitals);

}  // namespace mctdhf
