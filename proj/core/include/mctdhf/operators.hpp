#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "mctdhf/common.hpp"
#include "mctdhf/fe_space.hpp"

namespace mctdhf {

struct Nucleus {
  double charge = 1.0;
  Point position{0.0, 0.0, 0.0};
};

/// Point charges with an optional soft-core parameter eps (bohr^2):
/// V(r) = -sum_a Z_a / sqrt(|r - r_a|^2 + eps).
struct Nuclei {
  std::vector<Nucleus> centers;
  double softening = 0.0;

  /// Potential at a complex-scaled coordinate (principal square root).
  cplx potential(const std::array<cplx, 3>& z, int dim) const;
  double potential(const Point& x, int dim) const;
};

/// How the nuclear attraction is integrated.
///  lobatto: collocation at the basis nodes (diagonal V).
///  refined: for d >= 2, cells near a nucleus get a full local V matrix from
///           composite Gauss-Legendre quadrature subdivided toward the nucleus;
///           everything else stays collocated.
enum class NuclearQuadrature { lobatto, refined };

/// Operators on the free (orbital) dofs. All are condensed through the
/// hanging-node constraints. With ECS active they are complex symmetric and
/// expressed in the rescaled basis in which the mass matrix stays real.
struct OneBodyOperators {
  RSparse mass;
  CSparse kinetic;
  CSparse potential;
  std::array<CSparse, 3> gradient;  ///< int b_k d_a b_l

  /// T + V - i A . grad.
  CSparse hamiltonian(const Point& vector_potential) const;
};

/// Mass matrix over all masters (free, then boundary).
RSparse mass_matrix(const FeSpace& space);

OneBodyOperators assemble_one_body(const FeSpace& space, const Nuclei& nuclei,
                                   NuclearQuadrature quad = NuclearQuadrature::lobatto);

/// Unscaled stiffness int grad b_k . grad b_l over all masters.
RSparse laplace_matrix(const FeSpace& space);

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for a real SPD matrix and a
/// complex right-hand side; x holds the initial guess on entry. Stops when the
/// recursive residual drops below tol * |b| or after max_iter iterations.
CgReport conjugate_gradient(const RSparse& a, const RVec& inv_diag, const CVec& b, CVec& x,
                            double tol, int max_iter);

/// Solves M x = b for a real symmetric positive definite M: exact division if
/// M is diagonal, Jacobi-preconditioned conjugate gradients otherwise.
class MassSolver {
 public:
  MassSolver() = default;
  explicit MassSolver(RSparse m, double tol = 1e-14, int max_iter = 0);

  bool is_diagonal() const { return diagonal_; }
  const RSparse& matrix() const { return m_; }

  CVec solve(const CVec& rhs) const;
  RVec solve(const RVec& rhs) const;

 private:
  RSparse m_;
  RVec inv_diag_;
  bool diagonal_ = false;
  double tol_ = 1e-14;
  int max_iter_ = 0;
};

/// M^{-1} (load vector of f) over all masters; nodal interpolation when the
/// mass matrix is diagonal.
RVec project(const FeSpace& space, const std::function<double(const Point&)>& f);

/// Kelly refinement target: the bare nuclear Coulomb potential with the
/// distance clamped at 1e-8 bohr.
std::function<double(const Point&)> coulomb_target(const Nuclei& nuclei, int dim);

/// Coordinate listing "row col re im", one nonzero per line.
void write_coordinate(std::ostream& os, const CSparse& a);

}  // namespace mctdhf
