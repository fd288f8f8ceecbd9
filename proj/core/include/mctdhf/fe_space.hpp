#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mctdhf/common.hpp"
#include "mctdhf/mesh.hpp"
#include "mctdhf/quadrature.hpp"

namespace mctdhf {

/// Exterior complex scaling: along axis a, coordinates with |x| > r0[a] are
/// mapped to +-r0 + exp(i theta) (x -+ r0). Axes with r0 = inf are unscaled.
struct EcsConfig {
  std::array<double, 3> r0{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  double theta = 0.0;

  bool active() const;
};

enum class NodeClass : unsigned char { free, boundary, slave };

/// A hanging node expressed through unconstrained nodes.
struct Constraint {
  int slave = -1;                               ///< raw node
  std::vector<std::pair<int, double>> masters;  ///< (raw node, coefficient)
};

/// Continuous Gauss-Lobatto Lagrange space on the leaves of a Mesh.
///
/// Every distinct nodal point is a "raw" node. Raw nodes split into free
/// masters, Dirichlet boundary masters and slaves (hanging nodes). Master
/// numbering puts all free nodes first, then boundary nodes. Raw values are
/// recovered from master coefficients through the expansion matrices, so a
/// raw-node operator A condenses to E^T A E.
class FeSpace {
 public:
  static FeSpace build(std::shared_ptr<const Mesh> mesh, int order,
                       const std::optional<EcsConfig>& ecs = std::nullopt);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int order() const { return order_; }
  int dim() const { return mesh_->dim(); }
  int nodes_per_cell() const { return per_cell_; }
  const QuadratureRule& rule() const { return rule_; }
  const LagrangeBasis& basis() const { return basis_; }
  /// S(j, k) = sum_m w_m L_j'(x_m) L_k'(x_m) on the reference interval.
  const std::vector<double>& reference_stiffness() const { return s1d_; }

  std::size_t n_raw() const { return points_.size(); }
  std::size_t n_free() const { return n_free_; }
  std::size_t n_boundary() const { return n_boundary_; }
  std::size_t n_masters() const { return n_free_ + n_boundary_; }
  std::size_t n_slaves() const { return constraints_.size(); }

  const std::vector<Point>& raw_points() const { return points_; }
  std::span<const int> cell_nodes(std::size_t leaf_pos) const;
  NodeClass node_class(int raw) const { return class_[static_cast<std::size_t>(raw)]; }
  /// Master index of a raw node, -1 for slaves.
  int master_of(int raw) const { return master_[static_cast<std::size_t>(raw)]; }
  /// Raw node of master m.
  int raw_of(int master) const { return raw_of_master_[static_cast<std::size_t>(master)]; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// Lumped Gauss-Lobatto weight per raw node in real coordinates.
  const RVec& raw_weights() const { return weights_; }
  /// Same with complex-scaled Jacobians.
  const CVec& raw_complex_weights() const { return cweights_; }
  /// Per raw node, sqrt(complex weight / real weight); 1 outside the ECS region.
  const CVec& ecs_node_scale() const { return node_scale_; }

  /// Expansion matrices: raw values = E * master coefficients.
  const RSparse& expand_free() const { return e_free_; }
  const RSparse& expand_boundary() const { return e_boundary_; }
  const RSparse& expand_all() const { return e_all_; }

  const EcsConfig& ecs() const { return ecs_; }
  /// Complex Jacobian factor of leaf `leaf_pos` along `axis`.
  cplx ecs_jacobian(std::size_t leaf_pos, int axis) const {
    return cell_jac_[leaf_pos * 3 + static_cast<std::size_t>(axis)];
  }
  /// Complex-scaled coordinate of a real point (no-op without ECS).
  std::array<cplx, 3> complex_coordinate(const Point& x) const;

  /// Evaluates the function with the given raw nodal values at x.
  template <class Vec>
  typename Vec::Scalar evaluate_raw(const Vec& raw, const Point& x) const;

  /// Per-axis Lagrange values of leaf `leaf_pos` at x: out[a*(p+1) + j].
  void local_values(std::size_t leaf_pos, const Point& x, double* out) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_ = 1;
  int per_cell_ = 2;
  QuadratureRule rule_;
  LagrangeBasis basis_;
  std::vector<double> s1d_;

  std::vector<Point> points_;
  std::vector<int> cell_nodes_;
  std::vector<NodeClass> class_;
  std::vector<int> master_;
  std::vector<int> raw_of_master_;
  std::vector<Constraint> constraints_;
  std::size_t n_free_ = 0;
  std::size_t n_boundary_ = 0;

  RVec weights_;
  CVec cweights_;
  CVec node_scale_;
  RSparse e_free_, e_boundary_, e_all_;

  EcsConfig ecs_;
  std::vector<cplx> cell_jac_;
};

template <class Vec>
typename Vec::Scalar FeSpace::evaluate_raw(const Vec& raw, const Point& x) const {
  using S = typename Vec::Scalar;
  const int leaf = mesh_->locate(x);
  if (leaf < 0) return S(0);
  const auto pos = static_cast<std::size_t>(mesh_->leaf_position(leaf));
  const int n = order_ + 1;
  double vals[3 * 16];
  local_values(pos, x, vals);
  const auto nodes = cell_nodes(pos);
  S sum(0);
  for (int k = 0; k < per_cell_; ++k) {
    double b = 1.0;
    int rem = k;
    for (int a = 0; a < dim(); ++a) {
      b *= vals[a * n + rem % n];
      rem /= n;
    }
    sum += b * raw[nodes[static_cast<std::size_t>(k)]];
  }
  return sum;
}

}  // namespace mctdhf
