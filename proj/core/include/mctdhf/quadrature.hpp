#pragma once

#include <vector>

namespace mctdhf {

/// One-dimensional quadrature rule on the reference interval [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Lobatto rule with `n_points` >= 2 points (endpoints included).
/// Exact for polynomials of degree <= 2 n_points - 3.
QuadratureRule gauss_lobatto(int n_points);

/// Gauss-Legendre rule with `n_points` >= 1 interior points.
QuadratureRule gauss_legendre(int n_points);

/// Lagrange interpolation polynomials through a fixed set of nodes, evaluated
/// in barycentric form.
class LagrangeBasis {
 public:
  LagrangeBasis() = default;
  explicit LagrangeBasis(std::vector<double> nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Values of all basis polynomials at x.
  void values(double x, double* out) const;
  /// First derivatives of all basis polynomials at x.
  void derivatives(double x, double* out) const;

  /// D(i, j) = L_j'(x_i), row-major, size() x size().
  const std::vector<double>& derivative_matrix() const { return dmat_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> bary_;
  std::vector<double> dmat_;
};

}  // namespace mctdhf
