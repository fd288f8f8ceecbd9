#include "mctdhf/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "mctdhf/common.hpp"

namespace mctdhf {
namespace {

// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence.
void legendre(int n, double x, double& pn, double& pn1) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) {
    pn = 1.0;
    pn1 = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  pn = p1;
  pn1 = p0;
}

}  // namespace

QuadratureRule gauss_lobatto(int n_points) {
  if (n_points < 2) throw std::invalid_argument("gauss_lobatto: need at least 2 points");
  const int n = n_points - 1;
  QuadratureRule rule;
  rule.nodes.resize(n_points);
  rule.weights.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    // Chebyshev-Gauss-Lobatto start, Newton on (1 - x^2) P_n'(x).
    double x = -std::cos(kPi * i / n);
    if (i > 0 && i < n) {
      for (int it = 0; it < 100; ++it) {
        double pn, pn1;
        legendre(n, x, pn, pn1);
        // (x P_n - P_{n-1}) vanishes at interior nodes.
        const double f = x * pn - pn1;
        const double df = (n + 1) * pn;
        const double dx = f / df;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    double pn, pn1;
    legendre(n, x, pn, pn1);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / (n * (n + 1.0) * pn * pn);
  }
  // Exact symmetry.
  for (int i = 0; i < n_points / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - i] = x;
    rule.weights[i] = rule.weights[n - i] = w;
  }
  if (n_points % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n_points) {
  if (n_points < 1) throw std::invalid_argument("gauss_legendre: need at least 1 point");
  QuadratureRule rule;
  rule.nodes.resize(n_points);
  rule.weights.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    double x = -std::cos(kPi * (i + 0.75) / (n_points + 0.5));
    double pn = 0.0, pn1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n_points, x, pn, pn1);
      const double dp = n_points * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n_points, x, pn, pn1);
    const double dp = n_points * (x * pn - pn1) / (x * x - 1.0);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

LagrangeBasis::LagrangeBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const int n = size();
  bary_.assign(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) bary_[j] /= (nodes_[j] - nodes_[k]);

  dmat_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
      dmat_[i * n + j] = d;
      diag -= d;
    }
    dmat_[i * n + i] = diag;
  }
}

void LagrangeBasis::values(double x, double* out) const {
  const int n = size();
  for (int j = 0; j < n; ++j) {
    double p = bary_[j];
    for (int k = 0; k < n; ++k)
      if (k != j) p *= (x - nodes_[k]);
    out[j] = p;
  }
}

void LagrangeBasis::derivatives(double x, double* out) const {
  const int n = size();
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      double p = 1.0;
      for (int k = 0; k < n; ++k)
        if (k != j && k != m) p *= (x - nodes_[k]);
      s += p;
    }
    out[j] = bary_[j] * s;
  }
}

}  // namespace mctdhf
