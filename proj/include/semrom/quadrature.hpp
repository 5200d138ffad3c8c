#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace semrom {

/// Legendre polynomial P_n and its derivative at x, by three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    double pk = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
    pm1 = p;
    p = pk;
  }
  double dp = n * (x * p - pm1) / (x * x - 1.0);
  return {p, dp};
}

struct Rule1d {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Lobatto-Legendre rule with p+1 points on [-1,1], exact for degree <= 2p-1.
inline Rule1d gll_rule(int p) {
  if (p < 1) throw std::invalid_argument("gll_rule: order must be >= 1");
  const int n = p + 1;
  Eigen::VectorXd x(n), w(n);
  x(0) = -1.0;
  x(p) = 1.0;
  // interior nodes: roots of P'_p, Newton from Chebyshev-Lobatto guesses
  for (int i = 1; i < p; ++i) {
    double xi = -std::cos(M_PI * i / p);
    for (int it = 0; it < 100; ++it) {
      auto [P, dP] = legendre(p, xi);
      // f = (1-x^2) P'_p,  f' = -2x P'_p + (1-x^2) P''_p ; use Legendre ODE:
      // (1-x^2) P'' = 2x P' - p(p+1) P  =>  f' = -p(p+1) P
      double f = (1.0 - xi * xi) * dP;
      double df = -p * (p + 1.0) * P;
      double dx = f / df;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x(i) = xi;
  }
  for (int i = 0; i < n; ++i) {
    double P = legendre(p, x(i)).first;
    w(i) = 2.0 / (p * (p + 1.0) * P * P);
  }
  return {x, w};
}

/// Gauss-Legendre rule with n points, exact for degree <= 2n-1.
inline Rule1d gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: need at least one point");
  Eigen::VectorXd x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double xi = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [P, dP] = legendre(n, xi);
      double dx = P / dP;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [P, dP] = legendre(n, xi);
    (void)P;
    x(i) = xi;
    w(i) = 2.0 / ((1.0 - xi * xi) * dP * dP);
  }
  return {x, w};
}

/// Barycentric weights for a node set.
inline Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double d = nodes(i) - nodes(j);
      if (d == 0.0) throw std::invalid_argument("barycentric_weights: duplicate nodes");
      w(i) /= d;
    }
  return w;
}

/// Differentiation matrix of the Lagrange interpolant on the given nodes.
inline Eigen::MatrixXd diff_matrix(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd bw = barycentric_weights(nodes);
  Eigen::MatrixXd D(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (bw(j) / bw(i)) / (nodes(i) - nodes(j));
      row += D(i, j);
    }
    D(i, i) = -row;
  }
  return D;
}

/// Values of all Lagrange basis polynomials on `nodes` at point x.
inline Eigen::VectorXd lagrange_basis_at(const Eigen::VectorXd& nodes, double x) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (x == nodes(i)) {
      v(i) = 1.0;
      return v;
    }
  Eigen::VectorXd bw = barycentric_weights(nodes);
  double denom = 0.0;
  for (int i = 0; i < n; ++i) {
    v(i) = bw(i) / (x - nodes(i));
    denom += v(i);
  }
  return v / denom;
}

}  // namespace semrom
