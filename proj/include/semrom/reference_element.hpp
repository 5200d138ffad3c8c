#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "semrom/quadrature.hpp"

namespace semrom {

/// Tensor-product reference element on [-1,1]^2.
///
/// Velocity: Q_p nodal basis on (p+1)^2 GLL points (also the quadrature).
/// Pressure: Q_{p-2} nodal basis on (p-1)^2 interior Gauss points,
/// discontinuous across elements.
class ReferenceElement {
 public:
  explicit ReferenceElement(int order_velocity) : p_(order_velocity) {
    if (p_ < 3) throw std::invalid_argument("ReferenceElement: need p >= 3 for a p-2 pressure space");
    auto gll = gll_rule(p_);
    nodes_1d_ = gll.nodes;
    weights_1d_ = gll.weights;
    diff_1d_ = diff_matrix(nodes_1d_);

    auto gauss = gauss_rule(p_ - 1);
    pressure_nodes_1d_ = gauss.nodes;
    // pressure basis (Lagrange on Gauss points) evaluated at the GLL quadrature points
    pressure_eval_1d_.resize(p_ + 1, p_ - 1);
    for (int q = 0; q <= p_; ++q)
      pressure_eval_1d_.row(q) = lagrange_basis_at(pressure_nodes_1d_, nodes_1d_(q)).transpose();

    for (int iy = 0; iy <= p_; ++iy)
      for (int ix = 0; ix <= p_; ++ix) {
        bool bnd = ix == 0 || ix == p_ || iy == 0 || iy == p_;
        (bnd ? boundary_nodes_ : interior_nodes_).push_back(iy * (p_ + 1) + ix);
      }
  }

  int order_velocity() const { return p_; }
  int order_pressure() const { return p_ - 2; }
  int num_nodes() const { return (p_ + 1) * (p_ + 1); }
  int num_pressure_nodes() const { return (p_ - 1) * (p_ - 1); }
  int node_index(int ix, int iy) const { return iy * (p_ + 1) + ix; }

  const Eigen::VectorXd& nodes_1d() const { return nodes_1d_; }
  const Eigen::VectorXd& weights_1d() const { return weights_1d_; }
  const Eigen::MatrixXd& diff_1d() const { return diff_1d_; }
  const Eigen::VectorXd& pressure_nodes_1d() const { return pressure_nodes_1d_; }
  const Eigen::MatrixXd& pressure_eval_1d() const { return pressure_eval_1d_; }

  /// Local node ids on the element boundary (edges and vertices): 4p of them.
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  /// Strictly interior local node ids: (p-1)^2 of them.
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }

 private:
  int p_;
  Eigen::VectorXd nodes_1d_, weights_1d_, pressure_nodes_1d_;
  Eigen::MatrixXd diff_1d_, pressure_eval_1d_;
  std::vector<int> boundary_nodes_, interior_nodes_;
};

}  // namespace semrom
