#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "semrom/gather.hpp"
#include "semrom/geometry.hpp"
#include "semrom/mesh.hpp"
#include "semrom/reference_element.hpp"

namespace semrom {

/// Coefficient tensors for one element's weak-form terms. The affine family
/// assembles single terms by masking kinds and zeroing tensor entries.
struct ElementCoefficients {
  Eigen::Matrix2d nu = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d chi = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d pi = Eigen::Matrix2d::Identity();
  bool diffusion = true;
  bool divergence = true;
  bool advection = true;

  static ElementCoefficients none() {
    ElementCoefficients c;
    c.nu.setZero();
    c.chi.setZero();
    c.pi.setZero();
    c.diffusion = c.divergence = c.advection = false;
    return c;
  }
};

using CoefficientProvider = std::function<ElementCoefficients(const ElementGeometry&)>;

/// Physical-coordinate basis gradients and quadrature data on one element.
/// Quadrature points coincide with the velocity nodes (GLL collocation).
struct ElementOps {
  Eigen::MatrixXd Gx, Gy;   // (nv x nv) d/dx, d/dy of basis j at node q
  Eigen::VectorXd wq;       // (nv) quadrature weight * |J|
  Eigen::MatrixXd psi;      // (nv x np) pressure basis at the quadrature nodes

  ElementOps(const ReferenceElement& ref, const ElementGeometry& g) {
    const int p = ref.order_velocity();
    const int nv = ref.num_nodes(), np = ref.num_pressure_nodes();
    const auto& D = ref.diff_1d();
    const auto& w = ref.weights_1d();
    const auto& E = ref.pressure_eval_1d();
    Gx = Eigen::MatrixXd::Zero(nv, nv);
    Gy = Eigen::MatrixXd::Zero(nv, nv);
    wq.resize(nv);
    psi.resize(nv, np);
    const double ijx = 1.0 / g.jac_x(), ijy = 1.0 / g.jac_y(), jdet = g.jac_det();
    for (int qy = 0; qy <= p; ++qy)
      for (int qx = 0; qx <= p; ++qx) {
        int q = ref.node_index(qx, qy);
        wq(q) = w(qx) * w(qy) * jdet;
        for (int a = 0; a <= p; ++a) {
          Gx(q, ref.node_index(a, qy)) += D(qx, a) * ijx;
          Gy(q, ref.node_index(qx, a)) += D(qy, a) * ijy;
        }
        for (int ay = 0; ay < p - 1; ++ay)
          for (int ax = 0; ax < p - 1; ++ax)
            psi(q, ay * (p - 1) + ax) = E(qx, ax) * E(qy, ay);
      }
  }

  /// Stiffness with a full 2x2 diffusion tensor:  int grad(u) . nu . grad(v).
  Eigen::MatrixXd stiffness(const Eigen::Matrix2d& nu) const {
    Eigen::MatrixXd K = nu(0, 0) * Gx.transpose() * wq.asDiagonal() * Gx +
                        nu(1, 1) * Gy.transpose() * wq.asDiagonal() * Gy;
    if (nu(0, 1) != 0.0 || nu(1, 0) != 0.0)
      K += nu(0, 1) * (Gx.transpose() * wq.asDiagonal() * Gy +
                       Gy.transpose() * wq.asDiagonal() * Gx);
    return K;
  }

  /// Linearized advection with wind values at the nodes:
  ///   N_ij = w_q(i) * sum_b (pi . wind(i))_b  d(phi_j)/dx_b (i).
  Eigen::MatrixXd advection(const Eigen::Matrix2d& pi, const Eigen::MatrixX2d& wind_local) const {
    const auto n = Gx.rows();
    Eigen::VectorXd cx(n), cy(n);
    for (int i = 0; i < n; ++i) {
      Eigen::Vector2d c = pi * wind_local.row(i).transpose();
      cx(i) = wq(i) * c(0);
      cy(i) = wq(i) * c(1);
    }
    return cx.asDiagonal() * Gx + cy.asDiagonal() * Gy;
  }

  /// Pressure-divergence block for velocity component comp:
  ///   D_aj = int psi_a (chi_0c dx + chi_1c dy) phi_j.
  Eigen::MatrixXd divergence(const Eigen::Matrix2d& chi, int comp) const {
    Eigen::MatrixXd R = chi(0, comp) * Gx + chi(1, comp) * Gy;
    return psi.transpose() * wq.asDiagonal() * R;
  }

  /// Diagonal velocity mass (GLL collocation).
  const Eigen::VectorXd& mass_diag() const { return wq; }
};

/// Saddle-point block system in element-local DOFs. Local velocity ordering
/// per element: [comp0 at boundary nodes, comp1 at boundary nodes] for the
/// boundary group and likewise for the interior group.
struct LocalBlockSystem {
  struct ElementBlocks {
    Eigen::MatrixXd A;      // (2nb x 2nb) boundary-boundary
    Eigen::MatrixXd B;      // (2nb x 2ni) boundary-interior
    Eigen::MatrixXd Bt;     // (2ni x 2nb) interior-boundary
    Eigen::MatrixXd C;      // (2ni x 2ni) interior-interior
    Eigen::MatrixXd D_bnd;  // (np x 2nb)
    Eigen::MatrixXd D_int;  // (np x 2ni)
    Eigen::VectorXd f_bnd, f_int;
  };
  std::vector<ElementBlocks> blocks;
  int nb = 0, ni = 0, np = 0;
};

/// Assembles the six block matrices element by element. `wind` is a full nodal
/// velocity field (DofMap node ids); required when any element has advection.
/// `geoms` overrides the mesh's element geometries (deformed-mesh assembly).
inline LocalBlockSystem assemble_local(const DofMap& dm, const CoefficientProvider& coeffs,
                                       const Eigen::MatrixX2d* wind = nullptr,
                                       const std::vector<ElementGeometry>* geoms = nullptr) {
  const ReferenceElement& ref = dm.ref();
  const auto& elems = geoms ? *geoms : dm.mesh().elements();
  const auto& bn = ref.boundary_nodes();
  const auto& in = ref.interior_nodes();
  const int nb = static_cast<int>(bn.size()), ni = static_cast<int>(in.size());
  const int nv = ref.num_nodes(), np = ref.num_pressure_nodes();

  LocalBlockSystem sys;
  sys.nb = nb;
  sys.ni = ni;
  sys.np = np;
  sys.blocks.resize(elems.size());

  for (const auto& eg : elems) {
    ElementCoefficients c = coeffs(eg);
    ElementOps ops(ref, eg);

    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nv, nv);  // scalar velocity operator
    if (c.diffusion) V += ops.stiffness(c.nu);
    if (c.advection) {
      if (!wind) throw std::invalid_argument("assemble_local: advection requested without a wind field");
      Eigen::MatrixX2d wl(nv, 2);
      for (int n = 0; n < nv; ++n) wl.row(n) = wind->row(dm.node_gid(eg.element_id, n));
      V += ops.advection(c.pi, wl);
    }
    Eigen::MatrixXd Dx = Eigen::MatrixXd::Zero(np, nv), Dy = Dx;
    if (c.divergence) {
      Dx = ops.divergence(c.chi, 0);
      Dy = ops.divergence(c.chi, 1);
    }

    auto& blk = sys.blocks[eg.element_id];
    auto pick = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
      // 2-component block-diagonal expansion of the scalar operator V
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * rows.size(), 2 * cols.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
          out(i, j) = V(rows[i], cols[j]);
          out(rows.size() + i, cols.size() + j) = V(rows[i], cols[j]);
        }
      return out;
    };
    auto pick_div = [&](const std::vector<int>& cols) {
      Eigen::MatrixXd out(np, 2 * cols.size());
      for (int a = 0; a < np; ++a)
        for (std::size_t j = 0; j < cols.size(); ++j) {
          out(a, j) = Dx(a, cols[j]);
          out(a, cols.size() + j) = Dy(a, cols[j]);
        }
      return out;
    };
    blk.A = pick(bn, bn);
    blk.B = pick(bn, in);
    blk.Bt = pick(in, bn);
    blk.C = pick(in, in);
    blk.D_bnd = pick_div(bn);
    blk.D_int = pick_div(in);
    blk.f_bnd = Eigen::VectorXd::Zero(2 * nb);
    blk.f_int = Eigen::VectorXd::Zero(2 * ni);
  }
  return sys;
}

/// Coefficients for direct assembly at parameter mu: per-subdomain transformed
/// tensors on the reference mesh.
inline CoefficientProvider coefficients_at(const GeometryConfig& geom, double mu, double viscosity) {
  auto maps = subdomain_maps(geom, mu);
  return [maps, viscosity](const ElementGeometry& e) {
    TransformTensors t = transform_tensors(maps.for_subdomain(e.subdomain_id), 1.0);
    ElementCoefficients c;
    c.nu = viscosity * t.nu;
    c.chi = t.chi;
    c.pi = t.pi;
    return c;
  };
}

/// Identity-tensor Stokes coefficients (reference-domain tests).
inline CoefficientProvider identity_coefficients(double viscosity) {
  return [viscosity](const ElementGeometry&) {
    ElementCoefficients c;
    c.nu = viscosity * Eigen::Matrix2d::Identity();
    c.advection = false;
    return c;
  };
}

}  // namespace semrom
