#pragma once

// Shared independent oracles for the assembly tests and the acceptance suite.
// Everything here recomputes results from first principles (explicit
// quadrature loops, no element blocks, no gather machinery) so agreement with
// the library is meaningful.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>

#include "semrom/monolithic.hpp"
#include "semrom/oseen.hpp"

namespace semrom::testing {

// Small channel: 3 x 3 cells, two solid, 7 elements with MeshConfig{2,1}.
inline GeometryConfig tiny_geom() {
  GeometryConfig g;
  g.channel_length = 1.5;
  g.narrowing_x0 = 0.5;
  g.narrowing_x1 = 1.0;
  return g;
}

inline Eigen::MatrixX2d synthetic_wind(const DofMap& dm) {
  Eigen::MatrixX2d w(dm.num_nodes(), 2);
  for (int g = 0; g < dm.num_nodes(); ++g) {
    double x = dm.node_coord(g).x(), y = dm.node_coord(g).y();
    w(g, 0) = std::sin(x + y);
    w(g, 1) = std::cos(x - y) - 0.3 * x;
  }
  return w;
}

/// Relative Frobenius distance between sparse matrices.
inline double rel_frobenius(const Eigen::SparseMatrix<double>& A,
                            const Eigen::SparseMatrix<double>& B) {
  Eigen::SparseMatrix<double> D = A - B;
  return std::sqrt(D.squaredNorm() / A.squaredNorm());
}

/// Independent dense Stokes assembly: explicit quadrature loops straight into
/// the monolithic layout.
struct DenseOracle {
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
};

inline DenseOracle dense_stokes(const FomContext& ctx, double mu) {
  const GeometryConfig& g = ctx.geom;
  const DofMap& dm = ctx.dofmap;
  const ReferenceElement& ref = ctx.ref;
  const int p = ref.order_velocity(), np = ref.num_pressure_nodes();
  const auto& w = ref.weights_1d();
  const auto& D = ref.diff_1d();
  const auto& E = ref.pressure_eval_1d();
  const int n = dm.n_delta();

  DenseOracle out;
  out.A = Eigen::MatrixXd::Zero(n, n);
  out.rhs = Eigen::VectorXd::Zero(n);

  auto dirichlet = [&](int gid, int c) {
    if (c != 0 || dm.node_class(gid) != NodeClass::Inflow) return 0.0;
    double yt = deformed_y(g, mu, dm.node_coord(gid).y());
    return yt * (g.channel_height - yt);
  };

  for (const auto& e : ctx.mesh.elements()) {
    double c = strip_scale(g, strip_of(g, e.y0 + 0.5 * e.hy), mu);
    double nu00 = ctx.viscosity * c, nu11 = ctx.viscosity / c;
    double chi00 = c, chi11 = 1.0;
    double jx = e.jac_x(), jy = e.jac_y(), jdet = jx * jy;

    auto gid = [&](int ax, int ay) { return dm.node_gid(e.element_id, ref.node_index(ax, ay)); };

    // velocity-velocity: sum over quadrature points of nu . grad phi_i . grad phi_j
    for (int qy = 0; qy <= p; ++qy)
      for (int qx = 0; qx <= p; ++qx) {
        double ww = w(qx) * w(qy) * jdet;
        for (int ay = 0; ay <= p; ++ay)
          for (int ax = 0; ax <= p; ++ax)
            for (int by = 0; by <= p; ++by)
              for (int bx = 0; bx <= p; ++bx) {
                // grad of Lagrange basis (ax,ay) at GLL point (qx,qy)
                double gxa = (ay == qy) ? D(qx, ax) / jx : 0.0;
                double gya = (ax == qx) ? D(qy, ay) / jy : 0.0;
                double gxb = (by == qy) ? D(qx, bx) / jx : 0.0;
                double gyb = (bx == qx) ? D(qy, by) / jy : 0.0;
                double val = ww * (nu00 * gxa * gxb + nu11 * gya * gyb);
                if (val == 0.0) continue;
                int gi = gid(ax, ay), gj = gid(bx, by);
                for (int comp = 0; comp < 2; ++comp) {
                  int di = dm.vel_dof(gi, comp), dj = dm.vel_dof(gj, comp);
                  if (di < 0) continue;
                  if (dj >= 0)
                    out.A(di, dj) += val;
                  else
                    out.rhs(di) -= val * dirichlet(gj, comp);
                }
              }
      }

    // pressure-velocity: -int psi_a chi_bb d(phi_j)/dx_b, plus its transpose
    for (int a = 0; a < np; ++a) {
      int axp = a % (p - 1), ayp = a / (p - 1);
      int pd = dm.pressure_dof(e.element_id, a);
      for (int qy = 0; qy <= p; ++qy)
        for (int qx = 0; qx <= p; ++qx) {
          double ww = w(qx) * w(qy) * jdet * E(qx, axp) * E(qy, ayp);
          for (int by = 0; by <= p; ++by)
            for (int bx = 0; bx <= p; ++bx) {
              double gxb = (by == qy) ? D(qx, bx) / jx : 0.0;
              double gyb = (bx == qx) ? D(qy, by) / jy : 0.0;
              int gj = gid(bx, by);
              double vals[2] = {chi00 * gxb, chi11 * gyb};
              for (int comp = 0; comp < 2; ++comp) {
                double val = -ww * vals[comp];
                if (val == 0.0) continue;
                int dj = dm.vel_dof(gj, comp);
                if (dj >= 0) {
                  out.A(pd, dj) += val;
                  out.A(dj, pd) += val;
                } else {
                  out.rhs(pd) -= val * dirichlet(gj, comp);
                }
              }
            }
        }
    }
  }
  return out;
}

}  // namespace semrom::testing
