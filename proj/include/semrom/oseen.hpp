#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "semrom/monolithic.hpp"

namespace semrom {

/// Everything the full-order model needs for one discretization.
struct FomContext {
  GeometryConfig geom;
  double viscosity = 1.0;
  Mesh mesh;
  ReferenceElement ref;
  DofMap dofmap;

  FomContext(const GeometryConfig& g, const MeshConfig& mc, int p, double nu)
      : geom(g), viscosity(nu), mesh(g, mc), ref(p), dofmap(mesh, ref) {}
  FomContext(const FomContext&) = delete;
  FomContext& operator=(const FomContext&) = delete;
};

struct FlowState {
  double mu = 0.0;
  Eigen::VectorXd x;  // monolithic free-DOF vector (v_bnd, p, v_int)
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;  // relative L2 velocity increments
};

/// Diagonal L2 mass over all velocity nodes for the deformed domain at mu
/// (element quadrature weights times the strip's vertical stretch).
inline Eigen::VectorXd velocity_mass(const FomContext& ctx, double mu) {
  const auto& ref = ctx.ref;
  const auto& w = ref.weights_1d();
  const int p = ref.order_velocity();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(ctx.dofmap.num_nodes());
  for (const auto& e : ctx.mesh.elements()) {
    double c = strip_scale(ctx.geom, ctx.mesh.strip_of_element(e), mu);
    double jd = e.jac_det() * c;
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a)
        m(ctx.dofmap.node_gid(e.element_id, ref.node_index(a, b))) += w(a) * w(b) * jd;
  }
  return m;
}

inline double velocity_l2_norm(const Eigen::MatrixX2d& u, const Eigen::VectorXd& mass) {
  return std::sqrt((mass.array() * (u.col(0).array().square() + u.col(1).array().square())).sum());
}

inline Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse solve failed");
  return x;
}

/// Single linear solve with zero wind.
inline FlowState stokes_solve(const FomContext& ctx, double mu) {
  ctx.geom.require_mu(mu);
  MonolithicSystem sys = assemble_direct(ctx.dofmap, mu, ctx.viscosity);
  FlowState s;
  s.mu = mu;
  s.x = solve_sparse(sys.A, sys.rhs(ctx.geom, mu));
  s.converged = true;
  s.iterations = 1;
  return s;
}

/// Oseen fixed-point iteration: assemble with the previous velocity iterate as
/// wind, solve, repeat until the relative L2 velocity increment drops below tol.
inline FlowState oseen_solve(const FomContext& ctx, double mu, const Eigen::VectorXd& initial,
                             double tol = 1e-8, int max_iter = 100) {
  ctx.geom.require_mu(mu);
  if (!(tol > 0.0)) throw std::invalid_argument("oseen_solve: tol must be positive");
  Eigen::VectorXd mass = velocity_mass(ctx, mu);

  FlowState s;
  s.mu = mu;
  s.x = initial.size() ? initial : stokes_solve(ctx, mu).x;
  Eigen::MatrixX2d u_old = ctx.dofmap.expand_velocity(s.x, mu);
  for (int k = 0; k < max_iter; ++k) {
    MonolithicSystem sys = assemble_direct(ctx.dofmap, mu, ctx.viscosity, &u_old);
    s.x = solve_sparse(sys.A, sys.rhs(ctx.geom, mu));
    s.iterations = k + 1;
    Eigen::MatrixX2d u_new = ctx.dofmap.expand_velocity(s.x, mu);
    double incr = velocity_l2_norm(u_new - u_old, mass) / velocity_l2_norm(u_new, mass);
    s.residual_history.push_back(incr);
    u_old = u_new;
    if (incr <= tol) {
      s.converged = true;
      break;
    }
  }
  return s;
}

/// Physical volume flux through the vertical cut x = xc of the deformed domain.
inline double flux_through_cut(const FomContext& ctx, double mu, const Eigen::MatrixX2d& u,
                               double xc) {
  const auto& ref = ctx.ref;
  const auto& w = ref.weights_1d();
  const int p = ref.order_velocity();
  double flux = 0.0;
  bool found = false;
  for (const auto& e : ctx.mesh.elements()) {
    int edge_col;
    if (std::abs(e.x0 - xc) < 1e-9)
      edge_col = 0;
    else if (std::abs(e.x0 + e.hx - xc) < 1e-9 && std::abs(xc - ctx.geom.channel_length) < 1e-9)
      edge_col = p;  // outflow cut uses right edges
    else
      continue;
    found = true;
    double c = strip_scale(ctx.geom, ctx.mesh.strip_of_element(e), mu);
    for (int b = 0; b <= p; ++b)
      flux += w(b) * e.jac_y() * c * u(ctx.dofmap.node_gid(e.element_id, ref.node_index(edge_col, b)), 0);
  }
  if (!found) throw std::invalid_argument("flux_through_cut: cut not aligned with element edges");
  return flux;
}

/// Re = U mu / nu with U the maximum velocity magnitude inside the narrowing.
inline double reynolds_estimate(const FomContext& ctx, const FlowState& state) {
  Eigen::MatrixX2d u = ctx.dofmap.expand_velocity(state.x, state.mu);
  double umax = 0.0;
  for (int g = 0; g < ctx.dofmap.num_nodes(); ++g) {
    double x = ctx.dofmap.node_coord(g).x();
    if (x < ctx.geom.narrowing_x0 - 1e-12 || x > ctx.geom.narrowing_x1 + 1e-12) continue;
    umax = std::max(umax, u.row(g).norm());
  }
  return umax * state.mu / ctx.viscosity;
}

struct SnapshotSet {
  std::vector<double> parameters;     // ascending
  Eigen::MatrixXd states;             // one converged column per parameter
  int p = 0;
  int n_delta = 0;
};

/// Solves all parameters in ascending order with continuation warm starts.
inline SnapshotSet snapshot_sweep(const FomContext& ctx, std::vector<double> params,
                                  double tol = 1e-8, int max_iter = 100) {
  std::sort(params.begin(), params.end());
  SnapshotSet set;
  set.parameters = params;
  set.p = ctx.ref.order_velocity();
  set.n_delta = ctx.dofmap.n_delta();
  set.states.resize(ctx.dofmap.n_delta(), static_cast<Eigen::Index>(params.size()));
  Eigen::VectorXd warm;
  for (std::size_t i = 0; i < params.size(); ++i) {
    FlowState s = oseen_solve(ctx, params[i], warm, tol, max_iter);
    if (!s.converged)
      throw std::runtime_error("snapshot_sweep: Oseen iteration did not converge at mu = " +
                               std::to_string(params[i]));
    set.states.col(static_cast<Eigen::Index>(i)) = s.x;
    warm = s.x;
  }
  return set;
}

}  // namespace semrom
