#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <vector>

#include "semrom/monolithic.hpp"
#include "semrom/oseen.hpp"
#include "semrom/pod.hpp"

namespace semrom {

/// Everything the online phase needs; every stored object has dimensions
/// depending only on N and the number of affine terms, never on n_delta.
///
/// The online wind is  w(mu, alpha) = sum_j beta_j(mu) W_j + sum_n alpha_n V_n
/// with W_j the Dirichlet lifting fields and V_n the expanded POD modes, so
/// the trilinear tensors carry kNumLiftingTerms + N wind slots per advection
/// descriptor, in that order.
struct ReducedModel {
  GeometryConfig geom;
  double viscosity = 1.0;
  int n_delta = 0;
  int p = 0;
  int num_modes = 0;  // basis column count (3 * pairs for a structured basis)
  int pairs = 0;      // structured-basis pair count, 0 if plain
  double energy_threshold = 0.0;
  Eigen::VectorXd singular_values;

  std::vector<TermDescriptor> linear_descs;  // wind-independent affine terms
  std::vector<Eigen::MatrixXd> A_hat;        // N x N each
  std::vector<std::array<Eigen::VectorXd, kNumLiftingTerms>> f_hat;

  std::vector<TermDescriptor> adv_descs;                  // advection terms
  std::vector<std::vector<Eigen::MatrixXd>> G_hat;        // [term][wind slot]
  std::vector<std::vector<std::array<Eigen::VectorXd, kNumLiftingTerms>>> g_hat;

  int num_wind_slots() const { return kNumLiftingTerms + num_modes; }

  /// Restriction to a nested sub-basis. For a plain basis n counts leading
  /// columns; for a structured basis n counts pairs, keeping the leading n
  /// velocity modes, supremizers, and pressure modes each.
  ReducedModel truncated(int n) const {
    std::vector<int> idx;
    if (pairs > 0) {
      if (n < 1 || n > pairs) throw std::invalid_argument("truncated: bad pair count");
      for (int b = 0; b < 3; ++b)
        for (int i = 0; i < n; ++i) idx.push_back(b * pairs + i);
    } else {
      if (n < 1 || n > num_modes) throw std::invalid_argument("truncated: bad mode count");
      for (int i = 0; i < n; ++i) idx.push_back(i);
    }
    const int m = static_cast<int>(idx.size());
    auto cut_mat = [&](const Eigen::MatrixXd& A) {
      Eigen::MatrixXd out(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out(i, j) = A(idx[i], idx[j]);
      return out;
    };
    auto cut_vec = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd out(m);
      for (int i = 0; i < m; ++i) out(i) = v(idx[i]);
      return out;
    };
    ReducedModel out = *this;
    out.num_modes = m;
    out.pairs = pairs > 0 ? n : 0;
    for (auto& a : out.A_hat) a = cut_mat(a);
    for (auto& fs : out.f_hat)
      for (auto& f : fs) f = cut_vec(f);
    for (auto& terms : out.G_hat) {
      std::vector<Eigen::MatrixXd> kept;
      for (int s = 0; s < kNumLiftingTerms; ++s) kept.push_back(cut_mat(terms[s]));
      for (int i : idx) kept.push_back(cut_mat(terms[kNumLiftingTerms + i]));
      terms = std::move(kept);
    }
    for (auto& terms : out.g_hat) {
      std::vector<std::array<Eigen::VectorXd, kNumLiftingTerms>> kept;
      auto cut_slot = [&](const std::array<Eigen::VectorXd, kNumLiftingTerms>& slot) {
        std::array<Eigen::VectorXd, kNumLiftingTerms> outp;
        for (int j = 0; j < kNumLiftingTerms; ++j) outp[j] = cut_vec(slot[j]);
        return outp;
      };
      for (int s = 0; s < kNumLiftingTerms; ++s) kept.push_back(cut_slot(terms[s]));
      for (int i : idx) kept.push_back(cut_slot(terms[kNumLiftingTerms + i]));
      terms = std::move(kept);
    }
    return out;
  }
};

/// Column indices of the pair-n truncation of a k-pair structured basis:
/// the leading n velocity modes, supremizers, and pressure modes.
inline std::vector<int> pair_indices(int k, int n) {
  if (n < 1 || n > k) throw std::invalid_argument("pair_indices: bad pair count");
  std::vector<int> idx;
  idx.reserve(3 * n);
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < n; ++i) idx.push_back(b * k + i);
  return idx;
}

/// Structured state basis for the ROM: per-block POD plus supremizer
/// stabilization, k velocity modes + k supremizers + k pressure modes.
///
/// Every snapshot is scaled by the norm of its velocity block before the two
/// block SVDs. Velocity columns then have unit norm, so the velocity POD
/// works in the relative-error metric; the pressure block keeps its physical
/// ratio to the velocity, because a truncated pressure component re-enters
/// the momentum balance at its absolute magnitude (the gap pressure grows
/// like mu^-3 and reaches ~4e3 times the velocity scale at the narrowest
/// gap). A single unweighted SVD of the raw monolithic states fails outright:
/// the largest pressure field dominates the spectrum and one mode already
/// meets any practical energy threshold while the velocity error stays near
/// 100%.
///
/// The pair count k is the smallest one whose pooled discarded relative
/// energy over both blocks drops below (1 - threshold)^{3/2}. The tightened
/// exponent accounts for pressure-scale amplification: with the plain
/// (1 - threshold) energy rule the retained pressure modes leave a truncation
/// residual that, multiplied by the pressure/velocity scale ratio, dominates
/// the velocity error by two orders of magnitude.
///
/// Each pressure mode q is paired with a supremizer s = M^{-1} B^T q
/// (diagonal velocity mass and pressure-gradient operator at the reference
/// gap), orthonormalized against the velocity modes. These restore the
/// velocity-pressure coupling stability that a plain Galerkin projection of
/// a saddle-point operator lacks; they are derived stabilization vectors,
/// not POD modes, so the reported POD dimension is 2k while the basis has 3k
/// columns.
inline PodBasis compute_state_pod(const FomContext& ctx, const Eigen::MatrixXd& snapshots,
                                  double energy_threshold = 0.9999) {
  const DofMap& dm = ctx.dofmap;
  if (snapshots.rows() != dm.n_delta())
    throw std::invalid_argument("compute_state_pod: snapshot row count mismatch");
  if (snapshots.cols() == 0) throw std::invalid_argument("compute_state_pod: empty snapshot set");
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0))
    throw std::invalid_argument("compute_state_pod: energy threshold must lie in (0, 1]");

  const int nd = dm.n_delta(), p0 = dm.pressure_offset(), p1 = p0 + dm.n_pressure_dofs();
  std::vector<int> vel, pres;
  for (int i = 0; i < nd; ++i) (i >= p0 && i < p1 ? pres : vel).push_back(i);

  Eigen::MatrixXd V(vel.size(), snapshots.cols()), P(pres.size(), snapshots.cols());
  for (std::size_t r = 0; r < vel.size(); ++r) V.row(r) = snapshots.row(vel[r]);
  for (std::size_t r = 0; r < pres.size(); ++r) P.row(r) = snapshots.row(pres[r]);
  for (int c = 0; c < snapshots.cols(); ++c) {
    double nv = V.col(c).norm();
    if (!(nv > 0.0)) throw std::invalid_argument("compute_state_pod: zero velocity snapshot");
    V.col(c) /= nv;
    P.col(c) /= nv;
  }

  PodBasis podv = compute_pod(V, 1.0);
  PodBasis podp = compute_pod(P, 1.0);
  const Eigen::VectorXd sv = podv.singular_values / podv.singular_values(0);
  const Eigen::VectorXd sp = podp.singular_values / podp.singular_values(0);
  const double total = sv.squaredNorm() + sp.squaredNorm();
  const double allowed = std::pow(1.0 - energy_threshold, 1.5) * total;
  const int kmax = std::min(podv.num_modes(), podp.num_modes());
  int k = kmax;
  for (int cand = 1; cand < kmax; ++cand) {
    double tail = 0.0;
    for (int i = cand; i < sv.size(); ++i) tail += sv(i) * sv(i);
    for (int i = cand; i < sp.size(); ++i) tail += sp(i) * sp(i);
    if (tail <= allowed) {
      k = cand;
      break;
    }
  }

  // supremizers: velocity rows of -A * q at the reference gap, divided by the
  // diagonal velocity mass (A's velocity-pressure coupling block is -B^T)
  MonolithicSystem stokes = assemble_direct(dm, 1.0, 1.0);
  Eigen::VectorXd nodal_mass = velocity_mass(ctx, 1.0);
  Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(nd);
  for (int g = 0; g < dm.num_nodes(); ++g)
    for (int c = 0; c < 2; ++c) {
      int d = dm.vel_dof(g, c);
      if (d >= 0) inv_mass(d) = 1.0 / nodal_mass(g);
    }

  Eigen::MatrixXd Uv = Eigen::MatrixXd::Zero(nd, k), Up = Eigen::MatrixXd::Zero(nd, k);
  for (std::size_t r = 0; r < vel.size(); ++r) Uv.row(vel[r]) = podv.modes.row(r).head(k);
  for (std::size_t r = 0; r < pres.size(); ++r) Up.row(pres[r]) = podp.modes.row(r).head(k);
  Eigen::MatrixXd W(nd, 2 * k);
  W.leftCols(k) = Uv;
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd s = -(stokes.A * Up.col(i));
    for (int d = p0; d < p1; ++d) s(d) = 0.0;
    W.col(k + i) = s.cwiseProduct(inv_mass);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  Eigen::VectorXd rdiag = qr.matrixQR().diagonal().cwiseAbs();
  if (rdiag.minCoeff() < 1e-10 * rdiag.maxCoeff())
    throw std::runtime_error("compute_state_pod: supremizer enrichment is rank deficient");

  PodBasis out;
  out.energy_threshold = energy_threshold;
  out.pairs = k;
  out.velocity_spectrum = podv.singular_values;
  out.pressure_spectrum = podp.singular_values;
  out.modes.resize(nd, 3 * k);
  out.modes.leftCols(2 * k) = qr.householderQ() * Eigen::MatrixXd::Identity(nd, 2 * k);
  out.modes.rightCols(k) = Up;
  // pooled block-relative spectrum, descending, for reporting
  std::vector<double> pooled(sv.data(), sv.data() + sv.size());
  pooled.insert(pooled.end(), sp.data(), sp.data() + sp.size());
  std::sort(pooled.begin(), pooled.end(), std::greater<double>());
  out.singular_values = Eigen::Map<Eigen::VectorXd>(pooled.data(), pooled.size());
  return out;
}

/// Nodal velocity field of a free-DOF vector with zero Dirichlet data.
inline Eigen::MatrixX2d expand_free_velocity(const DofMap& dm, const Eigen::VectorXd& x) {
  Eigen::MatrixX2d u = Eigen::MatrixX2d::Zero(dm.num_nodes(), 2);
  for (int g = 0; g < dm.num_nodes(); ++g)
    for (int c = 0; c < 2; ++c) {
      int d = dm.vel_dof(g, c);
      if (d >= 0) u(g, c) = x(d);
    }
  return u;
}

/// Nodal field of lifting term j: the Dirichlet data component, zero elsewhere.
inline Eigen::MatrixX2d lifting_field(const DofMap& dm, int term) {
  Eigen::MatrixX2d u = Eigen::MatrixX2d::Zero(dm.num_nodes(), 2);
  for (int g = 0; g < dm.num_nodes(); ++g)
    for (int c = 0; c < 2; ++c)
      if (dm.vel_dof(g, c) < 0) u(g, c) = dm.dirichlet_terms(g, c)[term];
  return u;
}

/// Galerkin projection of the wind-independent affine family.
inline void project_affine(const PodBasis& pod, const AffineFamily& family, ReducedModel& out) {
  if (family.linear.empty()) throw std::invalid_argument("project_affine: empty family");
  if (family.linear.front().sys.A.rows() != pod.modes.rows())
    throw std::invalid_argument("project_affine: dimension mismatch");
  const Eigen::MatrixXd& U = pod.modes;
  out.linear_descs.clear();
  out.A_hat.clear();
  out.f_hat.clear();
  for (const auto& term : family.linear) {
    out.linear_descs.push_back(term.desc);
    out.A_hat.push_back(U.transpose() * (term.sys.A * U));
    std::array<Eigen::VectorXd, kNumLiftingTerms> f;
    for (int j = 0; j < kNumLiftingTerms; ++j) f[j] = U.transpose() * term.sys.lift[j];
    out.f_hat.push_back(std::move(f));
  }
}

/// Reduced trilinear advection tensors: one projected full-order advection
/// matrix per (affine advection descriptor, wind basis slot).
inline void project_trilinear(const PodBasis& pod, const DofMap& dm, ReducedModel& out) {
  const Eigen::MatrixXd& U = pod.modes;
  if (U.rows() != dm.n_delta()) throw std::invalid_argument("project_trilinear: dimension mismatch");
  const int n = pod.num_modes();

  std::vector<Eigen::MatrixX2d> winds;
  winds.reserve(kNumLiftingTerms + n);
  for (int j = 0; j < kNumLiftingTerms; ++j) winds.push_back(lifting_field(dm, j));
  for (int m = 0; m < n; ++m) winds.push_back(expand_free_velocity(dm, U.col(m)));

  out.adv_descs = advection_descriptors();
  out.G_hat.assign(out.adv_descs.size(), {});
  out.g_hat.assign(out.adv_descs.size(), {});
  for (std::size_t k = 0; k < out.adv_descs.size(); ++k) {
    out.G_hat[k].reserve(winds.size());
    out.g_hat[k].reserve(winds.size());
    for (const auto& w : winds) {
      MonolithicSystem sys = advection_term(dm, out.adv_descs[k], w);
      out.G_hat[k].push_back(U.transpose() * (sys.A * U));
      std::array<Eigen::VectorXd, kNumLiftingTerms> g;
      for (int j = 0; j < kNumLiftingTerms; ++j) g[j] = U.transpose() * sys.lift[j];
      out.g_hat[k].push_back(std::move(g));
    }
  }
}

/// Full offline construction of the reduced model.
inline ReducedModel build_reduced_model(const DofMap& dm, const PodBasis& pod, double viscosity) {
  ReducedModel m;
  m.geom = dm.mesh().geometry();
  m.viscosity = viscosity;
  m.n_delta = dm.n_delta();
  m.p = dm.ref().order_velocity();
  m.num_modes = pod.num_modes();
  m.pairs = pod.pairs;
  m.energy_threshold = pod.energy_threshold;
  m.singular_values = pod.singular_values;
  project_affine(pod, assemble_affine_family(dm, viscosity), m);
  project_trilinear(pod, dm, m);
  return m;
}

struct ReducedState {
  double mu = 0.0;
  Eigen::VectorXd alpha;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Reduced system at one parameter and wind iterate; all O(Q N^2) work.
struct ReducedOperator {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

inline ReducedOperator reduced_operator(const ReducedModel& m, double mu,
                                        const Eigen::VectorXd& alpha) {
  const int n = m.num_modes;
  auto beta = lifting_beta(m.geom, mu);
  ReducedOperator op;
  op.A = Eigen::MatrixXd::Zero(n, n);
  op.b = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < m.A_hat.size(); ++i) {
    double th = theta_value(m.geom, mu, m.linear_descs[i]);
    op.A += th * m.A_hat[i];
    for (int j = 0; j < kNumLiftingTerms; ++j) op.b += th * beta[j] * m.f_hat[i][j];
  }
  // wind coordinates: lifting betas then reduced coordinates
  Eigen::VectorXd gamma(m.num_wind_slots());
  for (int j = 0; j < kNumLiftingTerms; ++j) gamma(j) = beta[j];
  gamma.tail(n) = alpha;
  for (std::size_t k = 0; k < m.adv_descs.size(); ++k) {
    double th = theta_value(m.geom, mu, m.adv_descs[k]);
    for (int s = 0; s < m.num_wind_slots(); ++s) {
      if (gamma(s) == 0.0) continue;
      op.A += th * gamma(s) * m.G_hat[k][s];
      for (int j = 0; j < kNumLiftingTerms; ++j)
        op.b += th * gamma(s) * beta[j] * m.g_hat[k][s][j];
    }
  }
  return op;
}

inline Eigen::VectorXd solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::runtime_error("reduced system is singular");
  return lu.solve(b);
}

/// Reduced Oseen fixed-point iteration, the online counterpart of oseen_solve.
inline ReducedState online_solve(const ReducedModel& m, double mu, double tol = 1e-8,
                                 int max_iter = 100) {
  m.geom.require_mu(mu);
  if (!(tol > 0.0)) throw std::invalid_argument("online_solve: tol must be positive");
  ReducedState s;
  s.mu = mu;
  // reduced Stokes start (wind-independent terms only)
  {
    auto beta = lifting_beta(m.geom, mu);
    Eigen::MatrixXd stokes = Eigen::MatrixXd::Zero(m.num_modes, m.num_modes);
    Eigen::VectorXd bst = Eigen::VectorXd::Zero(m.num_modes);
    for (std::size_t i = 0; i < m.A_hat.size(); ++i) {
      double th = theta_value(m.geom, mu, m.linear_descs[i]);
      stokes += th * m.A_hat[i];
      for (int j = 0; j < kNumLiftingTerms; ++j) bst += th * beta[j] * m.f_hat[i][j];
    }
    s.alpha = solve_dense(stokes, bst);
  }
  for (int k = 0; k < max_iter; ++k) {
    ReducedOperator op = reduced_operator(m, mu, s.alpha);
    Eigen::VectorXd next = solve_dense(op.A, op.b);
    s.iterations = k + 1;
    double incr = (next - s.alpha).norm() / next.norm();
    s.residual_history.push_back(incr);
    s.alpha = next;
    if (incr <= tol) {
      s.converged = true;
      break;
    }
  }
  return s;
}

/// Relative L2(Omega) velocity error of an approximate monolithic state.
inline double relative_velocity_error(const FomContext& ctx, double mu,
                                      const Eigen::VectorXd& x_truth,
                                      const Eigen::VectorXd& x_approx) {
  Eigen::VectorXd mass = velocity_mass(ctx, mu);
  Eigen::MatrixX2d ut = ctx.dofmap.expand_velocity(x_truth, mu);
  Eigen::MatrixX2d ua = ctx.dofmap.expand_velocity(x_approx, mu);
  return velocity_l2_norm(ua - ut, mass) / velocity_l2_norm(ut, mass);
}

struct ErrorRow {
  int n = 0;  // POD mode count (2 * pair count for a structured basis)
  double max_error = 0.0;
  double mean_error = 0.0;
};

/// Basis columns of the pair-n (or leading-n) truncation.
inline Eigen::MatrixXd truncated_basis(const PodBasis& pod, int n) {
  if (pod.pairs == 0) return pod.modes.leftCols(n);
  std::vector<int> idx = pair_indices(pod.pairs, n);
  Eigen::MatrixXd out(pod.modes.rows(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(j) = pod.modes.col(idx[j]);
  return out;
}

/// Error-vs-size study against precomputed FOM truths at the same parameters,
/// over the nested truncation family of the basis.
inline std::vector<ErrorRow> error_study(const FomContext& ctx, const ReducedModel& model,
                                         const PodBasis& pod,
                                         const std::vector<double>& params,
                                         const Eigen::MatrixXd& truths, double tol = 1e-8) {
  if (truths.cols() != static_cast<Eigen::Index>(params.size()))
    throw std::invalid_argument("error_study: truth column count mismatch");
  if (pod.pairs != model.pairs || pod.num_modes() != model.num_modes)
    throw std::invalid_argument("error_study: basis does not match the model");
  const int steps = model.pairs > 0 ? model.pairs : model.num_modes;
  std::vector<ErrorRow> rows;
  for (int n = 1; n <= steps; ++n) {
    ReducedModel mn = model.truncated(n);
    Eigen::MatrixXd Un = truncated_basis(pod, n);
    ErrorRow row;
    row.n = model.pairs > 0 ? 2 * n : n;
    double sum = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      ReducedState s = online_solve(mn, params[i], tol);
      Eigen::VectorXd x = Un * s.alpha;
      double err = relative_velocity_error(ctx, params[i], truths.col(i), x);
      row.max_error = std::max(row.max_error, err);
      sum += err;
    }
    row.mean_error = sum / params.size();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace semrom
