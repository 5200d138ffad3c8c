#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "semrom/gather.hpp"
#include "semrom/local_system.hpp"

namespace semrom {

/// The gathered, Dirichlet-lifted monolithic system. The right-hand side is
/// kept as its affine lifting expansion: rhs(mu) = sum_j beta_j(mu) lift[j]
/// (there is no body force).
struct MonolithicSystem {
  Eigen::SparseMatrix<double> A;
  std::array<Eigen::VectorXd, kNumLiftingTerms> lift;

  Eigen::VectorXd rhs(const GeometryConfig& g, double mu) const {
    auto beta = lifting_beta(g, mu);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(A.rows());
    for (int j = 0; j < kNumLiftingTerms; ++j) f += beta[j] * lift[j];
    return f;
  }
};

/// Gathers a LocalBlockSystem into the monolithic layout: shared boundary
/// velocity DOFs are accumulated across elements (the M^T . M action),
/// Dirichlet columns move to the lifting vectors, Dirichlet rows are dropped.
///
/// `dirichlet_terms(gid, comp)` supplies the affine expansion of the Dirichlet
/// data; pass a single-term functor for plain (non-expanded) data.
template <typename DirichletTerms>
MonolithicSystem gather_and_lift_t(const DofMap& dm, const LocalBlockSystem& sys,
                                   DirichletTerms&& dirichlet_terms) {
  const ReferenceElement& ref = dm.ref();
  const auto& bn = ref.boundary_nodes();
  const auto& in = ref.interior_nodes();
  const int nb = sys.nb, ni = sys.ni, np = sys.np;
  const int n = dm.n_delta();

  MonolithicSystem out;
  for (auto& l : out.lift) l = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.blocks.size() * (4 * nb * nb + 8 * nb * ni + 4 * ni * ni + 4 * np * (nb + ni)));

  // resolved local velocity DOF: monolithic index, or -1 with lifting terms
  struct Resolved {
    int dof;
    std::array<double, kNumLiftingTerms> terms;
  };
  std::vector<Resolved> rb(2 * nb), ri(2 * ni);

  for (std::size_t e = 0; e < sys.blocks.size(); ++e) {
    const auto& blk = sys.blocks[e];
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < nb; ++k) {
        int gid = dm.node_gid(static_cast<int>(e), bn[k]);
        int d = dm.vel_dof(gid, c);
        rb[c * nb + k] = {d, d < 0 ? dirichlet_terms(gid, c)
                                   : std::array<double, kNumLiftingTerms>{}};
      }
      for (int k = 0; k < ni; ++k) {
        int gid = dm.node_gid(static_cast<int>(e), in[k]);
        ri[c * ni + k] = {dm.vel_dof(gid, c), {}};
      }
    }

    auto add = [&](const Eigen::MatrixXd& M, const std::vector<Resolved>& rows,
                   const std::vector<Resolved>& cols, double sign) {
      for (int i = 0; i < M.rows(); ++i) {
        if (rows[i].dof < 0) continue;
        for (int j = 0; j < M.cols(); ++j) {
          double v = sign * M(i, j);
          if (v == 0.0) continue;
          if (cols[j].dof >= 0)
            trip.emplace_back(rows[i].dof, cols[j].dof, v);
          else
            for (int t = 0; t < kNumLiftingTerms; ++t)
              out.lift[t](rows[i].dof) -= v * cols[j].terms[t];
        }
      }
    };
    auto add_pressure = [&](const Eigen::MatrixXd& D, const std::vector<Resolved>& vcols) {
      for (int a = 0; a < np; ++a) {
        int pd = dm.pressure_dof(static_cast<int>(e), a);
        for (int j = 0; j < D.cols(); ++j) {
          double v = -D(a, j);
          if (v == 0.0) continue;
          if (vcols[j].dof >= 0) {
            trip.emplace_back(pd, vcols[j].dof, v);        // -D block
            trip.emplace_back(vcols[j].dof, pd, v);        // -D^T block
          } else {
            for (int t = 0; t < kNumLiftingTerms; ++t)
              out.lift[t](pd) -= v * vcols[j].terms[t];
          }
        }
      }
    };

    add(blk.A, rb, rb, 1.0);
    add(blk.B, rb, ri, 1.0);
    add(blk.Bt, ri, rb, 1.0);
    add(blk.C, ri, ri, 1.0);
    add_pressure(blk.D_bnd, rb);
    add_pressure(blk.D_int, ri);
  }

  out.A.resize(n, n);
  out.A.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline MonolithicSystem gather_and_lift(const DofMap& dm, const LocalBlockSystem& sys) {
  return gather_and_lift_t(dm, sys, [&](int gid, int c) { return dm.dirichlet_terms(gid, c); });
}

/// Direct assembly of A(mu) on the reference mesh with transformed tensors.
inline MonolithicSystem assemble_direct(const DofMap& dm, double mu, double viscosity,
                                        const Eigen::MatrixX2d* wind = nullptr) {
  auto coeffs = coefficients_at(dm.mesh().geometry(), mu, viscosity);
  if (!wind) {
    auto stokes = [coeffs](const ElementGeometry& e) {
      ElementCoefficients c = coeffs(e);
      c.advection = false;
      return c;
    };
    return gather_and_lift(dm, assemble_local(dm, stokes));
  }
  return gather_and_lift(dm, assemble_local(dm, coeffs, wind));
}

/// Direct assembly on the physically deformed mesh (identity tensors, moved
/// elements, inflow data evaluated at deformed node positions). Independent
/// route used to validate the affine expansion.
inline MonolithicSystem assemble_deformed(const DofMap& dm, double mu, double viscosity,
                                          const Eigen::MatrixX2d* wind = nullptr) {
  const GeometryConfig& g = dm.mesh().geometry();
  auto geoms = dm.mesh().deformed_elements(mu);
  ElementCoefficients ident;
  ident.nu = viscosity * Eigen::Matrix2d::Identity();
  ident.advection = wind != nullptr;
  auto coeffs = [ident](const ElementGeometry&) { return ident; };
  LocalBlockSystem sys = assemble_local(dm, coeffs, wind, &geoms);
  auto plain_dirichlet = [&](int gid, int c) {
    std::array<double, kNumLiftingTerms> t{0, 0, 0, 0};
    if (c == 0 && dm.node_class(gid) == NodeClass::Inflow) {
      double yt = deformed_y(g, mu, dm.node_coord(gid).y());
      t[0] = yt * (g.channel_height - yt);  // physical parabolic profile
    }
    return t;
  };
  return gather_and_lift_t(dm, sys, plain_dirichlet);
}

/// One parameter-independent matrix of the affine expansion, with its
/// per-lifting-term rhs vectors.
struct AffineTerm {
  TermDescriptor desc;
  MonolithicSystem sys;
};

/// Coefficient mask assembling exactly one affine term on its map group.
inline CoefficientProvider term_coefficients(const GeometryConfig& geom, const TermDescriptor& d,
                                             double viscosity) {
  return [geom, d, viscosity](const ElementGeometry& e) {
    ElementCoefficients c = ElementCoefficients::none();
    Strip s = strip_of(geom, e.y0 + 0.5 * e.hy);
    if (group_of(s) != d.group) return c;
    switch (d.kind) {
      case OperatorKind::DiffusionXX: c.diffusion = true; c.nu(0, 0) = viscosity; break;
      case OperatorKind::DiffusionYY: c.diffusion = true; c.nu(1, 1) = viscosity; break;
      case OperatorKind::DivergenceX: c.divergence = true; c.chi(0, 0) = 1.0; break;
      case OperatorKind::DivergenceY: c.divergence = true; c.chi(1, 1) = 1.0; break;
      case OperatorKind::AdvectionX: c.advection = true; c.pi(0, 0) = 1.0; break;
      case OperatorKind::AdvectionY: c.advection = true; c.pi(1, 1) = 1.0; break;
    }
    return c;
  };
}

/// The Stokes (wind-independent) part of the affine family: 8 terms.
struct AffineFamily {
  std::vector<AffineTerm> linear;

  /// sum_i Theta_i(mu) A_i as one sparse matrix plus combined lifting vectors.
  MonolithicSystem evaluate(const GeometryConfig& g, double mu) const {
    MonolithicSystem out;
    out.A = Eigen::SparseMatrix<double>(linear.front().sys.A.rows(), linear.front().sys.A.cols());
    for (auto& l : out.lift) l = Eigen::VectorXd::Zero(out.A.rows());
    for (const auto& t : linear) {
      double th = theta_value(g, mu, t.desc);
      out.A += th * t.sys.A;
      for (int j = 0; j < kNumLiftingTerms; ++j) out.lift[j] += th * t.sys.lift[j];
    }
    return out;
  }
};

inline AffineFamily assemble_affine_family(const DofMap& dm, double viscosity) {
  const GeometryConfig& g = dm.mesh().geometry();
  AffineFamily fam;
  for (const auto& d : affine_term_descriptors()) {
    if (is_advection(d.kind)) continue;  // wind-dependent; see advection_term
    AffineTerm t{d, gather_and_lift(dm, assemble_local(dm, term_coefficients(g, d, viscosity)))};
    fam.linear.push_back(std::move(t));
  }
  return fam;
}

/// One affine advection term assembled with a given full-order wind field.
inline MonolithicSystem advection_term(const DofMap& dm, const TermDescriptor& d,
                                       const Eigen::MatrixX2d& wind) {
  return gather_and_lift(dm, assemble_local(dm, term_coefficients(dm.mesh().geometry(), d, 1.0), &wind));
}

/// Advection-term descriptors in fixed order (4 of them).
inline std::vector<TermDescriptor> advection_descriptors() {
  std::vector<TermDescriptor> out;
  for (const auto& d : affine_term_descriptors())
    if (is_advection(d.kind)) out.push_back(d);
  return out;
}

}  // namespace semrom
