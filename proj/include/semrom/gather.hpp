#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "semrom/geometry.hpp"
#include "semrom/mesh.hpp"
#include "semrom/reference_element.hpp"

namespace semrom {

enum class NodeClass { Free, Inflow, Wall, Outflow };

/// Local-to-global numbering, Dirichlet tagging and the monolithic DOF layout
/// (v_bnd, p, v_int) with Dirichlet DOFs removed.
///
/// Node ids: shared-capable nodes (on element edges, matched across elements
/// through the structured lattice) come first, element-private interior nodes
/// follow. Velocity DOFs interleave components per node.
class DofMap {
 public:
  DofMap(const Mesh& mesh, const ReferenceElement& ref)
      : mesh_(&mesh), ref_(&ref), p_(ref.order_velocity()) {
    const int nlx = mesh.ncx() * p_ + 1;
    const auto& xi = ref.nodes_1d();
    const int nv = ref.num_nodes();
    const int ni = ref.num_pressure_nodes();  // (p-1)^2 interior velocity nodes too

    std::vector<int> lattice(static_cast<std::size_t>(nlx) * (mesh.ncy() * p_ + 1), -1);
    node_gid_.assign(mesh.num_elements(), std::vector<int>(nv, -1));

    // interior ordinal of a local node, -1 for edge nodes
    std::vector<int> interior_ord(nv, -1);
    for (int k = 0; k < ni; ++k) interior_ord[ref.interior_nodes()[k]] = k;

    // pass 1: number shared (edge-lattice) nodes
    for (const auto& e : mesh.elements())
      for (int b = 0; b <= p_; ++b)
        for (int a = 0; a <= p_; ++a) {
          int n = ref.node_index(a, b);
          if (interior_ord[n] >= 0) continue;
          int lx = e.ix * p_ + a, ly = e.iy * p_ + b;
          int& slot = lattice[static_cast<std::size_t>(ly) * nlx + lx];
          if (slot < 0) {
            slot = num_shared_++;
            coords_.emplace_back(e.x0 + e.jac_x() * (xi(a) + 1.0),
                                 e.y0 + e.jac_y() * (xi(b) + 1.0));
          }
          node_gid_[e.element_id][n] = slot;
        }

    // pass 2: element-private interior nodes
    for (const auto& e : mesh.elements())
      for (int b = 1; b < p_; ++b)
        for (int a = 1; a < p_; ++a) {
          int n = ref.node_index(a, b);
          node_gid_[e.element_id][n] = num_shared_ + e.element_id * ni + interior_ord[n];
        }
    for (const auto& e : mesh.elements())
      for (int b = 1; b < p_; ++b)
        for (int a = 1; a < p_; ++a)
          coords_.emplace_back(e.x0 + e.jac_x() * (xi(a) + 1.0),
                               e.y0 + e.jac_y() * (xi(b) + 1.0));
    num_nodes_ = num_shared_ + mesh.num_elements() * ni;

    classify_nodes();

    // DOF layout: free shared velocity nodes, pressure, interior velocity
    free_index_.assign(num_shared_, -1);
    for (int s = 0; s < num_shared_; ++s)
      if (!is_dirichlet(s)) free_index_[s] = num_free_shared_++;
    off_pressure_ = 2 * num_free_shared_;
    off_interior_ = off_pressure_ + mesh.num_elements() * ni;
    n_delta_ = off_interior_ + 2 * mesh.num_elements() * ni;
  }

  const Mesh& mesh() const { return *mesh_; }
  const ReferenceElement& ref() const { return *ref_; }

  int num_shared_nodes() const { return num_shared_; }
  int num_nodes() const { return num_nodes_; }
  int num_free_shared_nodes() const { return num_free_shared_; }
  int n_delta() const { return n_delta_; }
  int n_boundary_dofs() const { return 2 * num_free_shared_; }
  int n_pressure_dofs() const { return off_interior_ - off_pressure_; }
  int n_interior_dofs() const { return n_delta_ - off_interior_; }
  int pressure_offset() const { return off_pressure_; }

  int node_gid(int elem, int local_node) const { return node_gid_[elem][local_node]; }
  const Eigen::Vector2d& node_coord(int gid) const { return coords_[gid]; }
  NodeClass node_class(int gid) const {
    return gid < num_shared_ ? class_[gid] : NodeClass::Free;
  }
  bool is_dirichlet(int gid) const {
    if (gid >= num_shared_) return false;
    return class_[gid] == NodeClass::Inflow || class_[gid] == NodeClass::Wall;
  }

  /// Monolithic DOF of a velocity unknown, or -1 for a Dirichlet node.
  int vel_dof(int gid, int comp) const {
    if (gid < num_shared_) {
      int f = free_index_[gid];
      return f < 0 ? -1 : 2 * f + comp;
    }
    return off_interior_ + 2 * (gid - num_shared_) + comp;
  }

  int pressure_dof(int elem, int local_pressure_node) const {
    return off_pressure_ + elem * ref_->num_pressure_nodes() + local_pressure_node;
  }

  /// Affine-term decomposition of the Dirichlet data: value of component comp
  /// at node gid is sum_j beta_j(mu) * dirichlet_terms(gid, comp)[j].
  std::array<double, kNumLiftingTerms> dirichlet_terms(int gid, int comp) const {
    std::array<double, kNumLiftingTerms> z{0, 0, 0, 0};
    if (comp != 0 || node_class(gid) != NodeClass::Inflow) return z;
    return inflow_value_terms(mesh_->geometry(), coords_[gid].y());
  }

  double dirichlet_value(int gid, int comp, double mu) const {
    auto beta = lifting_beta(mesh_->geometry(), mu);
    auto t = dirichlet_terms(gid, comp);
    double v = 0.0;
    for (int j = 0; j < kNumLiftingTerms; ++j) v += beta[j] * t[j];
    return v;
  }

  /// Full nodal velocity field (num_nodes x 2) from a monolithic vector,
  /// Dirichlet nodes filled with their data at mu.
  Eigen::MatrixX2d expand_velocity(const Eigen::VectorXd& x, double mu) const {
    Eigen::MatrixX2d u = Eigen::MatrixX2d::Zero(num_nodes_, 2);
    for (int g = 0; g < num_nodes_; ++g)
      for (int c = 0; c < 2; ++c) {
        int d = vel_dof(g, c);
        u(g, c) = d >= 0 ? x(d) : dirichlet_value(g, c, mu);
      }
    return u;
  }

  /// The 0/1 gather matrix M from element-local boundary DOFs to global shared
  /// DOFs (nodal, one component).
  Eigen::SparseMatrix<double> gather_matrix() const {
    const auto& bn = ref_->boundary_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    int row = 0;
    for (const auto& e : mesh_->elements())
      for (int n : bn) trip.emplace_back(row++, node_gid_[e.element_id][n], 1.0);
    Eigen::SparseMatrix<double> M(row, num_shared_);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
  }

 private:
  void classify_nodes() {
    const GeometryConfig& g = mesh_->geometry();
    const double tol = 1e-9;
    class_.assign(num_shared_, NodeClass::Free);
    for (int s = 0; s < num_shared_; ++s) {
      double x = coords_[s].x(), y = coords_[s].y();
      bool on_x0 = std::abs(x) < tol, on_x1 = std::abs(x - g.channel_length) < tol;
      bool wall = std::abs(y) < tol || std::abs(y - g.channel_height) < tol;
      bool on_nf0 = std::abs(x - g.narrowing_x0) < tol, on_nf1 = std::abs(x - g.narrowing_x1) < tol;
      bool outside_gap = y <= g.gap_y0() + tol || y >= g.gap_y1() - tol;
      if ((on_nf0 || on_nf1) && outside_gap) wall = true;
      bool in_span = x >= g.narrowing_x0 - tol && x <= g.narrowing_x1 + tol;
      if (in_span && (std::abs(y - g.gap_y0()) < tol || std::abs(y - g.gap_y1()) < tol)) wall = true;
      if (wall)
        class_[s] = NodeClass::Wall;
      else if (on_x0)
        class_[s] = NodeClass::Inflow;
      else if (on_x1)
        class_[s] = NodeClass::Outflow;
    }
  }

  const Mesh* mesh_;
  const ReferenceElement* ref_;
  int p_;
  int num_shared_ = 0, num_nodes_ = 0, num_free_shared_ = 0;
  int off_pressure_ = 0, off_interior_ = 0, n_delta_ = 0;
  std::vector<std::vector<int>> node_gid_;
  std::vector<Eigen::Vector2d> coords_;
  std::vector<NodeClass> class_;
  std::vector<int> free_index_;
};

}  // namespace semrom
