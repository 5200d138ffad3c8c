#include <catch2/catch_amalgamated.hpp>

#include "semrom/quadrature.hpp"
#include "semrom/reference_element.hpp"

using namespace semrom;

TEST_CASE("GLL rule: closed-form low orders") {
  auto r1 = gll_rule(1);
  CHECK(r1.nodes(0) == Catch::Approx(-1.0));
  CHECK(r1.nodes(1) == Catch::Approx(1.0));
  CHECK(r1.weights(0) == Catch::Approx(1.0));
  CHECK(r1.weights(1) == Catch::Approx(1.0));

  auto r2 = gll_rule(2);
  CHECK(r2.nodes(0) == Catch::Approx(-1.0));
  CHECK(r2.nodes(1) == Catch::Approx(0.0).margin(1e-15));
  CHECK(r2.nodes(2) == Catch::Approx(1.0));
  CHECK(r2.weights(0) == Catch::Approx(1.0 / 3.0));
  CHECK(r2.weights(1) == Catch::Approx(4.0 / 3.0));
  CHECK(r2.weights(2) == Catch::Approx(1.0 / 3.0));
  // exactness on x^2
  double I = 0;
  for (int i = 0; i < 3; ++i) I += r2.weights(i) * r2.nodes(i) * r2.nodes(i);
  CHECK(I == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("GLL rule: weights sum to 2, nodes increasing, odd monomials vanish") {
  for (int p : {1, 2, 3, 5, 8, 11, 16}) {
    auto r = gll_rule(p);
    CHECK(r.weights.sum() == Catch::Approx(2.0).epsilon(1e-13));
    CHECK(r.nodes(0) == -1.0);
    CHECK(r.nodes(p) == 1.0);
    for (int i = 0; i + 1 <= p; ++i) CHECK(r.nodes(i) < r.nodes(i + 1));
    double I = 0;
    for (int i = 0; i <= p; ++i) I += r.weights(i) * std::pow(r.nodes(i), 2 * p - 1);
    CHECK(I == Catch::Approx(0.0).margin(1e-13));
  }
  CHECK_THROWS_AS(gll_rule(0), std::invalid_argument);
}

TEST_CASE("GLL rule: exact for degree 2p-1") {
  // int x^(2p-2) on [-1,1] = 2/(2p-1), highest even degree that must be exact
  for (int p : {3, 6, 9}) {
    auto r = gll_rule(p);
    double I = 0;
    for (int i = 0; i <= p; ++i) I += r.weights(i) * std::pow(r.nodes(i), 2 * p - 2);
    CHECK(I == Catch::Approx(2.0 / (2 * p - 1)).epsilon(1e-12));
  }
}

TEST_CASE("Gauss rule: exactness and symmetry") {
  for (int n : {1, 2, 4, 7}) {
    auto r = gauss_rule(n);
    CHECK(r.weights.sum() == Catch::Approx(2.0).epsilon(1e-13));
    double I = 0;
    for (int i = 0; i < n; ++i) I += r.weights(i) * std::pow(r.nodes(i), 2 * n - 2);
    CHECK(I == Catch::Approx(2.0 / (2 * n - 1)).epsilon(1e-12));
  }
}

TEST_CASE("Differentiation matrix") {
  auto r = gll_rule(2);
  auto D = diff_matrix(r.nodes);

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK((D * ones).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(((D * r.nodes) - ones).cwiseAbs().maxCoeff() < 1e-13);

  Eigen::VectorXd x2 = r.nodes.array().square();
  Eigen::VectorXd d = D * x2;
  CHECK(d(0) == Catch::Approx(-2.0));
  CHECK(d(1) == Catch::Approx(0.0).margin(1e-14));
  CHECK(d(2) == Catch::Approx(2.0));

  for (int p : {5, 9}) {
    auto rp = gll_rule(p);
    auto Dp = diff_matrix(rp.nodes);
    CHECK((Dp * Eigen::VectorXd::Ones(p + 1)).cwiseAbs().maxCoeff() < 1e-12);
  }
  Eigen::VectorXd dup(3);
  dup << 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(diff_matrix(dup), std::invalid_argument);
}

TEST_CASE("Reference element invariants") {
  ReferenceElement ref(6);
  CHECK(ref.order_pressure() == 4);
  CHECK(ref.weights_1d().sum() == Catch::Approx(2.0));
  CHECK(static_cast<int>(ref.boundary_nodes().size()) == 4 * 6);
  CHECK(static_cast<int>(ref.interior_nodes().size()) == 25);

  // interior modes vanish on all four edges: interior nodal basis functions
  // are Lagrange at strictly interior nodes, so their edge values are zero by
  // construction; check via barycentric evaluation at off-node edge points.
  auto edge_pts = gauss_rule(4).nodes;
  for (int k : {0, 7, 24}) {
    int ix = ref.interior_nodes()[k] % 7, iy = ref.interior_nodes()[k] / 7;
    for (int q = 0; q < 4; ++q) {
      double lx_at_edge = lagrange_basis_at(ref.nodes_1d(), edge_pts(q))(ix);
      double ly_at_pm1 = lagrange_basis_at(ref.nodes_1d(), 1.0)(iy);
      CHECK(std::abs(lx_at_edge * ly_at_pm1) < 1e-14);  // value on edge y = +1
    }
  }
  CHECK_THROWS_AS(ReferenceElement(2), std::invalid_argument);
}
