#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "semrom/reduced_model.hpp"

using namespace semrom;

namespace {

// Shared small FOM plus offline data for the suite.
struct RomFixture {
  FomContext ctx{GeometryConfig{}, MeshConfig{1, 1}, 4, 1.0};
  SnapshotSet snaps;
  PodBasis pod;
  ReducedModel model;

  RomFixture() {
    std::vector<double> params;
    for (int i = 0; i < 8; ++i) params.push_back(0.1 + (2.9 - 0.1) * i / 7.0);
    snaps = snapshot_sweep(ctx, params, 1e-9, 80);
    pod = compute_state_pod(ctx, snaps.states, 0.9999);
    model = build_reduced_model(ctx.dofmap, pod, ctx.viscosity);
  }
};

RomFixture& fix() {
  static RomFixture f;
  return f;
}

}  // namespace

TEST_CASE("compute_pod recovers a synthetic rank-3 spectrum exactly") {
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd A(50, 8), B(8, 8);
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) A(i, j) = gauss(rng);
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) B(i, j) = gauss(rng);
  Eigen::MatrixXd U0 = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ() *
                       Eigen::MatrixXd::Identity(50, 3);
  Eigen::MatrixXd V0 = Eigen::HouseholderQR<Eigen::MatrixXd>(B).householderQ() *
                       Eigen::MatrixXd::Identity(8, 3);
  Eigen::Vector3d sv(7.0, 2.0, 0.5);
  Eigen::MatrixXd S = U0 * sv.asDiagonal() * V0.transpose();

  PodBasis full = compute_pod(S, 1.0);
  CHECK(full.num_modes() == 3);  // numerical rank
  for (int i = 0; i < 3; ++i)
    CHECK(full.singular_values(i) == Catch::Approx(sv(i)).margin(1e-12));
  // energy 0.95: 49/53.25 < 0.95 <= 53/53.25, so two modes
  PodBasis two = compute_pod(S, 0.95);
  CHECK(two.num_modes() == 2);
  CHECK_THROWS_AS(compute_pod(Eigen::MatrixXd(), 0.9), std::invalid_argument);
  CHECK_THROWS_AS(compute_pod(S, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_pod(S, 1.5), std::invalid_argument);
}

TEST_CASE("compute_pod: repeated column collapses to one mode") {
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(30, 1.0, 4.0);
  Eigen::MatrixXd S = v.replicate(1, 40);
  PodBasis pod = compute_pod(S, 0.999999999);
  CHECK(pod.num_modes() == 1);
}

TEST_CASE("state basis: orthonormal columns, pair structure, spectra") {
  const PodBasis& pod = fix().pod;
  Eigen::MatrixXd G = pod.modes.transpose() * pod.modes;
  CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(pod.pairs >= 1);
  CHECK(pod.num_modes() == 3 * pod.pairs);
  CHECK(pod.num_pod_modes() == 2 * pod.pairs);
  // pooled reported spectrum and both block spectra are non-increasing
  for (int i = 1; i < pod.singular_values.size(); ++i)
    CHECK(pod.singular_values(i) <= pod.singular_values(i - 1) + 1e-14);
  for (int i = 1; i < pod.velocity_spectrum.size(); ++i)
    CHECK(pod.velocity_spectrum(i) <= pod.velocity_spectrum(i - 1) + 1e-14);
  for (int i = 1; i < pod.pressure_spectrum.size(); ++i)
    CHECK(pod.pressure_spectrum(i) <= pod.pressure_spectrum(i - 1) + 1e-14);

  // velocity modes live on velocity rows, pressure modes on pressure rows
  const DofMap& dm = fix().ctx.dofmap;
  const int p0 = dm.pressure_offset(), p1 = p0 + dm.n_pressure_dofs();
  for (int m = 0; m < 2 * pod.pairs; ++m)
    CHECK(pod.modes.col(m).segment(p0, p1 - p0).cwiseAbs().maxCoeff() < 1e-14);
  for (int m = 2 * pod.pairs; m < 3 * pod.pairs; ++m) {
    Eigen::VectorXd col = pod.modes.col(m);
    col.segment(p0, p1 - p0).setZero();
    CHECK(col.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("reconstruct: trivial coordinates and snapshot projection") {
  const PodBasis& pod = fix().pod;
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(pod.num_modes());
  CHECK(reconstruct(pod, zero).cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXd e1 = zero;
  e1(0) = 1.0;
  CHECK((reconstruct(pod, e1) - pod.modes.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(reconstruct(pod, Eigen::VectorXd::Zero(pod.num_modes() + 1)),
                  std::invalid_argument);

  // project-then-reconstruct at full rank is the identity on snapshots
  PodBasis full = compute_pod(fix().snaps.states, 1.0);
  for (int c = 0; c < fix().snaps.states.cols(); ++c) {
    Eigen::VectorXd x = fix().snaps.states.col(c);
    Eigen::VectorXd back = full.modes * (full.modes.transpose() * x);
    CHECK((back - x).norm() < 1e-10 * x.norm());
  }
}

TEST_CASE("project_affine: algebraic identities") {
  const PodBasis& pod = fix().pod;
  const int nd = fix().ctx.dofmap.n_delta();
  AffineFamily fam;
  // identity and a random symmetric sparse matrix as fake linear terms
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::SparseMatrix<double> I(nd, nd);
  I.setIdentity();
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < 5 * nd; ++k) {
    int i = rng() % nd, j = rng() % nd;
    double v = u(rng);
    trip.emplace_back(i, j, v);
    trip.emplace_back(j, i, v);
  }
  Eigen::SparseMatrix<double> R(nd, nd);
  R.setFromTriplets(trip.begin(), trip.end());

  for (const auto& mat : {I, R}) {
    AffineTerm t;
    t.desc = affine_term_descriptors()[0];
    t.sys.A = mat;
    for (auto& l : t.sys.lift) l = Eigen::VectorXd::Zero(nd);
    fam.linear.push_back(std::move(t));
  }
  ReducedModel rm;
  project_affine(pod, fam, rm);
  CHECK((rm.A_hat[0] - Eigen::MatrixXd::Identity(pod.num_modes(), pod.num_modes()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((rm.A_hat[1] - rm.A_hat[1].transpose()).cwiseAbs().maxCoeff() < 1e-12);
  // linearity: projection of a weighted sum equals the weighted sum of projections
  Eigen::MatrixXd lhs = pod.modes.transpose() * ((2.0 * I + 0.3 * R) * pod.modes);
  Eigen::MatrixXd rhs = 2.0 * rm.A_hat[0] + 0.3 * rm.A_hat[1];
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + lhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("offline-online exactness: stored tensors reproduce direct projection") {
  const RomFixture& f = fix();
  const Eigen::MatrixXd& U = f.pod.modes;
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> umu(0.1, 2.9), ua(-0.5, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    double mu = umu(rng);
    Eigen::VectorXd alpha(f.model.num_modes);
    for (int i = 0; i < alpha.size(); ++i) alpha(i) = ua(rng);

    ReducedOperator op = reduced_operator(f.model, mu, alpha);

    // truth: assemble the full-order Oseen operator with the expanded wind
    Eigen::MatrixX2d wind = f.ctx.dofmap.expand_velocity(U * alpha, mu);
    MonolithicSystem sys = assemble_direct(f.ctx.dofmap, mu, f.ctx.viscosity, &wind);
    Eigen::MatrixXd A_truth = U.transpose() * (sys.A * U);
    Eigen::VectorXd b_truth = U.transpose() * sys.rhs(f.ctx.geom, mu);

    CHECK((op.A - A_truth).cwiseAbs().maxCoeff() <
          1e-10 * (1.0 + A_truth.cwiseAbs().maxCoeff()));
    CHECK((op.b - b_truth).cwiseAbs().maxCoeff() <
          1e-10 * (1.0 + b_truth.cwiseAbs().maxCoeff()));
  }
  // alpha = 0 still carries the lifting wind, matching the zero-coordinate truth
  double mu = 1.3;
  ReducedOperator op0 = reduced_operator(f.model, mu, Eigen::VectorXd::Zero(f.model.num_modes));
  Eigen::MatrixX2d wind0 =
      f.ctx.dofmap.expand_velocity(Eigen::VectorXd::Zero(f.ctx.dofmap.n_delta()), mu);
  MonolithicSystem sys0 = assemble_direct(f.ctx.dofmap, mu, f.ctx.viscosity, &wind0);
  Eigen::MatrixXd A0 = U.transpose() * (sys0.A * U);
  CHECK((op0.A - A0).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + A0.cwiseAbs().maxCoeff()));
}

TEST_CASE("online solve: convergence and reduced residual consistency") {
  const RomFixture& f = fix();
  for (double mu : {0.35, 1.2, 2.6}) {
    ReducedState s = online_solve(f.model, mu, 1e-10);
    REQUIRE(s.converged);
    // plug the reconstructed state into the directly assembled truth system
    Eigen::VectorXd x = reconstruct(f.pod, s.alpha);
    Eigen::MatrixX2d wind = f.ctx.dofmap.expand_velocity(x, mu);
    MonolithicSystem sys = assemble_direct(f.ctx.dofmap, mu, f.ctx.viscosity, &wind);
    Eigen::VectorXd res =
        f.pod.modes.transpose() * (sys.A * x - sys.rhs(f.ctx.geom, mu));
    Eigen::VectorXd rhs_r = f.pod.modes.transpose() * sys.rhs(f.ctx.geom, mu);
    CHECK(res.norm() < 1e-8 * rhs_r.norm());
  }
  CHECK_THROWS_AS(online_solve(f.model, 3.5), std::out_of_range);
  CHECK_THROWS_AS(online_solve(f.model, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("online solve reproduces snapshots within the POD truncation tail") {
  const RomFixture& f = fix();
  // velocity snapshots are unit-normalized before the block SVD, so each one's
  // best-approximation error is bounded by the absolute discarded energy
  double tail2 = 0.0;
  for (int i = f.pod.pairs; i < f.pod.velocity_spectrum.size(); ++i)
    tail2 += f.pod.velocity_spectrum(i) * f.pod.velocity_spectrum(i);
  double tail = std::sqrt(tail2);
  for (std::size_t i = 0; i < f.snaps.parameters.size(); ++i) {
    double mu = f.snaps.parameters[i];
    ReducedState s = online_solve(f.model, mu, 1e-10);
    REQUIRE(s.converged);
    Eigen::VectorXd x = reconstruct(f.pod, s.alpha);
    double err = relative_velocity_error(f.ctx, mu, f.snaps.states.col(i), x);
    CHECK(err <= std::max(tail, 1e-7));
  }
}

TEST_CASE("error study: non-increasing errors, small at full size") {
  const RomFixture& f = fix();
  std::vector<double> params{0.5, 1.5, 2.5};
  Eigen::MatrixXd truths(f.ctx.dofmap.n_delta(), 3);
  for (int i = 0; i < 3; ++i) {
    FlowState fs = oseen_solve(f.ctx, params[i], Eigen::VectorXd(), 1e-10);
    REQUIRE(fs.converged);
    truths.col(i) = fs.x;
  }
  auto rows = error_study(f.ctx, f.model, f.pod, params, truths, 1e-10);
  REQUIRE(static_cast<int>(rows.size()) == f.model.pairs);
  CHECK(rows.back().n == 2 * f.model.pairs);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].max_error <= rows[i - 1].max_error + 1e-6);
  CHECK(rows.back().max_error < 0.05);
}

TEST_CASE("truncated model matches a model built from the truncated basis") {
  const RomFixture& f = fix();
  int n = std::max(1, f.model.pairs - 1);
  ReducedModel cut = f.model.truncated(n);
  PodBasis sub;
  sub.modes = truncated_basis(f.pod, n);
  sub.pairs = n;
  sub.singular_values = f.pod.singular_values;
  sub.energy_threshold = f.pod.energy_threshold;
  ReducedModel direct = build_reduced_model(f.ctx.dofmap, sub, f.ctx.viscosity);
  Eigen::VectorXd alpha = Eigen::VectorXd::LinSpaced(3 * n, -0.2, 0.3);
  ReducedOperator a = reduced_operator(cut, 1.7, alpha);
  ReducedOperator b = reduced_operator(direct, 1.7, alpha);
  CHECK((a.A - b.A).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + b.A.cwiseAbs().maxCoeff()));
  CHECK((a.b - b.b).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + b.b.cwiseAbs().maxCoeff()));
  CHECK_THROWS_AS(f.model.truncated(0), std::invalid_argument);
  CHECK_THROWS_AS(f.model.truncated(f.model.pairs + 1), std::invalid_argument);
}
