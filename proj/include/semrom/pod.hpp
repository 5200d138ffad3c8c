#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace semrom {

/// POD basis of a snapshot matrix: the leading left singular vectors covering
/// the requested energy fraction, plus the full spectrum for reporting.
///
/// A structured state basis (pairs > 0) additionally records the per-block
/// spectra. Its columns are arranged as [velocity modes | supremizers |
/// pressure modes], k of each; the supremizers are derived stabilization
/// vectors, so the POD mode count is 2k while the column count is 3k.
struct PodBasis {
  Eigen::MatrixXd modes;            // n_delta x num_modes, orthonormal columns
  Eigen::VectorXd singular_values;  // full spectrum (pooled relative if structured)
  double energy_threshold = 0.0;

  int pairs = 0;                       // k of the structured basis, 0 if plain
  Eigen::VectorXd velocity_spectrum;   // full velocity-block spectrum
  Eigen::VectorXd pressure_spectrum;   // full pressure-block spectrum

  int num_modes() const { return static_cast<int>(modes.cols()); }
  int num_pod_modes() const { return pairs > 0 ? 2 * pairs : num_modes(); }
};

inline PodBasis compute_pod(const Eigen::MatrixXd& snapshots, double energy_threshold = 0.9999) {
  if (snapshots.cols() == 0 || snapshots.rows() == 0)
    throw std::invalid_argument("compute_pod: empty snapshot set");
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0))
    throw std::invalid_argument("compute_pod: energy threshold must lie in (0, 1]");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  double total = sv.squaredNorm();

  // numerical rank cutoff, then the smallest N reaching the energy fraction
  double rank_tol = sv.size() ? sv(0) * 1e-12 * std::sqrt(double(snapshots.rows())) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol) ++rank;
  rank = std::max(rank, 1);

  int n = 0;
  double cum = 0.0;
  while (n < rank) {
    cum += sv(n) * sv(n);
    ++n;
    if (cum >= energy_threshold * total) break;
  }

  PodBasis basis;
  basis.modes = svd.matrixU().leftCols(n);
  basis.singular_values = sv;
  basis.energy_threshold = energy_threshold;
  return basis;
}

/// Full-order state from reduced coordinates: x = U alpha.
inline Eigen::VectorXd reconstruct(const PodBasis& pod, const Eigen::VectorXd& alpha) {
  if (alpha.size() != pod.modes.cols())
    throw std::invalid_argument("reconstruct: coordinate dimension mismatch");
  return pod.modes * alpha;
}

}  // namespace semrom
