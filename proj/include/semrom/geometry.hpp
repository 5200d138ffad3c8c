#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace semrom {

/// Channel-with-narrowing domain, parametrized by the gap height mu.
///
/// Reference configuration: channel [0,L] x [0,H] with solid blocks at
/// x in [narrowing_x0, narrowing_x1], leaving a gap of height reference_gap
/// centered on gap_center_y. The deformed configuration for a gap height mu
/// rescales the three horizontal strips (below / inside / above the gap)
/// vertically, so the whole decomposition stays a union of axis-aligned
/// rectangles with matching interfaces for every mu.
struct GeometryConfig {
  double channel_length = 8.0;
  double channel_height = 3.0;
  double narrowing_x0 = 3.0;
  double narrowing_x1 = 5.0;
  double gap_center_y = 1.5;
  double reference_gap = 1.0;
  double mu_min = 0.1;
  double mu_max = 2.9;
  double inflow_strip_width = 0.5;  // keep-out zone for the narrowing at the inlet

  double gap_y0() const { return gap_center_y - 0.5 * reference_gap; }
  double gap_y1() const { return gap_center_y + 0.5 * reference_gap; }

  void validate() const {
    if (channel_length <= 0 || channel_height <= 0 || reference_gap <= 0)
      throw std::invalid_argument("GeometryConfig: lengths must be positive");
    if (gap_center_y * 2.0 != channel_height)
      throw std::invalid_argument("GeometryConfig: gap must be symmetric about mid-height");
    if (!(mu_min > 0.0 && mu_max < channel_height && mu_min <= mu_max))
      throw std::invalid_argument("GeometryConfig: mu range must lie inside (0, channel_height)");
    if (!(narrowing_x0 < narrowing_x1 && narrowing_x0 > 0.0 && narrowing_x1 < channel_length))
      throw std::invalid_argument("GeometryConfig: narrowing span must be strictly inside the channel");
    if (narrowing_x0 < inflow_strip_width)
      throw std::invalid_argument("GeometryConfig: narrowing span touches the inflow strip");
    if (gap_y0() <= 0.0 || gap_y1() >= channel_height)
      throw std::invalid_argument("GeometryConfig: reference gap must fit inside the channel");
  }

  void require_mu(double mu) const {
    if (!(mu >= mu_min && mu <= mu_max))
      throw std::out_of_range("mu = " + std::to_string(mu) + " outside [" +
                              std::to_string(mu_min) + ", " + std::to_string(mu_max) + "]");
  }
};

/// The three horizontal strips of the decomposition.
enum class Strip { Lower, Middle, Upper };

/// Map groups sharing the same deformation tensor.
enum class MapGroup { Middle, Outer };

inline Strip strip_of(const GeometryConfig& g, double y) {
  if (y < g.gap_y0()) return Strip::Lower;
  if (y > g.gap_y1()) return Strip::Upper;
  return Strip::Middle;
}

inline MapGroup group_of(Strip s) { return s == Strip::Middle ? MapGroup::Middle : MapGroup::Outer; }

/// Vertical scale of a strip, reference -> deformed.
inline double strip_scale(const GeometryConfig& g, Strip s, double mu) {
  if (s == Strip::Middle) return mu / g.reference_gap;
  return (g.channel_height - mu) / (g.channel_height - g.reference_gap);
}

inline double group_scale(const GeometryConfig& g, MapGroup grp, double mu) {
  return strip_scale(g, grp == MapGroup::Middle ? Strip::Middle : Strip::Lower, mu);
}

/// Deformed y-coordinate of a reference point.
inline double deformed_y(const GeometryConfig& g, double mu, double y) {
  switch (strip_of(g, y)) {
    case Strip::Lower:
      return y * strip_scale(g, Strip::Lower, mu);
    case Strip::Upper:
      return g.channel_height - (g.channel_height - y) * strip_scale(g, Strip::Upper, mu);
    default:
      return g.gap_center_y + (y - g.gap_center_y) * strip_scale(g, Strip::Middle, mu);
  }
}

/// Affine map x = T x_hat + g from a deformed subdomain onto its reference subdomain.
struct AffineMap {
  Eigen::Matrix2d T = Eigen::Matrix2d::Identity();
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  int subdomain_id = 0;

  Eigen::Vector2d apply(const Eigen::Vector2d& x_hat) const { return T * x_hat + g; }
  Eigen::Vector2d apply_inverse(const Eigen::Vector2d& x) const { return T.inverse() * (x - g); }
};

/// A reference subdomain: an axis-aligned rectangle plus its deformation role.
struct Subdomain {
  int id = 0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  Strip strip = Strip::Middle;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// The 5-subdomain decomposition of the reference domain:
///   1 upstream middle strip, 2 gap block, 3 downstream middle strip,
///   4 lower wall strip, 5 upper wall strip (4 and 5 each split by the solid blocks).
inline std::vector<Subdomain> build_subdomains(const GeometryConfig& g) {
  g.validate();
  std::vector<Subdomain> out;
  out.push_back({1, 0.0, g.narrowing_x0, g.gap_y0(), g.gap_y1(), Strip::Middle});
  out.push_back({2, g.narrowing_x0, g.narrowing_x1, g.gap_y0(), g.gap_y1(), Strip::Middle});
  out.push_back({3, g.narrowing_x1, g.channel_length, g.gap_y0(), g.gap_y1(), Strip::Middle});
  out.push_back({4, 0.0, g.channel_length, 0.0, g.gap_y0(), Strip::Lower});
  out.push_back({5, 0.0, g.channel_length, g.gap_y1(), g.channel_height, Strip::Upper});
  return out;
}

/// Whether a reference-domain rectangle is solid (inside a narrowing wall block).
inline bool is_solid(const GeometryConfig& g, double xc, double yc) {
  return xc > g.narrowing_x0 && xc < g.narrowing_x1 && strip_of(g, yc) != Strip::Middle;
}

/// Subdomain id of a reference-domain point (fluid assumed).
inline int subdomain_id_at(const GeometryConfig& g, double x, double y) {
  Strip s = strip_of(g, y);
  if (s == Strip::Lower) return 4;
  if (s == Strip::Upper) return 5;
  if (x < g.narrowing_x0) return 1;
  if (x > g.narrowing_x1) return 3;
  return 2;
}

struct AffineMapSet {
  double mu = 0;
  std::vector<AffineMap> maps;  // indexed by subdomain_id - 1

  const AffineMap& for_subdomain(int id) const { return maps.at(id - 1); }
};

/// Deformed -> reference maps for all 5 subdomains at parameter mu.
inline AffineMapSet subdomain_maps(const GeometryConfig& g, double mu) {
  g.validate();
  g.require_mu(mu);
  auto subs = build_subdomains(g);
  AffineMapSet set;
  set.mu = mu;
  for (const auto& s : subs) {
    AffineMap m;
    m.subdomain_id = s.id;
    double c = strip_scale(g, s.strip, mu);  // reference -> deformed scale
    m.T = Eigen::Matrix2d::Identity();
    m.T(1, 1) = 1.0 / c;
    switch (s.strip) {
      case Strip::Lower:
        m.g.setZero();
        break;
      case Strip::Upper:
        m.g = Eigen::Vector2d(0.0, g.channel_height * (1.0 - 1.0 / c));
        break;
      default:
        m.g = Eigen::Vector2d(0.0, g.gap_center_y * (1.0 - 1.0 / c));
        break;
    }
    set.maps.push_back(m);
  }
  return set;
}

/// Transformed diffusion and divergence/advection tensors of an affine map,
///   nu_ij  = T_ii' nuhat_i'j' T_jj' / det(T),   chi_ij = pi_ij = T_ij / det(T).
struct TransformTensors {
  Eigen::Matrix2d nu = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d chi = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d pi = Eigen::Matrix2d::Identity();
};

inline TransformTensors transform_tensors(const AffineMap& map, double nu_hat) {
  double det = map.T.determinant();
  if (!(det > 0.0)) throw std::invalid_argument("transform_tensors: det(T) must be positive");
  TransformTensors t;
  t.nu = nu_hat * (map.T * map.T.transpose()) / det;
  t.chi = map.T / det;
  t.pi = t.chi;
  return t;
}

enum class OperatorKind { DiffusionXX, DiffusionYY, DivergenceX, DivergenceY, AdvectionX, AdvectionY };

inline bool is_advection(OperatorKind k) {
  return k == OperatorKind::AdvectionX || k == OperatorKind::AdvectionY;
}

struct TermDescriptor {
  MapGroup group;
  OperatorKind kind;
};

/// Fixed, parameter-independent term layout of the affine expansion:
/// 6 operator kinds for each of the 2 map groups.
inline std::vector<TermDescriptor> affine_term_descriptors() {
  std::vector<TermDescriptor> d;
  for (MapGroup grp : {MapGroup::Middle, MapGroup::Outer})
    for (OperatorKind k : {OperatorKind::DiffusionXX, OperatorKind::DiffusionYY,
                           OperatorKind::DivergenceX, OperatorKind::DivergenceY,
                           OperatorKind::AdvectionX, OperatorKind::AdvectionY})
      d.push_back({grp, k});
  return d;
}

struct AffineCoefficients {
  std::vector<double> thetas;
  std::vector<TermDescriptor> term_descriptors;
};

/// Theta(mu) of a single affine term, read off the transformed tensors.
inline double theta_value(const GeometryConfig& g, double mu, const TermDescriptor& d) {
  auto maps = subdomain_maps(g, mu);
  // subdomain 2 (gap) carries the Middle map, 4 the Outer map
  const AffineMap& m = maps.for_subdomain(d.group == MapGroup::Middle ? 2 : 4);
  TransformTensors t = transform_tensors(m, 1.0);
  switch (d.kind) {
    case OperatorKind::DiffusionXX: return t.nu(0, 0);
    case OperatorKind::DiffusionYY: return t.nu(1, 1);
    case OperatorKind::DivergenceX: return t.chi(0, 0);
    case OperatorKind::DivergenceY: return t.chi(1, 1);
    case OperatorKind::AdvectionX: return t.pi(0, 0);
    case OperatorKind::AdvectionY: return t.pi(1, 1);
  }
  return 1.0;
}

/// Theta_i(mu) for the fixed term layout; all ones at the reference gap.
inline AffineCoefficients theta_coefficients(const GeometryConfig& g, double mu) {
  g.require_mu(mu);
  AffineCoefficients c;
  c.term_descriptors = affine_term_descriptors();
  for (const auto& d : c.term_descriptors) c.thetas.push_back(theta_value(g, mu, d));
  return c;
}

// ---------------------------------------------------------------------------
// Inflow data.
//
// The physical inflow profile on the deformed channel is u_x(0, yt) = yt(H-yt)
// for every mu. In reference coordinates the node positions move with the
// strips, so the nodal Dirichlet data is mu-dependent but admits an exact
// 4-term expansion  d(mu) = sum_j beta_j(mu) d_j :
//   j=0: 1        on the middle strip (constant part (H/2)^2)
//   j=1: mu^2     on the middle strip (quadratic part)
//   j=2: h_w      on the outer strips, h_w = (H-mu)/2
//   j=3: h_w^2    on the outer strips
// ---------------------------------------------------------------------------

inline constexpr int kNumLiftingTerms = 4;

inline std::array<double, kNumLiftingTerms> lifting_beta(const GeometryConfig& g, double mu) {
  double hw = strip_scale(g, Strip::Lower, mu) * (g.channel_height - g.reference_gap) / 2.0;
  double cm = strip_scale(g, Strip::Middle, mu);
  return {1.0, cm * cm, hw, hw * hw};
}

/// Per-term nodal values of the inflow profile at reference height y.
inline std::array<double, kNumLiftingTerms> inflow_value_terms(const GeometryConfig& g, double y) {
  const double H = g.channel_height, yc = g.gap_center_y;
  std::array<double, kNumLiftingTerms> v{0, 0, 0, 0};
  switch (strip_of(g, y)) {
    case Strip::Middle: {
      // wall strip has unit reference height, so y - yc maps to (y - yc) * mu
      double s = (y - yc) / g.reference_gap;
      v[0] = yc * yc;
      v[1] = -s * s * g.reference_gap * g.reference_gap;
      break;
    }
    case Strip::Lower: {
      double s = y / ((H - g.reference_gap) / 2.0);
      v[2] = H * s;
      v[3] = -s * s;
      break;
    }
    case Strip::Upper: {
      double s = (H - y) / ((H - g.reference_gap) / 2.0);
      v[2] = H * s;
      v[3] = -s * s;
      break;
    }
  }
  return v;
}

/// Inflow Dirichlet value u_x(0, y) at reference height y and parameter mu.
inline double inflow_value(const GeometryConfig& g, double mu, double y) {
  auto beta = lifting_beta(g, mu);
  auto terms = inflow_value_terms(g, y);
  double v = 0.0;
  for (int j = 0; j < kNumLiftingTerms; ++j) v += beta[j] * terms[j];
  return v;
}

}  // namespace semrom
