#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "semrom/geometry.hpp"

namespace semrom {

/// Axis-aligned quadrilateral element in (possibly deformed) domain coordinates.
/// The element map [-1,1]^2 -> element has constant Jacobian diag(hx/2, hy/2).
struct ElementGeometry {
  int element_id = 0;
  int ix = 0, iy = 0;  // position in the structured cell raster
  double x0 = 0, y0 = 0, hx = 0, hy = 0;
  int subdomain_id = 0;

  double jac_x() const { return 0.5 * hx; }
  double jac_y() const { return 0.5 * hy; }
  double jac_det() const { return jac_x() * jac_y(); }
};

struct MeshConfig {
  int elems_per_unit_x = 2;
  int elems_per_unit_y = 1;
};

/// Structured quadrilateral mesh of the reference fluid domain, aligned with
/// the subdomain breakpoints (narrowing span in x, strip interfaces in y).
class Mesh {
 public:
  Mesh(const GeometryConfig& geom, const MeshConfig& cfg) : geom_(geom) {
    geom.validate();
    ncx_ = static_cast<int>(std::lround(geom.channel_length * cfg.elems_per_unit_x));
    ncy_ = static_cast<int>(std::lround(geom.channel_height * cfg.elems_per_unit_y));
    hx_ = geom.channel_length / ncx_;
    hy_ = geom.channel_height / ncy_;
    for (double bp : {geom.narrowing_x0, geom.narrowing_x1}) check_aligned(bp, hx_, "x");
    for (double bp : {geom.gap_y0(), geom.gap_y1()}) check_aligned(bp, hy_, "y");

    cell_elem_.assign(ncx_ * ncy_, -1);
    for (int iy = 0; iy < ncy_; ++iy)
      for (int ix = 0; ix < ncx_; ++ix) {
        double xc = (ix + 0.5) * hx_, yc = (iy + 0.5) * hy_;
        if (is_solid(geom, xc, yc)) continue;
        ElementGeometry e;
        e.element_id = static_cast<int>(elements_.size());
        e.ix = ix;
        e.iy = iy;
        e.x0 = ix * hx_;
        e.y0 = iy * hy_;
        e.hx = hx_;
        e.hy = hy_;
        e.subdomain_id = subdomain_id_at(geom, xc, yc);
        cell_elem_[iy * ncx_ + ix] = e.element_id;
        elements_.push_back(e);
      }
  }

  const GeometryConfig& geometry() const { return geom_; }
  const std::vector<ElementGeometry>& elements() const { return elements_; }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int ncx() const { return ncx_; }
  int ncy() const { return ncy_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int element_at_cell(int ix, int iy) const { return cell_elem_[iy * ncx_ + ix]; }

  Strip strip_of_element(const ElementGeometry& e) const {
    return strip_of(geom_, e.y0 + 0.5 * e.hy);
  }

  /// Element geometries of the physically deformed mesh at parameter mu.
  std::vector<ElementGeometry> deformed_elements(double mu) const {
    geom_.require_mu(mu);
    std::vector<ElementGeometry> out = elements_;
    for (auto& e : out) {
      Strip s = strip_of(geom_, e.y0 + 0.5 * e.hy);
      double c = strip_scale(geom_, s, mu);
      e.y0 = deformed_y(geom_, mu, e.y0);
      e.hy = c * e.hy;
    }
    return out;
  }

 private:
  static void check_aligned(double bp, double h, const char* dir) {
    double r = bp / h;
    if (std::abs(r - std::lround(r)) > 1e-9)
      throw std::invalid_argument(std::string("Mesh: subdomain breakpoint not aligned with the ") +
                                  dir + "-grid");
  }

  GeometryConfig geom_;
  int ncx_ = 0, ncy_ = 0;
  double hx_ = 0, hy_ = 0;
  std::vector<ElementGeometry> elements_;
  std::vector<int> cell_elem_;
};

}  // namespace semrom
