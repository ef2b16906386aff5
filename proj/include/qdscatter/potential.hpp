#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdscatter/error.hpp"
#include "qdscatter/grid.hpp"

namespace qdscatter {

enum class DotKind { single_dot, double_dot };

struct Well {
  double center = 0.0;  // nm
  double width = 0.0;   // nm
  double depth = 0.0;   // meV, positive number; the well sits at -depth

  double left() const { return center - 0.5 * width; }
  double right() const { return center + 0.5 * width; }
};

/// Square-well dot potential sampled on a grid. Each sample is the cell average of
/// the piecewise-constant profile over [x - h/2, x + h/2], so a well edge that falls
/// on a grid point contributes half the depth there.
struct PotentialProfile {
  DotKind kind = DotKind::single_dot;
  std::vector<Well> wells;
  double barrier_length = 0.0;
  Eigen::VectorXd samples;

  double extent_left() const {
    double lo = wells.front().left();
    for (const auto& w : wells) lo = std::min(lo, w.left());
    return lo;
  }
  double extent_right() const {
    double hi = wells.front().right();
    for (const auto& w : wells) hi = std::max(hi, w.right());
    return hi;
  }
  /// Potential at grid index i (meV).
  double operator()(std::size_t i) const { return samples[static_cast<Eigen::Index>(i)]; }
};

namespace detail {
inline double cell_overlap(double x, double h, double lo, double hi) {
  const double a = std::max(x - 0.5 * h, lo);
  const double b = std::min(x + 0.5 * h, hi);
  return std::max(0.0, b - a);
}
}  // namespace detail

inline PotentialProfile build_potential(DotKind kind, const Grid1D& grid, double well_depth,
                                        double well_width, double barrier_length = 0.0) {
  require(well_depth >= 0.0, ErrorCode::invalid_parameter, "well depth must be non-negative");
  require(well_width > 0.0, ErrorCode::invalid_parameter, "well width must be positive");
  PotentialProfile p;
  p.kind = kind;
  const double c = grid.center();
  if (kind == DotKind::single_dot) {
    p.wells.push_back({c, well_width, well_depth});
  } else {
    require(barrier_length > 0.0, ErrorCode::invalid_parameter,
            "double dot needs a positive barrier length");
    const double offset = 0.5 * (barrier_length + well_width);
    p.wells.push_back({c - offset, well_width, well_depth});
    p.wells.push_back({c + offset, well_width, well_depth});
    p.barrier_length = barrier_length;
  }
  const double span = p.extent_right() - p.extent_left();
  const double margin = 3.0 * well_width;
  require(p.extent_left() >= margin && grid.length() - p.extent_right() >= margin,
          ErrorCode::geometry,
          "dot of extent " + std::to_string(span) + " nm does not leave 3x well-width leads in L = " +
              std::to_string(grid.length()) + " nm");

  const double h = grid.spacing();
  p.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_points()));
  for (std::size_t i = 0; i < grid.num_points(); ++i) {
    double v = 0.0;
    for (const auto& w : p.wells) v -= w.depth * detail::cell_overlap(grid.x(i), h, w.left(), w.right()) / h;
    p.samples[static_cast<Eigen::Index>(i)] = v;
  }
  return p;
}

/// Grid whose dot window spans the wells plus `margin` nm on both sides.
inline Grid1D window_around(const Grid1D& grid, const PotentialProfile& p, double margin) {
  require(margin > 0.0, ErrorCode::invalid_parameter, "window margin must be positive");
  return grid.with_window(p.extent_left() - margin, p.extent_right() + margin);
}

}  // namespace qdscatter
