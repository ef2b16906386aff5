#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "qdscatter/error.hpp"

namespace qdscatter {

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

/// Uniform grid on [0, L]. The dot window lists the grid points on which a bound
/// coordinate is resolved; the points just outside it act as hard walls.
class Grid1D {
 public:
  Grid1D(double length, double spacing) : length_(length), spacing_(spacing) {
    require(length > 0.0, ErrorCode::invalid_parameter, "grid length must be positive");
    require(spacing > 0.0, ErrorCode::invalid_parameter, "grid spacing must be positive");
    const double cells = length / spacing;
    const double rounded = std::round(cells);
    require(std::abs(cells - rounded) < 1e-9 * std::max(1.0, cells), ErrorCode::invalid_parameter,
            "grid length " + std::to_string(length) + " nm is not a multiple of spacing " +
                std::to_string(spacing) + " nm");
    num_points_ = static_cast<std::size_t>(rounded) + 1;
    require(num_points_ >= 3, ErrorCode::invalid_parameter, "grid needs at least 3 points");
    window_ = {1, num_points_ - 1};
  }

  double length() const { return length_; }
  double spacing() const { return spacing_; }
  std::size_t num_points() const { return num_points_; }
  double x(std::size_t i) const { return static_cast<double>(i) * spacing_; }
  double center() const { return 0.5 * length_; }

  const IndexRange& dot_window() const { return window_; }
  std::size_t window_size() const { return window_.size(); }
  double window_x(std::size_t k) const { return x(window_.begin + k); }

  /// Restricts the dot window to grid points strictly inside (lo, hi).
  Grid1D with_window(double lo, double hi) const {
    require(lo > 0.0 && hi < length_ && lo < hi, ErrorCode::geometry,
            "dot window (" + std::to_string(lo) + ", " + std::to_string(hi) +
                ") must lie strictly inside (0, L)");
    Grid1D g = *this;
    const double eps = 1e-9 * spacing_;
    auto first = static_cast<std::size_t>(std::floor((lo + eps) / spacing_)) + 1;
    auto last = static_cast<std::size_t>(std::ceil((hi - eps) / spacing_));  // exclusive
    require(last > first + 1, ErrorCode::geometry, "dot window holds fewer than 2 grid points");
    g.window_ = {first, last};
    return g;
  }

 private:
  double length_;
  double spacing_;
  std::size_t num_points_ = 0;
  IndexRange window_;
};

}  // namespace qdscatter
