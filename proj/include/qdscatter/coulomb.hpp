#pragma once

#include <cmath>
#include <string>

#include "qdscatter/error.hpp"
#include "qdscatter/material.hpp"

namespace qdscatter {

/// Softened 1D Coulomb repulsion e^2 / (4 pi eps sqrt((xi - xj)^2 + d^2)) in meV.
inline double coulomb_kernel(double xi, double xj, const MaterialParams& material) {
  const double dx = xi - xj;
  const double d = material.coulomb_cutoff_d();
  return material.coulomb_prefactor() / std::sqrt(dx * dx + d * d);
}

/// Envelope applied to the scattered-carrier coordinate: 1 within `full_radius` of
/// the dot centre, cos^2 ramp to 0 at `cutoff_radius`, 0 beyond. Leads are flat
/// wherever the envelope vanishes, so lattice plane waves are exact there.
struct LeadSwitch {
  double center = 0.0;
  double full_radius = 0.0;
  double cutoff_radius = 0.0;

  double operator()(double x) const {
    const double r = std::abs(x - center);
    if (r <= full_radius) return 1.0;
    if (r >= cutoff_radius) return 0.0;
    const double s = (r - full_radius) / (cutoff_radius - full_radius);
    const double c = std::cos(0.5 * constants::pi * s);
    return c * c;
  }
};

/// Coulomb coupling used by the few-particle Hamiltonians. `strength` scales every
/// pair term (0 gives the separable, non-interacting limit).
struct Interaction {
  MaterialParams material;
  LeadSwitch lead_switch;
  double strength = 1.0;

  /// Between two bound-coordinate electrons.
  double bound_pair(double xa, double xb) const {
    return strength == 0.0 ? 0.0 : strength * coulomb_kernel(xa, xb, material);
  }
  /// Between the scattered carrier at x1 and a bound-coordinate electron at xb.
  double scattered_pair(double x1, double xb) const {
    if (strength == 0.0) return 0.0;
    const double s = lead_switch(x1);
    return s == 0.0 ? 0.0 : strength * s * coulomb_kernel(x1, xb, material);
  }
};

inline Interaction make_interaction(const MaterialParams& material, double center, double full_radius,
                                    double cutoff_radius, double strength = 1.0) {
  require(full_radius >= 0.0 && cutoff_radius > full_radius, ErrorCode::invalid_parameter,
          "lead switch needs 0 <= full_radius < cutoff_radius");
  require(strength >= 0.0, ErrorCode::invalid_parameter, "interaction strength must be non-negative");
  return Interaction{material, LeadSwitch{center, full_radius, cutoff_radius}, strength};
}

}  // namespace qdscatter
