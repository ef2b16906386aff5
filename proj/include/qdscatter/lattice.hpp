#pragma once

#include <cmath>
#include <complex>

namespace qdscatter {

using cplx = std::complex<double>;

/// Plane-wave behaviour of the three-point lattice Laplacian at kinetic energy T:
/// T = 2 t (1 - cos k h) with t = kinetic_prefactor / h^2.
struct LatticeMode {
  bool open = false;
  double wavenumber = 0.0;  // k (1/nm) for open modes
  double decay_rate = 0.0;  // kappa (1/nm) for closed modes
  /// Ratio psi(j+1)/psi(j) of the outgoing (or decaying) solution moving away from the
  /// scattering region: e^{ikh} when open, +-e^{-kappa h} when closed.
  cplx step;
  /// Group velocity dT/dk = 2 t h sin(kh) (meV nm); zero when closed.
  double velocity = 0.0;
};

inline LatticeMode lattice_mode(double kinetic_energy, double kinetic_prefactor, double h) {
  const double t = kinetic_prefactor / (h * h);
  const double cos_kh = 1.0 - kinetic_energy / (2.0 * t);
  LatticeMode m;
  if (kinetic_energy > 0.0 && cos_kh > -1.0) {
    const double kh = std::acos(cos_kh);
    m.open = true;
    m.wavenumber = kh / h;
    m.step = std::polar(1.0, kh);
    m.velocity = 2.0 * t * h * std::sin(kh);
  } else if (cos_kh >= 1.0) {
    const double kappa_h = std::acosh(cos_kh);
    m.decay_rate = kappa_h / h;
    m.step = std::exp(-kappa_h);
  } else {
    // above the band top: staggered evanescent solution
    const double kappa_h = std::acosh(-cos_kh);
    m.decay_rate = kappa_h / h;
    m.step = -std::exp(-kappa_h);
  }
  return m;
}

}  // namespace qdscatter
