#pragma once

#include <string>

#include "qdscatter/error.hpp"

namespace qdscatter {

/// Physical constants (CODATA 2018) folded into the meV / nm unit system.
namespace constants {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double pi = 3.14159265358979323846;

inline constexpr double millielectronvolt = elementary_charge * 1e-3;  // J
inline constexpr double nanometre = 1e-9;                              // m

/// hbar^2 / (2 m0) in meV nm^2.
inline constexpr double free_kinetic_prefactor =
    hbar * hbar / (2.0 * electron_mass) / millielectronvolt / (nanometre * nanometre);

/// e^2 / (4 pi eps0) in meV nm.
inline constexpr double vacuum_coulomb_prefactor =
    elementary_charge * elementary_charge / (4.0 * pi * vacuum_permittivity) / millielectronvolt /
    nanometre;
}  // namespace constants

/// Effective-mass material description. Both energy prefactors are derived from the
/// mass ratio and permittivity at construction and cannot be set on their own.
class MaterialParams {
 public:
  double effective_mass_ratio() const { return effective_mass_ratio_; }
  double relative_permittivity() const { return relative_permittivity_; }
  /// Lateral-confinement cutoff of the softened Coulomb kernel (nm).
  double coulomb_cutoff_d() const { return coulomb_cutoff_d_; }
  /// hbar^2 / (2 m*) in meV nm^2.
  double kinetic_prefactor() const { return kinetic_prefactor_; }
  /// e^2 / (4 pi eps) in meV nm.
  double coulomb_prefactor() const { return coulomb_prefactor_; }

  friend MaterialParams make_material(double, double, double);

 private:
  MaterialParams() = default;

  double effective_mass_ratio_ = 0.0;
  double relative_permittivity_ = 0.0;
  double coulomb_cutoff_d_ = 0.0;
  double kinetic_prefactor_ = 0.0;
  double coulomb_prefactor_ = 0.0;
};

inline MaterialParams make_material(double effective_mass_ratio, double relative_permittivity,
                                    double coulomb_cutoff_d) {
  require(effective_mass_ratio > 0.0, ErrorCode::invalid_parameter,
          "effective_mass_ratio must be positive, got " + std::to_string(effective_mass_ratio));
  require(relative_permittivity > 0.0, ErrorCode::invalid_parameter,
          "relative_permittivity must be positive, got " + std::to_string(relative_permittivity));
  require(coulomb_cutoff_d > 0.0, ErrorCode::invalid_parameter,
          "coulomb_cutoff_d must be positive, got " + std::to_string(coulomb_cutoff_d));
  MaterialParams m;
  m.effective_mass_ratio_ = effective_mass_ratio;
  m.relative_permittivity_ = relative_permittivity;
  m.coulomb_cutoff_d_ = coulomb_cutoff_d;
  m.kinetic_prefactor_ = constants::free_kinetic_prefactor / effective_mass_ratio;
  m.coulomb_prefactor_ = constants::vacuum_coulomb_prefactor / relative_permittivity;
  return m;
}

/// GaAs defaults: m*/m0 = 0.067, eps_r = 12.9.
inline MaterialParams gaas(double coulomb_cutoff_d) { return make_material(0.067, 12.9, coulomb_cutoff_d); }

}  // namespace qdscatter
