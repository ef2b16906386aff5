#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qdscatter/eigensolve.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/lattice.hpp"
#include "qdscatter/material.hpp"

namespace qdscatter {

/// Outgoing configuration: bound level n with the scattered carrier at kinetic energy
/// T_n = E - E_n on the lattice.
struct Channel {
  Eigen::Index index = 0;
  double bound_energy = 0.0;
  double kinetic_Tn = 0.0;
  double wavenumber_kn = 0.0;
  double decay_rate = 0.0;
  bool open = false;
  double group_velocity_vn = 0.0;
  cplx step;  // psi(j+1)/psi(j) for the wave leaving the scattering region
};

inline Channel make_channel(Eigen::Index index, double bound_energy, double total_energy,
                            const MaterialParams& material, double h) {
  Channel c;
  c.index = index;
  c.bound_energy = bound_energy;
  c.kinetic_Tn = total_energy - bound_energy;
  const LatticeMode m = lattice_mode(c.kinetic_Tn, material.kinetic_prefactor(), h);
  c.open = m.open;
  c.wavenumber_kn = m.wavenumber;
  c.decay_rate = m.decay_rate;
  c.group_velocity_vn = m.velocity;
  c.step = m.step;
  return c;
}

/// One channel per bound level, flagged open when T_n > 0.
inline std::vector<Channel> open_channels(double total_energy, const Eigen::VectorXd& bound_energies,
                                          const MaterialParams& material, double h) {
  std::vector<Channel> out;
  out.reserve(static_cast<std::size_t>(bound_energies.size()));
  for (Eigen::Index n = 0; n < bound_energies.size(); ++n)
    out.push_back(make_channel(n, bound_energies[n], total_energy, material, h));
  return out;
}

inline int open_count(const std::vector<Channel>& channels) {
  int m = 0;
  for (const auto& c : channels) m += c.open ? 1 : 0;
  return m;
}

/// Bound-coordinate basis shared by the open-boundary solver, the amplitude extraction
/// and the reduced density matrix. Columns are l2-orthonormal on the window grid.
struct ChannelBasis {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  std::vector<std::vector<Eigen::Index>> degeneracy_groups;
  int bound_coordinates = 1;
  double ionization_threshold = 0.0;
  Eigen::Index ground = 0;

  Eigen::Index count() const { return energies.size(); }
};

inline ChannelBasis channel_basis(const BoundStateSet& set) {
  ChannelBasis b;
  b.energies = set.energies;
  b.vectors = set.unit_vectors();
  for (Eigen::Index n = 0; n < set.count(); ++n) b.degeneracy_groups.push_back({n});
  b.bound_coordinates = 1;
  b.ionization_threshold = 0.0;
  return b;
}

inline ChannelBasis channel_basis(const TwoParticleBoundSet& set) {
  ChannelBasis b;
  b.energies = set.energies;
  b.vectors = set.unit_vectors();
  b.degeneracy_groups = set.degeneracy_groups;
  b.bound_coordinates = 2;
  b.ionization_threshold = set.continuum_edge;
  b.ground = set.ground_index();
  return b;
}

/// Channels kept in the boundary expansion: every open channel plus the first
/// `num_evanescent` closed ones.
inline std::vector<Channel> lead_modes(const ChannelBasis& basis, double total_energy,
                                       const MaterialParams& material, double h, int num_evanescent) {
  require(num_evanescent >= 0, ErrorCode::invalid_parameter, "num_evanescent must be >= 0");
  std::vector<Channel> kept;
  int closed = 0;
  for (const auto& c : open_channels(total_energy, basis.energies, material, h)) {
    if (c.open) kept.push_back(c);
    else if (closed < num_evanescent) {
      kept.push_back(c);
      ++closed;
    }
  }
  return kept;
}

}  // namespace qdscatter
