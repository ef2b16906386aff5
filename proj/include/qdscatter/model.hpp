#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdscatter/channels.hpp"
#include "qdscatter/config.hpp"
#include "qdscatter/coulomb.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/grid.hpp"
#include "qdscatter/material.hpp"
#include "qdscatter/potential.hpp"
#include "qdscatter/qtbm.hpp"

namespace qdscatter {

/// Everything built once per configuration: geometry, bound levels and the assembled
/// scattering system shared by all energies of a sweep.
struct PreparedSystem {
  Config config;
  MaterialParams material;
  Grid1D grid;  // with the dot window applied
  PotentialProfile potential;
  Interaction interaction;
  std::optional<BoundStateSet> bound_1d;
  std::optional<TwoParticleBoundSet> bound_2p;
  ChannelBasis basis;
  Eigen::Index incident = 0;
  std::shared_ptr<const ScatteringSystem> scattering;
};

inline MaterialParams material_from(const Config& c) {
  return make_material(c.material.effective_mass_ratio, c.material.relative_permittivity,
                       c.material.coulomb_cutoff_d_nm);
}

inline SolverOptions solver_options_from(const Config& c) {
  SolverOptions o;
  o.kind = c.solver.kind;
  o.iterative.tolerance = c.solver.tolerance;
  o.iterative.max_iterations = c.solver.max_iterations;
  o.iterative.restart = c.solver.restart;
  o.direct_tolerance = std::max(c.solver.tolerance, 1e-8);
  o.preconditioner_modes = c.solver.preconditioner_modes;
  o.assembly.memory_cap_bytes = static_cast<std::size_t>(c.solver.memory_cap_GB * 1024.0 * 1024.0 * 1024.0);
  return o;
}

/// Geometry and bound levels only.
inline PreparedSystem prepare_bound_states(const Config& c) {
  validate(c);
  const MaterialParams mat = material_from(c);
  const Grid1D full(c.geometry.L_nm, c.geometry.h_nm);
  PotentialProfile pot = build_potential(c.geometry.kind, full, c.geometry.well_depth_meV, c.geometry.well_width_nm,
                                         c.geometry.kind == DotKind::double_dot ? c.geometry.barrier_nm : 0.0);
  const Grid1D grid = window_around(full, pot, c.geometry.window_margin_nm);
  Interaction inter = make_interaction(mat, full.center(), c.interaction.switch_full_nm,
                                       c.interaction.switch_cutoff_nm, c.interaction.strength);
  PreparedSystem p{c, mat, grid, std::move(pot), inter, {}, {}, {}, 0, nullptr};
  if (c.system == SystemKind::qd_2p) {
    BoundStateOptions o;
    o.max_levels = c.bound.max_levels;
    o.decay_tolerance = c.bound.decay_tolerance;
    p.bound_1d = solve_bound_states_1d(p.potential, grid, mat, o);
    if (p.bound_1d->count() > 0) p.basis = channel_basis(*p.bound_1d);
  } else {
    TwoParticleOptions o;
    o.max_levels = c.bound.max_levels;
    o.delta_deg = c.bound.delta_deg_meV;
    o.decay_tolerance = c.bound.decay_tolerance;
    o.sector = c.bound.exchange;
    p.bound_2p = solve_bound_states_2p(p.potential, grid, inter, o);
    if (p.bound_2p->count() > 0) p.basis = channel_basis(*p.bound_2p);
  }
  p.incident = c.solver.incident_channel >= 0 ? c.solver.incident_channel : p.basis.ground;
  return p;
}

/// Bound levels plus the assembled scattering system.
inline PreparedSystem prepare_system(const Config& c) {
  PreparedSystem p = prepare_bound_states(c);
  require(p.basis.count() > 0, ErrorCode::invalid_parameter, "the dot has no bound states");
  require(p.incident < p.basis.count(), ErrorCode::config,
          "incident_channel " + std::to_string(p.incident) + " exceeds the number of bound levels");
  p.scattering = std::make_shared<const ScatteringSystem>(p.potential, p.grid, p.interaction, p.basis,
                                                          solver_options_from(c));
  return p;
}

}  // namespace qdscatter
