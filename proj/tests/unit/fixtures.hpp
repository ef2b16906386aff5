#pragma once

#include <catch_amalgamated.hpp>

#include "qdscatter/qdscatter.hpp"

namespace fixtures {

using namespace qdscatter;

/// Single dot on a short device with a correspondingly short lead switch; cheap enough
/// to solve many times inside unit tests.
struct SmallDot {
  MaterialParams material = gaas(2.0);
  Grid1D full{400.0, 1.0};
  PotentialProfile potential;
  Grid1D grid{400.0, 1.0};
  Interaction interaction = make_interaction(gaas(2.0), 200.0, 100.0, 150.0, 1.0);
  BoundStateSet bound;
  ChannelBasis basis;
};

inline SmallDot small_dot(double strength = 1.0, double length = 400.0, double h = 1.0, double d = 2.0,
                          double margin = 60.0, Eigen::Index levels = 3) {
  SmallDot s;
  s.material = gaas(d);
  s.full = Grid1D(length, h);
  s.potential = build_potential(DotKind::single_dot, s.full, 110.0, 30.0);
  s.grid = window_around(s.full, s.potential, margin);
  s.interaction = make_interaction(s.material, s.full.center(), 100.0, 150.0, strength);
  BoundStateOptions o;
  o.max_levels = levels;
  s.bound = solve_bound_states_1d(s.potential, s.grid, s.material, o);
  s.basis = channel_basis(s.bound);
  return s;
}

/// Double dot on a coarse, short device for three-particle checks.
struct SmallDoubleDot {
  MaterialParams material = gaas(2.0);
  Grid1D full{300.0, 2.0};
  PotentialProfile potential;
  Grid1D grid{300.0, 2.0};
  Interaction interaction = make_interaction(gaas(2.0), 150.0, 40.0, 60.0, 1.0);
  TwoParticleBoundSet bound;
  ChannelBasis basis;
};

inline SmallDoubleDot small_double_dot(double strength = 1.0, Eigen::Index levels = 6) {
  SmallDoubleDot s;
  s.material = gaas(2.0);
  s.full = Grid1D(300.0, 2.0);
  s.potential = build_potential(DotKind::double_dot, s.full, 110.0, 30.0, 20.0);
  s.grid = window_around(s.full, s.potential, 12.0);
  s.interaction = make_interaction(s.material, s.full.center(), 50.0, 80.0, strength);
  TwoParticleOptions o;
  o.max_levels = levels;
  o.decay_tolerance = 1e-2;
  s.bound = solve_bound_states_2p(s.potential, s.grid, s.interaction, o);
  s.basis = channel_basis(s.bound);
  return s;
}

/// Relative max-norm difference of two real vectors.
inline double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace fixtures
