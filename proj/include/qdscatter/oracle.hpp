#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdscatter/channels.hpp"
#include "qdscatter/coulomb.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/grid.hpp"
#include "qdscatter/lattice.hpp"
#include "qdscatter/leads.hpp"
#include "qdscatter/material.hpp"
#include "qdscatter/potential.hpp"

namespace qdscatter {

/// Continuum transmission probability through a square well of the given depth and width.
inline double analytic_transmission_1d(double well_depth, double well_width, double kinetic_T,
                                       const MaterialParams& material) {
  require(kinetic_T > 0.0, ErrorCode::invalid_parameter, "kinetic energy must be positive");
  if (well_depth == 0.0) return 1.0;
  const double q = std::sqrt((kinetic_T + well_depth) / material.kinetic_prefactor());
  const double s = std::sin(q * well_width);
  return 1.0 / (1.0 + well_depth * well_depth * s * s / (4.0 * kinetic_T * (kinetic_T + well_depth)));
}

struct Transmission1D {
  cplx r;
  cplx t;
  double R = 0.0;
  double T = 0.0;
};

enum class Incidence { left, right };

/// Single-particle scattering on the three-point lattice over the sampled potential,
/// with exact lattice plane-wave boundaries at both ends.
inline Transmission1D lattice_transmission_1d(const Eigen::VectorXd& samples, double h, double kinetic_T,
                                              const MaterialParams& material, Incidence side = Incidence::left) {
  const Eigen::Index n = samples.size();
  require(n >= 3, ErrorCode::invalid_parameter, "need at least 3 lattice points");
  const LatticeMode mode = lattice_mode(kinetic_T, material.kinetic_prefactor(), h);
  require(mode.open, ErrorCode::invalid_parameter, "kinetic energy outside the lattice band");
  const double t = material.kinetic_prefactor() / (h * h);
  const cplx z = mode.step;
  Eigen::VectorXd v = samples;
  if (side == Incidence::right) v.reverseInPlace();
  Eigen::VectorXcd diag(n), rhs = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) diag[j] = 2.0 * t + v[j] - kinetic_T;
  diag[0] -= t * z;
  diag[n - 1] -= t * z;
  rhs[0] = t * (1.0 / z - z);
  // Thomas algorithm with constant off-diagonal -t
  for (Eigen::Index j = 1; j < n; ++j) {
    const cplx f = -t / diag[j - 1];
    diag[j] -= f * (-t);
    rhs[j] -= f * rhs[j - 1];
  }
  Eigen::VectorXcd psi(n);
  psi[n - 1] = rhs[n - 1] / diag[n - 1];
  for (Eigen::Index j = n - 2; j >= 0; --j) psi[j] = (rhs[j] + t * psi[j + 1]) / diag[j];
  Transmission1D out;
  out.r = psi[0] - 1.0;
  out.t = psi[n - 1] * std::polar(1.0, -std::arg(z) * static_cast<double>(n - 1));
  out.R = std::norm(out.r);
  out.T = std::norm(out.t);
  return out;
}

/// The scattering problem rewritten in a truncated bound-coordinate eigenbasis: one
/// coupled 1D equation per basis level along x1.
struct CoupledChannelSystem {
  Eigen::VectorXd energies;                // basis energies, ascending
  std::vector<Eigen::MatrixXd> coupling;   // V_nm(x1_j); empty where the interaction is switched off
  Eigen::VectorXd plane_potential;         // V(x1_j)
  Eigen::Index channel_count = 0;          // leading levels reported as channels
  MaterialParams material = gaas(5.0);
  double spacing = 1.0;

  Eigen::Index size() const { return energies.size(); }
  std::size_t n1() const { return static_cast<std::size_t>(plane_potential.size()); }
};

/// `modes` holds l2-orthonormal bound-coordinate eigenvectors (columns) on the window
/// grid; the first `channel_count` of them are the bound levels.
inline CoupledChannelSystem build_coupled_channel_system(const PotentialProfile& potential, const Grid1D& grid,
                                                         const Interaction& interaction, const Eigen::MatrixXd& modes,
                                                         const Eigen::VectorXd& energies, int bound_coordinates,
                                                         Eigen::Index channel_count) {
  const auto nw = static_cast<Eigen::Index>(grid.window_size());
  const Eigen::Index ntr = bound_coordinates == 1 ? nw : nw * nw;
  require(modes.rows() == ntr && modes.cols() == energies.size(), ErrorCode::invalid_parameter,
          "mode table does not match the window");
  require(channel_count >= 1 && channel_count <= energies.size(), ErrorCode::invalid_parameter,
          "channel count out of range");
  CoupledChannelSystem sys;
  sys.energies = energies;
  sys.channel_count = channel_count;
  sys.material = interaction.material;
  sys.spacing = grid.spacing();
  const auto n1 = static_cast<Eigen::Index>(grid.num_points());
  sys.plane_potential.resize(n1);
  sys.coupling.resize(static_cast<std::size_t>(n1));
  Eigen::VectorXd w(ntr);
  for (Eigen::Index j = 0; j < n1; ++j) {
    const double x1 = grid.x(static_cast<std::size_t>(j));
    sys.plane_potential[j] = potential(static_cast<std::size_t>(j));
    const double s = interaction.lead_switch(x1);
    if (s == 0.0 || interaction.strength == 0.0) continue;
    for (Eigen::Index a = 0; a < nw; ++a) {
      const double c = interaction.strength * s * coulomb_kernel(x1, grid.window_x(static_cast<std::size_t>(a)),
                                                                 interaction.material);
      if (bound_coordinates == 1) w[a] = c;
      else {
        w.segment(a * nw, nw).array() = c;  // x2 = a
      }
    }
    if (bound_coordinates == 2) {
      // add the x3 contribution: same kernel evaluated on the fast index
      Eigen::VectorXd c3(nw);
      for (Eigen::Index b = 0; b < nw; ++b)
        c3[b] = interaction.strength * s *
                coulomb_kernel(x1, grid.window_x(static_cast<std::size_t>(b)), interaction.material);
      for (Eigen::Index a = 0; a < nw; ++a) w.segment(a * nw, nw) += c3;
    }
    sys.coupling[static_cast<std::size_t>(j)] = modes.transpose() * w.asDiagonal() * modes;
  }
  return sys;
}

namespace detail {

inline ChannelAmplitudes coupled_channel_solve_truncated(const CoupledChannelSystem& sys, Eigen::Index incident,
                                                         double T0, Eigen::Index ncc) {
  const std::size_t n1 = sys.n1();
  const double h = sys.spacing;
  const double t = sys.material.kinetic_prefactor() / (h * h);
  const double energy = sys.energies[incident] + T0;
  std::vector<Channel> all;
  for (Eigen::Index n = 0; n < ncc; ++n) all.push_back(make_channel(n, sys.energies[n], energy, sys.material, h));
  Eigen::VectorXcd z(ncc);
  for (Eigen::Index n = 0; n < ncc; ++n) z[n] = all[static_cast<std::size_t>(n)].step;

  // block Thomas elimination along x1
  std::vector<Eigen::MatrixXcd> inv(n1);
  Eigen::MatrixXcd g(ncc, static_cast<Eigen::Index>(n1));
  g.setZero();
  g(incident, 0) = t * (1.0 / z[incident] - z[incident]);
  for (std::size_t j = 0; j < n1; ++j) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(ncc, ncc);
    d.diagonal() = (sys.energies.head(ncc).array() + 2.0 * t + sys.plane_potential[static_cast<Eigen::Index>(j)] -
                    energy)
                       .cast<cplx>();
    if (sys.coupling[j].size() > 0) d += sys.coupling[j].topLeftCorner(ncc, ncc).cast<cplx>();
    if (j == 0 || j + 1 == n1) d.diagonal() -= t * z;
    if (j > 0) {
      d -= (t * t) * inv[j - 1];
      g.col(static_cast<Eigen::Index>(j)) += t * (inv[j - 1] * g.col(static_cast<Eigen::Index>(j - 1)));
    }
    inv[j] = d.partialPivLu().inverse();
  }
  Eigen::MatrixXcd psi(ncc, static_cast<Eigen::Index>(n1));
  const auto last = static_cast<Eigen::Index>(n1 - 1);
  psi.col(last) = inv[n1 - 1] * g.col(last);
  for (Eigen::Index j = last - 1; j >= 0; --j)
    psi.col(j) = inv[static_cast<std::size_t>(j)] * (g.col(j) + t * psi.col(j + 1));

  const Eigen::Index nch = sys.channel_count;
  std::vector<Channel> channels(all.begin(), all.begin() + nch);
  Eigen::MatrixXcd left(3, nch), right(3, nch);
  for (Eigen::Index s = 0; s < 3; ++s) {
    left.row(s) = psi.col(s).head(nch).transpose();
    right.row(s) = psi.col(last - s).head(nch).transpose();
  }
  return extract_from_projections(left, right, channels, incident, n1, 0);
}

}  // namespace detail

/// Coupled-channel amplitudes for incidence in `incident` at kinetic energy T0. When
/// `check_truncation` is set the solve is repeated with the two highest basis levels
/// dropped and a warning is attached if any probability moves by more than 1e-3.
inline ChannelAmplitudes coupled_channel_solve(const CoupledChannelSystem& sys, Eigen::Index incident, double T0,
                                               bool check_truncation = false) {
  require(incident >= 0 && incident < sys.channel_count, ErrorCode::invalid_parameter,
          "incident channel out of range");
  require(T0 > 0.0, ErrorCode::invalid_parameter, "incident kinetic energy must be positive");
  auto amps = detail::coupled_channel_solve_truncated(sys, incident, T0, sys.size());
  if (check_truncation && sys.size() - 2 >= sys.channel_count) {
    const auto smaller = detail::coupled_channel_solve_truncated(sys, incident, T0, sys.size() - 2);
    const double shift = std::max((smaller.R - amps.R).cwiseAbs().maxCoeff(), (smaller.T - amps.T).cwiseAbs().maxCoeff());
    if (shift > 1e-3)
      amps.warnings.push_back("coupled-channel basis not converged: probabilities shift by " + std::to_string(shift) +
                              " when two levels are added");
  }
  return amps;
}

}  // namespace qdscatter
