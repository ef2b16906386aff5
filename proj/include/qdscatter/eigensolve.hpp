#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "qdscatter/coulomb.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/grid.hpp"
#include "qdscatter/material.hpp"
#include "qdscatter/potential.hpp"

namespace qdscatter {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Orthonormal (plain l2) eigenpairs, values ascending.
struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Full dense Hermitian eigendecomposition, capped at 4000 rows.
inline Eigenpairs dense_eigensolve_small(const Eigen::MatrixXd& op) {
  require(op.rows() == op.cols(), ErrorCode::invalid_parameter, "operator must be square");
  require(op.rows() <= 4000, ErrorCode::resource,
          "dense eigensolve limited to dimension 4000, got " + std::to_string(op.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op);
  require(es.info() == Eigen::Success, ErrorCode::convergence, "dense eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace detail {

inline double gershgorin_lower(const SparseMatrix& h) {
  double lo = std::numeric_limits<double>::max();
  for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
    double diag = 0.0;
    double off = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
      if (it.row() == it.col()) diag = it.value();
      else off += std::abs(it.value());
    }
    lo = std::min(lo, diag - off);
  }
  return lo;
}

// Deterministic, non-symmetric start vector so that no symmetry sector is missed.
inline Eigen::VectorXd start_vector(Eigen::Index n, int salt) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = static_cast<double>(i + 1) * (0.6180339887498949 + 0.013 * salt);
    v[i] = 1.0 + 0.5 * std::sin(7.0 * s) + 0.25 * std::cos(3.0 * s * s);
  }
  return v.normalized();
}

}  // namespace detail

/// Lowest `count` eigenpairs of a real symmetric sparse matrix by shift-invert Krylov
/// iteration: the Krylov space of (H - sigma)^{-1}, sigma below the spectrum, is grown with
/// full reorthogonalisation and H is Rayleigh-Ritz projected onto it until every wanted
/// pair has ||H v - lambda v|| < residual_tol.
/// Matrices of dimension <= dense_below are diagonalised densely.
inline Eigenpairs lowest_eigenpairs(const SparseMatrix& h, Eigen::Index count, double residual_tol = 1e-9,
                                    Eigen::Index dense_below = 400) {
  const Eigen::Index n = h.rows();
  require(count >= 1, ErrorCode::invalid_parameter, "need at least one eigenpair");
  count = std::min(count, n);
  if (n <= dense_below) {
    auto all = dense_eigensolve_small(Eigen::MatrixXd(h));
    return {all.values.head(count), all.vectors.leftCols(count)};
  }

  const double sigma = detail::gershgorin_lower(h) - 1.0;
  SparseMatrix shifted = h;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  require(factor.info() == Eigen::Success, ErrorCode::convergence, "shift-invert factorisation failed");

  Eigen::MatrixXd basis(n, 0);
  Eigen::Index target = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * count + 20, 40));
  Eigen::VectorXd next = detail::start_vector(n, 0);
  int restarts = 0;
  while (true) {
    const Eigen::Index have = basis.cols();
    basis.conservativeResize(n, target);
    for (Eigen::Index j = have; j < target; ++j) {
      Eigen::VectorXd w = next;
      for (int pass = 0; pass < 2; ++pass) {
        if (j > 0) w -= basis.leftCols(j) * (basis.leftCols(j).transpose() * w);
      }
      double nrm = w.norm();
      if (nrm < 1e-10) {
        // invariant subspace reached: continue from a fresh direction
        w = detail::start_vector(n, ++restarts);
        for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(j) * (basis.leftCols(j).transpose() * w);
        nrm = w.norm();
        require(nrm > 1e-10, ErrorCode::convergence, "Krylov basis exhausted");
      }
      basis.col(j) = w / nrm;
      next = factor.solve(basis.col(j));
    }

    const Eigen::MatrixXd hb = h * basis;
    Eigen::MatrixXd projected = basis.transpose() * hb;
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected);
    const Eigen::MatrixXd ritz = basis * es.eigenvectors().leftCols(count);
    const Eigen::VectorXd theta = es.eigenvalues().head(count);
    const Eigen::MatrixXd residual = hb * es.eigenvectors().leftCols(count) - ritz * theta.asDiagonal();
    const double worst = residual.colwise().norm().maxCoeff();
    if (worst < residual_tol) return {theta, ritz};
    require(target < n, ErrorCode::convergence,
            "shift-invert iteration did not converge, residual " + std::to_string(worst));
    target = std::min<Eigen::Index>(n, target + std::max<Eigen::Index>(count, target / 2));
  }
}

/// Single-particle Hamiltonian -K d^2/dx^2 + V(x) on the dot window with hard walls
/// just outside it.
inline SparseMatrix window_hamiltonian_1d(const PotentialProfile& potential, const Grid1D& grid,
                                          const MaterialParams& material) {
  const auto& win = grid.dot_window();
  const auto n = static_cast<Eigen::Index>(win.size());
  const double t = material.kinetic_prefactor() / (grid.spacing() * grid.spacing());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, 2.0 * t + potential(win.begin + static_cast<std::size_t>(i)));
    if (i + 1 < n) {
      trip.emplace_back(i, i + 1, -t);
      trip.emplace_back(i + 1, i, -t);
    }
  }
  SparseMatrix h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

/// Relative amplitude of a window-resolved state at the window edges.
inline double edge_decay(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(v[0]), std::abs(v[v.size() - 1])) / peak;
}

/// Bound single-particle levels of the dot, resolved on the dot window.
struct BoundStateSet {
  Eigen::VectorXd energies;       // meV, ascending, all < 0
  Eigen::MatrixXd wavefunctions;  // window_size x count, sum |phi|^2 h = 1
  double spacing = 1.0;
  IndexRange window;

  Eigen::Index count() const { return energies.size(); }
  /// l2-orthonormal columns (phi * sqrt(h)).
  Eigen::MatrixXd unit_vectors() const { return wavefunctions * std::sqrt(spacing); }
  double cell_measure() const { return spacing; }
};

struct BoundStateOptions {
  Eigen::Index max_levels = 8;
  double decay_tolerance = 1e-8;
};

inline BoundStateSet solve_bound_states_1d(const PotentialProfile& potential, const Grid1D& grid,
                                           const MaterialParams& material, const BoundStateOptions& opt = {}) {
  require(opt.max_levels >= 1, ErrorCode::invalid_parameter, "max_levels must be >= 1");
  const auto& win = grid.dot_window();
  require(potential(win.begin - 1) == 0.0 && potential(win.end) == 0.0, ErrorCode::geometry,
          "dot window must end in flat leads");
  const SparseMatrix h = window_hamiltonian_1d(potential, grid, material);
  const auto pairs = lowest_eigenpairs(h, opt.max_levels);

  BoundStateSet set;
  set.spacing = grid.spacing();
  set.window = win;
  Eigen::Index bound = 0;
  while (bound < pairs.values.size() && pairs.values[bound] < 0.0) ++bound;
  set.energies = pairs.values.head(bound);
  set.wavefunctions = pairs.vectors.leftCols(bound) / std::sqrt(grid.spacing());
  for (Eigen::Index n = 0; n < bound; ++n) {
    auto col = set.wavefunctions.col(n);
    // fix the sign convention: positive lobe first
    Eigen::Index first = 0;
    col.cwiseAbs().maxCoeff(&first);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > 1e-3 * std::abs(col[first])) { first = i; break; }
    }
    if (col[first] < 0.0) col = -col;
    const double decay = edge_decay(col);
    require(decay < opt.decay_tolerance, ErrorCode::window_too_small,
            "level " + std::to_string(n) + " (E = " + std::to_string(set.energies[n]) +
                " meV) reaches the window edge with relative amplitude " + std::to_string(decay));
  }
  return set;
}

enum class ExchangeSector { both, symmetric, antisymmetric };

/// Sparse isometries from the exchange-symmetric / antisymmetric pair spaces into the
/// full n*n product space (index a*n + b).
inline SparseMatrix exchange_isometry(Eigen::Index n, bool symmetric) {
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::Index col = 0;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      if (a == b) {
        if (!symmetric) continue;
        trip.emplace_back(a * n + a, col++, 1.0);
      } else {
        trip.emplace_back(a * n + b, col, r);
        trip.emplace_back(b * n + a, col++, symmetric ? r : -r);
      }
    }
  }
  SparseMatrix s(n * n, col);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

/// Two-electron Hamiltonian H0(x2) + H0(x3) + C(x2, x3) on window x window.
inline SparseMatrix window_hamiltonian_2p(const PotentialProfile& potential, const Grid1D& grid,
                                          const Interaction& interaction) {
  const SparseMatrix h1 = window_hamiltonian_1d(potential, grid, interaction.material);
  const Eigen::Index n = h1.rows();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n * n));
  for (Eigen::Index k = 0; k < h1.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(h1, k); it; ++it) {
      for (Eigen::Index o = 0; o < n; ++o) {
        trip.emplace_back(it.row() * n + o, it.col() * n + o, it.value());
        trip.emplace_back(o * n + it.row(), o * n + it.col(), it.value());
      }
    }
  }
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      trip.emplace_back(a * n + b, a * n + b,
                        interaction.bound_pair(grid.window_x(static_cast<std::size_t>(a)),
                                               grid.window_x(static_cast<std::size_t>(b))));
  SparseMatrix h(n * n, n * n);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

/// Two-electron bound levels of the dot on the window x window grid.
struct TwoParticleBoundSet {
  Eigen::VectorXd energies;       // meV ascending
  Eigen::MatrixXd wavefunctions;  // n^2 x count, sum |Gamma|^2 h^2 = 1, index a*n + b
  std::vector<int> exchange_parity;  // +1 symmetric, -1 antisymmetric under x2 <-> x3
  std::vector<std::vector<Eigen::Index>> degeneracy_groups;
  double continuum_edge = 0.0;  // lowest single-particle level: one bound + one free at rest
  double spacing = 1.0;
  IndexRange window;

  Eigen::Index count() const { return energies.size(); }
  Eigen::MatrixXd unit_vectors() const { return wavefunctions * spacing; }
  double cell_measure() const { return spacing * spacing; }
  /// Lowest exchange-symmetric level.
  Eigen::Index ground_index() const {
    for (std::size_t i = 0; i < exchange_parity.size(); ++i)
      if (exchange_parity[i] > 0) return static_cast<Eigen::Index>(i);
    return 0;
  }
};

/// Partition of ascending energies into groups whose spread stays below `delta`.
inline std::vector<std::vector<Eigen::Index>> degeneracy_groups(const Eigen::VectorXd& energies, double delta) {
  std::vector<std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    if (groups.empty() || energies[i] - energies[groups.back().front()] >= delta) groups.emplace_back();
    groups.back().push_back(i);
  }
  return groups;
}

struct TwoParticleOptions {
  Eigen::Index max_levels = 24;
  double delta_deg = 0.05;
  double decay_tolerance = 1e-8;
  ExchangeSector sector = ExchangeSector::both;
};

inline TwoParticleBoundSet solve_bound_states_2p(const PotentialProfile& potential, const Grid1D& grid,
                                                 const Interaction& interaction,
                                                 const TwoParticleOptions& opt = {}) {
  require(opt.max_levels >= 1, ErrorCode::invalid_parameter, "max_levels must be >= 1");
  require(opt.delta_deg > 0.0, ErrorCode::invalid_parameter, "delta_deg must be positive");
  const auto& win = grid.dot_window();
  const auto n = static_cast<Eigen::Index>(win.size());
  const double h = grid.spacing();

  // continuum edge: one electron in the lowest single-particle level, the other at rest far away
  const SparseMatrix h1 = window_hamiltonian_1d(potential, grid, interaction.material);
  const double edge = lowest_eigenpairs(h1, 1).values[0];

  const SparseMatrix full = window_hamiltonian_2p(potential, grid, interaction);
  struct Level {
    double energy;
    int parity;
    Eigen::VectorXd vec;
  };
  std::vector<Level> levels;
  for (bool symmetric : {true, false}) {
    if (opt.sector == ExchangeSector::symmetric && !symmetric) continue;
    if (opt.sector == ExchangeSector::antisymmetric && symmetric) continue;
    const SparseMatrix s = exchange_isometry(n, symmetric);
    const SparseMatrix reduced = SparseMatrix(s.transpose() * full * s);
    const auto pairs = lowest_eigenpairs(reduced, std::min(opt.max_levels, reduced.rows()));
    for (Eigen::Index k = 0; k < pairs.values.size(); ++k) {
      if (pairs.values[k] >= edge) break;
      levels.push_back({pairs.values[k], symmetric ? 1 : -1, s * pairs.vectors.col(k)});
    }
  }
  // exchange partners split by ~1e-8 meV or less: keep the symmetric state first
  std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) {
    if (std::abs(a.energy - b.energy) < 1e-7) return a.parity > b.parity;
    return a.energy < b.energy;
  });
  if (static_cast<Eigen::Index>(levels.size()) > opt.max_levels) levels.resize(static_cast<std::size_t>(opt.max_levels));

  TwoParticleBoundSet set;
  set.continuum_edge = edge;
  set.spacing = h;
  set.window = win;
  const auto count = static_cast<Eigen::Index>(levels.size());
  set.energies.resize(count);
  set.wavefunctions.resize(n * n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    auto& lv = levels[static_cast<std::size_t>(i)];
    Eigen::Index peak = 0;
    lv.vec.cwiseAbs().maxCoeff(&peak);
    if (lv.vec[peak] < 0.0) lv.vec = -lv.vec;
    set.energies[i] = lv.energy;
    set.wavefunctions.col(i) = lv.vec / h;
    set.exchange_parity.push_back(lv.parity);

    // decay check along the window boundary of the (x2, x3) square
    const Eigen::Map<const Eigen::MatrixXd> sq(lv.vec.data(), n, n);
    const double peak_abs = sq.cwiseAbs().maxCoeff();
    const double border = std::max({sq.row(0).cwiseAbs().maxCoeff(), sq.row(n - 1).cwiseAbs().maxCoeff(),
                                    sq.col(0).cwiseAbs().maxCoeff(), sq.col(n - 1).cwiseAbs().maxCoeff()});
    require(border / peak_abs < opt.decay_tolerance, ErrorCode::window_too_small,
            "two-particle level " + std::to_string(i) + " (eps = " + std::to_string(lv.energy) +
                " meV) reaches the window edge with relative amplitude " + std::to_string(border / peak_abs));
  }
  set.degeneracy_groups = degeneracy_groups(set.energies, opt.delta_deg);
  return set;
}

/// Complete l2-orthonormal eigenbasis of the bound-coordinate Hamiltonian on the window
/// (one or two bound electrons). Dense; used by the iterative solver's preconditioner
/// and by the coupled-channel oracle.
struct TransverseSpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

inline TransverseSpectrum transverse_spectrum_1d(const PotentialProfile& potential, const Grid1D& grid,
                                                 const MaterialParams& material) {
  auto pairs = dense_eigensolve_small(Eigen::MatrixXd(window_hamiltonian_1d(potential, grid, material)));
  return {pairs.values, pairs.vectors};
}

inline TransverseSpectrum transverse_spectrum_2p(const PotentialProfile& potential, const Grid1D& grid,
                                                 const Interaction& interaction) {
  const auto n = static_cast<Eigen::Index>(grid.window_size());
  const SparseMatrix full = window_hamiltonian_2p(potential, grid, interaction);
  TransverseSpectrum out;
  out.energies.resize(n * n);
  out.vectors.resize(n * n, n * n);
  Eigen::Index offset = 0;
  for (bool symmetric : {true, false}) {
    const SparseMatrix s = exchange_isometry(n, symmetric);
    const Eigen::MatrixXd reduced = Eigen::MatrixXd(SparseMatrix(s.transpose() * full * s));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
    require(es.info() == Eigen::Success, ErrorCode::convergence, "dense eigensolver failed");
    out.energies.segment(offset, reduced.rows()) = es.eigenvalues();
    out.vectors.middleCols(offset, reduced.rows()) = s * es.eigenvectors();
    offset += reduced.rows();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n * n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return out.energies[a] < out.energies[b]; });
  TransverseSpectrum sorted;
  sorted.energies.resize(n * n);
  sorted.vectors.resize(n * n, n * n);
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.energies[static_cast<Eigen::Index>(i)] = out.energies[order[i]];
    sorted.vectors.col(static_cast<Eigen::Index>(i)) = out.vectors.col(order[i]);
  }
  return sorted;
}

}  // namespace qdscatter
