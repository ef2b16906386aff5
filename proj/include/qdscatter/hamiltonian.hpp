#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "qdscatter/coulomb.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/grid.hpp"
#include "qdscatter/potential.hpp"

namespace qdscatter {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

/// Product grid of the scattered coordinate x1 (all points of [0, L]) with one or two
/// bound coordinates resolved on the dot window. Flat index j * transverse_size() + k,
/// with k = a (one bound coordinate) or a * nw + b (two).
struct ProductGrid {
  Grid1D grid;
  int bound_coordinates = 1;

  std::size_t n1() const { return grid.num_points(); }
  std::size_t nw() const { return grid.window_size(); }
  std::size_t transverse_size() const { return bound_coordinates == 1 ? nw() : nw() * nw(); }
  std::size_t size() const { return n1() * transverse_size(); }
};

struct AssemblyOptions {
  std::size_t memory_cap_bytes = std::size_t{4} << 30;
};

namespace detail {

inline void check_memory(std::size_t rows, std::size_t per_row, const AssemblyOptions& opt) {
  // values + column indices, plus the triplet list used during assembly
  const std::size_t nnz = rows * per_row;
  const std::size_t bytes = nnz * (sizeof(double) + sizeof(std::int64_t)) + nnz * 24;
  require(bytes <= opt.memory_cap_bytes, ErrorCode::resource,
          "Hamiltonian needs about " + std::to_string(bytes) + " bytes, cap is " +
              std::to_string(opt.memory_cap_bytes));
}

inline RowSparse assemble_product(const PotentialProfile& potential, const ProductGrid& pg,
                                  const Interaction& interaction, const AssemblyOptions& opt) {
  const auto& g = pg.grid;
  const std::size_t n1 = pg.n1();
  const std::size_t nw = pg.nw();
  const std::size_t ntr = pg.transverse_size();
  const int dims = pg.bound_coordinates;
  check_memory(pg.size(), 3 + 2 * static_cast<std::size_t>(dims) + 1, opt);

  const double h = g.spacing();
  const double t = interaction.material.kinetic_prefactor() / (h * h);
  const auto& win = g.dot_window();

  std::vector<double> xw(nw), vw(nw);
  for (std::size_t a = 0; a < nw; ++a) {
    xw[a] = g.window_x(a);
    vw[a] = potential(win.begin + a);
  }
  // bound-bound part of the diagonal, independent of x1
  std::vector<double> bound_diag(ntr);
  for (std::size_t k = 0; k < ntr; ++k) {
    if (dims == 1) {
      bound_diag[k] = 2.0 * t + vw[k];
    } else {
      const std::size_t a = k / nw, b = k % nw;
      bound_diag[k] = 4.0 * t + vw[a] + vw[b] + interaction.bound_pair(xw[a], xw[b]);
    }
  }

  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  trip.reserve(pg.size() * (3 + 2 * static_cast<std::size_t>(dims)));
  auto idx = [ntr](std::size_t j, std::size_t k) { return static_cast<std::int64_t>(j * ntr + k); };
  for (std::size_t j = 0; j < n1; ++j) {
    const double x1 = g.x(j);
    const double v1 = 2.0 * t + potential(j);
    const bool coupled = interaction.lead_switch(x1) != 0.0 && interaction.strength != 0.0;
    std::vector<double> c1(nw, 0.0);
    if (coupled)
      for (std::size_t a = 0; a < nw; ++a) c1[a] = interaction.scattered_pair(x1, xw[a]);
    for (std::size_t k = 0; k < ntr; ++k) {
      const auto row = idx(j, k);
      double diag = v1 + bound_diag[k];
      if (dims == 1) diag += c1[k];
      else diag += c1[k / nw] + c1[k % nw];
      if (j > 0) trip.emplace_back(row, idx(j - 1, k), -t);
      if (dims == 2) {
        const std::size_t a = k / nw, b = k % nw;
        if (a > 0) trip.emplace_back(row, idx(j, k - nw), -t);
        if (b > 0) trip.emplace_back(row, idx(j, k - 1), -t);
        trip.emplace_back(row, row, diag);
        if (b + 1 < nw) trip.emplace_back(row, idx(j, k + 1), -t);
        if (a + 1 < nw) trip.emplace_back(row, idx(j, k + nw), -t);
      } else {
        if (k > 0) trip.emplace_back(row, idx(j, k - 1), -t);
        trip.emplace_back(row, row, diag);
        if (k + 1 < nw) trip.emplace_back(row, idx(j, k + 1), -t);
      }
      if (j + 1 < n1) trip.emplace_back(row, idx(j + 1, k), -t);
    }
  }
  RowSparse hmat(static_cast<std::int64_t>(pg.size()), static_cast<std::int64_t>(pg.size()));
  hmat.setFromTriplets(trip.begin(), trip.end());
  return hmat;
}

}  // namespace detail

/// H = -K d2/dx1^2 - K d2/dx2^2 + V(x1) + V(x2) + C(x1, x2) on x1 in [0, L], x2 in the
/// dot window. The x1 rows at j = 0 and j = n1 - 1 carry the plain stencil; the open
/// boundary terms are added by the solver.
inline RowSparse assemble_hamiltonian_2p(const PotentialProfile& potential, const Grid1D& grid,
                                         const Interaction& interaction, const AssemblyOptions& opt = {}) {
  return detail::assemble_product(potential, ProductGrid{grid, 1}, interaction, opt);
}

/// Three-electron analogue with two bound coordinates x2, x3 and all three pair terms.
inline RowSparse assemble_hamiltonian_3p(const PotentialProfile& potential, const Grid1D& grid,
                                         const Interaction& interaction, const AssemblyOptions& opt = {}) {
  return detail::assemble_product(potential, ProductGrid{grid, 2}, interaction, opt);
}

}  // namespace qdscatter
