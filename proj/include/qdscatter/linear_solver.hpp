#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "qdscatter/coulomb.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/hamiltonian.hpp"
#include "qdscatter/lattice.hpp"
#include "qdscatter/potential.hpp"

namespace qdscatter {

/// Open-boundary term -t * sum_n z_n u_n u_n^T acting on the first and last x1 planes.
struct BoundaryTerm {
  Eigen::MatrixXd modes;      // transverse_size x R, l2-orthonormal
  Eigen::VectorXcd coeff;     // -t z_n per mode
};

/// y = (H - E + boundary) x on the product grid.
class ScatteringOperator {
 public:
  ScatteringOperator(const RowSparse& h, double energy, BoundaryTerm boundary, std::size_t transverse_size)
      : h_(h), energy_(energy), boundary_(std::move(boundary)), ntr_(static_cast<Eigen::Index>(transverse_size)) {}

  Eigen::Index size() const { return h_.rows(); }

  void operator()(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    using RealPairs = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
    const Eigen::Index n = h_.rows();
    Eigen::Map<const RealPairs> xr(reinterpret_cast<const double*>(x.data()), n, 2);
    y.resize(n);
    Eigen::Map<RealPairs> yr(reinterpret_cast<double*>(y.data()), n, 2);
    yr.noalias() = h_ * xr;
    y -= energy_ * x;
    apply_boundary(x, y, 0);
    apply_boundary(x, y, n - ntr_);
  }

  const BoundaryTerm& boundary() const { return boundary_; }
  double energy() const { return energy_; }

 private:
  void apply_boundary(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, Eigen::Index offset) const {
    if (boundary_.modes.cols() == 0) return;
    const Eigen::VectorXcd proj = boundary_.modes.transpose().cast<cplx>() * x.segment(offset, ntr_);
    y.segment(offset, ntr_).noalias() += boundary_.modes.cast<cplx>() * boundary_.coeff.cwiseProduct(proj);
  }

  const RowSparse& h_;
  double energy_;
  BoundaryTerm boundary_;
  Eigen::Index ntr_;
};

struct IterativeOptions {
  double tolerance = 1e-8;
  int max_iterations = 3000;
  int restart = 40;
};

struct IterativeResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning. `op(x, y)` computes y = A x and
/// `prec(r, z)` computes z ~ A^{-1} r. Convergence is judged on the true relative
/// residual ||b - A x|| / ||b|| at every restart.
template <class Operator, class Preconditioner>
IterativeResult gmres(const Operator& op, const Preconditioner& prec, const Eigen::VectorXcd& b,
                      Eigen::VectorXcd& x, const IterativeOptions& opt = {}) {
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  IterativeResult res;
  if (x.size() != n) x = Eigen::VectorXcd::Zero(n);
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  const int m = std::max(1, opt.restart);
  Eigen::MatrixXcd v(n, m + 1);
  Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);
  Eigen::VectorXcd cs(m), sn(m), g(m + 1);
  Eigen::VectorXcd w(n), z(n), r(n);

  while (true) {
    op(x, r);
    r = b - r;
    res.residual = r.norm() / bnorm;
    if (res.residual < opt.tolerance) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= opt.max_iterations) return res;

    const double beta = r.norm();
    v.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    hess.setZero();
    int k = 0;
    for (; k < m && res.iterations < opt.max_iterations; ++k, ++res.iterations) {
      prec(v.col(k), z);
      op(z, w);
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = v.col(i).dot(w);
        w -= hess(i, k) * v.col(i);
      }
      // second Gram-Schmidt pass
      for (int i = 0; i <= k; ++i) {
        const cplx c = v.col(i).dot(w);
        hess(i, k) += c;
        w -= c * v.col(i);
      }
      const double wn = w.norm();
      hess(k + 1, k) = wn;
      if (wn > 0.0) v.col(k + 1) = w / wn;
      for (int i = 0; i < k; ++i) {
        const cplx a = hess(i, k), bb = hess(i + 1, k);
        hess(i, k) = std::conj(cs[i]) * a + std::conj(sn[i]) * bb;
        hess(i + 1, k) = -sn[i] * a + cs[i] * bb;
      }
      const cplx a = hess(k, k), bb = hess(k + 1, k);
      const double rho = std::sqrt(std::norm(a) + std::norm(bb));
      cs[k] = rho == 0.0 ? cplx(1.0) : a / rho;
      sn[k] = rho == 0.0 ? cplx(0.0) : bb / rho;
      hess(k, k) = rho;
      hess(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = std::conj(cs[k]) * g[k];
      if (std::abs(g[k + 1]) / bnorm < 0.5 * opt.tolerance || wn == 0.0) {
        ++k;
        ++res.iterations;
        break;
      }
    }
    const Eigen::VectorXcd y =
        hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    const Eigen::VectorXcd dx = v.leftCols(k) * y;
    prec(dx, z);
    x += z;
  }
}

/// Energy-independent data of the mode-space preconditioner: the complete transverse
/// eigenbasis and the scattered-carrier interaction projected on it, per x1 plane.
struct TransverseModel {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;                    // ntr x ntr
  Eigen::Index coupled = 0;                   // lowest modes treated with full coupling
  std::vector<double> plane_potential;        // V(x1_j)
  std::vector<Eigen::MatrixXd> low_coupling;  // coupled x coupled per plane (empty when switched off)
  Eigen::MatrixXd high_diagonal;              // (ntr - coupled) x n1
  double hopping = 0.0;
};

inline TransverseModel build_transverse_model(const PotentialProfile& potential, const ProductGrid& pg,
                                              const Interaction& interaction, TransverseSpectrum spectrum,
                                              Eigen::Index coupled_modes) {
  TransverseModel m;
  const auto& g = pg.grid;
  const auto n1 = static_cast<Eigen::Index>(pg.n1());
  const auto nw = static_cast<Eigen::Index>(pg.nw());
  const auto ntr = static_cast<Eigen::Index>(pg.transverse_size());
  require(spectrum.vectors.rows() == ntr && spectrum.vectors.cols() == ntr, ErrorCode::invalid_parameter,
          "transverse spectrum does not match the product grid");
  m.energies = std::move(spectrum.energies);
  m.vectors = std::move(spectrum.vectors);
  m.coupled = std::min(coupled_modes, ntr);
  m.hopping = interaction.material.kinetic_prefactor() / (g.spacing() * g.spacing());
  m.plane_potential.resize(static_cast<std::size_t>(n1));
  m.low_coupling.resize(static_cast<std::size_t>(n1));

  const Eigen::Index nc = m.coupled;
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(ntr, n1);
  for (Eigen::Index j = 0; j < n1; ++j) {
    const double x1 = g.x(static_cast<std::size_t>(j));
    m.plane_potential[static_cast<std::size_t>(j)] = potential(static_cast<std::size_t>(j));
    if (interaction.strength == 0.0 || interaction.lead_switch(x1) == 0.0) continue;
    Eigen::VectorXd c1(nw);
    for (Eigen::Index a = 0; a < nw; ++a)
      c1[a] = interaction.scattered_pair(x1, g.window_x(static_cast<std::size_t>(a)));
    for (Eigen::Index k = 0; k < ntr; ++k)
      weights(k, j) = pg.bound_coordinates == 1 ? c1[k] : c1[k / nw] + c1[k % nw];
    const auto low = m.vectors.leftCols(nc);
    m.low_coupling[static_cast<std::size_t>(j)] = low.transpose() * weights.col(j).asDiagonal() * low;
  }
  const Eigen::MatrixXd sq = m.vectors.rightCols(ntr - nc).array().square().matrix();
  m.high_diagonal = sq.transpose() * weights;
  return m;
}

/// Approximate inverse of the scattering operator in the transverse eigenbasis: the
/// lowest modes are coupled exactly through a block-tridiagonal solve along x1, the
/// remaining ones keep only their diagonal interaction.
class ModePreconditioner {
 public:
  ModePreconditioner(const TransverseModel& model, double energy, const BoundaryTerm& boundary)
      : model_(model) {
    const auto n1 = static_cast<Eigen::Index>(model.plane_potential.size());
    const Eigen::Index nc = model.coupled;
    const Eigen::Index ntr = model.vectors.rows();
    const double t = model.hopping;

    Eigen::MatrixXcd edge = Eigen::MatrixXcd::Zero(nc, nc);
    if (boundary.modes.cols() > 0) {
      const Eigen::MatrixXd overlap = model.vectors.leftCols(nc).transpose() * boundary.modes;
      edge = overlap.cast<cplx>() * boundary.coeff.asDiagonal() * overlap.transpose().cast<cplx>();
    }

    low_inverse_.resize(static_cast<std::size_t>(n1));
    Eigen::MatrixXcd prev;
    for (Eigen::Index j = 0; j < n1; ++j) {
      const double vj = model.plane_potential[static_cast<std::size_t>(j)];
      Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(nc, nc);
      d.diagonal() = (model.energies.head(nc).array() + 2.0 * t + vj - energy).cast<cplx>();
      const auto& s = model.low_coupling[static_cast<std::size_t>(j)];
      if (s.size() > 0) d += s.cast<cplx>();
      if (j == 0 || j == n1 - 1) d += edge;
      if (j > 0) d -= (t * t) * prev;
      prev = d.partialPivLu().inverse();
      low_inverse_[static_cast<std::size_t>(j)] = prev;
    }

    const Eigen::Index nh = ntr - nc;
    high_pivot_.resize(nh, n1);
    for (Eigen::Index j = 0; j < n1; ++j) {
      const double vj = model.plane_potential[static_cast<std::size_t>(j)];
      Eigen::ArrayXd a = model.energies.tail(nh).array() + 2.0 * t + vj - energy +
                         model.high_diagonal.col(j).array();
      if (j > 0) a -= (t * t) * high_pivot_.col(j - 1).array();
      high_pivot_.col(j) = a.inverse().matrix();
    }
  }

  void operator()(const Eigen::VectorXcd& r, Eigen::VectorXcd& z) const {
    const Eigen::Index ntr = model_.vectors.rows();
    const Eigen::Index n1 = r.size() / ntr;
    const Eigen::Index nc = model_.coupled;
    const Eigen::Index nh = ntr - nc;
    const double t = model_.hopping;
    Eigen::Map<const Eigen::MatrixXcd> rr(r.data(), ntr, n1);

    Eigen::MatrixXcd modes(ntr, n1);
    {
      const Eigen::MatrixXd re = rr.real(), im = rr.imag();
      const Eigen::MatrixXd mre = model_.vectors.transpose() * re;
      const Eigen::MatrixXd mim = model_.vectors.transpose() * im;
      modes.real() = mre;
      modes.imag() = mim;
    }

    // block-tridiagonal sweep for the coupled modes
    for (Eigen::Index j = 1; j < n1; ++j) {
      const Eigen::VectorXcd carry = low_inverse_[static_cast<std::size_t>(j - 1)] * modes.col(j - 1).head(nc);
      modes.col(j).head(nc) += t * carry;
    }
    modes.col(n1 - 1).head(nc) = low_inverse_[static_cast<std::size_t>(n1 - 1)] * modes.col(n1 - 1).head(nc).eval();
    for (Eigen::Index j = n1 - 2; j >= 0; --j) {
      const Eigen::VectorXcd rhs = modes.col(j).head(nc) + t * modes.col(j + 1).head(nc);
      modes.col(j).head(nc) = low_inverse_[static_cast<std::size_t>(j)] * rhs;
    }

    // scalar tridiagonal sweeps for the rest
    if (nh > 0) {
      auto high = modes.bottomRows(nh);
      for (Eigen::Index j = 1; j < n1; ++j)
        high.col(j).array() += t * high.col(j - 1).array() * high_pivot_.col(j - 1).array();
      high.col(n1 - 1).array() *= high_pivot_.col(n1 - 1).array();
      for (Eigen::Index j = n1 - 2; j >= 0; --j)
        high.col(j).array() = (high.col(j).array() + t * high.col(j + 1).array()) * high_pivot_.col(j).array();
    }

    z.resize(r.size());
    Eigen::Map<Eigen::MatrixXcd> zz(z.data(), ntr, n1);
    const Eigen::MatrixXd re = modes.real(), im = modes.imag();
    const Eigen::MatrixXd zre = model_.vectors * re;
    const Eigen::MatrixXd zim = model_.vectors * im;
    zz.real() = zre;
    zz.imag() = zim;
  }

 private:
  const TransverseModel& model_;
  std::vector<Eigen::MatrixXcd> low_inverse_;
  Eigen::MatrixXd high_pivot_;
};

/// Sparse LU of the complex scattering matrix; returns the solution and its relative residual.
inline Eigen::VectorXcd solve_direct(const ScatteringOperator& op, const RowSparse& h, const Eigen::VectorXcd& rhs,
                                     double& relative_residual) {
  using ComplexSparse = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
  const Eigen::Index n = h.rows();
  const Eigen::Index ntr = op.boundary().modes.rows();
  std::vector<Eigen::Triplet<cplx, int>> trip;
  trip.reserve(static_cast<std::size_t>(h.nonZeros() + 2 * ntr * ntr));
  for (Eigen::Index r = 0; r < h.outerSize(); ++r)
    for (RowSparse::InnerIterator it(h, r); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                        cplx(it.value() - (it.row() == it.col() ? op.energy() : 0.0)));
  const auto& bnd = op.boundary();
  if (bnd.modes.cols() > 0) {
    const Eigen::MatrixXcd block =
        bnd.modes.cast<cplx>() * bnd.coeff.asDiagonal() * bnd.modes.transpose().cast<cplx>();
    for (Eigen::Index offset : {Eigen::Index{0}, n - ntr})
      for (Eigen::Index a = 0; a < ntr; ++a)
        for (Eigen::Index b = 0; b < ntr; ++b)
          if (block(a, b) != cplx(0.0))
            trip.emplace_back(static_cast<int>(offset + a), static_cast<int>(offset + b), block(a, b));
  }
  ComplexSparse a(static_cast<int>(n), static_cast<int>(n));
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<ComplexSparse, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  require(lu.info() == Eigen::Success, ErrorCode::convergence, "sparse LU factorisation failed: " + lu.lastErrorMessage());
  Eigen::VectorXcd x = lu.solve(rhs);
  require(lu.info() == Eigen::Success, ErrorCode::convergence, "sparse LU solve failed");
  relative_residual = (a * x - rhs).norm() / rhs.norm();
  return x;
}

}  // namespace qdscatter
