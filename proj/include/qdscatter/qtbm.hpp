#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdscatter/coulomb.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/grid.hpp"
#include "qdscatter/hamiltonian.hpp"
#include "qdscatter/leads.hpp"
#include "qdscatter/linear_solver.hpp"
#include "qdscatter/potential.hpp"

namespace qdscatter {

enum class SolverKind { automatic, direct, iterative };

struct SolverOptions {
  SolverKind kind = SolverKind::automatic;
  std::size_t direct_limit = 60000;  // automatic: direct for two bound coordinates up to this size
  IterativeOptions iterative;
  Eigen::Index preconditioner_modes = 256;
  AssemblyOptions assembly;
  double direct_tolerance = 1e-8;
  double boundary_tolerance = 1e-6;
  double threshold_nudge = 1e-6;  // meV
};

struct ScatteringProblem {
  PotentialProfile potential;
  Grid1D grid;
  Interaction interaction;
  ChannelBasis basis;
  Eigen::Index incident_channel = 0;
  double incident_T0 = 0.0;
  int num_evanescent_K = 6;

  double total_energy() const { return basis.energies[incident_channel] + incident_T0; }
};

struct ScatteringSolution {
  Eigen::VectorXcd psi;  // index j * transverse_size + k
  std::size_t n1 = 0;
  std::size_t transverse_size = 0;
  double spacing = 1.0;
  double energy = 0.0;  // total energy actually solved (after any threshold nudge)
  double incident_T0 = 0.0;
  Eigen::Index incident_channel = 0;
  std::vector<Channel> channels;  // one per basis level
  std::vector<Channel> retained;  // boundary expansion
  double solver_residual = 0.0;
  double boundary_residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;

  Eigen::Map<const Eigen::VectorXcd> plane(std::size_t j) const {
    return {psi.data() + static_cast<Eigen::Index>(j * transverse_size),
            static_cast<Eigen::Index>(transverse_size)};
  }
};

/// Energy-independent part of the scattering problem: the assembled Hamiltonian and,
/// for the iterative path, the transverse mode model. Solves at different energies are
/// independent and may run concurrently.
class ScatteringSystem {
 public:
  ScatteringSystem(PotentialProfile potential, const Grid1D& grid, Interaction interaction, ChannelBasis basis,
                   SolverOptions options = {})
      : potential_(std::move(potential)),
        pg_{grid, basis.bound_coordinates},
        interaction_(std::move(interaction)),
        basis_(std::move(basis)),
        options_(options) {
    require(basis_.count() > 0, ErrorCode::invalid_parameter, "channel basis is empty");
    require(basis_.vectors.rows() == static_cast<Eigen::Index>(pg_.transverse_size()),
            ErrorCode::invalid_parameter, "channel basis does not match the dot window");
    h_ = basis_.bound_coordinates == 1 ? assemble_hamiltonian_2p(potential_, grid, interaction_, options_.assembly)
                                       : assemble_hamiltonian_3p(potential_, grid, interaction_, options_.assembly);
    kind_ = options_.kind;
    if (kind_ == SolverKind::automatic)
      kind_ = (basis_.bound_coordinates == 1 || pg_.size() <= options_.direct_limit) ? SolverKind::direct
                                                                                    : SolverKind::iterative;
    if (kind_ == SolverKind::iterative) {
      TransverseSpectrum spec = basis_.bound_coordinates == 1
                                    ? transverse_spectrum_1d(potential_, grid, interaction_.material)
                                    : transverse_spectrum_2p(potential_, grid, interaction_);
      model_ = std::make_unique<TransverseModel>(build_transverse_model(
          potential_, pg_, interaction_, std::move(spec), options_.preconditioner_modes));
    }
  }

  const ProductGrid& product_grid() const { return pg_; }
  const ChannelBasis& basis() const { return basis_; }
  const PotentialProfile& potential() const { return potential_; }
  const Interaction& interaction() const { return interaction_; }
  const RowSparse& hamiltonian() const { return h_; }
  SolverKind solver_kind() const { return kind_; }

  ScatteringSolution solve(double incident_T0, Eigen::Index incident_channel, int num_evanescent) const {
    require(incident_T0 > 0.0, ErrorCode::invalid_parameter, "incident kinetic energy must be positive");
    require(incident_channel >= 0 && incident_channel < basis_.count(), ErrorCode::invalid_parameter,
            "incident channel out of range");
    const double h = pg_.grid.spacing();
    const auto& mat = interaction_.material;
    ScatteringSolution sol;
    sol.n1 = pg_.n1();
    sol.transverse_size = pg_.transverse_size();
    sol.spacing = h;
    sol.incident_T0 = incident_T0;
    sol.incident_channel = incident_channel;
    sol.energy = basis_.energies[incident_channel] + incident_T0;
    require(sol.energy < basis_.ionization_threshold, ErrorCode::invalid_parameter,
            "total energy " + std::to_string(sol.energy) + " meV reaches the ionization threshold " +
                std::to_string(basis_.ionization_threshold) + " meV");
    for (Eigen::Index n = 0; n < basis_.count(); ++n) {
      if (std::abs(sol.energy - basis_.energies[n]) < 1e-9) {
        sol.energy += options_.threshold_nudge;
        sol.warnings.push_back("energy sits on the threshold of channel " + std::to_string(n) +
                               "; nudged by " + std::to_string(options_.threshold_nudge) + " meV");
        break;
      }
    }
    sol.channels = open_channels(sol.energy, basis_.energies, mat, h);
    sol.retained = lead_modes(basis_, sol.energy, mat, h, num_evanescent);
    require(sol.channels[static_cast<std::size_t>(incident_channel)].open, ErrorCode::invalid_parameter,
            "incident channel is closed");

    const double t = mat.kinetic_prefactor() / (h * h);
    BoundaryTerm bnd;
    bnd.modes.resize(basis_.vectors.rows(), static_cast<Eigen::Index>(sol.retained.size()));
    bnd.coeff.resize(static_cast<Eigen::Index>(sol.retained.size()));
    for (std::size_t r = 0; r < sol.retained.size(); ++r) {
      bnd.modes.col(static_cast<Eigen::Index>(r)) = basis_.vectors.col(sol.retained[r].index);
      bnd.coeff[static_cast<Eigen::Index>(r)] = -t * sol.retained[r].step;
    }
    const Eigen::Index ntr = static_cast<Eigen::Index>(sol.transverse_size);
    const cplx z0 = sol.channels[static_cast<std::size_t>(incident_channel)].step;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(h_.rows());
    rhs.head(ntr) = (t * (1.0 / z0 - z0)) * basis_.vectors.col(incident_channel).cast<cplx>();

    ScatteringOperator op(h_, sol.energy, std::move(bnd), sol.transverse_size);
    if (kind_ == SolverKind::direct) {
      sol.psi = solve_direct(op, h_, rhs, sol.solver_residual);
      require(sol.solver_residual < options_.direct_tolerance, ErrorCode::convergence,
              "direct solve residual " + std::to_string(sol.solver_residual));
    } else {
      ModePreconditioner prec(*model_, sol.energy, op.boundary());
      const auto res = gmres(op, prec, rhs, sol.psi, options_.iterative);
      sol.iterations = res.iterations;
      sol.solver_residual = res.residual;
      require(res.converged, ErrorCode::convergence,
              "iterative solve stopped after " + std::to_string(res.iterations) + " iterations at residual " +
                  std::to_string(res.residual));
    }

    const auto& modes = op.boundary().modes;
    for (std::size_t j : {std::size_t{0}, sol.n1 - 1}) {
      const Eigen::VectorXcd p = sol.plane(j);
      const Eigen::VectorXcd rest = p - modes.cast<cplx>() * (modes.transpose().cast<cplx>() * p);
      const double pn = p.norm();
      const double rel = pn > 0.0 ? rest.norm() / pn : 0.0;
      sol.boundary_residual = std::max(sol.boundary_residual, rel);
    }
    require(sol.boundary_residual < options_.boundary_tolerance, ErrorCode::insufficient_basis,
            "boundary plane is not spanned by the retained channels (residual " +
                std::to_string(sol.boundary_residual) + "); raise num_evanescent or the lead length");
    return sol;
  }

 private:
  PotentialProfile potential_;
  ProductGrid pg_;
  Interaction interaction_;
  ChannelBasis basis_;
  SolverOptions options_;
  RowSparse h_;
  SolverKind kind_ = SolverKind::direct;
  std::unique_ptr<TransverseModel> model_;
};

inline ScatteringSolution qtbm_solve(const ScatteringProblem& problem, const SolverOptions& options = {}) {
  ScatteringSystem sys(problem.potential, problem.grid, problem.interaction, problem.basis, options);
  return sys.solve(problem.incident_T0, problem.incident_channel, problem.num_evanescent_K);
}

}  // namespace qdscatter
