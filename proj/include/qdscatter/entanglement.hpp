#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdscatter/channels.hpp"
#include "qdscatter/error.hpp"

namespace qdscatter {

/// Block-diagonal reduced density matrix of the bound subsystem, one block per
/// degeneracy group.
struct ReducedDensityMatrix {
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::MatrixXcd> blocks;
  Eigen::VectorXd eigenvalues;  // descending
  double trace = 0.0;
  double raw_trace = 0.0;  // before normalisation
};

/// (rho)_mn = b_m conj(b_n) + c_m conj(c_n) for m, n in one degeneracy group, normalised by
/// the total outgoing probability.
inline ReducedDensityMatrix reduce_density_matrix(const ChannelAmplitudes& amps,
                                                  const std::vector<std::vector<Eigen::Index>>& groups,
                                                  double trace_tolerance = 1e-6) {
  ReducedDensityMatrix rdm;
  rdm.groups = groups;
  std::vector<bool> seen(static_cast<std::size_t>(amps.size()), false);
  for (const auto& g : groups) {
    for (auto n : g) {
      require(n >= 0 && n < amps.size() && !seen[static_cast<std::size_t>(n)], ErrorCode::invalid_parameter,
              "degeneracy groups must partition the channel indices");
      seen[static_cast<std::size_t>(n)] = true;
    }
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }), ErrorCode::invalid_parameter,
          "degeneracy groups must partition the channel indices");

  rdm.raw_trace = amps.b.squaredNorm() + amps.c.squaredNorm();
  require(std::abs(rdm.raw_trace - 1.0) <= trace_tolerance, ErrorCode::upstream_unitarity,
          "reduced density matrix trace " + std::to_string(rdm.raw_trace) + " deviates from 1");
  std::vector<double> lambda;
  for (const auto& g : groups) {
    const auto m = static_cast<Eigen::Index>(g.size());
    Eigen::VectorXcd bb(m), cc(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      bb[i] = amps.b[g[static_cast<std::size_t>(i)]];
      cc[i] = amps.c[g[static_cast<std::size_t>(i)]];
    }
    Eigen::MatrixXcd block = (bb * bb.adjoint() + cc * cc.adjoint()) / rdm.raw_trace;
    if (m == 1) {
      lambda.push_back(block(0, 0).real());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
      for (Eigen::Index i = 0; i < m; ++i) lambda.push_back(es.eigenvalues()[i]);
    }
    rdm.trace += block.trace().real();
    rdm.blocks.push_back(std::move(block));
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  rdm.eigenvalues = Eigen::Map<Eigen::VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  return rdm;
}

/// -sum lambda ln lambda with 0 ln 0 = 0; eigenvalues in [-1e-10, 0) count as zero.
inline double von_neumann_entropy(const ReducedDensityMatrix& rdm) {
  double xi = 0.0;
  for (Eigen::Index i = 0; i < rdm.eigenvalues.size(); ++i) {
    const double l = rdm.eigenvalues[i];
    require(l >= -1e-10, ErrorCode::numerical_consistency,
            "reduced density matrix eigenvalue " + std::to_string(l) + " is negative");
    if (l > 0.0) xi -= l * std::log(l);
  }
  return std::max(0.0, xi);
}

struct EntropyRecord {
  double incident_T0 = 0.0;
  double xi = 0.0;
  int M = 0;  // M + 1 open channels
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd probabilities;  // R_n + T_n

  double bound() const { return std::log(static_cast<double>(M + 1)); }
};

inline EntropyRecord entropy_record(const ChannelAmplitudes& amps,
                                    const std::vector<std::vector<Eigen::Index>>& groups, double T0) {
  const auto rdm = reduce_density_matrix(amps, groups);
  EntropyRecord rec;
  rec.incident_T0 = T0;
  rec.xi = von_neumann_entropy(rdm);
  rec.M = amps.M();
  rec.eigenvalues = rdm.eigenvalues.cwiseMax(0.0);
  rec.probabilities = amps.R + amps.T;
  return rec;
}

}  // namespace qdscatter
