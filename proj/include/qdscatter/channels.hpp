#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qdscatter/error.hpp"
#include "qdscatter/leads.hpp"
#include "qdscatter/qtbm.hpp"

namespace qdscatter {

/// Flux-normalised outgoing amplitudes: b_n multiplies exp(-i k_n x1) on the injection
/// side, c_n multiplies exp(+i k_n x1) on the exit side, both scaled by sqrt(v_n / v_inc)
/// so that R_n = |b_n|^2 and T_n = |c_n|^2 are probabilities.
struct ChannelAmplitudes {
  std::vector<Channel> channels;
  Eigen::Index incident = 0;
  Eigen::VectorXcd b;
  Eigen::VectorXcd c;
  Eigen::VectorXd R;
  Eigen::VectorXd T;
  double unitarity_defect = 0.0;
  double fit_residual = 0.0;
  double incoming_residual = 0.0;  // deviation of the fitted incoming waves from the injected one
  std::vector<std::string> warnings;

  Eigen::Index size() const { return b.size(); }
  int open() const { return open_count(channels); }
  /// Paper convention: M + 1 open channels.
  int M() const { return open() - 1; }
  double probability(Eigen::Index n) const { return R[n] + T[n]; }
  double total() const { return R.sum() + T.sum(); }
};

struct ExtractionOptions {
  std::size_t plane_offset = 0;  // grid points between the boundary and the first extraction plane
  double fit_tolerance = 1e-6;
};

inline void finalize_probabilities(ChannelAmplitudes& a) {
  a.R = a.b.cwiseAbs2();
  a.T = a.c.cwiseAbs2();
  a.unitarity_defect = std::abs(1.0 - a.total());
}

/// Amplitudes from the channel projections of psi on three consecutive x1 planes at each
/// lead: rows of `left` are planes j0, j0 + 1, j0 + 2 counted from x1 = 0, rows of `right`
/// are planes n1 - 1 - j0, n1 - 2 - j0, n1 - 3 - j0. Two planes fix the incoming and
/// outgoing plane-wave coefficients, the third measures the fit residual.
inline ChannelAmplitudes extract_from_projections(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right,
                                                  const std::vector<Channel>& channels, Eigen::Index incident,
                                                  std::size_t n1, std::size_t j0,
                                                  const ExtractionOptions& opt = {}) {
  const auto nch = static_cast<Eigen::Index>(channels.size());
  require(left.rows() == 3 && right.rows() == 3 && left.cols() == nch && right.cols() == nch,
          ErrorCode::invalid_parameter, "projection tables must be 3 x channel count");
  require(incident >= 0 && incident < nch && channels[static_cast<std::size_t>(incident)].open,
          ErrorCode::invalid_parameter, "incident channel must be open");
  ChannelAmplitudes out;
  out.channels = channels;
  out.incident = incident;
  out.b = Eigen::VectorXcd::Zero(nch);
  out.c = Eigen::VectorXcd::Zero(nch);
  const double v_inc = channels[static_cast<std::size_t>(incident)].group_velocity_vn;

  auto fit = [](const Eigen::Vector3cd& p, double kh, double j_first, double dir, double& residual) {
    // psi(j) = A exp(i kh j) + B exp(-i kh j) at j = j_first, j_first + dir
    auto wave = [kh](double j, double s) { return std::polar(1.0, s * kh * j); };
    Eigen::Matrix2cd m;
    m << wave(j_first, 1), wave(j_first, -1), wave(j_first + dir, 1), wave(j_first + dir, -1);
    const Eigen::Vector2cd ab = m.fullPivLu().solve(Eigen::Vector2cd(p[0], p[1]));
    const double j2 = j_first + 2 * dir;
    const cplx predicted = ab[0] * wave(j2, 1) + ab[1] * wave(j2, -1);
    residual = std::abs(p[2] - predicted) / std::max({1.0, std::abs(ab[0]), std::abs(ab[1])});
    return ab;
  };

  for (Eigen::Index n = 0; n < nch; ++n) {
    const auto& ch = channels[static_cast<std::size_t>(n)];
    if (!ch.open) continue;
    const double kh = std::arg(ch.step);
    double res_l = 0.0, res_r = 0.0;
    const Eigen::Vector2cd ab = fit(left.col(n), kh, static_cast<double>(j0), 1.0, res_l);
    const Eigen::Vector2cd cd = fit(right.col(n), kh, static_cast<double>(n1 - 1 - j0), -1.0, res_r);
    out.fit_residual = std::max({out.fit_residual, res_l, res_r});
    const double injected = n == incident ? 1.0 : 0.0;
    out.incoming_residual = std::max({out.incoming_residual, std::abs(ab[0] - injected), std::abs(cd[1])});
    const double w = std::sqrt(ch.group_velocity_vn / v_inc);
    out.b[n] = w * ab[1];
    out.c[n] = w * cd[0];
  }
  require(out.fit_residual < opt.fit_tolerance, ErrorCode::contaminated_lead,
          "plane-wave fit residual " + std::to_string(out.fit_residual) +
              " at the extraction planes; move them inward or raise num_evanescent");
  finalize_probabilities(out);
  return out;
}

inline ChannelAmplitudes extract_amplitudes(const ScatteringSolution& sol, const ChannelBasis& basis,
                                            const ExtractionOptions& opt = {}) {
  require(sol.n1 >= 2 * opt.plane_offset + 6, ErrorCode::invalid_parameter, "extraction planes overlap");
  const auto nch = static_cast<Eigen::Index>(sol.channels.size());
  Eigen::MatrixXcd left(3, nch), right(3, nch);
  const Eigen::MatrixXcd ut = basis.vectors.transpose().cast<cplx>();
  for (std::size_t s = 0; s < 3; ++s) {
    left.row(static_cast<Eigen::Index>(s)) = (ut * sol.plane(opt.plane_offset + s)).transpose();
    right.row(static_cast<Eigen::Index>(s)) = (ut * sol.plane(sol.n1 - 1 - opt.plane_offset - s)).transpose();
  }
  auto amps = extract_from_projections(left, right, sol.channels, sol.incident_channel, sol.n1, opt.plane_offset, opt);
  amps.warnings = sol.warnings;
  return amps;
}

enum class PostSelection { both, transmitted, reflected };

inline std::string_view to_string(PostSelection p) {
  switch (p) {
    case PostSelection::both: return "both";
    case PostSelection::transmitted: return "transmitted";
    case PostSelection::reflected: return "reflected";
  }
  return "both";
}

/// Conditions the outgoing state on detecting the scattered carrier on one side.
inline ChannelAmplitudes post_select(const ChannelAmplitudes& amps, PostSelection side) {
  if (side == PostSelection::both) return amps;
  ChannelAmplitudes out = amps;
  if (side == PostSelection::transmitted) out.b.setZero();
  else out.c.setZero();
  const double kept = out.b.squaredNorm() + out.c.squaredNorm();
  require(kept >= 1e-12, ErrorCode::undefined_post_selection,
          std::string("no outgoing probability on the ") + std::string(to_string(side)) + " side");
  const double s = 1.0 / std::sqrt(kept);
  out.b *= s;
  out.c *= s;
  finalize_probabilities(out);
  return out;
}

}  // namespace qdscatter
