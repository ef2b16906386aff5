#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qdscatter/config.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/io.hpp"
#include "qdscatter/model.hpp"

namespace qdscatter {

struct SpectrumReport {
  nlohmann::json data;
  std::string text;
};

namespace detail {
inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
}  // namespace detail

/// Bound levels, spacings, degeneracy groups and channel-opening thresholds.
inline SpectrumReport report_spectrum(const PreparedSystem& p) {
  SpectrumReport rep;
  auto& d = rep.data;
  std::string& t = rep.text;
  const double delta = p.config.bound.delta_deg_meV;
  d["system"] = to_string(p.config.system);

  // single-particle levels of the dot potential
  BoundStateOptions o1;
  o1.max_levels = std::max(p.config.bound.max_levels, 8);
  o1.decay_tolerance = 1.0;  // report only; tails are checked by the solver path
  const BoundStateSet single = p.bound_1d ? *p.bound_1d : solve_bound_states_1d(p.potential, p.grid, p.material, o1);
  std::vector<double> e1(single.energies.data(), single.energies.data() + single.energies.size());
  d["single_particle_levels_meV"] = e1;
  t += "single-particle levels (meV)\n";
  if (e1.empty()) t += "  no bound states\n";
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t n = 0; n < e1.size(); ++n) {
    t += "  E" + std::to_string(n) + " = " + detail::fmt("%.6f", e1[n]);
    if (n > 0) {
      const double gap = e1[n] - e1[n - 1];
      t += "   spacing " + detail::fmt("%.6f", gap);
      if (gap < delta) {
        t += "   near-degenerate pair, splitting " + detail::fmt("%.3e", gap);
        pairs.push_back({{"levels", {n - 1, n}}, {"splitting_meV", gap}});
      }
    }
    t += "\n";
  }
  d["near_degenerate_pairs"] = pairs;

  if (p.bound_2p) {
    const auto& s = *p.bound_2p;
    std::vector<double> e2(s.energies.data(), s.energies.data() + s.energies.size());
    d["two_particle_levels_meV"] = e2;
    d["exchange_parity"] = s.exchange_parity;
    d["continuum_edge_meV"] = s.continuum_edge;
    d["degeneracy_groups"] = s.degeneracy_groups;
    t += "two-particle levels (meV), continuum edge " + detail::fmt("%.6f", s.continuum_edge) + "\n";
    if (e2.empty()) t += "  no bound states\n";
    for (std::size_t g = 0; g < s.degeneracy_groups.size(); ++g) {
      const auto& grp = s.degeneracy_groups[g];
      t += "  group " + std::to_string(g) + ":";
      for (auto n : grp)
        t += " eps" + std::to_string(n) + " = " + detail::fmt("%.6f", e2[static_cast<std::size_t>(n)]) +
             (s.exchange_parity[static_cast<std::size_t>(n)] > 0 ? " (+)" : " (-)");
      if (grp.size() > 1)
        t += "   splitting " + detail::fmt("%.3e", e2[static_cast<std::size_t>(grp.back())] -
                                                        e2[static_cast<std::size_t>(grp.front())]);
      t += "\n";
    }
  }

  nlohmann::json thresholds = nlohmann::json::array();
  if (p.basis.count() > 0) {
    const Eigen::Index inc = p.incident;
    t += "channel-opening thresholds T0 (meV) for incidence in level " + std::to_string(inc) + "\n";
    for (Eigen::Index n = 0; n < p.basis.count(); ++n) {
      const double th = p.basis.energies[n] - p.basis.energies[inc];
      thresholds.push_back({{"level", n}, {"T0_meV", th}});
      if (n != inc && th > 0.0) t += "  level " + std::to_string(n) + ": " + detail::fmt("%.6f", th) + "\n";
    }
  }
  d["thresholds"] = thresholds;
  return rep;
}

inline SpectrumReport report_spectrum(const Config& c) { return report_spectrum(prepare_bound_states(c)); }

/// One row per grid point: x and V followed by every level (1D) or x2, x3 followed by
/// every two-particle level.
inline void write_wavefunctions_csv(const std::filesystem::path& path, const PreparedSystem& p) {
  using detail::fixed12;
  const auto& g = p.grid;
  const auto nw = g.window_size();
  std::string s;
  if (p.bound_1d) {
    const auto& b = *p.bound_1d;
    s = "x_nm,V_meV";
    for (Eigen::Index n = 0; n < b.count(); ++n) s += ",phi_" + std::to_string(n);
    s += "\n";
    for (std::size_t a = 0; a < nw; ++a) {
      s += fixed12(g.window_x(a)) + "," + fixed12(p.potential(g.dot_window().begin + a));
      for (Eigen::Index n = 0; n < b.count(); ++n) s += "," + fixed12(b.wavefunctions(static_cast<Eigen::Index>(a), n));
      s += "\n";
    }
  } else if (p.bound_2p) {
    const auto& b = *p.bound_2p;
    s = "x2_nm,x3_nm";
    for (Eigen::Index n = 0; n < b.count(); ++n) s += ",Gamma_" + std::to_string(n);
    s += "\n";
    for (std::size_t a = 0; a < nw; ++a)
      for (std::size_t c = 0; c < nw; ++c) {
        s += fixed12(g.window_x(a)) + "," + fixed12(g.window_x(c));
        const auto k = static_cast<Eigen::Index>(a * nw + c);
        for (Eigen::Index n = 0; n < b.count(); ++n) s += "," + fixed12(b.wavefunctions(k, n));
        s += "\n";
      }
  }
  write_text(path, s);
}

}  // namespace qdscatter
