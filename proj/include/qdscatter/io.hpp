#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdscatter/channels.hpp"
#include "qdscatter/entanglement.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/qtbm.hpp"

namespace qdscatter {

/// Outcome of one incident energy.
struct EnergyResult {
  double T0 = 0.0;
  bool ok = false;
  std::string status = "ok";  // "ok" or an error code name
  std::string message;
  ChannelAmplitudes amplitudes;
  EntropyRecord entropy;
  double wall_time_s = 0.0;
  int iterations = 0;
  double solver_residual = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {
inline std::string fixed12(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  return buf;
}
inline std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}
inline std::string sci(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}
}  // namespace detail

/// Channel table: T0_meV, M, then per channel n T_n_meV, R_n, T_n_prob, abs_b_n, abs_c_n,
/// then unitarity_defect, status, wall_time_s.
inline std::string channels_csv_header(Eigen::Index nch) {
  std::string s = "T0_meV,M";
  for (Eigen::Index n = 0; n < nch; ++n) {
    const auto i = std::to_string(n);
    s += ",T_" + i + "_meV,R_" + i + ",T_" + i + "_prob,abs_b_" + i + ",abs_c_" + i;
  }
  return s + ",unitarity_defect,status,wall_time_s";
}

inline std::string channels_csv_row(const EnergyResult& r, Eigen::Index nch) {
  using detail::fixed12;
  std::string s = fixed12(r.T0) + "," + (r.ok ? std::to_string(r.amplitudes.M()) : std::string("nan"));
  for (Eigen::Index n = 0; n < nch; ++n) {
    if (r.ok) {
      const auto& a = r.amplitudes;
      s += "," + fixed12(a.channels[static_cast<std::size_t>(n)].kinetic_Tn) + "," + fixed12(a.R[n]) + "," +
           fixed12(a.T[n]) + "," + fixed12(std::abs(a.b[n])) + "," + fixed12(std::abs(a.c[n]));
    } else {
      s += ",nan,nan,nan,nan,nan";
    }
  }
  s += "," + (r.ok ? detail::sci(r.amplitudes.unitarity_defect) : std::string("nan"));
  s += "," + r.status + "," + detail::fixed3(r.wall_time_s);
  return s;
}

/// Entropy table: T0_meV, xi, M, lambda_0 ... lambda_{N-1} (descending, zero padded), status.
inline std::string entropy_csv_header(Eigen::Index nch) {
  std::string s = "T0_meV,xi,M";
  for (Eigen::Index n = 0; n < nch; ++n) s += ",lambda_" + std::to_string(n);
  return s + ",status";
}

inline std::string entropy_csv_row(const EnergyResult& r, Eigen::Index nch) {
  using detail::fixed12;
  std::string s = fixed12(r.T0);
  if (r.ok) {
    s += "," + fixed12(r.entropy.xi) + "," + std::to_string(r.entropy.M);
    for (Eigen::Index n = 0; n < nch; ++n)
      s += "," + fixed12(n < r.entropy.eigenvalues.size() ? r.entropy.eigenvalues[n] : 0.0);
  } else {
    s += ",nan,nan";
    for (Eigen::Index n = 0; n < nch; ++n) s += ",nan";
  }
  return s + "," + r.status;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    require(out.good(), ErrorCode::resource, "cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

inline void write_result_tables(const std::filesystem::path& channels_path, const std::filesystem::path& entropy_path,
                                const std::vector<EnergyResult>& rows, Eigen::Index nch) {
  std::string ch = channels_csv_header(nch) + "\n";
  std::string en = entropy_csv_header(nch) + "\n";
  for (const auto& r : rows) {
    ch += channels_csv_row(r, nch) + "\n";
    en += entropy_csv_row(r, nch) + "\n";
  }
  write_text(channels_path, ch);
  write_text(entropy_path, en);
}

/// Lossless JSON form of a result, used by the resumable journal.
inline nlohmann::json result_to_json(const EnergyResult& r) {
  nlohmann::json j;
  j["T0"] = r.T0;
  j["ok"] = r.ok;
  j["status"] = r.status;
  j["message"] = r.message;
  j["wall_time_s"] = r.wall_time_s;
  j["iterations"] = r.iterations;
  j["solver_residual"] = r.solver_residual;
  j["warnings"] = r.warnings;
  if (!r.ok) return j;
  const auto& a = r.amplitudes;
  nlohmann::json chans = nlohmann::json::array();
  for (const auto& c : a.channels)
    chans.push_back({c.index, c.bound_energy, c.kinetic_Tn, c.wavenumber_kn, c.decay_rate, c.open,
                     c.group_velocity_vn, c.step.real(), c.step.imag()});
  j["channels"] = chans;
  j["incident"] = a.incident;
  nlohmann::json b = nlohmann::json::array(), c = nlohmann::json::array();
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    b.push_back({a.b[n].real(), a.b[n].imag()});
    c.push_back({a.c[n].real(), a.c[n].imag()});
  }
  j["b"] = b;
  j["c"] = c;
  j["fit_residual"] = a.fit_residual;
  j["incoming_residual"] = a.incoming_residual;
  j["xi"] = r.entropy.xi;
  j["M"] = r.entropy.M;
  j["lambda"] = std::vector<double>(r.entropy.eigenvalues.data(), r.entropy.eigenvalues.data() + r.entropy.eigenvalues.size());
  return j;
}

inline EnergyResult result_from_json(const nlohmann::json& j) {
  EnergyResult r;
  r.T0 = j.at("T0").get<double>();
  r.ok = j.at("ok").get<bool>();
  r.status = j.at("status").get<std::string>();
  r.message = j.value("message", "");
  r.wall_time_s = j.value("wall_time_s", 0.0);
  r.iterations = j.value("iterations", 0);
  r.solver_residual = j.value("solver_residual", 0.0);
  r.warnings = j.value("warnings", std::vector<std::string>{});
  if (!r.ok) return r;
  auto& a = r.amplitudes;
  for (const auto& c : j.at("channels")) {
    Channel ch;
    ch.index = c[0].get<Eigen::Index>();
    ch.bound_energy = c[1].get<double>();
    ch.kinetic_Tn = c[2].get<double>();
    ch.wavenumber_kn = c[3].get<double>();
    ch.decay_rate = c[4].get<double>();
    ch.open = c[5].get<bool>();
    ch.group_velocity_vn = c[6].get<double>();
    ch.step = cplx(c[7].get<double>(), c[8].get<double>());
    a.channels.push_back(ch);
  }
  a.incident = j.at("incident").get<Eigen::Index>();
  const auto n = static_cast<Eigen::Index>(a.channels.size());
  a.b.resize(n);
  a.c.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a.b[k] = cplx(j["b"][k][0].get<double>(), j["b"][k][1].get<double>());
    a.c[k] = cplx(j["c"][k][0].get<double>(), j["c"][k][1].get<double>());
  }
  a.fit_residual = j.value("fit_residual", 0.0);
  a.incoming_residual = j.value("incoming_residual", 0.0);
  finalize_probabilities(a);
  r.entropy.incident_T0 = r.T0;
  r.entropy.xi = j.at("xi").get<double>();
  r.entropy.M = j.at("M").get<int>();
  const auto lam = j.at("lambda").get<std::vector<double>>();
  r.entropy.eigenvalues = Eigen::Map<const Eigen::VectorXd>(lam.data(), static_cast<Eigen::Index>(lam.size()));
  r.entropy.probabilities = a.R + a.T;
  return r;
}

/// Journal lines {"hash": ..., "result": {...}} whose hash matches, keyed by T0.
inline std::map<double, EnergyResult> read_journal(const std::filesystem::path& path, const std::string& hash) {
  std::map<double, EnergyResult> out;
  std::ifstream in(path);
  if (!in.good()) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.value("hash", "") != hash) continue;
      auto r = result_from_json(j.at("result"));
      out[r.T0] = std::move(r);
    } catch (const std::exception&) {
      // a line cut short by an interrupted run
    }
  }
  return out;
}

inline void append_journal(std::ofstream& out, const std::string& hash, const EnergyResult& r) {
  nlohmann::json j;
  j["hash"] = hash;
  j["result"] = result_to_json(r);
  out << j.dump() << "\n";
  out.flush();
}

/// Binary wavefunction dump: a text header terminated by a line "END", followed by the
/// little-endian complex128 values of psi with x1 slowest.
inline void write_psi_dump(const std::filesystem::path& path, const ScatteringSolution& sol, const Grid1D& grid,
                           int bound_coordinates) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::resource, "cannot write " + path.string());
  out << "qdscatter-psi 1\n";
  out << "dtype complex128-le\n";
  out << "order x1" << (bound_coordinates == 2 ? " x2 x3" : " x2") << "\n";
  out << "n1 " << sol.n1 << "\n";
  out << "nw " << grid.window_size() << "\n";
  out << "h_nm " << grid.spacing() << "\n";
  out << "L_nm " << grid.length() << "\n";
  out << "window_first_x_nm " << grid.window_x(0) << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", sol.incident_T0);
  out << "T0_meV " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", sol.energy);
  out << "E_meV " << buf << "\n";
  out << "END\n";
  for (Eigen::Index i = 0; i < sol.psi.size(); ++i) {
    const double re = sol.psi[i].real(), im = sol.psi[i].imag();
    unsigned char bytes[16];
    std::memcpy(bytes, &re, 8);
    std::memcpy(bytes + 8, &im, 8);
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bytes, bytes + 8);
      std::reverse(bytes + 8, bytes + 16);
    }
    out.write(reinterpret_cast<const char*>(bytes), 16);
  }
}

}  // namespace qdscatter
