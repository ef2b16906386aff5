#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qdscatter/channels.hpp"
#include "qdscatter/config.hpp"
#include "qdscatter/entanglement.hpp"
#include "qdscatter/io.hpp"
#include "qdscatter/model.hpp"
#include "qdscatter/version.hpp"

namespace qdscatter {

/// Solves one incident energy; failures are captured in the result, never thrown.
inline EnergyResult solve_energy(const PreparedSystem& sys, double T0, ScatteringSolution* keep = nullptr) {
  EnergyResult r;
  r.T0 = T0;
  const auto start = std::chrono::steady_clock::now();
  try {
    ScatteringSolution sol = sys.scattering->solve(T0, sys.incident, sys.config.solver.num_evanescent);
    ExtractionOptions eo;
    eo.plane_offset = static_cast<std::size_t>(sys.config.solver.extraction_offset);
    r.amplitudes = extract_amplitudes(sol, sys.basis, eo);
    r.iterations = sol.iterations;
    r.solver_residual = sol.solver_residual;
    r.warnings = sol.warnings;
    const ChannelAmplitudes selected = post_select(r.amplitudes, sys.config.sweep.post_selection);
    r.entropy = entropy_record(selected, sys.basis.degeneracy_groups, T0);
    r.entropy.M = r.amplitudes.M();
    r.ok = true;
    if (keep) *keep = std::move(sol);
  } catch (const Error& e) {
    r.ok = false;
    r.status = std::string(to_string(e.code()));
    r.message = e.what();
  } catch (const std::exception& e) {
    r.ok = false;
    r.status = "internal";
    r.message = e.what();
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct SweepResult {
  std::vector<EnergyResult> rows;  // ascending T0
  nlohmann::json provenance;
  int failures = 0;
  int resumed = 0;
  bool failed_above_threshold() const {
    return !rows.empty() && failures > 0 &&
           static_cast<double>(failures) > threshold * static_cast<double>(rows.size());
  }
  double threshold = 0.1;
};

/// Uniform grid T0_min ... T0_max with num_steps points.
inline std::vector<double> uniform_energies(const SweepConfig& s) {
  std::vector<double> e(static_cast<std::size_t>(s.num_steps));
  const double step = (s.T0_max_meV - s.T0_min_meV) / (s.num_steps - 1);
  for (int i = 0; i < s.num_steps; ++i) e[static_cast<std::size_t>(i)] = s.T0_min_meV + step * i;
  e.back() = s.T0_max_meV;
  return e;
}

/// Midpoints of neighbouring successful rows whose entropies differ by more than the
/// threshold, lowest T0 first, at most `budget` of them.
inline std::vector<double> refinement_points(const std::vector<EnergyResult>& rows, double threshold, int budget,
                                             double min_gap = 1e-3) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < rows.size() && static_cast<int>(out.size()) < budget; ++i) {
    const auto& a = rows[i];
    const auto& b = rows[i + 1];
    if (!a.ok || !b.ok) continue;
    if (b.T0 - a.T0 < 2.0 * min_gap) continue;
    if (std::abs(b.entropy.xi - a.entropy.xi) > threshold) out.push_back(0.5 * (a.T0 + b.T0));
  }
  return out;
}

struct SweepHooks {
  std::function<void(const EnergyResult&)> on_row;  // called in T0 order within each pass
};

namespace detail {

// Runs the energies on a worker pool; results are handed to `sink` in input order.
inline void run_pass(const PreparedSystem& sys, const std::vector<double>& energies, int threads,
                     const std::function<void(EnergyResult&&)>& sink) {
  const std::size_t n = energies.size();
  std::vector<std::optional<EnergyResult>> slots(n);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      EnergyResult r = solve_energy(sys, energies[i]);
      {
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(r);
      }
      cv.notify_all();
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (nt == 1) {
    for (std::size_t i = 0; i < n; ++i) sink(solve_energy(sys, energies[i]));
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (std::size_t i = 0; i < n; ++i) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return slots[i].has_value(); });
    EnergyResult r = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    sink(std::move(r));
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

inline nlohmann::json provenance_json(const PreparedSystem& sys) {
  nlohmann::json p;
  p["code"] = {{"name", "qdscatter"}, {"version", version_string()}, {"revision", build_revision()}};
  p["config"] = config_to_json(sys.config);
  p["config_hash"] = config_hash(sys.config);
  const auto& g = sys.grid;
  p["grid"] = {{"L_nm", g.length()},
               {"h_nm", g.spacing()},
               {"num_points", g.num_points()},
               {"window_first_x_nm", g.window_x(0)},
               {"window_last_x_nm", g.window_x(g.window_size() - 1)},
               {"window_points", g.window_size()}};
  p["material"] = {{"effective_mass_ratio", sys.material.effective_mass_ratio()},
                   {"relative_permittivity", sys.material.relative_permittivity()},
                   {"coulomb_cutoff_d_nm", sys.material.coulomb_cutoff_d()},
                   {"kinetic_prefactor_meV_nm2", sys.material.kinetic_prefactor()},
                   {"coulomb_prefactor_meV_nm", sys.material.coulomb_prefactor()}};
  std::vector<double> levels(sys.basis.energies.data(), sys.basis.energies.data() + sys.basis.energies.size());
  p["bound_levels_meV"] = levels;
  p["degeneracy_groups"] = sys.basis.degeneracy_groups;
  p["incident_channel"] = sys.incident;
  if (sys.scattering) {
    p["solver"] = {{"kind", to_string(sys.scattering->solver_kind())},
                   {"unknowns", sys.scattering->product_grid().size()}};
  }
  return p;
}

/// Energy sweep with optional adaptive refinement. Completed rows are appended to a
/// journal so that an interrupted run resumes where it stopped; the CSV tables and the
/// provenance sidecar are rewritten in ascending T0 at the end.
inline SweepResult run_sweep(const Config& config, const SweepHooks& hooks = {}) {
  const auto start = std::chrono::steady_clock::now();
  PreparedSystem sys = prepare_system(config);
  const std::string hash = config_hash(config);
  const std::filesystem::path dir(config.output.directory);
  std::filesystem::create_directories(dir);
  const auto journal_path = dir / (config.output.prefix + "_journal.jsonl");
  const auto channels_path = dir / (config.output.prefix + "_channels.csv");
  const auto entropy_path = dir / (config.output.prefix + "_entropy.csv");
  const auto provenance_path = dir / (config.output.prefix + "_provenance.json");

  std::map<double, EnergyResult> done;
  SweepResult result;
  result.threshold = config.sweep.failure_threshold;
  if (config.output.resume) {
    done = read_journal(journal_path, hash);
  } else {
    std::filesystem::remove(journal_path);
  }
  std::ofstream journal(journal_path, std::ios::app);
  require(journal.good(), ErrorCode::resource, "cannot open journal " + journal_path.string());

  auto run = [&](const std::vector<double>& energies) {
    std::vector<double> todo;
    for (double e : energies) {
      if (done.count(e)) {
        ++result.resumed;
        if (hooks.on_row) hooks.on_row(done.at(e));
      } else {
        todo.push_back(e);
      }
    }
    detail::run_pass(sys, todo, config.sweep.threads, [&](EnergyResult&& r) {
      append_journal(journal, hash, r);
      if (hooks.on_row) hooks.on_row(r);
      done[r.T0] = std::move(r);
    });
  };

  run(uniform_energies(config.sweep));
  // the journal may hold rows of an earlier run at other energies; report only ours
  std::vector<double> wanted = uniform_energies(config.sweep);
  if (config.sweep.refine) {
    int budget = config.sweep.max_refinements;
    while (budget > 0) {
      std::map<double, EnergyResult> current;
      for (double e : wanted) current[e] = done.at(e);
      std::vector<EnergyResult> rows;
      for (auto& [t, r] : current) rows.push_back(r);
      const auto extra = refinement_points(rows, config.sweep.refine_threshold, budget);
      if (extra.empty()) break;
      run(extra);
      wanted.insert(wanted.end(), extra.begin(), extra.end());
      budget -= static_cast<int>(extra.size());
    }
  }
  std::sort(wanted.begin(), wanted.end());
  for (double e : wanted) {
    result.rows.push_back(done.at(e));
    if (!done.at(e).ok) ++result.failures;
  }

  const Eigen::Index nch = sys.basis.count();
  write_result_tables(channels_path, entropy_path, result.rows, nch);
  result.provenance = provenance_json(sys);
  auto& p = result.provenance;
  p["outputs"] = {{"channels_csv", channels_path.filename().string()},
                  {"entropy_csv", entropy_path.filename().string()},
                  {"journal", journal_path.filename().string()}};
  p["rows"] = result.rows.size();
  p["failures"] = result.failures;
  p["resumed_rows"] = result.resumed;
  nlohmann::json failed = nlohmann::json::array();
  nlohmann::json warnings = nlohmann::json::array();
  double solve_time = 0.0;
  for (const auto& r : result.rows) {
    solve_time += r.wall_time_s;
    if (!r.ok) failed.push_back({{"T0_meV", r.T0}, {"status", r.status}, {"message", r.message}});
    for (const auto& w : r.warnings) warnings.push_back({{"T0_meV", r.T0}, {"warning", w}});
  }
  p["failed_rows"] = failed;
  p["warnings"] = warnings;
  p["total_solve_time_s"] = solve_time;
  p["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(provenance_path, p.dump(2) + "\n");
  return result;
}

}  // namespace qdscatter
