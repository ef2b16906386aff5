// qdscatter command-line driver: spectrum, sweep, solve-one.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdscatter/qdscatter.hpp"

namespace {

using namespace qdscatter;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_solver = 2;

struct CommonArgs {
  std::string config_path;
  std::string system;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("-c,--config", a.config_path, "JSON config file");
  cmd->add_option("--system", a.system, "qd_2p or dqd_3p when no config file sets it");
  cmd->add_option("--set", a.overrides, "override a config key, e.g. --set geometry.h_nm=2")->take_all();
}

json load_root(const CommonArgs& a) {
  json root = json::object();
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    require(in.good(), ErrorCode::config, "cannot open config file " + a.config_path);
    try {
      root = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
      fail(ErrorCode::config, "cannot parse " + a.config_path + ": " + e.what());
    }
  }
  if (!a.system.empty()) root["system"] = a.system;
  return root;
}

Config finish(json root, const CommonArgs& a) {
  for (const auto& o : a.overrides) apply_override(root, o);
  Config c = config_from_json(root);
  validate(c);
  return c;
}

void print_row(const EnergyResult& r) {
  if (r.ok)
    std::fprintf(stderr, "T0 = %10.6f meV  xi = %.6f  M = %d  defect = %.2e  %.1f s\n", r.T0, r.entropy.xi,
                 r.entropy.M, r.amplitudes.unitarity_defect, r.wall_time_s);
  else
    std::fprintf(stderr, "T0 = %10.6f meV  FAILED %s\n", r.T0, r.message.c_str());
}

int run_spectrum(const CommonArgs& a, const std::string& json_out, const std::string& wf_out) {
  const Config c = finish(load_root(a), a);
  PreparedSystem p = prepare_bound_states(c);
  const auto rep = report_spectrum(p);
  std::cout << rep.text;
  if (!json_out.empty()) write_text(json_out, rep.data.dump(2) + "\n");
  if (!wf_out.empty()) write_wavefunctions_csv(wf_out, p);
  return exit_ok;
}

int run_sweep_cmd(const CommonArgs& a, const std::optional<double>& tmin, const std::optional<double>& tmax,
                  const std::optional<int>& steps, const std::optional<int>& threads, bool refine, bool no_resume,
                  const std::string& outdir, const std::string& prefix, const std::string& post) {
  json root = load_root(a);
  auto set = [&](const char* sec, const char* key, const json& v) { root[sec][key] = v; };
  if (tmin) set("sweep", "T0_min_meV", *tmin);
  if (tmax) set("sweep", "T0_max_meV", *tmax);
  if (steps) set("sweep", "num_steps", *steps);
  if (threads) set("sweep", "threads", *threads);
  if (refine) set("sweep", "refine", true);
  if (!post.empty()) set("sweep", "post_selection", post);
  if (no_resume) set("output", "resume", false);
  if (!outdir.empty()) set("output", "directory", outdir);
  if (!prefix.empty()) set("output", "prefix", prefix);
  const Config c = finish(root, a);
  SweepHooks hooks;
  hooks.on_row = print_row;
  const SweepResult res = run_sweep(c, hooks);
  std::fprintf(stderr, "%zu rows, %d failed, %d resumed; outputs in %s\n", res.rows.size(), res.failures, res.resumed,
               c.output.directory.c_str());
  return res.failed_above_threshold() ? exit_solver : exit_ok;
}

int run_solve_one(const CommonArgs& a, double T0, const std::string& psi_out, const std::string& planes_out,
                  const std::string& outdir, const std::string& prefix) {
  json root = load_root(a);
  if (!outdir.empty()) root["output"]["directory"] = outdir;
  if (!prefix.empty()) root["output"]["prefix"] = prefix;
  const Config c = finish(root, a);
  require(T0 > 0.0, ErrorCode::config, "--T0 must be positive");
  PreparedSystem p = prepare_system(c);
  ScatteringSolution sol;
  EnergyResult r = solve_energy(p, T0, &sol);
  print_row(r);

  const std::filesystem::path dir(c.output.directory);
  const Eigen::Index nch = p.basis.count();
  write_result_tables(dir / (c.output.prefix + "_solve_channels.csv"), dir / (c.output.prefix + "_solve_entropy.csv"),
                      {r}, nch);
  json prov = provenance_json(p);
  prov["T0_meV"] = T0;
  prov["result"] = result_to_json(r);
  write_text(dir / (c.output.prefix + "_solve_provenance.json"), prov.dump(2) + "\n");

  if (r.ok && !psi_out.empty()) write_psi_dump(psi_out, sol, p.grid, p.basis.bound_coordinates);
  if (r.ok && !planes_out.empty()) {
    // channel projections of psi along x1
    std::string s = "x1_nm";
    for (Eigen::Index n = 0; n < nch; ++n)
      s += ",re_psi_" + std::to_string(n) + ",im_psi_" + std::to_string(n);
    s += "\n";
    const Eigen::MatrixXcd ut = p.basis.vectors.transpose().cast<cplx>();
    for (std::size_t j = 0; j < sol.n1; ++j) {
      const Eigen::VectorXcd proj = ut * sol.plane(j);
      s += detail::fixed12(p.grid.x(j));
      for (Eigen::Index n = 0; n < nch; ++n) s += "," + detail::fixed12(proj[n].real()) + "," + detail::fixed12(proj[n].imag());
      s += "\n";
    }
    write_text(planes_out, s);
  }
  std::cout << result_to_json(r).dump(2) << "\n";
  return r.ok ? exit_ok : exit_solver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-electron scattering off quantum dots: channel amplitudes and entanglement entropy"};
  app.require_subcommand(1);

  CommonArgs spec_args;
  std::string spec_json, spec_wf;
  auto* spec = app.add_subcommand("spectrum", "bound levels, degeneracy groups and channel thresholds");
  add_common(spec, spec_args);
  spec->add_option("--json", spec_json, "write the report as JSON");
  spec->add_option("--wavefunctions", spec_wf, "write bound-state wavefunctions as CSV");

  CommonArgs sweep_args;
  std::optional<double> tmin, tmax;
  std::optional<int> steps, threads;
  bool refine = false, no_resume = false;
  std::string sweep_dir, sweep_prefix, post;
  auto* sweep = app.add_subcommand("sweep", "entropy and channel probabilities over a T0 grid");
  add_common(sweep, sweep_args);
  sweep->add_option("--T0-min", tmin, "lowest incident energy (meV)");
  sweep->add_option("--T0-max", tmax, "highest incident energy (meV)");
  sweep->add_option("--steps", steps, "number of uniform T0 points");
  sweep->add_option("--threads", threads, "worker threads");
  sweep->add_flag("--refine", refine, "insert midpoints where the entropy jumps");
  sweep->add_flag("--no-resume", no_resume, "ignore rows journaled by an earlier run");
  sweep->add_option("--output-dir", sweep_dir, "output directory");
  sweep->add_option("--prefix", sweep_prefix, "output file prefix");
  sweep->add_option("--post-selection", post, "both, transmitted or reflected");

  CommonArgs one_args;
  double T0 = 0.0;
  std::string psi_out, planes_out, one_dir, one_prefix;
  auto* one = app.add_subcommand("solve-one", "a single incident energy");
  add_common(one, one_args);
  one->add_option("--T0", T0, "incident kinetic energy (meV)")->required();
  one->add_option("--dump-psi", psi_out, "binary wavefunction dump");
  one->add_option("--dump-channels", planes_out, "CSV of the channel components of psi along x1");
  one->add_option("--output-dir", one_dir, "output directory");
  one->add_option("--prefix", one_prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*spec) return run_spectrum(spec_args, spec_json, spec_wf);
    if (*sweep)
      return run_sweep_cmd(sweep_args, tmin, tmax, steps, threads, refine, no_resume, sweep_dir, sweep_prefix, post);
    if (*one) return run_solve_one(one_args, T0, psi_out, planes_out, one_dir, one_prefix);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case ErrorCode::convergence:
      case ErrorCode::insufficient_basis:
      case ErrorCode::contaminated_lead:
      case ErrorCode::upstream_unitarity:
      case ErrorCode::numerical_consistency:
        return exit_solver;
      default:
        return exit_config;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_config;
  }
  return exit_ok;
}
