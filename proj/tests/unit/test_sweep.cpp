#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace qdscatter;
using Catch::Approx;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qdscatter_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

// drops the trailing wall-time column
std::string without_timing(const std::string& csv) {
  std::string out;
  for (const auto& l : lines(csv)) out += l.substr(0, l.rfind(',')) + "\n";
  return out;
}

Config short_sweep(const std::filesystem::path& dir) {
  Config c = default_config(SystemKind::qd_2p);
  c.sweep.T0_min_meV = 10.0;
  c.sweep.T0_max_meV = 16.0;
  c.sweep.num_steps = 4;
  c.output.directory = dir.string();
  c.output.prefix = "t";
  return c;
}

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::numerical_consistency;
}

}  // namespace

TEST_CASE("config defaults and JSON round trip", "[sweep]") {
  const Config qd = default_config(SystemKind::qd_2p);
  CHECK(qd.geometry.L_nm == 600.0);
  CHECK(qd.geometry.h_nm == 1.0);
  CHECK(qd.geometry.well_depth_meV == 110.0);
  CHECK(qd.geometry.well_width_nm == 30.0);
  CHECK(qd.material.effective_mass_ratio == 0.067);
  CHECK(qd.material.relative_permittivity == 12.9);
  const Config dqd = default_config(SystemKind::dqd_3p);
  CHECK(dqd.geometry.kind == DotKind::double_dot);
  CHECK(dqd.geometry.barrier_nm == 20.0);
  for (const auto& c : {qd, dqd}) {
    const Config back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(config_hash(back) == config_hash(c));
  }
  CHECK(config_hash(qd) != config_hash(dqd));
}

TEST_CASE("config parsing errors", "[sweep]") {
  using nlohmann::json;
  CHECK(error_of([] { config_from_json(json::parse(R"({"geometry": {"L": 600}})")); }) == ErrorCode::config);
  CHECK(error_of([] { config_from_json(json::parse(R"({"colour": 1})")); }) == ErrorCode::config);
  CHECK(error_of([] { config_from_json(json::parse(R"({"system": "triple"})")); }) == ErrorCode::config);
  CHECK(error_of([] { config_from_json(json::parse(R"({"geometry": {"h_nm": "fine"}})")); }) == ErrorCode::config);
  CHECK(error_of([] { config_from_json(json::parse(R"([1, 2])")); }) == ErrorCode::config);
  CHECK(error_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::config);

  Config c = default_config(SystemKind::qd_2p);
  c.geometry.h_nm = -1.0;
  CHECK(error_of([&] { validate(c); }) == ErrorCode::config);
  c = default_config(SystemKind::qd_2p);
  c.geometry.kind = DotKind::double_dot;
  CHECK(error_of([&] { validate(c); }) == ErrorCode::config);
  c = default_config(SystemKind::qd_2p);
  c.sweep.T0_max_meV = 5.0;
  CHECK(error_of([&] { validate(c); }) == ErrorCode::config);
}

TEST_CASE("system selection pulls in the matching defaults", "[sweep]") {
  const auto c = config_from_json(nlohmann::json::parse(R"({"system": "dqd_3p", "sweep": {"num_steps": 5}})"));
  CHECK(c.geometry.kind == DotKind::double_dot);
  CHECK(c.geometry.h_nm == 2.0);
  CHECK(c.sweep.num_steps == 5);
}

TEST_CASE("command-line overrides", "[sweep]") {
  nlohmann::json root = config_to_json(default_config(SystemKind::qd_2p));
  apply_override(root, "geometry.h_nm=0.5");
  apply_override(root, "sweep.post_selection=transmitted");
  apply_override(root, "output.prefix=abc");
  const auto c = config_from_json(root);
  CHECK(c.geometry.h_nm == 0.5);
  CHECK(c.sweep.post_selection == PostSelection::transmitted);
  CHECK(c.output.prefix == "abc");
  CHECK(error_of([&] { apply_override(root, "geometry.h_nm"); }) == ErrorCode::config);
}

TEST_CASE("config hash ignores output and sweep-grid settings", "[sweep]") {
  Config a = default_config(SystemKind::qd_2p);
  Config b = a;
  b.output.directory = "elsewhere";
  b.sweep.threads = 4;
  b.sweep.num_steps = 7;
  CHECK(config_hash(a) == config_hash(b));
  b.geometry.h_nm = 0.5;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.sweep.post_selection = PostSelection::reflected;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("energy grids", "[sweep]") {
  SweepConfig s;
  s.T0_min_meV = 10.0;
  s.T0_max_meV = 40.0;
  s.num_steps = 121;
  const auto e = uniform_energies(s);
  REQUIRE(e.size() == 121);
  CHECK(e.front() == 10.0);
  CHECK(e.back() == 40.0);
  CHECK(e[60] == Approx(25.0));

  std::vector<EnergyResult> rows(4);
  const double xs[] = {0.0, 0.01, 0.5, 0.52};
  for (int i = 0; i < 4; ++i) {
    rows[static_cast<std::size_t>(i)].T0 = 10.0 + i;
    rows[static_cast<std::size_t>(i)].ok = true;
    rows[static_cast<std::size_t>(i)].entropy.xi = xs[i];
  }
  const auto mid = refinement_points(rows, 0.05, 10);
  REQUIRE(mid.size() == 1);
  CHECK(mid[0] == Approx(11.5));
  rows[2].ok = false;
  CHECK(refinement_points(rows, 0.05, 10).empty());
  CHECK(refinement_points(rows, 0.05, 0).empty());
}

TEST_CASE("CSV schema", "[sweep]") {
  CHECK(channels_csv_header(2) ==
        "T0_meV,M,T_0_meV,R_0,T_0_prob,abs_b_0,abs_c_0,T_1_meV,R_1,T_1_prob,abs_b_1,abs_c_1,unitarity_defect,status,"
        "wall_time_s");
  CHECK(entropy_csv_header(3) == "T0_meV,xi,M,lambda_0,lambda_1,lambda_2,status");
  EnergyResult failed;
  failed.T0 = 12.5;
  failed.status = "convergence";
  const auto row = channels_csv_row(failed, 2);
  CHECK(row.rfind("12.500000000000,nan", 0) == 0);
  CHECK(row.find("convergence") != std::string::npos);
  const std::string header = channels_csv_header(2);
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
  const auto erow = entropy_csv_row(failed, 3);
  CHECK(erow == "12.500000000000,nan,nan,nan,nan,nan,convergence");
}

TEST_CASE("sweep writes tables, provenance and journal", "[sweep]") {
  const auto dir = scratch("tables");
  const Config c = short_sweep(dir);
  std::vector<double> seen;
  SweepHooks hooks;
  hooks.on_row = [&](const EnergyResult& r) { seen.push_back(r.T0); };
  const auto res = run_sweep(c, hooks);
  REQUIRE(res.rows.size() == 4);
  CHECK(res.failures == 0);
  CHECK_FALSE(res.failed_above_threshold());
  CHECK(seen == std::vector<double>{10.0, 12.0, 14.0, 16.0});

  const auto ch = lines(slurp(dir / "t_channels.csv"));
  const auto en = lines(slurp(dir / "t_entropy.csv"));
  REQUIRE(ch.size() == 5);
  REQUIRE(en.size() == 5);
  CHECK(ch[0] == channels_csv_header(3));
  CHECK(en[0] == entropy_csv_header(3));
  double prev = 0.0;
  for (std::size_t i = 1; i < en.size(); ++i) {
    const double t0 = std::stod(en[i].substr(0, en[i].find(',')));
    CHECK(t0 > prev);
    prev = t0;
    CHECK(en[i].substr(en[i].rfind(',') + 1) == "ok");
  }
  // below the first threshold only one channel is open and the entropy vanishes
  for (const auto& r : res.rows) {
    if (r.T0 < 14.0) {
      CHECK(r.entropy.M == 0);
      CHECK(r.entropy.xi < 1e-12);
    }
    CHECK(r.amplitudes.unitarity_defect < 1e-8);
  }

  const auto prov = nlohmann::json::parse(slurp(dir / "t_provenance.json"));
  CHECK(prov["config_hash"] == config_hash(c));
  CHECK(prov["rows"] == 4);
  CHECK(prov["code"]["version"] == version_string());
  CHECK(prov["bound_levels_meV"].size() == 3);
  CHECK(std::filesystem::exists(dir / "t_journal.jsonl"));
}

TEST_CASE("sweep resumes from its journal", "[sweep]") {
  const auto dir = scratch("resume");
  Config c = short_sweep(dir);
  const auto first = run_sweep(c);
  const std::string csv = without_timing(slurp(dir / "t_entropy.csv"));
  const auto again = run_sweep(c);
  CHECK(again.resumed == 4);
  CHECK(without_timing(slurp(dir / "t_entropy.csv")) == csv);

  // a denser grid reuses the energies already done
  c.sweep.T0_max_meV = 22.0;
  c.sweep.num_steps = 7;
  const auto longer = run_sweep(c);
  CHECK(longer.resumed == 4);
  CHECK(longer.rows.size() == 7);

  // disabling resume starts over
  c.output.resume = false;
  CHECK(run_sweep(c).resumed == 0);

  // a truncated journal line is skipped
  {
    std::ofstream j(dir / "t_journal.jsonl", std::ios::app);
    j << "{\"hash\": \"" << config_hash(c) << "\", \"result\": {\"T0";
  }
  c.output.resume = true;
  CHECK(run_sweep(c).resumed == 7);

  // rows of a different physical configuration are ignored
  c.interaction.strength = 0.5;
  CHECK(run_sweep(c).resumed == 0);
}

TEST_CASE("sweep results do not depend on the thread count", "[sweep]") {
  const auto d1 = scratch("threads1");
  const auto d2 = scratch("threads2");
  Config c1 = short_sweep(d1);
  Config c2 = short_sweep(d2);
  c2.sweep.threads = 3;
  run_sweep(c1);
  run_sweep(c2);
  CHECK(without_timing(slurp(d1 / "t_channels.csv")) == without_timing(slurp(d2 / "t_channels.csv")));
  CHECK(without_timing(slurp(d1 / "t_entropy.csv")) == without_timing(slurp(d2 / "t_entropy.csv")));
}

TEST_CASE("adaptive refinement inserts midpoints where the entropy jumps", "[sweep]") {
  const auto dir = scratch("refine");
  Config c = short_sweep(dir);
  c.sweep.T0_min_meV = 12.0;
  c.sweep.T0_max_meV = 18.0;
  c.sweep.num_steps = 3;
  c.sweep.refine = true;
  c.sweep.max_refinements = 3;
  c.sweep.refine_threshold = 0.02;
  const auto res = run_sweep(c);
  CHECK(res.rows.size() > 3);
  CHECK(res.rows.size() <= 6);
  for (std::size_t i = 1; i < res.rows.size(); ++i) CHECK(res.rows[i].T0 > res.rows[i - 1].T0);
}

TEST_CASE("failed energies are recorded, not thrown", "[sweep]") {
  Config c = default_config(SystemKind::qd_2p);
  const auto sys = prepare_system(c);
  const auto r = solve_energy(sys, 500.0);  // beyond ionisation
  CHECK_FALSE(r.ok);
  CHECK(r.status == "invalid-parameter");
  SweepResult s;
  s.rows.resize(10);
  s.failures = 1;
  CHECK_FALSE(s.failed_above_threshold());
  s.failures = 2;
  CHECK(s.failed_above_threshold());
}

TEST_CASE("journal entries round trip losslessly", "[sweep]") {
  const auto sys = prepare_system(default_config(SystemKind::qd_2p));
  const auto r = solve_energy(sys, 29.0);
  REQUIRE(r.ok);
  const auto back = result_from_json(result_to_json(r));
  CHECK(back.T0 == r.T0);
  CHECK(back.entropy.xi == r.entropy.xi);
  CHECK((back.amplitudes.b - r.amplitudes.b).norm() == 0.0);
  CHECK((back.amplitudes.c - r.amplitudes.c).norm() == 0.0);
  CHECK(channels_csv_row(back, 3) == channels_csv_row(r, 3));
  CHECK(entropy_csv_row(back, 3) == entropy_csv_row(r, 3));
}

TEST_CASE("spectrum report", "[sweep]") {
  const auto qd = report_spectrum(default_config(SystemKind::qd_2p));
  REQUIRE(qd.data.contains("single_particle_levels_meV"));
  CHECK(qd.data["single_particle_levels_meV"].size() == 3);
  CHECK(qd.text.find("spacing") != std::string::npos);

  Config flat = default_config(SystemKind::qd_2p);
  flat.geometry.well_depth_meV = 0.0;
  const auto none = report_spectrum(flat);
  CHECK(none.data["single_particle_levels_meV"].empty());
  CHECK(error_of([&] { prepare_system(flat); }) == ErrorCode::invalid_parameter);
}

TEST_CASE("wavefunction dump layout", "[sweep]") {
  const auto s = fixtures::small_dot();
  ScatteringSystem sys(s.potential, s.grid, s.interaction, s.basis);
  const auto sol = sys.solve(20.0, 0, 6);
  const auto dir = scratch("psi");
  write_psi_dump(dir / "psi.bin", sol, s.grid, 1);
  std::ifstream in(dir / "psi.bin", std::ios::binary);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line) && line != "END") header.push_back(line);
  CHECK(header.front() == "qdscatter-psi 1");
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(data.size() == static_cast<std::size_t>(sol.psi.size()) * 16);
  double re = 0.0;
  std::memcpy(&re, data.data() + 16 * 5, 8);
  CHECK(re == sol.psi[5].real());
}
