#include "fixtures.hpp"

using namespace qdscatter;
using Catch::Approx;

namespace {

ChannelAmplitudes make_amplitudes(std::vector<cplx> b, std::vector<cplx> c) {
  ChannelAmplitudes a;
  a.b = Eigen::Map<Eigen::VectorXcd>(b.data(), static_cast<Eigen::Index>(b.size()));
  a.c = Eigen::Map<Eigen::VectorXcd>(c.data(), static_cast<Eigen::Index>(c.size()));
  for (std::size_t n = 0; n < b.size(); ++n) {
    Channel ch;
    ch.index = static_cast<Eigen::Index>(n);
    ch.open = true;
    a.channels.push_back(ch);
  }
  finalize_probabilities(a);
  return a;
}

}  // namespace

TEST_CASE("plane-wave fit recovers known amplitudes", "[channels]") {
  const auto m = gaas(5.0);
  const double h = 1.0;
  Eigen::VectorXd levels(3);
  levels << -100.0, -90.0, -60.0;
  const double E = -75.0;
  const auto chans = open_channels(E, levels, m, h);
  REQUIRE(open_count(chans) == 2);
  const std::size_t n1 = 401;
  const Eigen::Vector2cd b_true(cplx(0.3, -0.2), cplx(-0.1, 0.4));
  const Eigen::Vector2cd c_true(cplx(0.5, 0.1), cplx(0.2, 0.2));
  const double v0 = chans[0].group_velocity_vn;
  Eigen::MatrixXcd left = Eigen::MatrixXcd::Zero(3, 3), right = Eigen::MatrixXcd::Zero(3, 3);
  for (Eigen::Index n = 0; n < 2; ++n) {
    const double kh = std::arg(chans[static_cast<std::size_t>(n)].step);
    const double w = std::sqrt(chans[static_cast<std::size_t>(n)].group_velocity_vn / v0);
    for (Eigen::Index s = 0; s < 3; ++s) {
      const double jl = static_cast<double>(s);
      const double jr = static_cast<double>(n1 - 1) - s;
      const cplx in = n == 0 ? std::polar(1.0, kh * jl) : cplx(0.0);
      left(s, n) = in + b_true[n] / w * std::polar(1.0, -kh * jl);
      right(s, n) = c_true[n] / w * std::polar(1.0, kh * jr);
    }
  }
  const auto a = extract_from_projections(left, right, chans, 0, n1, 0);
  CHECK((a.b.head(2) - b_true).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.c.head(2) - c_true).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.b[2] == cplx(0.0));
  CHECK(a.fit_residual < 1e-12);
  CHECK(a.M() == 1);

  left(2, 1) += 1e-3;
  try {
    extract_from_projections(left, right, chans, 0, n1, 0);
    FAIL("expected a contaminated-lead error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::contaminated_lead);
  }
}

TEST_CASE("unitarity and energy bookkeeping in the interacting dot", "[channels]") {
  const auto s = fixtures::small_dot();
  ScatteringSystem sys(s.potential, s.grid, s.interaction, s.basis);
  for (double T0 : {3.0, 13.0, 15.0, 22.0, 29.0, 36.0, 38.0}) {
    const auto sol = sys.solve(T0, 0, 6);
    const auto a = extract_amplitudes(sol, s.basis);
    CHECK(a.unitarity_defect < 1e-8);
    for (const auto& c : a.channels) {
      CHECK(c.kinetic_Tn + c.bound_energy == Approx(s.basis.energies[0] + T0).margin(1e-12));
      CHECK(c.open == (c.kinetic_Tn > 0.0));
    }
    for (Eigen::Index n = 0; n < a.size(); ++n)
      if (!a.channels[static_cast<std::size_t>(n)].open) CHECK(a.probability(n) == 0.0);
    CHECK(a.M() == open_count(a.channels) - 1);
  }
}

TEST_CASE("amplitudes do not depend on the extraction planes", "[channels]") {
  const auto s = fixtures::small_dot();
  ScatteringSystem sys(s.potential, s.grid, s.interaction, s.basis);
  const auto sol = sys.solve(29.0, 0, 6);
  ExtractionOptions near, far;
  far.plane_offset = 10;
  const auto a = extract_amplitudes(sol, s.basis, near);
  const auto b = extract_amplitudes(sol, s.basis, far);
  CHECK((a.R - b.R).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((a.T - b.T).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single-particle reciprocity", "[channels]") {
  const auto m = gaas(5.0);
  const Grid1D g(600.0, 1.0);
  const auto sym = build_potential(DotKind::double_dot, g, 110.0, 30.0, 20.0);
  Eigen::VectorXd skew = sym.samples;
  for (Eigen::Index i = 0; i < skew.size() / 2; ++i) skew[i] *= 0.6;  // shallower left well
  for (double T : {1.0, 7.5, 20.0, 41.0}) {
    for (const auto& v : {sym.samples, skew}) {
      const auto l = lattice_transmission_1d(v, 1.0, T, m, Incidence::left);
      const auto r = lattice_transmission_1d(v, 1.0, T, m, Incidence::right);
      CHECK(std::abs(l.T - r.T) < 1e-10);
      CHECK(std::abs(l.R + l.T - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("post-selection renormalises the kept side", "[channels]") {
  const auto a = make_amplitudes({std::sqrt(0.2), std::sqrt(0.2)}, {std::sqrt(0.3), std::sqrt(0.1) * cplx(0, 1)});
  REQUIRE(a.total() == Approx(0.8));
  const auto both = post_select(a, PostSelection::both);
  CHECK((both.b - a.b).norm() == 0.0);
  CHECK((both.c - a.c).norm() == 0.0);

  const auto t = post_select(make_amplitudes({0.5, 0.1}, {std::sqrt(0.3), std::sqrt(0.1)}), PostSelection::transmitted);
  CHECK(t.T[0] == Approx(0.75).margin(1e-14));
  CHECK(t.T[1] == Approx(0.25).margin(1e-14));
  CHECK(t.R.sum() == 0.0);
  const auto r = post_select(make_amplitudes({std::sqrt(0.5), std::sqrt(0.1)}, {0.3, 0.1}), PostSelection::reflected);
  CHECK(r.R[0] == Approx(0.5 / 0.6).margin(1e-14));
  CHECK(r.R[1] == Approx(0.1 / 0.6).margin(1e-14));
  CHECK(r.total() == Approx(1.0).margin(1e-14));
}

TEST_CASE("post-selection on an empty side is undefined", "[channels]") {
  const auto a = make_amplitudes({1.0, 0.0}, {0.0, 0.0});
  try {
    post_select(a, PostSelection::transmitted);
    FAIL("expected an undefined post-selection error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_post_selection);
  }
  CHECK_NOTHROW(post_select(a, PostSelection::reflected));
}

TEST_CASE("separable limit keeps the bound electron in its level on either side", "[channels]") {
  const auto s = fixtures::small_dot(0.0);
  ScatteringSystem sys(s.potential, s.grid, s.interaction, s.basis);
  const auto a = extract_amplitudes(sys.solve(24.0, 0, 6), s.basis);
  for (auto side : {PostSelection::transmitted, PostSelection::reflected}) {
    const auto p = post_select(a, side);
    CHECK(p.probability(0) == Approx(1.0).margin(1e-10));
    const auto rec = entropy_record(p, s.basis.degeneracy_groups, 24.0);
    CHECK(rec.xi < 1e-9);
  }
}

TEST_CASE("inelastic scattering in the single dot above the first threshold", "[channels]") {
  auto cfg = default_config(SystemKind::qd_2p);
  const auto sys = prepare_system(cfg);
  const auto r = solve_energy(sys, 30.0);
  REQUIRE(r.ok);
  CHECK(r.amplitudes.M() == 1);
  CHECK(r.amplitudes.unitarity_defect < 1e-8);
  // both open channels carry a sizeable share
  CHECK(r.amplitudes.probability(1) > 0.1);
  CHECK(r.amplitudes.probability(0) > 0.1);
}
