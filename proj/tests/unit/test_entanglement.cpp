#include <random>

#include "fixtures.hpp"

using namespace qdscatter;
using Catch::Approx;

namespace {

ChannelAmplitudes amplitudes(const Eigen::VectorXcd& b, const Eigen::VectorXcd& c) {
  ChannelAmplitudes a;
  a.b = b;
  a.c = c;
  for (Eigen::Index n = 0; n < b.size(); ++n) {
    Channel ch;
    ch.index = n;
    ch.open = true;
    a.channels.push_back(ch);
  }
  finalize_probabilities(a);
  return a;
}

std::vector<std::vector<Eigen::Index>> singletons(Eigen::Index n) {
  std::vector<std::vector<Eigen::Index>> g;
  for (Eigen::Index i = 0; i < n; ++i) g.push_back({i});
  return g;
}

double binary_entropy(double p) {
  double s = 0.0;
  for (double q : {p, 1.0 - p})
    if (q > 0.0) s -= q * std::log(q);
  return s;
}

}  // namespace

TEST_CASE("diagonal reduced density matrix", "[entanglement]") {
  Eigen::VectorXcd b(2), c(2);
  b << std::sqrt(0.3), std::sqrt(0.1);
  c << std::sqrt(0.4), std::sqrt(0.2);
  const auto rdm = reduce_density_matrix(amplitudes(b, c), singletons(2));
  REQUIRE(rdm.eigenvalues.size() == 2);
  CHECK(rdm.eigenvalues[0] == Approx(0.7).margin(1e-15));
  CHECK(rdm.eigenvalues[1] == Approx(0.3).margin(1e-15));
  CHECK(rdm.trace == Approx(1.0).margin(1e-15));
  CHECK(von_neumann_entropy(rdm) == Approx(binary_entropy(0.7)).margin(1e-14));
}

TEST_CASE("entropy limits", "[entanglement]") {
  Eigen::VectorXcd b(3), c(3);
  b << 0.6, 0.0, 0.0;
  c << 0.8, 0.0, 0.0;
  CHECK(von_neumann_entropy(reduce_density_matrix(amplitudes(b, c), singletons(3))) == 0.0);
  b << std::sqrt(0.5), 0.0, 0.0;
  c << 0.0, std::sqrt(0.5), 0.0;
  CHECK(von_neumann_entropy(reduce_density_matrix(amplitudes(b, c), singletons(3))) ==
        Approx(std::log(2.0)).margin(1e-15));
  b << std::sqrt(1.0 / 3.0), std::sqrt(1.0 / 3.0), 0.0;
  c << 0.0, 0.0, std::sqrt(1.0 / 3.0);
  CHECK(von_neumann_entropy(reduce_density_matrix(amplitudes(b, c), singletons(3))) ==
        Approx(std::log(3.0)).margin(1e-14));
}

TEST_CASE("degenerate block with coherent amplitudes is pure", "[entanglement]") {
  const double beta = std::sqrt(0.5);
  Eigen::VectorXcd b(2), c(2);
  b << beta, beta;
  c << 0.0, 0.0;
  const auto rdm = reduce_density_matrix(amplitudes(b, c), {{0, 1}});
  CHECK(rdm.eigenvalues[0] == Approx(1.0).margin(1e-12));
  CHECK(std::abs(rdm.eigenvalues[1]) < 1e-12);
  CHECK(von_neumann_entropy(rdm) < 1e-10);
  // the same amplitudes split into singletons look maximally mixed
  CHECK(von_neumann_entropy(reduce_density_matrix(amplitudes(b, c), singletons(2))) ==
        Approx(std::log(2.0)).margin(1e-12));
}

TEST_CASE("degenerate block against a hand-computed 2x2", "[entanglement]") {
  Eigen::VectorXcd b(2), c(2);
  b << cplx(0.3, 0.1), cplx(-0.2, 0.4);
  c << cplx(0.5, -0.3), cplx(0.1, 0.2);
  const double norm = std::sqrt(b.squaredNorm() + c.squaredNorm());
  b /= norm;
  c /= norm;
  const auto rdm = reduce_density_matrix(amplitudes(b, c), {{0, 1}});
  const cplx r00 = std::norm(b[0]) + std::norm(c[0]);
  const cplx r11 = std::norm(b[1]) + std::norm(c[1]);
  const cplx r01 = b[0] * std::conj(b[1]) + c[0] * std::conj(c[1]);
  const double tr = (r00 + r11).real();
  const double det = (r00 * r11).real() - std::norm(r01);
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  CHECK(std::abs(rdm.blocks[0](0, 1) - r01) < 1e-15);
  CHECK(rdm.eigenvalues[0] == Approx(tr / 2.0 + disc).margin(1e-12));
  CHECK(rdm.eigenvalues[1] == Approx(tr / 2.0 - disc).margin(1e-12));
}

TEST_CASE("entropy is invariant under channel phases", "[entanglement]") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXcd b(4), c(4);
    for (Eigen::Index n = 0; n < 4; ++n) {
      b[n] = cplx(u(rng), u(rng));
      c[n] = cplx(u(rng), u(rng));
    }
    const double norm = std::sqrt(b.squaredNorm() + c.squaredNorm());
    b /= norm;
    c /= norm;
    const std::vector<std::vector<Eigen::Index>> groups{{0, 1}, {2}, {3}};
    const double xi = von_neumann_entropy(reduce_density_matrix(amplitudes(b, c), groups));
    Eigen::VectorXcd b2 = b, c2 = c;
    for (Eigen::Index n = 0; n < 4; ++n) {
      const cplx phase = std::polar(1.0, 3.0 * u(rng));
      b2[n] *= phase;
      c2[n] *= phase;
    }
    CHECK(von_neumann_entropy(reduce_density_matrix(amplitudes(b2, c2), groups)) == Approx(xi).margin(1e-12));
    // a global phase on b alone leaves the diagonal blocks unchanged
    const cplx g = std::polar(1.0, 0.7);
    CHECK(von_neumann_entropy(reduce_density_matrix(amplitudes(g * b, c), groups)) == Approx(xi).margin(1e-12));
    CHECK(xi >= 0.0);
    CHECK(xi <= std::log(4.0) + 1e-12);
  }
}

TEST_CASE("entropy of two channels is concave in the channel probability", "[entanglement]") {
  double prev_xi = -1.0;
  std::vector<double> xs;
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    Eigen::VectorXcd b(2), c(2);
    b << std::sqrt(p), 0.0;
    c << 0.0, std::sqrt(1.0 - p);
    const double xi = von_neumann_entropy(reduce_density_matrix(amplitudes(b, c), singletons(2)));
    CHECK(xi == Approx(binary_entropy(p)).margin(1e-14));
    xs.push_back(xi);
    if (i <= 50) CHECK(xi >= prev_xi);
    prev_xi = xi;
  }
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) CHECK(xs[i - 1] + xs[i + 1] - 2.0 * xs[i] <= 1e-14);
}

TEST_CASE("reduced density matrix error handling", "[entanglement]") {
  Eigen::VectorXcd b(2), c(2);
  b << 0.5, 0.1;
  c << 0.2, 0.1;
  try {
    reduce_density_matrix(amplitudes(b, c), singletons(2));
    FAIL("expected an upstream unitarity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::upstream_unitarity);
  }
  b << 0.6, 0.0;
  c << 0.8, 0.0;
  CHECK_THROWS_AS(reduce_density_matrix(amplitudes(b, c), {{0}}), Error);
  CHECK_THROWS_AS(reduce_density_matrix(amplitudes(b, c), {{0, 1}, {1}}), Error);

  ReducedDensityMatrix bad;
  bad.eigenvalues = Eigen::Vector2d(1.1, -0.1);
  try {
    von_neumann_entropy(bad);
    FAIL("expected a numerical consistency error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numerical_consistency);
  }
  ReducedDensityMatrix tiny;
  tiny.eigenvalues = Eigen::Vector2d(1.0, -1e-13);
  CHECK(von_neumann_entropy(tiny) == 0.0);
}

TEST_CASE("entropy record bound and probabilities", "[entanglement]") {
  Eigen::VectorXcd b(3), c(3);
  b << 0.6, 0.0, 0.0;
  c << 0.0, 0.8, 0.0;
  auto a = amplitudes(b, c);
  a.channels[2].open = false;
  const auto rec = entropy_record(a, singletons(3), 17.0);
  CHECK(rec.M == 1);
  CHECK(rec.bound() == Approx(std::log(2.0)));
  CHECK(rec.xi <= rec.bound() + 1e-12);
  CHECK(rec.probabilities[0] == Approx(0.36));
  CHECK(rec.incident_T0 == 17.0);
}

TEST_CASE("entropy stays within the open-channel bound in the interacting dot", "[entanglement]") {
  const auto s = fixtures::small_dot();
  ScatteringSystem sys(s.potential, s.grid, s.interaction, s.basis);
  for (double T0 : {5.0, 12.0, 18.0, 26.0, 31.0, 38.0}) {
    const auto a = extract_amplitudes(sys.solve(T0, 0, 6), s.basis);
    const auto rec = entropy_record(a, s.basis.degeneracy_groups, T0);
    CHECK(rec.xi >= 0.0);
    CHECK(rec.xi <= rec.bound() + 1e-12);
    if (rec.M == 0) CHECK(rec.xi < 1e-12);
  }
}
