#include <doctest.h>

#include <deque>
#include <random>

#include "ep3/atlas.hpp"
#include "oracles.hpp"

using namespace ep3;
using C = std::complex<double>;

namespace {

// Phase from the companion-matrix roots of the mu-cubic: all roots real means
// all eigenvalues lambda = -i mu are imaginary.
SpectralPhase oracle_phase(double omega, double g, double kappa) {
  const double a2 = -kappa / 2, a1 = g * g + omega * omega, a0 = -kappa * omega * omega / 2;
  const auto r = oracle::cubic_roots(a2, a1, a0);
  const double eps = phase_epsilon(omega, g, kappa);
  if (std::abs(oracle::root_discriminant(r)) <= 108 * eps) return SpectralPhase::Exceptional;
  int complex_roots = 0;
  for (const auto& x : r) complex_roots += x.imag() != 0;
  return complex_roots ? SpectralPhase::ComplexPair : SpectralPhase::AllImaginary;
}

double disc_at(double omega, double g, double kappa) { return mu_cubic(omega, g, kappa).discriminant; }

}  // namespace

TEST_CASE("mu-cubic roots are the eigenvalues rotated by i") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2), k(0.1, 4);
  for (int n = 0; n < 500; ++n) {
    const double omega = u(rng), g = u(rng), kappa = k(rng);
    const RealCubic c = mu_cubic(omega, g, kappa);
    const auto mu = oracle::cubic_roots(c.a2, c.a1, c.a0);
    const auto lam = eigenvalues_cardano(Params{0, omega, g, kappa}).lambdas;
    const std::array<C, 3> rotated{C(0, -1) * mu[0], C(0, -1) * mu[1], C(0, -1) * mu[2]};
    CHECK(oracle::best_match(rotated, lam) < 1e-7);
    // discriminant sign convention: root product form = -108 (q/2)^2 + (p/3)^3
    const double d = oracle::root_discriminant(mu);
    CHECK(std::abs(d + 108 * c.discriminant) < 1e-9 * std::pow(std::max({kappa, std::abs(omega), std::abs(g)}), 6));
  }
}

TEST_CASE("phase examples") {
  CHECK(classify_phase(0.05, 0.25, 1) == SpectralPhase::AllImaginary);
  CHECK(classify_phase(0.1, 0.3, 1) == SpectralPhase::ComplexPair);
  CHECK(classify_phase(0.05, 0.05, 1) == SpectralPhase::ComplexPair);
  const auto ep3 = ep3_location(1);
  CHECK(classify_phase(ep3.omega_star, ep3.g_star, 1) == SpectralPhase::Exceptional);
  CHECK(disc_at(0.05, 0.25, 1) < 0);
  CHECK(disc_at(0.1, 0.3, 1) > 0);
  CHECK_THROWS_AS(classify_phase(0.1, 0.1, 0), InvalidParameter);
  CHECK_THROWS_AS(classify_phase(0.1, 0.1, -1), InvalidParameter);
  CHECK_THROWS_AS(classify_phase(std::nan(""), 0.1, 1), InvalidParameter);
}

TEST_CASE("phase is even in omega and g") {
  for (double w : {0.03, 0.08, 0.15})
    for (double g : {0.1, 0.22, 0.3}) {
      const auto p = classify_phase(w, g, 1);
      CHECK(classify_phase(-w, g, 1) == p);
      CHECK(classify_phase(w, -g, 1) == p);
    }
}

TEST_CASE("EP3 location") {
  const auto e = ep3_location(6);
  CHECK(e.omega_star == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(e.g_star == doctest::Approx(2 * std::sqrt(2.0) / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(std::abs(e.lambda_star - C(0, -1)) < 1e-15);
  const auto c = mu_cubic(e.omega_star, e.g_star, 6);
  CHECK(std::abs(c.p) < 1e-12);
  CHECK(std::abs(c.q) < 1e-12);
  CHECK_THROWS_AS(ep3_location(0), InvalidParameter);
}

TEST_CASE("200 x 200 phase grid agrees with the root oracle") {
  for (double kappa : {1.0, 5.0}) {
    const GridBounds b{0, 0.2 * kappa, 0, 0.4 * kappa};
    const auto pd = phase_diagram(b, 200, 200, kappa);
    int mismatches = 0, lens = 0;
    for (int j = 0; j < pd.n_g; ++j)
      for (int i = 0; i < pd.n_omega; ++i) {
        const auto expected = oracle_phase(pd.omega_at(i), pd.g_at(j), kappa);
        mismatches += pd.at(i, j) != expected;
        lens += pd.at(i, j) == SpectralPhase::AllImaginary;
      }
    CHECK(mismatches == 0);
    CHECK(lens > 0);
    CHECK(pd.ep3.omega_star == ep3_location(kappa).omega_star);
  }
}

TEST_CASE("the AllImaginary lens is one connected region") {
  // Near the cusp the lens is thinner than a cell, so the tip is left out.
  const auto pd = phase_diagram({0, 0.2, 0, 0.4}, 120, 120, 1);
  const double tip = 0.9 * pd.ep3.omega_star;
  const auto inside = [&](int k) {
    return pd.cells[k] == SpectralPhase::AllImaginary && pd.omega_at(k % pd.n_omega) < tip;
  };
  std::vector<int> seen(pd.cells.size(), 0);
  int total = 0, start = -1;
  for (std::size_t k = 0; k < pd.cells.size(); ++k)
    if (inside(static_cast<int>(k))) {
      ++total;
      if (start < 0) start = static_cast<int>(k);
    }
  REQUIRE(start >= 0);
  std::deque<int> queue{start};
  seen[start] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    ++reached;
    const int i = k % pd.n_omega, j = k / pd.n_omega;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= pd.n_omega || jj >= pd.n_g) continue;
        const int kk = jj * pd.n_omega + ii;
        if (!seen[kk] && inside(kk)) {
          seen[kk] = 1;
          queue.push_back(kk);
        }
      }
  }
  CHECK(reached == total);
}

TEST_CASE("traced arcs lie on the discriminant zero set") {
  for (double kappa : {1.0, 5.0}) {
    const auto arcs = trace_ep2_arcs(kappa, 64);
    const auto e = ep3_location(kappa);
    REQUIRE(arcs.lower.size() >= 8);
    REQUIRE(arcs.upper.size() == arcs.lower.size());
    for (const auto* branch : {&arcs.lower, &arcs.upper})
      for (const auto& pt : *branch) CHECK(std::abs(disc_at(pt.omega, pt.g, kappa)) < 1e-10 * std::pow(kappa, 6));
    for (std::size_t k = 0; k < arcs.lower.size(); ++k) {
      CHECK(arcs.lower[k].g <= arcs.upper[k].g);
      CHECK(arcs.lower[k].g <= e.g_star + 1e-12 * kappa);
      CHECK(arcs.upper[k].g <= e.g_star + 1e-12 * kappa);
      CHECK(arcs.upper[k].g >= kappa / 4 - 1e-12 * kappa);
    }
    // both branches rise towards the cusp
    for (std::size_t k = 1; k < arcs.lower.size(); ++k) {
      CHECK(arcs.lower[k].g > arcs.lower[k - 1].g);
      CHECK(arcs.upper[k].g > arcs.upper[k - 1].g);
    }
    CHECK(arcs.lower.back().omega == e.omega_star);
    CHECK(arcs.upper.back().g == e.g_star);
  }
  CHECK_THROWS_AS(trace_ep2_arcs(1, 4), InvalidParameter);
}

TEST_CASE("arc end points") {
  // omega -> 0: the lower branch tends to g = 0 like sqrt(omega), the upper to g = kappa / 4
  const auto row = ep2_row(1e-8, 1);
  REQUIRE(row);
  CHECK(row->first < 1e-3);
  CHECK(row->first == doctest::Approx(std::sqrt(2e-8)).epsilon(1e-3));
  CHECK(std::abs(row->second - 0.25) < 1e-3);
  const auto mid = ep2_row(0.05, 1);
  REQUIRE(mid);
  CHECK(std::abs(disc_at(0.05, mid->first, 1)) < 1e-15);
  CHECK(std::abs(disc_at(0.05, mid->second, 1)) < 1e-15);
  CHECK(!ep2_row(0.1, 1));
}

TEST_CASE("arcs cusp at the EP3") {
  for (double kappa : {1.0, 6.0}) {
    const auto e = ep3_location(kappa);
    // largest omega that still has a pair of EP2 rows
    double lo = 0.5 * e.omega_star, hi = 1.5 * e.omega_star;
    REQUIRE(ep2_row(lo, kappa));
    REQUIRE(!ep2_row(hi, kappa));
    for (int i = 0; i < 60; ++i) {
      const double m = 0.5 * (lo + hi);
      (ep2_row(m, kappa) ? lo : hi) = m;
    }
    const auto row = ep2_row(lo, kappa);
    REQUIRE(row);
    CHECK(std::abs(lo - e.omega_star) < 1e-6 * kappa);
    CHECK(std::abs(row->first - e.g_star) < 1e-6 * kappa);
    CHECK(std::abs(row->second - e.g_star) < 1e-6 * kappa);
  }
}

TEST_CASE("slice through the arcs") {
  const auto w = slice_ep_omegas(0.845, 5);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == doctest::Approx(-0.152423).epsilon(1e-5));
  CHECK(w[1] == doctest::Approx(0.152423).epsilon(1e-5));
  CHECK(w[0] == -w[1]);
  const auto row = ep2_row(w[1], 5);
  REQUIRE(row);
  CHECK(row->first == doctest::Approx(0.845).epsilon(1e-9));
  // a slice between kappa/4 and G* meets both arcs on each side
  const auto both = slice_ep_omegas(1.3, 5);
  CHECK(both.size() == 4);
  CHECK(slice_ep_omegas(2.0, 5).empty());
  CHECK(slice_ep_omegas(0, 5).empty());
}

TEST_CASE("isolated exceptional lines at omega = 0, g = kappa/4") {
  const auto lines = isolated_exceptional_lines(2);
  CHECK(lines[0].omega == 0);
  CHECK(lines[0].g == 0.5);
  CHECK(lines[1].g == -0.5);
  for (double delta : {-1.0, 0.0, 0.3, 2.0}) {
    const auto es = eigensystem(Params{delta, 0, 0.5, 2});
    CHECK(es.defective());
  }
}

TEST_CASE("phase diagram validation") {
  CHECK_THROWS_AS(phase_diagram({0, 1, 0, 1}, 0, 10, 1), ValidationError);
  CHECK_THROWS_AS(phase_diagram({0, 1, 0, 1}, 10, -1, 1), ValidationError);
  CHECK_THROWS_AS(phase_diagram({1, 0, 0, 1}, 10, 10, 1), ValidationError);
  CHECK_THROWS_AS(phase_diagram({0, 1, 0, 1}, 10, 10, 0), ValidationError);
  const auto one = phase_diagram({0.05, 0.05, 0.25, 0.25}, 1, 1, 1);
  CHECK(one.at(0, 0) == SpectralPhase::AllImaginary);
}

TEST_CASE("phase diagram is deterministic") {
  const auto a = phase_diagram({0, 0.2, 0, 0.4}, 64, 48, 1);
  const auto b = phase_diagram({0, 0.2, 0, 0.4}, 64, 48, 1);
  CHECK(a.cells == b.cells);
}
