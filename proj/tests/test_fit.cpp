#include <doctest.h>

#include <algorithm>
#include <random>

#include "ep3/fit.hpp"

using namespace ep3;

namespace {

const FitVector kTruth(0.5, 1.2, 0.8);
constexpr double kKappa = 5;

StateVector ef_state() { return (basis_state(0) + basis_state(1)).normalized(); }

std::vector<double> uniform_times(double t_max, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = t_max * (k + 1) / n;
  return t;
}

double max_rel(const FitVector& a, const FitVector& b) {
  return ((a - b).cwiseAbs().array() / b.cwiseAbs().array()).maxCoeff();
}

double rms_at(const ObservationSet& d, const FitVector& x, const StateVector& psi0) {
  const auto plan = substep_plan(d.times, default_max_dt(with_kappa(x, kKappa)));
  const auto m = model_populations(with_kappa(x, kKappa), psi0, d.times, plan);
  double s = 0;
  for (std::size_t k = 0; k < d.size(); ++k)
    for (int c = 0; c < 3; ++c) s += std::pow(m[k][c] - d.observed[k][c], 2);
  return std::sqrt(s / (3.0 * d.size()));
}

}  // namespace

TEST_CASE("noiseless synthesis equals the population dynamics") {
  const double h = 1e-4;
  std::vector<double> times;
  for (int k = 1; k <= 200; ++k) times.push_back(k * h);
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), times, 0, 1);
  const auto pop = population_dynamics(with_kappa(kTruth, kKappa), ef_state(), 200 * h, h);
  REQUIRE(pop.size() == 201);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(std::abs(obs.observed[k][0] - (pop.p_g1[k + 1] + pop.p_g0[k + 1])) < 1e-12);
    CHECK(std::abs(obs.observed[k][1] - pop.p_e[k + 1]) < 1e-12);
    CHECK(std::abs(obs.observed[k][2] - pop.p_f[k + 1]) < 1e-12);
    CHECK(obs.sigma[k] == 1);
  }
}

TEST_CASE("synthesis is deterministic given the seed") {
  const auto t = uniform_times(1, 100);
  const auto a = simulate_observations(kTruth, kKappa, ef_state(), t, 0.01, 42);
  const auto b = simulate_observations(kTruth, kKappa, ef_state(), t, 0.01, 42);
  const auto c = simulate_observations(kTruth, kKappa, ef_state(), t, 0.01, 43);
  CHECK(a.observed == b.observed);
  CHECK(a.observed != c.observed);
  for (double s : a.sigma) CHECK(s == 0.01);
}

TEST_CASE("noise has the declared standard deviation") {
  const auto t = uniform_times(2, 4000);
  const auto clean = simulate_observations(kTruth, kKappa, ef_state(), t, 0, 7);
  const auto noisy = simulate_observations(kTruth, kKappa, ef_state(), t, 0.01, 7);
  double s = 0, s2 = 0;
  int n = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    for (int c = 0; c < 3; ++c) {
      const double x = clean.observed[k][c];
      if (x < 0.05 || x > 0.95) continue;  // clipping biases the edges
      const double d = noisy.observed[k][c] - x;
      s += d;
      s2 += d * d;
      ++n;
    }
  REQUIRE(n > 2000);
  const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
  CHECK(std::abs(mean) < 5e-4);
  CHECK(sd == doctest::Approx(0.01).epsilon(0.05));
  for (const auto& row : noisy.observed)
    for (double x : row) {
      CHECK(x >= 0);
      CHECK(x <= 1);
    }
}

TEST_CASE("noiseless round trip from a 20% perturbed guess") {
  const auto t = uniform_times(5 / kKappa, 200);
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), t, 0, 1);
  for (const FitVector& guess : {FitVector(0.6, 1.44, 0.96), FitVector(0.4, 0.96, 0.64), FitVector(0.6, 0.96, 0.96)}) {
    const auto r = fit_parameters(obs, kKappa, ef_state(), guess);
    INFO(r.params.transpose());
    CHECK(r.converged);
    CHECK(max_rel(r.params, kTruth) < 1e-6);
    CHECK(r.residual_rms < 1e-9);
    CHECK(r.residual_rms <= r.initial_rms);
    CHECK(r.kappa_fixed == kKappa);
    CHECK(!r.ill_posed);
    CHECK(std::isfinite(r.jacobian_condition));
  }
}

TEST_CASE("1% noise: median recovery within 5% over 20 seeds") {
  const auto t = uniform_times(5 / kKappa, 200);
  std::vector<double> errs;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto obs = simulate_observations(kTruth, kKappa, ef_state(), t, 0.01, seed);
    const auto r = fit_parameters(obs, kKappa, ef_state(), FitVector(0.6, 1.44, 0.96));
    errs.push_back(max_rel(r.params, kTruth));
    CHECK(r.residual_rms <= r.initial_rms);
  }
  std::nth_element(errs.begin(), errs.begin() + 10, errs.end());
  CHECK(errs[10] < 0.05);
}

TEST_CASE("guess equal to the truth") {
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 200), 0, 1);
  const auto r = fit_parameters(obs, kKappa, ef_state(), kTruth);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK(r.residual_rms < 1e-10);
}

TEST_CASE("reported residual is the rms at the returned parameters") {
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 120), 0.02, 5);
  FitOptions opt;
  opt.canonical_signs = false;
  const auto r = fit_parameters(obs, kKappa, ef_state(), FitVector(0.3, 1.0, 1.0), opt);
  CHECK(r.residual_rms == doctest::Approx(rms_at(obs, r.params, ef_state())).epsilon(1e-6));
  CHECK(r.residual_rms <= r.initial_rms);
}

TEST_CASE("best-so-far result when iterations run out") {
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 100), 0, 1);
  FitOptions opt;
  opt.max_iterations = 1;
  const auto r = fit_parameters(obs, kKappa, ef_state(), FitVector(0.2, 2.0, 0.3), opt);
  CHECK(!r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.residual_rms <= r.initial_rms);
}

TEST_CASE("fit is equivariant under joint rate scaling") {
  const auto t = uniform_times(1, 150);
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), t, 0.01, 11);
  const FitVector guess(0.6, 1.4, 0.9);
  const auto base = fit_parameters(obs, kKappa, ef_state(), guess);
  for (double c : {0.4, 2.5}) {
    ObservationSet scaled = obs;
    for (double& x : scaled.times) x /= c;
    const auto r = fit_parameters(scaled, c * kKappa, ef_state(), c * guess);
    CHECK(max_rel(r.params, c * base.params) < 1e-8);
  }
}

TEST_CASE("sign symmetries of the populations") {
  // |e> alone: omega -> -omega and g -> -g both leave populations unchanged
  const auto e_syms = population_symmetries(basis_state(0));
  CHECK(e_syms.size() == 8);
  CHECK(e_syms.front() == Eigen::Vector3d(1, 1, 1));
  // (|e> + |f>)/sqrt 2: only g -> -g and full conjugation survive
  const auto ef_syms = population_symmetries(ef_state());
  CHECK(ef_syms.size() == 4);
  CHECK(std::find(ef_syms.begin(), ef_syms.end(), Eigen::Vector3d(1, -1, 1)) == ef_syms.end());
  CHECK(std::find(ef_syms.begin(), ef_syms.end(), Eigen::Vector3d(-1, -1, 1)) != ef_syms.end());
  for (const auto& s : ef_syms) {
    const FitVector y = s.cwiseProduct(kTruth);
    const auto a = simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 30), 0, 1);
    const auto b = simulate_observations(y, kKappa, ef_state(), uniform_times(1, 30), 0, 1);
    for (std::size_t k = 0; k < a.size(); ++k)
      for (int c = 0; c < 3; ++c) CHECK(std::abs(a.observed[k][c] - b.observed[k][c]) < 1e-12);
  }
}

TEST_CASE("guess near (-omega, g) recovers the mirror with the same residual") {
  const StateVector psi0 = basis_state(0);
  const auto obs = simulate_observations(kTruth, kKappa, psi0, uniform_times(1, 200), 0.01, 3);
  const FitVector guess(0.45, -1.1, 0.85);
  FitOptions raw;
  raw.canonical_signs = false;
  const auto mirror = fit_parameters(obs, kKappa, psi0, guess, raw);
  CHECK(mirror.params(1) < 0);
  const auto direct = fit_parameters(obs, kKappa, psi0, FitVector(0.45, 1.1, 0.85), raw);
  CHECK(std::abs(mirror.params(1) + direct.params(1)) < 1e-6);
  CHECK(std::abs(mirror.params(0) - direct.params(0)) < 1e-6);
  CHECK(mirror.residual_rms == doctest::Approx(direct.residual_rms).epsilon(1e-8));
  const auto canon = fit_parameters(obs, kKappa, psi0, guess);
  CHECK(canon.sign_canonicalised);
  CHECK(canon.params(1) >= 0);
  CHECK(canon.params(2) >= 0);
  CHECK(std::abs(canon.params(1) - direct.params(1)) < 1e-6);
}

TEST_CASE("omega = 0 truth is flagged as ill posed") {
  const FitVector truth(0.5, 0.0, 0.8);
  const auto obs = simulate_observations(truth, kKappa, ef_state(), uniform_times(1, 100), 0, 1);
  const auto r = fit_parameters(obs, kKappa, ef_state(), truth);
  CHECK(r.ill_posed);
  CHECK(r.jacobian_condition > 1e12);
}

TEST_CASE("fit input validation") {
  const auto obs = simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 9), 0, 1);
  CHECK_THROWS_AS(fit_parameters(obs, kKappa, ef_state(), kTruth), ValidationError);
  const auto ok = simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 20), 0, 1);
  CHECK_THROWS_AS(fit_parameters(ok, kKappa, ef_state(), FitVector(std::nan(""), 1, 1)), InvalidParameter);
  CHECK_THROWS_AS(fit_parameters(ok, kKappa, 2.0 * ef_state(), kTruth), InvalidParameter);
  ObservationSet bad = ok;
  bad.observed[3][1] = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.times[4] = bad.times[3];
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.sigma.assign(bad.size(), 0.01);
  CHECK_NOTHROW(bad.validate());
  bad.observed[2] = {0.9, 0.9, 0.9};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(simulate_observations(kTruth, kKappa, ef_state(), uniform_times(1, 20), -1, 1), InvalidParameter);
}
