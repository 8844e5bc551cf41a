#include <doctest.h>

#include "ep3/atlas.hpp"
#include "ep3/strands.hpp"

using namespace ep3;

namespace {

const std::map<std::string, BraidWord> kExpected{
    {"red", BraidWord{1}},       {"blue", BraidWord{2}},      {"green", BraidWord{1, 1}},
    {"brown", BraidWord{2, 1}}, {"purple", BraidWord{1, 2}}};

const std::map<std::string, int> kVorticity{{"red", -1}, {"blue", -1}, {"green", -2}, {"brown", -2}, {"purple", -2}};

BraidWord word_of(const ControlLoop& loop, int n) { return extract_braid_word(sample_strands(loop, n)); }

// Square in the (branch normal, delta) plane around the lower EP2 branch,
// starting at its bottom edge midpoint.
ControlLoop square_around_lower_branch(double kappa, bool reversed) {
  const auto e = ep3_location(kappa);
  const double omega = e.omega_star / 2;
  const auto row = ep2_row(omega, kappa);
  const double r = 0.35 * (row->second - row->first);
  const ControlPoint c = control_point(0, omega, row->first);
  const ControlPoint u = control_point(0, 0, 1), v = control_point(1, 0, 0);
  std::vector<ControlPoint> corners{c - r * v + r * u, c + r * v + r * u, c + r * v - r * u, c - r * v - r * u};
  if (reversed) std::reverse(corners.begin(), corners.end());
  ControlLoop::Builder b(c - r * v, kappa);
  for (const auto& p : corners) b.line_to(p);
  b.line_to(c - r * v);
  return b.close(reversed ? "square-reversed" : "square");
}

}  // namespace

TEST_CASE("canonical loops give the expected words") {
  for (double kappa : {1.0, 5.0}) {
    const auto loops = canonical_loops(kappa);
    REQUIRE(loops.size() == 5);
    for (const auto& [name, loop] : loops) {
      INFO(name << " kappa=" << kappa);
      CHECK(word_of(loop, 400) == kExpected.at(name));
    }
  }
}

TEST_CASE("words are stable under doubling the sample count") {
  const auto loops = canonical_loops(1);
  for (const auto& [name, loop] : loops) {
    INFO(name);
    const auto w = word_of(loop, 200);
    for (int n : {400, 800, 1600}) CHECK(word_of(loop, n) == w);
  }
}

TEST_CASE("vorticity of the canonical loops") {
  for (double kappa : {1.0, 5.0}) {
    for (const auto& [name, loop] : canonical_loops(kappa)) {
      INFO(name);
      const auto rep = vorticity(loop, 400);
      CHECK(rep.nu_total == kVorticity.at(name));
      CHECK(std::abs(rep.nu_total_raw - rep.nu_total) < 1e-6);
      const auto w = word_of(loop, 400);
      CHECK(rep.nu_total == -w.exponent_sum());
      CHECK(rep.closure == w.permutation());
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          CHECK(rep.nu[i][j] == doctest::Approx(rep.nu[j][i]).epsilon(1e-12));
          if (rep.pair_closed(i, j)) {
            const double twice = 2 * rep.nu[i][j];
            CHECK(std::abs(twice - std::round(twice)) < 1e-6);
          }
        }
    }
  }
}

TEST_CASE("closure permutation matches the word") {
  for (const auto& [name, loop] : canonical_loops(1)) {
    const auto s = sample_strands(loop, 400);
    CHECK(s.closure == kExpected.at(name).permutation());
    CHECK(s.s.front() == 0);
    CHECK(s.s.back() == 1);
    CHECK(std::is_sorted(s.s.begin(), s.s.end()));
    CHECK(s.min_gap > 0);
  }
}

TEST_CASE("reversing a loop inverts its word") {
  const auto fwd = word_of(square_around_lower_branch(1, false), 400);
  const auto rev = word_of(square_around_lower_branch(1, true), 400);
  CHECK(fwd.size() == 1);
  CHECK(words_equivalent(rev, fwd.inverse()));
  CHECK(vorticity(square_around_lower_branch(1, false), 400).nu_total == -fwd.exponent_sum());
}

TEST_CASE("a loop that avoids every EP gives the trivial braid") {
  const ControlPoint base = control_point(0, 0.25, 0.05);
  const auto constant = ControlLoop::constant(base, 1);
  CHECK(word_of(constant, 16).empty());
  CHECK(vorticity(constant, 16).nu_total == 0);
  // small square that does not link any branch
  const ControlLoop small = ControlLoop::Builder(base, 1)
                                .line_to(control_point(0.01, 0.25, 0.05))
                                .line_to(control_point(0.01, 0.26, 0.06))
                                .line_to(control_point(0, 0.26, 0.06))
                                .line_to(base)
                                .close();
  CHECK(word_of(small, 100).empty());
  CHECK(vorticity(small, 100).nu_total == 0);
}

TEST_CASE("a loop through an EP is rejected") {
  const auto e = ep3_location(1);
  const ControlPoint below = control_point(0, e.omega_star, e.g_star - 0.05);
  const ControlPoint above = control_point(0, e.omega_star, e.g_star + 0.05);
  const ControlLoop through = ControlLoop::Builder(below, 1).line_to(above).line_to(below).close();
  CHECK_THROWS_AS(sample_strands(through, 64), DegenerateLoop);
  CHECK_THROWS_AS(vorticity(through, 64), NumericError);
  const auto at_ep3 = ControlLoop::constant(control_point(0, e.omega_star, e.g_star), 1);
  CHECK_THROWS_AS(vorticity(at_ep3, 16), DegenerateLoop);
}

TEST_CASE("loop construction") {
  const ControlPoint base = control_point(0, 0.25, 0.05);
  CHECK_THROWS_AS(ControlLoop::Builder(base, 1).line_to(control_point(0.1, 0.25, 0.05)).close(), InvalidParameter);
  CHECK_THROWS_AS(ControlLoop::Builder(base, 1).close(), InvalidParameter);
  CHECK_THROWS_AS(ControlLoop::Builder(base, 1).line_to(base, 0), InvalidParameter);
  CHECK_THROWS_AS(canonical_loop("orange", 1), InvalidParameter);
  const auto red = canonical_loop("red", 1);
  CHECK((red.point_at(0) - red.base_point()).norm() < 1e-15);
  CHECK((red.point_at(1) - red.base_point()).norm() < 1e-12);
  CHECK(red.at(0.3).kappa == 1);
  // concatenation: the first half of green is red
  const auto green = canonical_loop("green", 1);
  for (double s : {0.1, 0.25, 0.4}) CHECK((green.point_at(s / 2) - red.point_at(s)).norm() < 1e-12);
  CHECK_THROWS_AS(ControlLoop::concatenate({red, canonical_loop("red", 2)}), InvalidParameter);
}

TEST_CASE("canonical loops stay away from every EP") {
  for (const auto& [name, loop] : canonical_loops(1)) {
    const auto s = sample_strands(loop, 400);
    CHECK(s.min_gap > 1e-3);
  }
}
