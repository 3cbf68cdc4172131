#include <doctest.h>

#include <cmath>
#include <random>

#include "pfwd/counterexample.hpp"

using namespace pfwd;

TEST_CASE("truncated mass: closed form equals direct summation") {
  NuFamily fam;
  fam.truncation = 20;
  const Staircase s = fam.eval(0.3);
  CHECK(std::abs(s.mass() - fam.truncated_mass()) <= 1e-15);
  CHECK(fam.truncated_mass() == doctest::Approx(1.0 - std::pow(2.0, -21)).epsilon(1e-16));

  // horizontal extent stays below the geometric-series limit 4/3
  double extent = 0;
  for (const auto& c : s.cols) extent = std::max(extent, c.x0 + c.side);
  CHECK(extent < 4.0 / 3.0);

  // every column hangs from the common top line by its own side
  for (const auto& c : s.cols) {
    CHECK(s.y_top == 1.0 + 0.3 * 0.3);
    CHECK(c.side > 0);
  }
}

TEST_CASE("mass functional on the fixed rectangle") {
  NuFamily fam;
  CHECK(F_functional(fam.eval(0.0)) == 0.0);
  CHECK(F_functional(fam.eval(1.0)) ==
        doctest::Approx(fam.truncated_mass()).epsilon(1e-14));

  // anything entirely below the rectangle contributes nothing
  AtomCloud below;
  below.dim = 2;
  const std::vector<double> p{0.5, 0.5};
  below.push_back(p, 1.0);
  CHECK(F_functional(Measure(below)) == 0.0);

  // strict monotonicity on a fine parameter grid
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double f = F_functional(fam.eval(i / 1000.0));
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("inverse link f round-trips the family parameter") {
  NuFamily fam;
  CHECK(f_map(0.0, fam) == 0.0);
  CHECK(f_map(F_functional(fam.eval(1.0)), fam) == 2.0);
  CHECK(f_map(F_functional(fam.eval(0.5)), fam) == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    CHECK(f_map(F_functional(fam.eval(t)), fam) == doctest::Approx(2 * t).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)f_map(2.0, fam), std::invalid_argument);
}

TEST_CASE("constant-in-space field from the functional") {
  NuFamily fam;
  const auto v0 = v_l1(fam.eval(0.0), fam);
  CHECK(v0[0] == 0.0);
  CHECK(v0[1] == 0.0);
  const auto vt = v_l1(fam.eval(0.4), fam);
  CHECK(vt[0] == 0.0);
  CHECK(vt[1] == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("field gap vs L1 distance: Lipschitz with constant 2") {
  NuFamily fam;
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::pair<double, double>> pairs;
  while (pairs.size() < 100) {
    double s = uni(rng), t = uni(rng);
    if (s > t) std::swap(s, t);
    if (t - s < 1e-6 || s + t < 1e-3) continue;
    pairs.emplace_back(s, t);
  }
  const auto rows = verify_l1_lipschitz(fam, pairs);
  REQUIRE(rows.size() == pairs.size());
  for (const auto& r : rows) {
    CHECK(r.pass);
    CHECK(r.lhs <= r.rhs + 1e-9);
  }
}

TEST_CASE("dyadic band gives the lower bound on the L1 distance") {
  NuFamily fam;
  // pick pairs with s_n < t^2 - s^2 <= s_{n-1}, well inside the truncation
  for (int n = 2; n <= 10; ++n) {
    const double delta = 2.5 * std::pow(4.0, -n);  // strictly inside the band
    const double s = 0.1;
    const double t = std::sqrt(s * s + delta);
    REQUIRE(t <= 1.0);
    const double l1 = l1_staircase(fam.eval(t), fam.eval(s));
    const double tail = std::pow(2.0, -fam.truncation);
    CHECK(l1 >= 2.0 * std::pow(2.0, -n) - tail);
  }
}

TEST_CASE("vertical-shift coupling value and the unbounded ratio") {
  NuFamily fam;
  std::vector<std::pair<double, double>> pairs{{0.0, 0.01}, {0.005, 0.01}, {0.1, 0.2}, {0.3, 0.5}};
  const auto rows = verify_wp_blowup(fam, 1.0, 6, pairs);
  REQUIRE(rows.size() == pairs.size());
  for (const auto& r : rows) {
    CHECK(r.pass);
    CHECK(std::abs(r.wp_measured - r.wp_exact) <= r.halo + 1e-9);
  }
  CHECK(rows[0].ratio == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(rows[2].ratio == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
  // the ratio exceeds any threshold once t + s is small
  CHECK(rows[0].ratio > 100);
  CHECK(rows[1].ratio > 100);
}

TEST_CASE("vertical-shift identity is exact on the stored geometry") {
  NuFamily fam;
  const Staircase base = fam.eval(0.0);
  for (double t : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    CHECK(fam.eval(t) == base.shifted_up(t * t));
  }
}

TEST_CASE("two competing solutions from the same initial measure") {
  NuFamily fam;
  const auto rep = demonstrate_nonuniqueness(fam, 1.0, 0.01);
  CHECK(rep.steps == 100);
  CHECK(rep.stationary_fixed_point);
  CHECK(rep.shift_identity);
  CHECK(rep.velocity_along_path);
  CHECK_THROWS_AS((void)demonstrate_nonuniqueness(fam, 1.0, 0.3), std::invalid_argument);
}

TEST_CASE("family evaluation rejects parameters outside [0, 1]") {
  NuFamily fam;
  CHECK_THROWS_AS((void)fam.eval(-0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)fam.eval(1.1), std::invalid_argument);
}
