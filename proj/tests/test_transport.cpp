#include <doctest.h>

#include <random>

#include "pfwd/transport.hpp"

using namespace pfwd;

namespace {

AtomCloud random_atoms(std::mt19937_64& rng, int dim, int count, bool equal_mass,
                       double span = 1.0) {
  std::uniform_real_distribution<double> uni(-span, span);
  std::uniform_real_distribution<double> mass(0.2, 1.0);
  AtomCloud c;
  c.dim = dim;
  std::vector<double> p(dim);
  for (int i = 0; i < count; ++i) {
    for (auto& x : p) x = uni(rng);
    c.push_back(p, equal_mass ? 1.0 / count : mass(rng));
  }
  if (!equal_mass) {
    const double m = c.total_mass();
    for (auto& w : c.mass) w /= m;
  }
  return c;
}

AtomCloud single(double x, double y, double m) {
  AtomCloud c;
  c.dim = 2;
  const std::vector<double> p{x, y};
  c.push_back(p, m);
  return c;
}

}  // namespace

TEST_CASE("two single atoms: distance |x0-x1| for every p") {
  const AtomCloud a = single(0.2, -1.0, 1.0);
  const AtomCloud b = single(1.2, 0.5, 1.0);
  const double d = std::hypot(1.0, 1.5);
  for (double p : {1.0, 1.5, 2.0, 4.0})
    CHECK(wasserstein_atoms(a, b, p).value == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("identity gives zero and a feasible plan") {
  std::mt19937_64 rng(3);
  const AtomCloud a = random_atoms(rng, 2, 9, false);
  const auto res = wasserstein_atoms(a, a, 2.0);
  CHECK(res.value == doctest::Approx(0.0).epsilon(1e-12));

  // marginals of the plan
  std::vector<double> row(a.size(), 0), col(a.size(), 0);
  for (const auto& e : res.plan.entries) {
    row[e.source] += e.mass;
    col[e.target] += e.mass;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(row[i] == doctest::Approx(a.mass[i]).epsilon(1e-10));
    CHECK(col[i] == doctest::Approx(a.mass[i]).epsilon(1e-10));
  }
}

TEST_CASE("plan invariants on random unequal instances") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    const AtomCloud a = random_atoms(rng, 2, 4 + rep % 9, false);
    const AtomCloud b = random_atoms(rng, 2, 3 + (rep * 7) % 11, false);
    const double p = rep % 2 ? 1.0 : 2.0;
    const auto res = wasserstein_atoms(a, b, p);

    std::vector<double> row(a.size(), 0), col(b.size(), 0);
    double cost = 0;
    for (const auto& e : res.plan.entries) {
      REQUIRE(e.mass >= 0);
      row[e.source] += e.mass;
      col[e.target] += e.mass;
      cost += e.mass * pow_dist(dist2(a.position(e.source), b.position(e.target)), p);
    }
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(row[i] == doctest::Approx(a.mass[i]).epsilon(1e-9));
    for (std::size_t j = 0; j < b.size(); ++j)
      CHECK(col[j] == doctest::Approx(b.mass[j]).epsilon(1e-9));
    CHECK(res.plan.cost_p == doctest::Approx(cost).epsilon(1e-10));
    CHECK(res.value == doctest::Approx(std::pow(cost, 1.0 / p)).epsilon(1e-10));
  }
}

TEST_CASE("brute-force oracle agreement, k<=7, n=2, p in {1,2}") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 220; ++rep) {
    const int k = 1 + rep % 7;
    const AtomCloud a = random_atoms(rng, 2, k, true);
    const AtomCloud b = random_atoms(rng, 2, k, true);
    const double p = rep % 2 ? 1.0 : 2.0;
    const double exact = wasserstein_bruteforce(a, b, p);
    const double solver = wasserstein_atoms(a, b, p).value;
    CHECK(solver == doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("1-d quantile oracle agreement") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 220; ++rep) {
    const AtomCloud a = random_atoms(rng, 1, 2 + rep % 12, rep % 3 == 0);
    const AtomCloud b = random_atoms(rng, 1, 2 + (rep * 5) % 13, rep % 3 == 0);
    const double p = rep % 2 ? 1.0 : 2.0;
    const double oracle = wasserstein_1d(a, b, p);
    const double solver = wasserstein_atoms(a, b, p).value;
    CHECK(solver == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("quantile oracle closed forms") {
  AtomCloud a, b;
  a.dim = b.dim = 1;
  const std::vector<double> x0{0.0}, x1{1.0}, x2{2.0}, x3{3.0};
  a.push_back(x0, 0.5);
  a.push_back(x1, 0.5);
  b.push_back(x2, 0.5);
  b.push_back(x3, 0.5);
  CHECK(wasserstein_1d(a, b, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(wasserstein_1d(a, b, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("metric axioms and ordering on random instances") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 120; ++rep) {
    const int k = 3 + rep % 6;
    const AtomCloud a = random_atoms(rng, 2, k, true);
    const AtomCloud b = random_atoms(rng, 2, k, true);
    const AtomCloud c = random_atoms(rng, 2, k, true);

    const double ab = wasserstein_atoms(a, b, 2.0).value;
    const double ba = wasserstein_atoms(b, a, 2.0).value;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));

    const double ac = wasserstein_atoms(a, c, 2.0).value;
    const double bc = wasserstein_atoms(b, c, 2.0).value;
    CHECK(ac <= ab + bc + 1e-9);

    double prev = 0;
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      const double w = wasserstein_atoms(a, b, p).value;
      CHECK(w + 1e-9 >= prev);
      prev = w;
    }
  }
}

TEST_CASE("subadditivity under measure splitting") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 100; ++rep) {
    const AtomCloud a1 = random_atoms(rng, 2, 4, false);
    const AtomCloud a2 = random_atoms(rng, 2, 5, false);
    const AtomCloud b1 = random_atoms(rng, 2, 6, false);
    const AtomCloud b2 = random_atoms(rng, 2, 3, false);
    AtomCloud a = a1, b = b1;
    a.append(a2);
    b.append(b2);
    const double p = rep % 2 ? 1.0 : 2.0;
    const double whole = wasserstein_atoms(a, b, p).value;
    const double w1 = wasserstein_atoms(a1, b1, p).value;
    const double w2 = wasserstein_atoms(a2, b2, p).value;
    CHECK(std::pow(whole, p) <= std::pow(w1, p) + std::pow(w2, p) + 1e-9);
  }
}

TEST_CASE("shared mass can only decrease the distance") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const AtomCloud base_a = random_atoms(rng, 2, 5, false);
    const AtomCloud base_b = random_atoms(rng, 2, 5, false);
    const AtomCloud shared = random_atoms(rng, 2, 4, false);
    AtomCloud a = base_a, b = base_b;
    a.append(shared);
    b.append(shared);
    const double p = rep % 2 ? 1.0 : 2.0;
    const double with_shared = wasserstein_atoms(a, b, p).value;
    const double without = wasserstein_atoms(base_a, base_b, p).value;
    CHECK(with_shared <= without + 1e-9);
  }
}

TEST_CASE("sup-decomposition bound over mass-matched parts") {
  // probability measures: part masses sum to 1
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 100; ++rep) {
    const int parts = 2 + rep % 3;
    double weight_sum = 0;
    for (int i = 0; i < parts; ++i) weight_sum += 0.5 + 0.1 * i;
    AtomCloud a, b;
    a.dim = b.dim = 2;
    double bound = 0;
    for (int i = 0; i < parts; ++i) {
      AtomCloud ai = random_atoms(rng, 2, 3 + i, false);
      AtomCloud bi = random_atoms(rng, 2, 4, false);
      const double target = (0.5 + 0.1 * i) / weight_sum;
      const double sa = target / ai.total_mass();
      const double sb = target / bi.total_mass();
      for (auto& m : ai.mass) m *= sa;
      for (auto& m : bi.mass) m *= sb;
      const double p = 2.0;
      bound = std::max(bound, wasserstein_atoms(ai, bi, p).value / std::pow(target, 1.0 / p));
      a.append(ai);
      b.append(bi);
    }
    const double whole = wasserstein_atoms(a, b, 2.0).value;
    CHECK(whole <= bound + 1e-9);
  }
}

TEST_CASE("translation invariance") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const AtomCloud a = random_atoms(rng, 2, 7, false);
    const AtomCloud b = random_atoms(rng, 2, 6, false);
    AtomCloud at = a, bt = b;
    const double ux = 1.75, uy = -0.5;  // binary-exact shifts
    for (std::size_t i = 0; i < at.size(); ++i) {
      at.pos[2 * i] += ux;
      at.pos[2 * i + 1] += uy;
    }
    for (std::size_t i = 0; i < bt.size(); ++i) {
      bt.pos[2 * i] += ux;
      bt.pos[2 * i + 1] += uy;
    }
    const double w = wasserstein_atoms(a, b, 2.0).value;
    const double wt = wasserstein_atoms(at, bt, 2.0).value;
    CHECK(wt == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("error conditions") {
  const AtomCloud a = single(0, 0, 1.0);
  const AtomCloud b = single(1, 0, 2.0);
  CHECK_THROWS_AS((void)wasserstein_atoms(a, b, 2.0), std::invalid_argument);  // mass mismatch
  CHECK_THROWS_AS((void)wasserstein_atoms(a, a, 0.5), std::invalid_argument);  // p < 1
  AtomCloud empty;
  empty.dim = 2;
  CHECK_THROWS_AS((void)wasserstein_atoms(empty, a, 2.0), std::invalid_argument);

  AtomCloud c = single(0, 0, 0.5);
  const std::vector<double> p2{1.0, 1.0};
  c.push_back(p2, 0.5);
  CHECK_THROWS_AS((void)wasserstein_bruteforce(a, c, 2.0), std::invalid_argument);  // unequal masses

  CHECK_THROWS_AS((void)wasserstein_1d(a, b, 2.0), std::invalid_argument);  // n != 1
}

TEST_CASE("wasserstein_measures: halo bookkeeping and translation") {
  SquareCloud sa;
  sa.dim = 2;
  sa.side = 0.25;
  const std::vector<double> c0{0.0, 0.0}, c1{2.0, 0.0};
  sa.push_back(c0, 1.0);
  SquareCloud sb = sa;
  sb.centers[0] = c1[0];

  const auto same = wasserstein_measures(Measure(sa), Measure(sa), 2.0, 2);
  CHECK(same.estimate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(same.halo > 0);

  // rigid translation of one square: the estimate is the center distance
  const auto far = wasserstein_measures(Measure(sa), Measure(sb), 2.0, 1);
  CHECK(far.estimate == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("projection distance bound") {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 50; ++rep) {
    SquareCloud m;
    m.dim = 2;
    m.side = 0.18;
    std::uniform_real_distribution<double> uni(-1, 1);
    std::vector<double> c(2);
    const int count = 12;
    for (int i = 0; i < count; ++i) {
      c[0] = uni(rng);
      c[1] = uni(rng);
      m.push_back(c, 1.0 / count);
    }
    const double dx = 0.2;  // side <= dx
    const GriddedDensity proj = grid_project(m, GridSpec(2, dx));
    const auto d = wasserstein_measures(Measure(m), Measure(proj), 2.0, 4);
    CHECK(d.estimate - d.halo <= std::sqrt(2.0) * dx);
  }
}
