#include <doctest.h>

#include <random>

#include "pfwd/kernels.hpp"
#include "pfwd/transport.hpp"
#include "pfwd/velocity.hpp"

using namespace pfwd;

namespace {

AtomCloud atoms2d(std::initializer_list<std::array<double, 3>> rows) {
  AtomCloud c;
  c.dim = 2;
  for (const auto& r : rows) {
    const std::array<double, 2> p{r[0], r[1]};
    c.push_back(p, r[2]);
  }
  return c;
}

InteractionSpec cone(double radius, double peak, double alpha = 1) {
  InteractionSpec s;
  s.kernel.radius = radius;
  s.kernel.peak = peak;
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST_CASE("certified constants from the closed forms") {
  VelocityModel m;
  m.interaction = cone(1, 1, 1);
  const auto c = certify_constants(m);
  CHECK(c.L == doctest::Approx(1.0));
  CHECK(c.M == doctest::Approx(1.0));
  CHECK(c.K == doctest::Approx(1.0));

  VelocityModel m2;
  m2.interaction = cone(2, 1, 2);  // kernel Lipschitz constant 0.5
  const auto c2 = certify_constants(m2);
  CHECK(c2.M == doctest::Approx(2.0));
  CHECK(c2.L == doctest::Approx(1.0));
  CHECK(c2.K == doctest::Approx(1.0));

  VelocityModel m3;
  m3.interaction = cone(0.1, 1, 1);
  CHECK(certify_constants(m3).M == doctest::Approx(0.1));

  VelocityModel bad;
  bad.interaction = cone(1, 1);
  bad.interaction->constant_weight = true;
  CHECK_THROWS_AS((void)certify_constants(bad), std::invalid_argument);
}

TEST_CASE("desired-field constants combine additively") {
  VelocityModel m;
  m.desired.kind = DesiredField::Kind::constant;
  m.desired.u = {3, 4};
  m.interaction = cone(1, 1, 1);
  const auto c = certify_constants(m);
  CHECK(c.M == doctest::Approx(6.0));  // |u| = 5 plus interaction bound 1
  CHECK(c.L == doctest::Approx(1.0));
  CHECK(c.K == doctest::Approx(1.0));

  VelocityModel t;
  t.desired.kind = DesiredField::Kind::to_target;
  t.desired.target = {0, 0};
  t.desired.gain = 2;
  t.desired.vmax = 0.5;
  const auto ct = certify_constants(t);
  CHECK(ct.L == doctest::Approx(2.0));
  CHECK(ct.M == doctest::Approx(0.5));
  CHECK(ct.K == 0.0);
}

TEST_CASE("interaction evaluation closed forms") {
  const InteractionSpec spec = cone(1, 1, 1);

  // no mass within the kernel support
  const AtomCloud far = atoms2d({{5, 5, 1.0}});
  const std::vector<double> origin{0, 0};
  const auto v0 = eval_interaction(far, origin, spec);
  CHECK(v0[0] == 0.0);
  CHECK(v0[1] == 0.0);

  // symmetric pair about the query point
  const AtomCloud sym = atoms2d({{0.3, 0.0, 1.0}, {-0.3, 0.0, 1.0}});
  const auto vs = eval_interaction(sym, origin, spec);
  CHECK(std::abs(vs[0]) < 1e-12);
  CHECK(std::abs(vs[1]) < 1e-12);

  // single atom at distance 1/2: x* = y, phi = 1/2, v = (x - y)/2
  const AtomCloud one = atoms2d({{0.5, 0.0, 1.0}});
  const auto v1 = eval_interaction(one, origin, spec);
  CHECK(v1[0] == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(v1[1] == doctest::Approx(0.0));
}

TEST_CASE("velocity is desired plus interaction") {
  VelocityModel m;
  m.desired.kind = DesiredField::Kind::constant;
  m.desired.u = {1, 0};
  const AtomCloud sym = atoms2d({{0.0, 0.4, 1.0}, {0.0, -0.4, 1.0}});
  const std::vector<double> x{0, 0};

  // no interaction configured
  const auto vd = eval_velocity(sym, x, m);
  CHECK(vd[0] == 1.0);
  CHECK(vd[1] == 0.0);

  // symmetric interaction cancels, desired part survives
  m.interaction = cone(1, 1, 1);
  const auto v = eval_velocity(sym, x, m);
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(v[1]) < 1e-12);

  // zero desired leaves the pure interaction
  VelocityModel mi;
  mi.interaction = cone(1, 1, 1);
  const AtomCloud one = atoms2d({{0.5, 0.0, 1.0}});
  const auto vi = eval_velocity(one, x, mi);
  CHECK(vi[0] == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("certified M and L hold on random samples (weight exponent 1)") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uni(-1, 1);
  VelocityModel m;
  m.desired.kind = DesiredField::Kind::constant;
  m.desired.u = {0.3, -0.2};
  m.interaction = cone(0.8, 1.3, 1);
  const auto c = certify_constants(m);

  for (int rep = 0; rep < 40; ++rep) {
    AtomCloud mu;
    mu.dim = 2;
    const int k = 1 + rep % 12;
    std::vector<double> p(2);
    for (int i = 0; i < k; ++i) {
      p[0] = uni(rng);
      p[1] = uni(rng);
      mu.push_back(p, 1.0 / k);  // probability measure
    }
    for (int s = 0; s < 20; ++s) {
      const std::vector<double> x{uni(rng), uni(rng)};
      const std::vector<double> y{uni(rng), uni(rng)};
      const auto vx = eval_velocity(mu, x, m);
      const auto vy = eval_velocity(mu, y, m);
      CHECK(norm(vx) <= c.M + 1e-12);
      CHECK(dist(vx, vy) <= c.L * dist(x, y) + 1e-9);
    }
  }
}

TEST_CASE("empirical K stays within the certified constant") {
  VelocityModel m;
  m.interaction = cone(1, 1, 1);
  const auto c = certify_constants(m);

  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> uni(-0.4, 0.4);
  std::vector<std::pair<Measure, Measure>> pairs;
  for (int i = 0; i < 8; ++i) {
    AtomCloud base;
    base.dim = 2;
    std::vector<double> p(2);
    for (int k = 0; k < 6; ++k) {
      p[0] = uni(rng);
      p[1] = uni(rng);
      base.push_back(p, 1.0 / 6);
    }
    AtomCloud shifted = base;
    const double ux = 0.05 + 0.02 * i;
    for (std::size_t k = 0; k < shifted.size(); ++k) shifted.pos[2 * k] += ux;
    pairs.emplace_back(Measure(base), Measure(shifted));
  }
  LatticeSpec lattice{{{-1.5, -1.5}, {1.5, 1.5}}, 9};
  const double ratio = empirical_K(m, pairs, 1.0, 1, lattice);
  CHECK(ratio <= c.K * 1.05);

  // degenerate pair rejected
  std::vector<std::pair<Measure, Measure>> degenerate = pairs;
  degenerate.emplace_back(pairs.front().first, pairs.front().first);
  CHECK_THROWS_AS((void)empirical_K(m, degenerate, 1.0, 1, lattice), std::invalid_argument);
}

TEST_CASE("constant-weight family: velocity jumps while W_p shrinks") {
  const std::vector<double> ts{0.0, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
  const auto rep = f1_discontinuity_demo(0.25, 0.1, 1.0, ts, 2.0, 12, 12);
  REQUIRE(rep.rows.size() == ts.size());
  for (const auto& row : rep.rows) {
    if (row.t == 0) {
      CHECK(row.v_norm == 0.0);  // exact: kernel-weighted mass is exactly zero
    } else {
      CHECK(row.v_norm >= rep.r);
      CHECK(row.wp_measured <= row.wp_bound + row.halo);
    }
  }
  // the velocity gap does not vanish with t
  CHECK(rep.rows.back().v_norm >= rep.r);
  CHECK(rep.rows[1].v_norm >= rep.r);

  CHECK_THROWS_AS((void)f1_discontinuity_demo(0.9, 0.2, 1.0, ts, 2.0, 8, 8),
                  std::invalid_argument);  // infeasible geometry
}

TEST_CASE("reflection symmetry kills the normal component") {
  // measure and desired field symmetric about the axis x = 0
  VelocityModel m;
  m.desired.kind = DesiredField::Kind::constant;
  m.desired.u = {0, 0.7};
  m.interaction = cone(2, 1, 1);
  const AtomCloud mu = atoms2d({{0.6, 0.2, 0.5}, {-0.6, 0.2, 0.5}, {0.0, -0.3, 0.4}});
  for (double y : {-0.5, 0.0, 0.4, 1.1}) {
    const std::vector<double> x{0.0, y};
    const auto v = eval_velocity(mu, x, m);
    CHECK(std::abs(v[0]) < 1e-12);
  }
}
