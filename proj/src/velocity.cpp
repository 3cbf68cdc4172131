#include "pfwd/velocity.hpp"

#include <algorithm>
#include <stdexcept>

#include "pfwd/kernels.hpp"
#include "pfwd/transport.hpp"

namespace pfwd {

void DesiredField::eval(std::span<const double> x, std::span<double> out) const {
  const int n = static_cast<int>(x.size());
  switch (kind) {
    case Kind::zero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case Kind::constant:
      if (static_cast<int>(u.size()) != n) throw std::invalid_argument("DesiredField: bad constant vector");
      std::copy(u.begin(), u.end(), out.begin());
      return;
    case Kind::to_target: {
      if (static_cast<int>(target.size()) != n) throw std::invalid_argument("DesiredField: bad target");
      double norm2 = 0;
      for (int d = 0; d < n; ++d) {
        out[d] = gain * (target[d] - x[d]);
        norm2 += sq(out[d]);
      }
      const double nv = std::sqrt(norm2);
      if (nv > vmax)
        for (int d = 0; d < n; ++d) out[d] *= vmax / nv;
      return;
    }
  }
}

double DesiredField::lipschitz_bound() const {
  switch (kind) {
    case Kind::zero:
    case Kind::constant:
      return 0;
    case Kind::to_target:
      return gain;
  }
  return 0;
}

double DesiredField::sup_bound() const {
  switch (kind) {
    case Kind::zero:
      return 0;
    case Kind::constant: {
      double s = 0;
      for (double v : u) s += sq(v);
      return std::sqrt(s);
    }
    case Kind::to_target:
      return vmax;
  }
  return 0;
}

HypothesisConstants certify_constants(const VelocityModel& model) {
  HypothesisConstants c;
  c.L = model.desired.lipschitz_bound();
  c.M = model.desired.sup_bound();
  c.K = 0;
  if (model.interaction) {
    const auto& spec = *model.interaction;
    if (spec.constant_weight)
      throw std::invalid_argument("certify_constants: constant weight admits no finite K");
    if (!(spec.alpha >= 1)) throw std::invalid_argument("certify_constants: alpha must be >= 1");
    const double R = spec.kernel.radius;
    const double peak = spec.kernel.sup();
    const double lk = spec.kernel.lipschitz();
    const double interaction_lip = std::pow(peak, spec.alpha - 1) * R * lk;
    c.M += R * std::pow(peak, spec.alpha);
    c.L += interaction_lip;
    c.K = interaction_lip;
  }
  return c;
}

std::vector<double> eval_interaction(const AtomCloud& mu, std::span<const double> x,
                                     const InteractionSpec& spec) {
  check_finite(x, "eval_interaction");
  VelocityModel m;
  m.interaction = spec;
  std::vector<double> out;
  eval_velocity_batch_reference(mu, x, static_cast<int>(x.size()), m, out);
  return out;
}

std::vector<double> eval_velocity(const AtomCloud& mu, std::span<const double> x,
                                  const VelocityModel& model) {
  check_finite(x, "eval_velocity");
  std::vector<double> out;
  eval_velocity_batch_reference(mu, x, static_cast<int>(x.size()), model, out);
  return out;
}

double empirical_K(const VelocityModel& model, const std::vector<std::pair<Measure, Measure>>& pairs,
                   double p, int q, const LatticeSpec& lattice) {
  if (pairs.size() < 2) throw std::invalid_argument("empirical_K: need at least 2 sample pairs");
  const int n = static_cast<int>(lattice.box.lo.size());
  const int ppa = lattice.points_per_axis;
  if (ppa < 2) throw std::invalid_argument("empirical_K: need at least 2 lattice points per axis");

  std::vector<double> points;
  std::array<int, kMaxDim> k{};
  while (true) {
    for (int d = 0; d < n; ++d)
      points.push_back(lattice.box.lo[d] +
                       (lattice.box.hi[d] - lattice.box.lo[d]) * k[d] / (ppa - 1));
    int d = 0;
    while (d < n && ++k[d] == ppa) {
      k[d] = 0;
      ++d;
    }
    if (d == n) break;
  }

  double worst = 0;
  for (const auto& [ma, mb] : pairs) {
    const double w = wasserstein_measures(ma, mb, p, q).estimate;
    if (w == 0) throw std::invalid_argument("empirical_K: degenerate pair with W_p = 0");
    const AtomCloud ca = to_quadrature(ma, q), cb = to_quadrature(mb, q);
    std::vector<double> va, vb;
    eval_velocity_batch(ca, points, n, model, va);
    eval_velocity_batch(cb, points, n, model, vb);
    double sup = 0;
    for (std::size_t i = 0; i * n < va.size(); ++i)
      sup = std::max(sup, dist(std::span<const double>(va.data() + i * n, n),
                               std::span<const double>(vb.data() + i * n, n)));
    worst = std::max(worst, sup / w);
  }
  return worst;
}

F1DemoReport f1_discontinuity_demo(double r, double eps, double radius,
                                   std::span<const double> t_list, double p, int q_ball,
                                   int q_far) {
  if (!(r > 0) || !(eps > 0) || !(radius > 0) || !(3 * eps < radius - r))
    throw std::invalid_argument("f1_discontinuity_demo: need 0 < r, 0 < 3*eps < radius - r");

  InteractionSpec spec;
  spec.kernel.radius = radius;
  spec.kernel.peak = 1;
  spec.constant_weight = true;

  // Ball of radius eps centered inside the kernel support but outside B_r(0);
  // compact far square C fully outside the support.
  const double cx = (r + radius) / 2 + eps / 2;
  const std::array<double, 2> ball_center{cx, 0.0};
  const double far_side = 1.0;
  const std::array<double, 2> far_center{radius + 1.0, 0.0};

  // equal-weight nodes strictly inside the ball
  std::vector<double> ball_nodes;
  for (int i = 0; i < q_ball; ++i) {
    for (int j = 0; j < q_ball; ++j) {
      const double x = ball_center[0] + ((i + 0.5) / q_ball - 0.5) * 2 * eps;
      const double y = ball_center[1] + ((j + 0.5) / q_ball - 0.5) * 2 * eps;
      if (sq(x - ball_center[0]) + sq(y - ball_center[1]) < sq(eps)) {
        ball_nodes.push_back(x);
        ball_nodes.push_back(y);
      }
    }
  }
  if (ball_nodes.empty()) throw std::invalid_argument("f1_discontinuity_demo: q_ball too small");

  auto family_member = [&](double t) {
    AtomCloud c;
    c.dim = 2;
    const std::size_t nb = ball_nodes.size() / 2;
    for (std::size_t i = 0; i < nb; ++i)
      c.push_back(std::span<const double>(ball_nodes.data() + 2 * i, 2), t / nb);
    for (int i = 0; i < q_far; ++i) {
      for (int j = 0; j < q_far; ++j) {
        const std::array<double, 2> node{far_center[0] + ((i + 0.5) / q_far - 0.5) * far_side,
                                         far_center[1] + ((j + 0.5) / q_far - 0.5) * far_side};
        c.push_back(node, (1 - t) / (q_far * q_far));
      }
    }
    return c;
  };

  // the largest pairing distance between the two parts
  double s = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      s = std::max(s, std::hypot(far_center[0] + sx * far_side / 2 - ball_center[0],
                                 far_center[1] + sy * far_side / 2 - ball_center[1]) + eps);

  F1DemoReport rep;
  rep.r = r;
  rep.eps = eps;
  rep.radius = radius;
  rep.s = s;

  const AtomCloud mu0 = family_member(0.0);
  const double halo = std::sqrt(2.0) * (far_side / q_far) + std::sqrt(2.0) * (2 * eps / q_ball);
  const std::array<double, 2> origin{0, 0};
  for (double t : t_list) {
    if (!(t >= 0) || !(t <= 1)) throw std::invalid_argument("f1_discontinuity_demo: t outside [0,1]");
    const AtomCloud mu_t = family_member(t);
    const auto v = eval_interaction(mu_t, origin, spec);
    F1DemoRow row;
    row.t = t;
    row.v_norm = norm(v);
    row.wp_bound = s * std::pow(t, 1.0 / p);
    row.wp_measured = t == 0 ? 0 : wasserstein_atoms(mu0, mu_t, p).value;
    row.halo = halo;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace pfwd
