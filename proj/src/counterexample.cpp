#include "pfwd/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfwd/transport.hpp"

namespace pfwd {

double Staircase::mass() const {
  std::vector<double> parts;
  parts.reserve(cols.size());
  for (const auto& c : cols) parts.push_back(c.density * c.side * c.side);
  return pairwise_sum(parts);
}

AtomCloud Staircase::quadrature(int q) const {
  if (q < 1) throw std::invalid_argument("Staircase::quadrature: q must be >= 1");
  AtomCloud out;
  out.dim = 2;
  for (const auto& c : cols) {
    const double w = c.density * c.side * c.side / (q * static_cast<double>(q));
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        const std::array<double, 2> node{c.x0 + (i + 0.5) / q * c.side,
                                         y_top - c.side + (j + 0.5) / q * c.side};
        out.push_back(node, w);
      }
    }
  }
  return out;
}

double Staircase::quadrature_halo(int q, double p) const {
  // per-column redistribution, combined by splitting the measure
  double acc = 0;
  for (const auto& c : cols)
    acc += c.density * c.side * c.side * std::pow(std::sqrt(2.0) * c.side / q, p);
  return std::pow(acc, 1.0 / p);
}

Staircase Staircase::shifted_up(double dy) const {
  Staircase s = *this;
  s.y_top += dy;
  return s;
}

bool operator==(const Staircase& a, const Staircase& b) {
  if (a.y_top != b.y_top || a.cols.size() != b.cols.size()) return false;
  for (std::size_t i = 0; i < a.cols.size(); ++i)
    if (a.cols[i].x0 != b.cols[i].x0 || a.cols[i].side != b.cols[i].side ||
        a.cols[i].density != b.cols[i].density)
      return false;
  return true;
}

double NuFamily::side(int i) const { return std::pow(4.0, -i); }
double NuFamily::density(int i) const { return 0.5 * std::pow(8.0, i); }

double NuFamily::column_x0(int i) const {
  double x = 0;
  for (int j = 0; j < i; ++j) x += side(j);
  return x;
}

double NuFamily::truncated_mass() const { return 1.0 - std::pow(2.0, -(truncation + 1)); }

Staircase NuFamily::eval(double t) const {
  if (!(t >= 0 && t <= 1)) throw std::invalid_argument("NuFamily::eval: t outside [0, 1]");
  Staircase s;
  s.y_top = 1.0 + t * t;
  double x = 0;
  for (int i = 0; i <= truncation; ++i) {
    s.cols.push_back({x, side(i), density(i)});
    x += side(i);
  }
  return s;
}

namespace {

constexpr double kRectX0 = 0.0, kRectX1 = 4.0 / 3.0, kRectY0 = 1.0, kRectY1 = 2.0;

double box_overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

double F_functional(const Staircase& s) {
  double acc = 0;
  for (const auto& c : s.cols) {
    const double wx = box_overlap_1d(c.x0, c.x0 + c.side, kRectX0, kRectX1);
    const double wy = box_overlap_1d(s.y_top - c.side, s.y_top, kRectY0, kRectY1);
    acc += c.density * wx * wy;
  }
  return acc;
}

double F_functional(const Measure& m) {
  if (measure_dim(m) != 2) throw std::invalid_argument("F_functional: dimension must be 2");
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AtomCloud>) {
          double acc = 0;
          for (std::size_t i = 0; i < v.size(); ++i) {
            const auto p = v.position(i);
            if (p[0] >= kRectX0 && p[0] < kRectX1 && p[1] >= kRectY0 && p[1] < kRectY1)
              acc += v.mass[i];
          }
          return acc;
        } else if constexpr (std::is_same_v<T, SquareCloud>) {
          double acc = 0;
          const double h = v.side / 2, vol = v.side * v.side;
          for (std::size_t i = 0; i < v.size(); ++i) {
            const auto c = v.center(i);
            acc += v.mass[i] / vol * box_overlap_1d(c[0] - h, c[0] + h, kRectX0, kRectX1) *
                   box_overlap_1d(c[1] - h, c[1] + h, kRectY0, kRectY1);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, GriddedDensity>) {
          double acc = 0;
          const double dx = v.grid.cell_side, vol = dx * dx;
          std::vector<double> c(2);
          for (const auto& [cell, mass] : v.cells) {
            v.grid.cell_center(cell, c);
            acc += mass / vol * box_overlap_1d(c[0] - dx / 2, c[0] + dx / 2, kRectX0, kRectX1) *
                   box_overlap_1d(c[1] - dx / 2, c[1] + dx / 2, kRectY0, kRectY1);
          }
          return acc;
        } else {
          double acc = F_functional(std::visit([](const auto& ac) { return Measure(ac); }, v.ac));
          return acc + F_functional(Measure(v.atoms));
        }
      },
      m);
}

double f_map(double xi, const NuFamily& fam) {
  const double top = F_functional(fam.eval(1.0));
  if (xi < -1e-12 || xi > top + 1e-12) throw std::invalid_argument("f_map: xi out of range");
  if (xi <= 0) return 0;
  if (xi >= top) return 2;
  double lo = 0, hi = 1;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    const double val = F_functional(fam.eval(mid));
    if (std::abs(val - xi) <= 1e-12 || hi - lo < 1e-15) return 2 * mid;
    (val < xi ? lo : hi) = mid;
  }
}

std::vector<double> v_l1(const Staircase& s, const NuFamily& fam) {
  const double top = F_functional(fam.eval(1.0));
  const double xi = std::clamp(F_functional(s), 0.0, top);
  return {0.0, f_map(xi, fam)};
}

std::vector<double> v_l1(const Measure& m, const NuFamily& fam) {
  const double top = F_functional(fam.eval(1.0));
  const double xi = std::clamp(F_functional(m), 0.0, top);
  return {0.0, f_map(xi, fam)};
}

double l1_staircase(const Staircase& a, const Staircase& b) {
  if (a.cols.size() != b.cols.size()) throw std::invalid_argument("l1_staircase: different families");
  double acc = 0;
  for (std::size_t i = 0; i < a.cols.size(); ++i) {
    const auto& ca = a.cols[i];
    const auto& cb = b.cols[i];
    if (ca.x0 != cb.x0 || ca.side != cb.side || ca.density != cb.density)
      throw std::invalid_argument("l1_staircase: different families");
    // two equal squares offset vertically: symmetric difference area
    const double delta = std::abs(a.y_top - b.y_top);
    acc += 2.0 * ca.density * ca.side * std::min(delta, ca.side);
  }
  return acc;
}

std::vector<L1LipschitzRow> verify_l1_lipschitz(const NuFamily& fam,
                                                std::span<const std::pair<double, double>> pairs) {
  std::vector<L1LipschitzRow> rows;
  for (const auto& [s, t] : pairs) {
    if (!(0 <= s && s < t && t <= 1))
      throw std::invalid_argument("verify_l1_lipschitz: need 0 <= s < t <= 1");
    L1LipschitzRow r;
    r.s = s;
    r.t = t;
    r.lhs = 2 * (t - s);
    r.rhs = 2 * l1_staircase(fam.eval(t), fam.eval(s));
    r.pass = r.lhs <= r.rhs + 1e-9;
    rows.push_back(r);
  }
  return rows;
}

std::vector<WpBlowupRow> verify_wp_blowup(const NuFamily& fam, double p, int q,
                                          std::span<const std::pair<double, double>> pairs) {
  std::vector<WpBlowupRow> rows;
  for (const auto& [s, t] : pairs) {
    if (!(0 <= s && s < t && t <= 1))
      throw std::invalid_argument("verify_wp_blowup: need 0 <= s < t <= 1");
    const Staircase nt = fam.eval(t), ns = fam.eval(s);
    WpBlowupRow r;
    r.s = s;
    r.t = t;
    r.wp_exact = t * t - s * s;
    r.wp_measured = wasserstein_atoms(nt.quadrature(q), ns.quadrature(q), p).value;
    r.halo = nt.quadrature_halo(q, p) + ns.quadrature_halo(q, p);
    r.ratio = 2 / (t + s);
    r.pass = std::abs(r.wp_measured - r.wp_exact) <= r.halo + 1e-9;
    rows.push_back(r);
  }
  return rows;
}

NonUniquenessReport demonstrate_nonuniqueness(const NuFamily& fam, double T, double dt) {
  NonUniquenessReport rep;
  const int steps = static_cast<int>(std::llround(T / dt));
  if (steps < 1 || std::abs(steps * dt - T) > 1e-9 * T)
    throw std::invalid_argument("demonstrate_nonuniqueness: T/dt not an integer");
  rep.steps = steps;

  // Stationary trajectory: the field at nu_0 vanishes, so stepping the
  // staircase by dt * v must return the same bits every time.
  const Staircase nu0 = fam.eval(0.0);
  Staircase state = nu0;
  bool stationary = true;
  for (int i = 0; i < steps; ++i) {
    const auto v = v_l1(state, fam);
    state = state.shifted_up(dt * v[1]);
    stationary = stationary && state == nu0;
  }
  rep.stationary_fixed_point = stationary;

  // Moving solution: nu_t coincides with nu_0 raised by t^2 (columns
  // compared field by field), and the field along the path is (0, 2t).
  bool shift_ok = true, vel_ok = true;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * dt;
    const Staircase nt = fam.eval(t);
    shift_ok = shift_ok && nt == nu0.shifted_up(t * t);
    const auto v = v_l1(nt, fam);
    vel_ok = vel_ok && std::abs(v[0]) == 0 && std::abs(v[1] - 2 * t) <= 1e-9;
  }
  rep.shift_identity = shift_ok;
  rep.velocity_along_path = vel_ok;
  return rep;
}

}  // namespace pfwd
