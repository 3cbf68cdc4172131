#pragma once

#include <span>
#include <vector>

#include "pfwd/measure.hpp"

namespace pfwd {

/// Staircase of axis-aligned square columns hanging from a common top line.
/// Column i occupies [x0_i, x0_i + side_i] x [y_top - side_i, y_top] with
/// constant density. Geometry kept in this anchored form so that vertical
/// shifts are bitwise-exact comparisons on (x0, side, y_top, density).
struct Staircase {
  struct Column {
    double x0;
    double side;
    double density;
  };
  std::vector<Column> cols;
  double y_top = 1;

  double mass() const;
  AtomCloud quadrature(int q) const;
  double quadrature_halo(int q, double p) const;
  Staircase shifted_up(double dy) const;

  friend bool operator==(const Staircase& a, const Staircase& b);
};

/// The dyadic family: sides s_i = 4^-i, densities m_i = 8^i / 2, columns
/// chained left to right, upper sides on the line y = 1 + t^2, truncated at
/// i <= N. Truncated total mass is 1 - 2^-(N+1) in closed form.
struct NuFamily {
  int truncation = 20;

  double side(int i) const;
  double density(int i) const;
  double column_x0(int i) const;
  double truncated_mass() const;
  Staircase eval(double t) const;  // t in [0, 1]
};

/// Mass inside the fixed rectangle [0, 4/3] x [1, 2], by exact
/// rectangle-intersection geometry.
double F_functional(const Staircase& s);
double F_functional(const Measure& m);

/// Inverse link: returns 2t where t solves F(nu_t) = xi, by bisection on
/// [0, 1]; F(nu_t) is continuous and strictly increasing in t.
double f_map(double xi, const NuFamily& fam);

/// The constant-in-space field (0, f(clamp(F(mu)))).
std::vector<double> v_l1(const Staircase& s, const NuFamily& fam);
std::vector<double> v_l1(const Measure& m, const NuFamily& fam);

/// Exact L1 distance between two members of the family (same columns, shifted
/// top lines): per column the symmetric difference is a pair of rectangles.
double l1_staircase(const Staircase& a, const Staircase& b);

struct L1LipschitzRow {
  double s, t;
  double lhs;  // |v[nu_t] - v[nu_s]| = 2(t - s)
  double rhs;  // 2 * L1 distance
  bool pass;
};
std::vector<L1LipschitzRow> verify_l1_lipschitz(const NuFamily& fam,
                                                std::span<const std::pair<double, double>> pairs);

struct WpBlowupRow {
  double s, t;
  double wp_measured;
  double wp_exact;  // t^2 - s^2 (vertical-shift coupling)
  double halo;
  double ratio;  // 2(t-s) / (t^2 - s^2) = 2/(t+s)
  bool pass;
};
std::vector<WpBlowupRow> verify_wp_blowup(const NuFamily& fam, double p, int q,
                                          std::span<const std::pair<double, double>> pairs);

struct NonUniquenessReport {
  bool stationary_fixed_point = false;  // constant trajectory, bit-exact over all steps
  bool shift_identity = false;          // nu_t equals nu_0 raised by t^2, exact geometry
  bool velocity_along_path = false;     // v[nu_t] = (0, 2t) within 1e-9
  int steps = 0;
};
NonUniquenessReport demonstrate_nonuniqueness(const NuFamily& fam, double T, double dt);

}  // namespace pfwd
