#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pfwd/measure.hpp"

namespace pfwd {

/// Compactly supported interaction kernel. The cone is the default shape:
/// eta(z) = peak * max(0, 1 - |z|/radius), Lipschitz with constant peak/radius.
struct KernelSpec {
  enum class Shape { cone };
  Shape shape = Shape::cone;
  double radius = 1;
  double peak = 1;

  double operator()(double r) const {
    return r >= radius ? 0.0 : peak * (1.0 - r / radius);
  }
  double lipschitz() const { return peak / radius; }
  double sup() const { return peak; }
};

/// Interaction velocity: repulsion from the kernel-weighted center of mass,
/// scaled by f(phi) where phi is the kernel-weighted mass seen from x.
/// f(x) = x^alpha (alpha >= 1), or f constant one, which breaks the
/// regularity hypotheses (see f1_discontinuity_demo).
struct InteractionSpec {
  KernelSpec kernel;
  double alpha = 1;
  bool constant_weight = false;

  double weight(double phi) const {
    if (constant_weight) return 1.0;
    if (alpha == 1.0) return phi;
    return std::pow(phi, alpha);
  }
};

/// Small registry of desired (goal-driven) fields with closed-form constants.
struct DesiredField {
  enum class Kind { zero, constant, to_target };
  Kind kind = Kind::zero;
  std::vector<double> u;       // constant vector
  std::vector<double> target;  // attraction point
  double gain = 1;             // v = gain*(target - x), speed clamped at vmax
  double vmax = 1;

  void eval(std::span<const double> x, std::span<double> out) const;
  double lipschitz_bound() const;
  double sup_bound() const;
  bool is_zero() const { return kind == Kind::zero; }
};

struct HypothesisConstants {
  double L = 0;  // spatial Lipschitz constant
  double M = 0;  // sup bound
  double K = 0;  // Lipschitz constant of mu -> v[mu] in W_1 (hence all W_p)
};

struct VelocityModel {
  DesiredField desired;
  std::optional<InteractionSpec> interaction;
};

/// Certified constants for f(x) = x^alpha: M_i = R*peak^alpha,
/// L_i = K = peak^(alpha-1)*R*L_eta, combined additively with the desired
/// field. Constant-weight mode has no finite K and is rejected.
HypothesisConstants certify_constants(const VelocityModel& model);

std::vector<double> eval_interaction(const AtomCloud& mu, std::span<const double> x,
                                     const InteractionSpec& spec);
std::vector<double> eval_velocity(const AtomCloud& mu, std::span<const double> x,
                                  const VelocityModel& model);

struct LatticeSpec {
  Box box;
  int points_per_axis = 8;
};

/// Largest observed ratio sup_x |v[mu](x) - v[nu](x)| / W_p(mu, nu) over the
/// sample pairs, with sup_x taken over the lattice.
double empirical_K(const VelocityModel& model, const std::vector<std::pair<Measure, Measure>>& pairs,
                   double p, int q, const LatticeSpec& lattice);

struct F1DemoRow {
  double t;
  double v_norm;       // |v[mu_t](0)|
  double wp_bound;     // s * t^(1/p)
  double wp_measured;  // W_p(mu_0, mu_t) on the quadrature clouds
  double halo;
};

/// Two-part family (shrinking mass in a near ball, the rest in a far compact
/// set) showing that with f constant the map mu -> v[mu](0) jumps while
/// W_p(mu_0, mu_t) -> 0.
struct F1DemoReport {
  double r, eps, radius, s;
  std::vector<F1DemoRow> rows;
};

F1DemoReport f1_discontinuity_demo(double r, double eps, double radius,
                                   std::span<const double> t_list, double p, int q_ball,
                                   int q_far);

}  // namespace pfwd
