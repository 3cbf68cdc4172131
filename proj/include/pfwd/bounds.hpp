#pragma once

#include <span>
#include <string>
#include <vector>

#include "pfwd/measure.hpp"
#include "pfwd/velocity.hpp"

namespace pfwd {

// Closed-form evaluation of the a-priori flow and scheme estimates. The L and
// K degenerate cases use the analytic limits of the formulas; overflowing
// exponents yield +infinity.

/// e^((p+1)/p * L * t)
double flow_contraction(double p, double L, double t);

/// M * t
double flow_displacement(double M, double t);

struct GapCoefficients {
  double on_w;   // multiplies the initial-distance term
  double on_dv;  // multiplies the field-gap term (mass-scaled)
};

/// Coefficients (e^((p+1)/p*Lt), mass^(1/p) * e^(Lt/p)(e^(Lt)-1)/L); the
/// second tends to t as L -> 0.
GapCoefficients two_field_gap(double p, double L, double t, double mass = 1);

/// mass^(1/p) * sqrt(n) * dx
double projection_bound(int n, double dx, double mass, double p);

/// (2e)^ceil(t * max(2L, 8K))
double stability_constant(double t, double L, double K);

struct BoundValue {
  double value = 0;
  bool hypothesis_ok = true;
};

/// (K M e (e^(((p+1)LT + 2KT)/p) - 1) / (2L)) * dt, valid for dt <= p/L.
BoundValue scheme1_error(double K, double M, double L, double p, double T, double dt);

/// sqrt(n)*dx*stability_constant(T) plus the time-discretization term.
BoundValue scheme3_error(double K, double M, double L, double p, double T, double dt, int n,
                         double dx);

/// 2 L sqrt(n) (e^(KT e^(LT)) - 1)/K * dx, valid for dt < log(2)/L.
BoundValue scheme4_gap(double L, double K, int n, double T, double dx, double dt);

/// Lagrangian-to-Eulerian gap; the p = 1 and p > 1 formulas are separate and
/// intentionally not reconciled at p -> 1.
BoundValue scheme5_gap(double p, double L, double K, int n, double T, double dx, double dt);

struct BoundReport {
  std::string name;
  double bound = 0;
  double measured = 0;
  double slack = 0;  // estimation halo granted on top of the bound
  bool hypothesis_ok = true;
  bool pass = true;
};

/// Advances random measure pairs by frozen kernel fields and checks the
/// measured W_p estimates against the flow bounds, halo-adjusted. Throws if
/// the model has no certifiable constants.
std::vector<BoundReport> verify_flow_bounds(const VelocityModel& model,
                                            const std::vector<std::pair<Measure, Measure>>& pairs,
                                            std::span<const double> t_grid, double p, int q,
                                            int substeps);

}  // namespace pfwd
