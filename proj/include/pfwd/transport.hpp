#pragma once

#include <cstdint>
#include <vector>

#include "pfwd/measure.hpp"
#include "pfwd/trajectory.hpp"

namespace pfwd {

/// Feasible transport plan between two atom clouds; entries hold only the
/// nonzero flows. cost_p is the achieved sum of mass * |x-y|^p.
struct TransportPlan {
  struct Entry {
    std::int32_t source;
    std::int32_t target;
    double mass;
  };
  std::vector<Entry> entries;
  double cost_p = 0;
};

struct WassersteinResult {
  double value = 0;  // cost_p^(1/p)
  TransportPlan plan;
  double p = 1;
};

/// Exact discrete W_p between atom clouds, by network simplex on the complete
/// bipartite instance. The returned plan is optimal; dual feasibility is
/// certified internally after termination.
WassersteinResult wasserstein_atoms(const AtomCloud& a, const AtomCloud& b, double p);

/// Permutation brute force. Valid oracle for equal-mass clouds of equal size
/// (optimal plans are permutations there); k <= 8.
double wasserstein_bruteforce(const AtomCloud& a, const AtomCloud& b, double p);

/// Quantile-coupling oracle, exact in one dimension for convex costs.
double wasserstein_1d(const AtomCloud& a, const AtomCloud& b, double p);

struct MeasureDistance {
  double estimate = 0;  // W_p between the quadrature clouds
  double halo = 0;      // certified discretization slack, both sides combined
};

/// W_p estimate between arbitrary measures via quadrature at order q.
/// The true distance lies in [max(0, estimate - halo), estimate + halo].
MeasureDistance wasserstein_measures(const Measure& a, const Measure& b, double p, int q);

/// sup over shared timestamps of the per-frame W_p estimate.
double trajectory_distance(const Trajectory& a, const Trajectory& b, double p, int q);

struct TimedDistance {
  double time;
  double estimate;
  double halo;
};
std::vector<TimedDistance> trajectory_distance_profile(const Trajectory& a, const Trajectory& b,
                                                       double p, int q);

inline constexpr std::size_t kMaxAtomsPerSide = 20000;

}  // namespace pfwd
