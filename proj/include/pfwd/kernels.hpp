#pragma once

#include <cmath>
#include <span>
#include <unordered_map>
#include <vector>

#include "pfwd/velocity.hpp"

namespace pfwd {

// Batch evaluation of v[mu] at many query points. This is the hot inner loop
// of every scheme step: an O(queries x atoms) kernel sum. Two implementations
// share the same contract:
//
//  - eval_velocity_batch_reference: plain serial double loop, kept as the
//    correctness baseline for tests and the benchmark.
//  - eval_velocity_batch: atoms bucketed by kernel radius, OpenMP-parallel
//    over query points. Per query the buckets are visited in a fixed
//    lexicographic order, so results do not depend on the thread count.
//
// `queries` is query-major flat storage (size count*dim); `out` is resized to
// match and holds the velocities in the same layout.

void eval_velocity_batch_reference(const AtomCloud& mu, std::span<const double> queries, int dim,
                                   const VelocityModel& model, std::vector<double>& out);

void eval_velocity_batch(const AtomCloud& mu, std::span<const double> queries, int dim,
                         const VelocityModel& model, std::vector<double>& out);

/// Reusable bucket structure for repeated evaluations against one frozen cloud.
class BinnedCloud {
 public:
  BinnedCloud(const AtomCloud& mu, double bin_side);

  /// Calls fn(atom_index) for every atom within the 3^n bucket neighborhood
  /// of x, in a deterministic order.
  template <class F>
  void for_each_near(std::span<const double> x, F&& fn) const {
    CellIndex base;
    base.dim = dim_;
    for (int d = 0; d < dim_; ++d)
      base.idx[d] = static_cast<std::int64_t>(std::floor(x[d] / side_));
    CellIndex c = base;
    std::array<int, kMaxDim> off{};
    off.fill(-1);
    while (true) {
      for (int d = 0; d < dim_; ++d) c.idx[d] = base.idx[d] + off[d];
      if (auto it = buckets_.find(c); it != buckets_.end())
        for (int a : it->second) fn(a);
      int d = 0;
      while (d < dim_ && ++off[d] > 1) {
        off[d] = -1;
        ++d;
      }
      if (d == dim_) break;
    }
  }

  const AtomCloud& cloud() const { return *mu_; }
  double bin_side() const { return side_; }

 private:
  const AtomCloud* mu_;
  double side_;
  int dim_;
  std::unordered_map<CellIndex, std::vector<int>, CellIndexHash> buckets_;
};

void eval_velocity_batch(const BinnedCloud& binned, std::span<const double> queries, int dim,
                         const VelocityModel& model, std::vector<double>& out);

/// Advances flat point storage through the field v[frozen] with `substeps`
/// classical 4th-order steps over an interval of length t.
void advance_points_rk4(const AtomCloud& frozen, const VelocityModel& model, double t,
                        int substeps, std::vector<double>& points, int dim);

}  // namespace pfwd
