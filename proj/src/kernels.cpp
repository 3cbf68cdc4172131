#include "pfwd/kernels.hpp"

#include <algorithm>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pfwd {

namespace {

// Interaction term at one point from partial sums: phi = sum w_j eta(x - y_j),
// barycenter numerator psi = sum w_j y_j eta(x - y_j). phi == 0 is compared
// exactly; all summands are nonnegative so no cancellation can occur.
void finish_velocity(std::span<const double> x, double phi, std::span<const double> psi,
                     const VelocityModel& model, std::span<double> out) {
  const int n = static_cast<int>(x.size());
  if (model.desired.is_zero()) {
    std::fill(out.begin(), out.end(), 0.0);
  } else {
    model.desired.eval(x, out);
  }
  if (!model.interaction || phi == 0.0) return;
  const double f = model.interaction->weight(phi);
  for (int d = 0; d < n; ++d) out[d] += (x[d] - psi[d] / phi) * f;
}

}  // namespace

void eval_velocity_batch_reference(const AtomCloud& mu, std::span<const double> queries, int dim,
                                   const VelocityModel& model, std::vector<double>& out) {
  const std::size_t nq = queries.size() / dim;
  out.assign(queries.size(), 0.0);
  std::array<double, kMaxDim> psi{};
  for (std::size_t qi = 0; qi < nq; ++qi) {
    const std::span<const double> x = queries.subspan(qi * dim, dim);
    double phi = 0;
    psi.fill(0);
    if (model.interaction) {
      for (std::size_t j = 0; j < mu.size(); ++j) {
        const auto y = mu.position(j);
        const double eta = model.interaction->kernel(dist(x, y));
        if (eta == 0) continue;
        const double w = mu.mass[j] * eta;
        phi += w;
        for (int d = 0; d < dim; ++d) psi[d] += w * y[d];
      }
    }
    finish_velocity(x, phi, std::span<const double>(psi.data(), dim), model,
                    std::span<double>(out.data() + qi * dim, dim));
  }
}

BinnedCloud::BinnedCloud(const AtomCloud& mu, double bin_side)
    : mu_(&mu), side_(bin_side), dim_(mu.dim) {
  buckets_.reserve(mu.size());
  CellIndex c;
  c.dim = dim_;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto y = mu.position(j);
    for (int d = 0; d < dim_; ++d)
      c.idx[d] = static_cast<std::int64_t>(std::floor(y[d] / side_));
    buckets_[c].push_back(static_cast<int>(j));
  }
}

void eval_velocity_batch(const BinnedCloud& binned, std::span<const double> queries, int dim,
                         const VelocityModel& model, std::vector<double>& out) {
  const AtomCloud& mu = binned.cloud();
  const std::size_t nq = queries.size() / dim;
  out.assign(queries.size(), 0.0);

#pragma omp parallel for schedule(static)
  for (long long qi = 0; qi < static_cast<long long>(nq); ++qi) {
    const std::span<const double> x = queries.subspan(qi * dim, dim);
    double phi = 0;
    std::array<double, kMaxDim> psi{};
    if (model.interaction) {
      binned.for_each_near(x, [&](int j) {
        const auto y = mu.position(j);
        const double eta = model.interaction->kernel(dist(x, y));
        if (eta == 0) return;
        const double w = mu.mass[j] * eta;
        phi += w;
        for (int d = 0; d < dim; ++d) psi[d] += w * y[d];
      });
    }
    finish_velocity(x, phi, std::span<const double>(psi.data(), dim), model,
                    std::span<double>(out.data() + qi * dim, dim));
  }
}

void eval_velocity_batch(const AtomCloud& mu, std::span<const double> queries, int dim,
                         const VelocityModel& model, std::vector<double>& out) {
  if (!model.interaction || mu.size() == 0) {
    // no kernel sums to bucket
    eval_velocity_batch_reference(mu, queries, dim, model, out);
    return;
  }
  BinnedCloud binned(mu, model.interaction->kernel.radius);
  eval_velocity_batch(binned, queries, dim, model, out);
}

void advance_points_rk4(const AtomCloud& frozen, const VelocityModel& model, double t,
                        int substeps, std::vector<double>& points, int dim) {
  const double h = t / substeps;
  const std::size_t n = points.size();
  std::vector<double> k1, k2, k3, k4, stage(n);

  std::optional<BinnedCloud> binned;
  if (model.interaction && frozen.size() > 0)
    binned.emplace(frozen, model.interaction->kernel.radius);
  auto eval = [&](std::span<const double> q, std::vector<double>& out) {
    if (binned)
      eval_velocity_batch(*binned, q, dim, model, out);
    else
      eval_velocity_batch(frozen, q, dim, model, out);
  };

  for (int s = 0; s < substeps; ++s) {
    eval(points, k1);
    for (std::size_t i = 0; i < n; ++i) stage[i] = points[i] + 0.5 * h * k1[i];
    eval(stage, k2);
    for (std::size_t i = 0; i < n; ++i) stage[i] = points[i] + 0.5 * h * k2[i];
    eval(stage, k3);
    for (std::size_t i = 0; i < n; ++i) stage[i] = points[i] + h * k3[i];
    eval(stage, k4);
    for (std::size_t i = 0; i < n; ++i)
      points[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
}

}  // namespace pfwd
