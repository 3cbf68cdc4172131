#pragma once

#include <vector>

#include "pfwd/measure.hpp"
#include "pfwd/trajectory.hpp"
#include "pfwd/velocity.hpp"

namespace pfwd {

/// Semi-discrete particle scheme: on each [i*dt, (i+1)*dt] the field
/// v[mu_{i*dt}] is frozen and every particle follows its flow, integrated
/// with `substeps` classical 4th-order steps. Masses never change.
Trajectory run_scheme1_particles(const AtomCloud& mu0, const VelocityModel& model,
                                 const SchemeConfig& cfg);

/// One step of the discrete Lagrangian scheme: each square translates rigidly
/// by dt times the velocity at its center, evaluated against the whole
/// current cloud (as a quadrature cloud of order quad_order).
SquareCloud step_scheme4(const SquareCloud& state, const VelocityModel& model, double dt,
                         int quad_order);

/// Full run: initial state is one square per nonzero cell of the grid
/// projection of mu0.
Trajectory run_scheme4(const Measure& mu0, const VelocityModel& model, const SchemeConfig& cfg,
                       std::vector<double> grid_origin = {});

/// One Eulerian step: translate every nonzero cell like a Scheme-4 square,
/// then project back onto the fixed grid by exact box overlaps.
GriddedDensity step_scheme5(const GriddedDensity& state, const VelocityModel& model, double dt,
                            int quad_order);

Trajectory run_scheme5(const Measure& mu0, const VelocityModel& model, const SchemeConfig& cfg,
                       std::vector<double> grid_origin = {});

/// Per-population velocity model: the interaction reads the whole population
/// vector through nonnegative per-population weights.
struct PopulationModel {
  VelocityModel base;
  std::vector<double> weights;  // one weight per population
};

struct MultiPopulationConfig {
  std::vector<PopulationModel> models;
  SchemeConfig scheme;
  int scheme_kind = 4;  // 4 or 5
};

/// Synchronized stepping: all velocities are evaluated against the frame-i
/// vector before any population advances.
std::vector<Trajectory> run_multi_population(const PopulationVector& mu0,
                                             const MultiPopulationConfig& cfg,
                                             std::vector<double> grid_origin = {});

/// AC part steps by Scheme 4 or 5; every Dirac atom steps by dt times the
/// frozen-field velocity at its position. The two parts never exchange mass.
Trajectory run_multiscale(const MultiScaleMeasure& m0, const VelocityModel& model,
                          const SchemeConfig& cfg, int ac_scheme,
                          std::vector<double> grid_origin = {});

/// Refined run used as convergence-study ground truth: Scheme 4 with dx/r and
/// dt/r (or Scheme 1 particles at quadrature order quad_order*r with dt/r),
/// recorded so that frames exist at the coarse timestamps.
Trajectory reference_solution(const Measure& mu0, const VelocityModel& model,
                              const SchemeConfig& cfg, int refine, int scheme_kind = 4,
                              std::vector<double> grid_origin = {});

inline constexpr std::size_t kMaxCells = 500000;

}  // namespace pfwd
