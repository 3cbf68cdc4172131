#pragma once

#include <string>
#include <vector>

#include "pfwd/bounds.hpp"
#include "pfwd/config.hpp"
#include "pfwd/trajectory.hpp"

namespace pfwd {

struct StudyLevel {
  double dx, dt;
  double error;     // d(level trajectory, reference)
  double halo;      // estimation slack carried alongside
  double a_priori;  // combined scheme bound at this level (+inf if gated off)
  bool hypothesis_ok;
};

struct ConvergenceStudy {
  int scheme_kind = 4;
  std::vector<StudyLevel> levels;
  double fitted_order = 0;  // slope of log(error) vs log(dx)
  double r2 = 0;
  double reference_dx = 0, reference_dt = 0;
  int reference_scheme = 4;
};

/// Runs the ladder against a shared refined reference and fits the order.
ConvergenceStudy run_convergence_study(const RunConfig& cfg);

void write_study_csv(const ConvergenceStudy& study, const std::string& path);

/// Randomized flow-bound audit plus measured-vs-a-priori rows per level.
std::vector<BoundReport> audit_bounds(const RunConfig& cfg);

void write_bound_reports_csv(const std::vector<BoundReport>& reports, const std::string& path);

/// Runs the scheme selected by the config (single population, multi
/// population, or multi-scale when atoms are present).
Trajectory run_configured_scheme(const RunConfig& cfg);

// Trajectory directory layout: trajectory.csv (frame, time, mass, bbox)
// plus one measure file per frame (frame_000000.msr; multi-scale frames add
// frame_000000.atoms.msr).
void write_trajectory(const Trajectory& traj, const std::string& dir);
Trajectory read_trajectory(const std::string& dir);

struct LeastSquaresFit {
  double slope = 0, intercept = 0, r2 = 0;
};
LeastSquaresFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pfwd
