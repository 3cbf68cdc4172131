#include "pfwd/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfwd/kernels.hpp"

namespace pfwd {

namespace {

bool should_record(int step, int total, int every) {
  return step % every == 0 || step == total;
}

GridSpec make_grid(int dim, double dx, const std::vector<double>& origin) {
  if (!(dx > 0)) throw std::invalid_argument("scheme: dx must be positive");
  return GridSpec(dim, dx, origin);
}

SquareCloud squares_from_density(const GriddedDensity& g) {
  SquareCloud out;
  out.dim = g.grid.dim;
  out.side = g.grid.cell_side;
  std::vector<double> c(g.grid.dim);
  for (const auto& [cell, mass] : g.cells) {
    g.grid.cell_center(cell, c);
    out.push_back(c, mass);
  }
  if (out.size() > kMaxCells) throw std::invalid_argument("scheme: cell cap exceeded");
  return out;
}

}  // namespace

Trajectory run_scheme1_particles(const AtomCloud& mu0, const VelocityModel& model,
                                 const SchemeConfig& cfg) {
  cfg.validate();
  if (mu0.size() == 0) throw std::invalid_argument("run_scheme1_particles: empty initial cloud");
  const int steps = cfg.steps();
  const int dim = mu0.dim;

  Trajectory traj;
  traj.scheme = "scheme1";
  traj.config = cfg;
  AtomCloud state = mu0;
  traj.frames.push_back({0.0, state});
  for (int i = 0; i < steps; ++i) {
    const AtomCloud frozen = state;  // field v[mu_{i dt}] frozen on the interval
    advance_points_rk4(frozen, model, cfg.dt, cfg.substeps, state.pos, dim);
    if (should_record(i + 1, steps, cfg.record_every))
      traj.frames.push_back({(i + 1) * cfg.dt, state});
  }
  return traj;
}

SquareCloud step_scheme4(const SquareCloud& state, const VelocityModel& model, double dt,
                         int quad_order) {
  const AtomCloud cloud = to_quadrature(state, quad_order);
  std::vector<double> v;
  eval_velocity_batch(cloud, state.centers, state.dim, model, v);
  SquareCloud next = state;
  for (std::size_t i = 0; i < next.centers.size(); ++i) next.centers[i] += dt * v[i];
  return next;
}

Trajectory run_scheme4(const Measure& mu0, const VelocityModel& model, const SchemeConfig& cfg,
                       std::vector<double> grid_origin) {
  cfg.validate();
  const int dim = measure_dim(mu0);
  const GridSpec grid = make_grid(dim, cfg.dx, grid_origin);
  SquareCloud state = squares_from_density(grid_project(mu0, grid));
  const int steps = cfg.steps();

  Trajectory traj;
  traj.scheme = "scheme4";
  traj.config = cfg;
  traj.frames.push_back({0.0, state});
  for (int i = 0; i < steps; ++i) {
    state = step_scheme4(state, model, cfg.dt, cfg.quad_order);
    if (should_record(i + 1, steps, cfg.record_every))
      traj.frames.push_back({(i + 1) * cfg.dt, state});
  }
  return traj;
}

GriddedDensity step_scheme5(const GriddedDensity& state, const VelocityModel& model, double dt,
                            int quad_order) {
  SquareCloud squares = squares_from_density(state);
  squares = step_scheme4(squares, model, dt, quad_order);
  return grid_project(squares, state.grid);
}

Trajectory run_scheme5(const Measure& mu0, const VelocityModel& model, const SchemeConfig& cfg,
                       std::vector<double> grid_origin) {
  cfg.validate();
  const int dim = measure_dim(mu0);
  const GridSpec grid = make_grid(dim, cfg.dx, grid_origin);
  GriddedDensity state = grid_project(mu0, grid);
  const int steps = cfg.steps();

  Trajectory traj;
  traj.scheme = "scheme5";
  traj.config = cfg;
  traj.frames.push_back({0.0, state});
  for (int i = 0; i < steps; ++i) {
    state = step_scheme5(state, model, cfg.dt, cfg.quad_order);
    if (should_record(i + 1, steps, cfg.record_every))
      traj.frames.push_back({(i + 1) * cfg.dt, state});
  }
  return traj;
}

namespace {

// Weighted union of the populations' quadrature clouds, as seen by one model.
AtomCloud weighted_union(const std::vector<AtomCloud>& quads, const std::vector<double>& weights) {
  AtomCloud out;
  out.dim = quads.front().dim;
  for (std::size_t pop = 0; pop < quads.size(); ++pop) {
    const double w = pop < weights.size() ? weights[pop] : 0.0;
    if (w == 0) continue;
    for (std::size_t j = 0; j < quads[pop].size(); ++j)
      out.push_back(quads[pop].position(j), w * quads[pop].mass[j]);
  }
  return out;
}

}  // namespace

std::vector<Trajectory> run_multi_population(const PopulationVector& mu0,
                                             const MultiPopulationConfig& cfg,
                                             std::vector<double> grid_origin) {
  const std::size_t npop = mu0.populations.size();
  if (npop == 0 || cfg.models.size() != npop)
    throw std::invalid_argument("run_multi_population: need one model per population");
  cfg.scheme.validate();
  if (cfg.scheme_kind != 4 && cfg.scheme_kind != 5)
    throw std::invalid_argument("run_multi_population: scheme kind must be 4 or 5");
  const int dim = measure_dim(mu0.populations.front());
  for (const auto& m : mu0.populations)
    if (measure_dim(m) != dim) throw std::invalid_argument("run_multi_population: dimension mismatch");

  const GridSpec grid = make_grid(dim, cfg.scheme.dx, grid_origin);
  const int steps = cfg.scheme.steps();

  std::vector<SquareCloud> lag(npop);
  std::vector<GriddedDensity> eul(npop);
  for (std::size_t i = 0; i < npop; ++i) {
    GriddedDensity d = grid_project(mu0.populations[i], grid);
    if (cfg.scheme_kind == 4)
      lag[i] = squares_from_density(d);
    else
      eul[i] = std::move(d);
  }

  std::vector<Trajectory> out(npop);
  auto record = [&](double time) {
    for (std::size_t i = 0; i < npop; ++i) {
      if (cfg.scheme_kind == 4)
        out[i].frames.push_back({time, lag[i]});
      else
        out[i].frames.push_back({time, eul[i]});
    }
  };
  for (std::size_t i = 0; i < npop; ++i) {
    out[i].scheme = cfg.scheme_kind == 4 ? "scheme4-multi" : "scheme5-multi";
    out[i].config = cfg.scheme;
  }
  record(0.0);

  std::vector<AtomCloud> quads(npop);
  for (int step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < npop; ++i)
      quads[i] = cfg.scheme_kind == 4 ? to_quadrature(lag[i], cfg.scheme.quad_order)
                                      : to_quadrature(eul[i], cfg.scheme.quad_order);
    // all velocities read the frame-i vector before anything moves
    std::vector<std::vector<double>> vel(npop);
    for (std::size_t i = 0; i < npop; ++i) {
      const AtomCloud seen = weighted_union(quads, cfg.models[i].weights);
      if (cfg.scheme_kind == 4) {
        eval_velocity_batch(seen, lag[i].centers, dim, cfg.models[i].base, vel[i]);
      } else {
        SquareCloud sq = squares_from_density(eul[i]);
        eval_velocity_batch(seen, sq.centers, dim, cfg.models[i].base, vel[i]);
      }
    }
    for (std::size_t i = 0; i < npop; ++i) {
      if (cfg.scheme_kind == 4) {
        for (std::size_t c = 0; c < lag[i].centers.size(); ++c)
          lag[i].centers[c] += cfg.scheme.dt * vel[i][c];
      } else {
        SquareCloud sq = squares_from_density(eul[i]);
        for (std::size_t c = 0; c < sq.centers.size(); ++c)
          sq.centers[c] += cfg.scheme.dt * vel[i][c];
        eul[i] = grid_project(sq, grid);
      }
    }
    if (should_record(step + 1, steps, cfg.scheme.record_every)) record((step + 1) * cfg.scheme.dt);
  }
  return out;
}

Trajectory run_multiscale(const MultiScaleMeasure& m0, const VelocityModel& model,
                          const SchemeConfig& cfg, int ac_scheme,
                          std::vector<double> grid_origin) {
  cfg.validate();
  if (ac_scheme != 4 && ac_scheme != 5)
    throw std::invalid_argument("run_multiscale: AC scheme must be 4 or 5");
  const int dim = measure_dim(Measure(m0));
  if (m0.atoms.size() > 0 && m0.atoms.dim != dim)
    throw std::invalid_argument("run_multiscale: dimension mismatch between parts");
  const GridSpec grid = make_grid(dim, cfg.dx, grid_origin);
  const int steps = cfg.steps();

  MultiScaleMeasure state;
  state.atoms = m0.atoms;
  {
    GriddedDensity d = std::visit([&](const auto& ac) { return grid_project(ac, grid); }, m0.ac);
    if (ac_scheme == 4)
      state.ac = squares_from_density(d);
    else
      state.ac = std::move(d);
  }

  Trajectory traj;
  traj.scheme = ac_scheme == 4 ? "multiscale4" : "multiscale5";
  traj.config = cfg;
  traj.frames.push_back({0.0, state});

  for (int step = 0; step < steps; ++step) {
    AtomCloud seen = std::visit([&](const auto& ac) { return to_quadrature(ac, cfg.quad_order); },
                                state.ac);
    seen.append(state.atoms);

    // centers and atom positions all advance against the same frozen cloud
    std::vector<double> vel;
    if (ac_scheme == 4) {
      auto& sq = std::get<SquareCloud>(state.ac);
      eval_velocity_batch(seen, sq.centers, dim, model, vel);
      std::vector<double> atom_vel;
      eval_velocity_batch(seen, state.atoms.pos, dim, model, atom_vel);
      for (std::size_t c = 0; c < sq.centers.size(); ++c) sq.centers[c] += cfg.dt * vel[c];
      for (std::size_t c = 0; c < state.atoms.pos.size(); ++c)
        state.atoms.pos[c] += cfg.dt * atom_vel[c];
    } else {
      auto& den = std::get<GriddedDensity>(state.ac);
      SquareCloud sq = squares_from_density(den);
      eval_velocity_batch(seen, sq.centers, dim, model, vel);
      std::vector<double> atom_vel;
      eval_velocity_batch(seen, state.atoms.pos, dim, model, atom_vel);
      for (std::size_t c = 0; c < sq.centers.size(); ++c) sq.centers[c] += cfg.dt * vel[c];
      for (std::size_t c = 0; c < state.atoms.pos.size(); ++c)
        state.atoms.pos[c] += cfg.dt * atom_vel[c];
      den = grid_project(sq, grid);
    }
    if (should_record(step + 1, steps, cfg.record_every))
      traj.frames.push_back({(step + 1) * cfg.dt, state});
  }
  return traj;
}

Trajectory reference_solution(const Measure& mu0, const VelocityModel& model,
                              const SchemeConfig& cfg, int refine, int scheme_kind,
                              std::vector<double> grid_origin) {
  if (refine < 2) throw std::invalid_argument("reference_solution: refine must be >= 2");
  SchemeConfig rcfg = cfg;
  rcfg.dt = cfg.dt / refine;
  rcfg.record_every = cfg.record_every * refine;
  if (scheme_kind == 4) {
    rcfg.dx = cfg.dx / refine;
    return run_scheme4(mu0, model, rcfg, std::move(grid_origin));
  }
  if (scheme_kind == 1) {
    rcfg.quad_order = cfg.quad_order * refine;
    const GridSpec grid(measure_dim(mu0), cfg.dx, grid_origin);
    const AtomCloud particles = to_quadrature(grid_project(mu0, grid), rcfg.quad_order);
    return run_scheme1_particles(particles, model, rcfg);
  }
  throw std::invalid_argument("reference_solution: scheme kind must be 1 or 4");
}

}  // namespace pfwd
