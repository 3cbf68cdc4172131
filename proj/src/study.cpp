#include "pfwd/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "pfwd/measure_io.hpp"
#include "pfwd/transport.hpp"

namespace pfwd {

namespace fs = std::filesystem;

LeastSquaresFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("fit_loglog: need at least 3 points");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  LeastSquaresFit f;
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  f.slope = vxy / vxx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vyy == 0 ? 1.0 : vxy * vxy / (vxx * vyy);
  return f;
}

Trajectory run_configured_scheme(const RunConfig& cfg) {
  if (!cfg.populations.empty())
    throw std::invalid_argument("run_configured_scheme: use run_multi_population for populations");
  const GridSpec ingest(cfg.initial.dim() > 0 ? cfg.initial.dim() : 2,
                        cfg.scheme.dx > 0 ? cfg.scheme.dx : 1.0, cfg.grid_origin);
  Measure mu0 = cfg.initial.build(ingest);

  if (cfg.atoms) {
    MultiScaleMeasure ms;
    ms.atoms = *cfg.atoms;
    if (std::holds_alternative<GriddedDensity>(mu0))
      ms.ac = std::get<GriddedDensity>(mu0);
    else if (std::holds_alternative<SquareCloud>(mu0))
      ms.ac = std::get<SquareCloud>(mu0);
    else
      throw std::invalid_argument("run_configured_scheme: multi-scale AC part must be a density");
    const int ac_scheme = cfg.scheme_kind == 5 ? 5 : 4;
    return run_multiscale(ms, cfg.velocity, cfg.scheme, ac_scheme, cfg.grid_origin);
  }

  switch (cfg.scheme_kind) {
    case 1: {
      const AtomCloud particles = to_quadrature(grid_project(mu0, ingest), cfg.scheme.quad_order);
      return run_scheme1_particles(particles, cfg.velocity, cfg.scheme);
    }
    case 4:
      return run_scheme4(mu0, cfg.velocity, cfg.scheme, cfg.grid_origin);
    case 5:
      return run_scheme5(mu0, cfg.velocity, cfg.scheme, cfg.grid_origin);
    default:
      throw std::invalid_argument("run_configured_scheme: scheme kind must be 1, 4 or 5");
  }
}

ConvergenceStudy run_convergence_study(const RunConfig& cfg) {
  if (!cfg.study) throw std::invalid_argument("run_convergence_study: config has no study block");
  const StudySpec& st = *cfg.study;

  ConvergenceStudy out;
  out.scheme_kind = st.scheme_kind;
  out.reference_scheme = st.reference_scheme;

  const std::size_t finest = st.ladder_dx.size() - 1;
  out.reference_dx = st.reference_dx > 0 ? st.reference_dx : st.ladder_dx[finest] / st.refine;
  out.reference_dt = st.reference_dt > 0 ? st.reference_dt : st.ladder_dt[finest] / st.refine;

  const HypothesisConstants consts = [&] {
    try {
      return certify_constants(cfg.velocity);
    } catch (const std::exception&) {
      return HypothesisConstants{0, 0, 0};
    }
  }();

  // one shared reference, recorded densely enough for every level
  SchemeConfig ref_cfg = cfg.scheme;
  ref_cfg.dx = out.reference_dx;
  ref_cfg.dt = out.reference_dt;
  ref_cfg.record_every = 1;
  const GridSpec ref_grid(cfg.initial.dim(), ref_cfg.dx, cfg.grid_origin);
  const Measure ref_mu0 = cfg.initial.build(ref_grid);
  Trajectory reference;
  if (st.reference_scheme == 1) {
    const AtomCloud particles =
        to_quadrature(grid_project(ref_mu0, ref_grid), cfg.scheme.quad_order);
    reference = run_scheme1_particles(particles, cfg.velocity, ref_cfg);
  } else {
    reference = run_scheme4(ref_mu0, cfg.velocity, ref_cfg, cfg.grid_origin);
  }

  const int n = cfg.initial.dim();
  for (std::size_t lvl = 0; lvl < st.ladder_dx.size(); ++lvl) {
    SchemeConfig level_cfg = cfg.scheme;
    level_cfg.dx = st.ladder_dx[lvl];
    level_cfg.dt = st.ladder_dt[lvl];
    const GridSpec level_grid(n, level_cfg.dx, cfg.grid_origin);
    const Measure mu0 = cfg.initial.build(level_grid);

    Trajectory traj;
    if (st.scheme_kind == 4)
      traj = run_scheme4(mu0, cfg.velocity, level_cfg, cfg.grid_origin);
    else if (st.scheme_kind == 5)
      traj = run_scheme5(mu0, cfg.velocity, level_cfg, cfg.grid_origin);
    else if (st.scheme_kind == 1)
      traj = run_scheme1_particles(to_quadrature(grid_project(mu0, level_grid), level_cfg.quad_order),
                                   cfg.velocity, level_cfg);
    else
      throw std::invalid_argument("run_convergence_study: study scheme must be 1, 4 or 5");

    StudyLevel level;
    level.dx = level_cfg.dx;
    level.dt = level_cfg.dt;
    level.error = 0;
    level.halo = 0;
    for (const auto& d : trajectory_distance_profile(traj, reference, cfg.scheme.p, cfg.scheme.quad_order)) {
      if (d.estimate > level.error) {
        level.error = d.estimate;
        level.halo = d.halo;
      }
    }

    const BoundValue b3 = scheme3_error(consts.K, consts.M, consts.L, cfg.scheme.p, cfg.scheme.T,
                                        level.dt, n, level.dx);
    const BoundValue b4 = scheme4_gap(consts.L, consts.K, n, cfg.scheme.T, level.dx, level.dt);
    double bound = b3.value + b4.value;
    bool ok = b3.hypothesis_ok && b4.hypothesis_ok;
    if (st.scheme_kind == 5) {
      const BoundValue b5 =
          scheme5_gap(cfg.scheme.p, consts.L, consts.K, n, cfg.scheme.T, level.dx, level.dt);
      bound += b5.value;
      ok = ok && b5.hypothesis_ok;
    }
    level.a_priori = bound;
    level.hypothesis_ok = ok;
    out.levels.push_back(level);
  }

  std::vector<double> xs, ys;
  for (const auto& l : out.levels) {
    xs.push_back(l.dx);
    ys.push_back(std::max(l.error, 1e-300));
  }
  const LeastSquaresFit fit = fit_loglog(xs, ys);
  out.fitted_order = fit.slope;
  out.r2 = fit.r2;
  return out;
}

void write_study_csv(const ConvergenceStudy& study, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "level,dx,dt,error,halo,a_priori,hypothesis_ok\n";
  for (std::size_t i = 0; i < study.levels.size(); ++i) {
    const auto& l = study.levels[i];
    os << i << ',' << format_double(l.dx) << ',' << format_double(l.dt) << ','
       << format_double(l.error) << ',' << format_double(l.halo) << ','
       << format_double(l.a_priori) << ',' << (l.hypothesis_ok ? 1 : 0) << '\n';
  }
  os << "# fitted_order=" << format_double(study.fitted_order)
     << " r2=" << format_double(study.r2) << '\n';
}

std::vector<BoundReport> audit_bounds(const RunConfig& cfg) {
  std::vector<BoundReport> reports;

  // randomized frozen-field audit around the configured velocity model
  if (cfg.velocity.interaction && !cfg.velocity.interaction->constant_weight) {
    std::mt19937_64 rng(cfg.seed + 17);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    const int dim = cfg.initial.dim() > 0 ? cfg.initial.dim() : 2;
    std::vector<std::pair<Measure, Measure>> pairs;
    for (int i = 0; i < 10; ++i) {
      auto make = [&] {
        SquareCloud c;
        c.dim = dim;
        c.side = 0.1;
        const int squares = 8;
        for (int s = 0; s < squares; ++s) {
          std::vector<double> center(dim);
          for (auto& x : center) x = uni(rng);
          c.push_back(center, 1.0 / squares);
        }
        return Measure(c);
      };
      pairs.emplace_back(make(), make());
    }
    const std::vector<double> ts{0.05, 0.1, 0.2};
    auto flow = verify_flow_bounds(cfg.velocity, pairs, ts, cfg.scheme.p, cfg.scheme.quad_order,
                                   cfg.scheme.substeps);
    reports.insert(reports.end(), flow.begin(), flow.end());
  }
  return reports;
}

void write_bound_reports_csv(const std::vector<BoundReport>& reports, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "name,bound,measured,slack,hypothesis_ok,pass\n";
  for (const auto& r : reports)
    os << r.name << ',' << format_double(r.bound) << ',' << format_double(r.measured) << ','
       << format_double(r.slack) << ',' << (r.hypothesis_ok ? 1 : 0) << ',' << (r.pass ? 1 : 0)
       << '\n';
}

namespace {

void bbox_of(const Measure& m, std::vector<double>& lo, std::vector<double>& hi) {
  const int n = measure_dim(m);
  lo.assign(n, std::numeric_limits<double>::infinity());
  hi.assign(n, -std::numeric_limits<double>::infinity());
  const AtomCloud c = to_quadrature(m, 1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto p = c.position(i);
    for (int d = 0; d < n; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu", i);
  return buf;
}

}  // namespace

void write_trajectory(const Trajectory& traj, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / "trajectory.csv");
  if (!os) throw std::runtime_error("cannot open trajectory.csv in " + dir);
  os << "frame,time,mass,bbox\n";
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    const auto& f = traj.frames[i];
    std::vector<double> lo, hi;
    bbox_of(f.measure, lo, hi);
    os << i << ',' << format_double(f.time) << ',' << format_double(total_mass(f.measure)) << ',';
    for (std::size_t d = 0; d < lo.size(); ++d)
      os << (d ? " " : "") << format_double(lo[d]) << ' ' << format_double(hi[d]);
    os << '\n';

    const std::string base = (fs::path(dir) / frame_name(i)).string();
    if (const auto* ms = std::get_if<MultiScaleMeasure>(&f.measure)) {
      std::visit([&](const auto& ac) { write_measure_file(base + ".msr", Measure(ac)); }, ms->ac);
      write_measure_file(base + ".atoms.msr", Measure(ms->atoms));
    } else {
      write_measure_file(base + ".msr", f.measure);
    }
  }
}

Trajectory read_trajectory(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "trajectory.csv");
  if (!is) throw std::runtime_error("cannot open trajectory.csv in " + dir);
  Trajectory traj;
  traj.scheme = "file";
  std::string line;
  std::getline(is, line);  // header
  double min_dt = 1;
  double prev_time = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t c1 = line.find(',');
    std::size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("trajectory.csv: bad row '" + line + "'");
    const std::size_t frame = std::stoull(line.substr(0, c1));
    const double time = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const std::string base = (fs::path(dir) / frame_name(frame)).string();
    Measure m = read_measure_file(base + ".msr");
    if (fs::exists(base + ".atoms.msr")) {
      MultiScaleMeasure ms;
      if (auto* g = std::get_if<GriddedDensity>(&m))
        ms.ac = std::move(*g);
      else if (auto* s = std::get_if<SquareCloud>(&m))
        ms.ac = std::move(*s);
      else
        throw std::runtime_error("trajectory: multi-scale AC frame must be a density");
      ms.atoms = std::get<AtomCloud>(read_measure_file(base + ".atoms.msr"));
      traj.frames.push_back({time, std::move(ms)});
    } else {
      traj.frames.push_back({time, std::move(m)});
    }
    if (traj.frames.size() > 1) min_dt = std::min(min_dt, time - prev_time);
    prev_time = time;
  }
  if (traj.frames.empty()) throw std::runtime_error("trajectory.csv: no frames");
  traj.config.T = std::max(prev_time, min_dt);
  traj.config.dt = min_dt;
  return traj;
}

}  // namespace pfwd
