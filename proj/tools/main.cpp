#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pfwd/config.hpp"
#include "pfwd/counterexample.hpp"
#include "pfwd/measure_io.hpp"
#include "pfwd/schemes.hpp"
#include "pfwd/study.hpp"
#include "pfwd/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_manifest(const std::string& dir, const std::string& command, const pfwd::RunConfig* cfg,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "pfwd";
  m["version"] = "0.1.0";
  m["command"] = command;
  if (cfg) {
    m["seed"] = cfg->seed;
    m["scheme_kind"] = cfg->scheme_kind;
    m["dt"] = cfg->scheme.dt;
    m["dx"] = cfg->scheme.dx;
    m["T"] = cfg->scheme.T;
    m["p"] = cfg->scheme.p;
    m["quadrature"] = cfg->scheme.quad_order;
  }
  m["outputs"] = outputs;
  std::ofstream os(fs::path(dir) / "manifest.json");
  os << m.dump(2) << '\n';
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads,
                 std::uint64_t seed_override, bool has_seed) {
  apply_threads(threads);
  pfwd::RunConfig cfg = pfwd::parse_config_file(config_path);
  if (has_seed) cfg.seed = seed_override;
  const std::string dir = out_dir.empty() ? (cfg.out_dir.empty() ? "out" : cfg.out_dir) : out_dir;
  fs::create_directories(dir);

  std::vector<std::string> outputs;
  if (!cfg.populations.empty()) {
    pfwd::PopulationVector mu0;
    pfwd::MultiPopulationConfig mpc;
    mpc.scheme = cfg.scheme;
    mpc.scheme_kind = cfg.scheme_kind == 5 ? 5 : 4;
    const pfwd::GridSpec grid(cfg.populations.front().initial.dim(), cfg.scheme.dx,
                              cfg.grid_origin);
    for (const auto& p : cfg.populations) {
      mu0.populations.push_back(p.initial.build(grid));
      mpc.models.push_back({p.velocity, p.weights});
    }
    const auto trajs = pfwd::run_multi_population(mu0, mpc, cfg.grid_origin);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      const std::string sub = (fs::path(dir) / ("population_" + std::to_string(i))).string();
      pfwd::write_trajectory(trajs[i], sub);
      outputs.push_back(sub);
    }
  } else {
    const pfwd::Trajectory traj = pfwd::run_configured_scheme(cfg);
    pfwd::write_trajectory(traj, dir);
    outputs.push_back((fs::path(dir) / "trajectory.csv").string());
  }
  write_manifest(dir, "simulate", &cfg, outputs);
  std::cout << "wrote " << dir << '\n';
  return 0;
}

int cmd_converge(const std::string& config_path, const std::string& out_dir, int threads,
                 std::uint64_t seed_override, bool has_seed) {
  apply_threads(threads);
  pfwd::RunConfig cfg = pfwd::parse_config_file(config_path);
  if (has_seed) cfg.seed = seed_override;
  const std::string dir = out_dir.empty() ? (cfg.out_dir.empty() ? "out" : cfg.out_dir) : out_dir;
  fs::create_directories(dir);

  const pfwd::ConvergenceStudy study = pfwd::run_convergence_study(cfg);
  const std::string csv = (fs::path(dir) / "convergence.csv").string();
  pfwd::write_study_csv(study, csv);
  write_manifest(dir, "converge", &cfg, {csv});
  std::cout << "levels:\n";
  for (const auto& l : study.levels)
    std::cout << "  dx=" << l.dx << " dt=" << l.dt << " error=" << l.error << " halo=" << l.halo
              << '\n';
  std::cout << "fitted order " << study.fitted_order << " (r2 " << study.r2 << ")\n";
  return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& traj_a,
               const std::string& traj_b, const std::string& out_dir, int threads) {
  apply_threads(threads);
  pfwd::RunConfig cfg = pfwd::parse_config_file(config_path);
  const std::string dir = out_dir.empty() ? (cfg.out_dir.empty() ? "out" : cfg.out_dir) : out_dir;
  fs::create_directories(dir);

  std::vector<pfwd::BoundReport> reports = pfwd::audit_bounds(cfg);

  if (!traj_a.empty() && !traj_b.empty()) {
    const pfwd::Trajectory a = pfwd::read_trajectory(traj_a);
    const pfwd::Trajectory b = pfwd::read_trajectory(traj_b);
    const auto profile =
        pfwd::trajectory_distance_profile(a, b, cfg.scheme.p, cfg.scheme.quad_order);
    const pfwd::HypothesisConstants c = pfwd::certify_constants(cfg.velocity);
    const int n = pfwd::measure_dim(a.frames.front().measure);
    double measured = 0, halo = 0;
    for (const auto& d : profile) {
      measured = std::max(measured, d.estimate);
      halo = std::max(halo, d.halo);
    }
    const auto b3 = pfwd::scheme3_error(c.K, c.M, c.L, cfg.scheme.p, cfg.scheme.T, cfg.scheme.dt,
                                        n, cfg.scheme.dx);
    const auto b4 = pfwd::scheme4_gap(c.L, c.K, n, cfg.scheme.T, cfg.scheme.dx, cfg.scheme.dt);
    pfwd::BoundReport r;
    r.name = "trajectory_gap_vs_scheme_bounds";
    r.measured = measured;
    r.bound = b3.value + b4.value;
    r.slack = 2 * halo;
    r.hypothesis_ok = b3.hypothesis_ok && b4.hypothesis_ok;
    r.pass = !r.hypothesis_ok || r.measured <= r.bound + r.slack;
    reports.push_back(r);
  }

  const std::string csv = (fs::path(dir) / "bounds.csv").string();
  pfwd::write_bound_reports_csv(reports, csv);
  write_manifest(dir, "bounds", &cfg, {csv});
  int failures = 0;
  for (const auto& r : reports)
    if (!r.pass) ++failures;
  std::cout << reports.size() << " checks, " << failures << " failures -> " << csv << '\n';
  return failures == 0 ? 0 : 1;
}

int cmd_ot(const std::string& file_a, const std::string& file_b, double p, int q,
           const std::string& plan_out) {
  const pfwd::Measure a = pfwd::read_measure_file(file_a);
  const pfwd::Measure b = pfwd::read_measure_file(file_b);
  const auto d = pfwd::wasserstein_measures(a, b, p, q);
  std::cout << "value " << pfwd::format_double(d.estimate) << '\n';
  std::cout << "halo " << pfwd::format_double(d.halo) << '\n';
  if (!plan_out.empty()) {
    const auto res =
        pfwd::wasserstein_atoms(pfwd::to_quadrature(a, q), pfwd::to_quadrature(b, q), p);
    std::ofstream os(plan_out);
    os << "i,j,mass\n";
    for (const auto& e : res.plan.entries)
      os << e.source << ',' << e.target << ',' << pfwd::format_double(e.mass) << '\n';
  }
  return 0;
}

int cmd_counterexample(const std::string& out_dir, int truncation, std::uint64_t seed) {
  const std::string dir = out_dir.empty() ? "out" : out_dir;
  fs::create_directories(dir);
  pfwd::NuFamily fam;
  fam.truncation = truncation;

  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::pair<double, double>> pairs;
  while (pairs.size() < 100) {
    double s = uni(rng), t = uni(rng);
    if (s > t) std::swap(s, t);
    if (t - s < 1e-6 || s + t < 1e-3) continue;
    pairs.emplace_back(s, t);
  }
  const auto lip = pfwd::verify_l1_lipschitz(fam, pairs);
  {
    std::ofstream os(fs::path(dir) / "l1_lipschitz.csv");
    os << "t,s,lhs,rhs\n";
    for (const auto& r : lip)
      os << pfwd::format_double(r.t) << ',' << pfwd::format_double(r.s) << ','
         << pfwd::format_double(r.lhs) << ',' << pfwd::format_double(r.rhs) << '\n';
  }

  std::vector<std::pair<double, double>> shrink;
  for (int i = 0; i < 12; ++i) {
    const double t = 0.2 / std::pow(1.6, i);
    shrink.emplace_back(t / 2, t);
  }
  const auto blow = pfwd::verify_wp_blowup(fam, 1.0, 8, shrink);
  {
    std::ofstream os(fs::path(dir) / "wp_ratio.csv");
    os << "t,s,wp,ratio\n";
    for (const auto& r : blow)
      os << pfwd::format_double(r.t) << ',' << pfwd::format_double(r.s) << ','
         << pfwd::format_double(r.wp_measured) << ',' << pfwd::format_double(r.ratio) << '\n';
  }

  const auto rep = pfwd::demonstrate_nonuniqueness(fam, 1.0, 0.01);
  {
    std::ofstream os(fs::path(dir) / "nonuniqueness.txt");
    os << "stationary_fixed_point " << (rep.stationary_fixed_point ? "pass" : "fail") << '\n';
    os << "shift_identity " << (rep.shift_identity ? "pass" : "fail") << '\n';
    os << "velocity_along_path " << (rep.velocity_along_path ? "pass" : "fail") << '\n';
  }

  // frames of the two competing trajectories on a coarse time grid
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    char name[64];
    std::snprintf(name, sizeof(name), "stationary_%02d.msr", i);
    pfwd::write_measure_file((fs::path(dir) / name).string(),
                             pfwd::Measure(fam.eval(0).quadrature(2)));
    std::snprintf(name, sizeof(name), "moving_%02d.msr", i);
    pfwd::write_measure_file((fs::path(dir) / name).string(),
                             pfwd::Measure(fam.eval(t).quadrature(2)));
  }
  write_manifest(dir, "counterexample", nullptr,
                 {"l1_lipschitz.csv", "wp_ratio.csv", "nonuniqueness.txt"});
  const bool all = rep.stationary_fixed_point && rep.shift_identity && rep.velocity_along_path;
  std::cout << (all ? "all checks pass" : "CHECK FAILURES") << " -> " << dir << '\n';
  return all ? 0 : 1;
}

int cmd_demo_f1(const std::string& out_dir, double r, double eps, double radius, double p) {
  const std::string dir = out_dir.empty() ? "out" : out_dir;
  fs::create_directories(dir);
  std::vector<double> ts;
  for (int i = 1; i <= 10; ++i) ts.push_back(0.01 * i);
  const auto rep = pfwd::f1_discontinuity_demo(r, eps, radius, ts, p, 16, 16);
  std::ofstream os(fs::path(dir) / "f1_discontinuity.csv");
  os << "t,v_norm,wp_bound,wp_measured\n";
  for (const auto& row : rep.rows)
    os << pfwd::format_double(row.t) << ',' << pfwd::format_double(row.v_norm) << ','
       << pfwd::format_double(row.wp_bound) << ',' << pfwd::format_double(row.wp_measured) << '\n';
  std::cout << "s=" << rep.s << " rows=" << rep.rows.size() << " -> " << dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"push-forward transport schemes and exact discrete Wasserstein distances"};
  app.require_subcommand(1);

  std::string config_path, out_dir, traj_a, traj_b, file_a, file_b, plan_out, demo_kind;
  int threads = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  double p = 2;
  int q = 2;
  int truncation = 20;
  double f1_r = 0.25, f1_eps = 0.1, f1_radius = 1.0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", config_path, "run config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "OpenMP thread count (0 = default)");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) { has_seed = true; });
  };

  auto* sim = app.add_subcommand("simulate", "run the configured scheme and write frames");
  add_common(sim, true);

  auto* conv = app.add_subcommand("converge", "run the configured refinement ladder");
  add_common(conv, true);

  auto* bnd = app.add_subcommand("bounds", "audit measured distances against the a-priori bounds");
  add_common(bnd, true);
  bnd->add_option("--measure", traj_a, "trajectory directory");
  bnd->add_option("--against", traj_b, "trajectory directory to compare with");

  auto* ot = app.add_subcommand("ot", "Wasserstein distance between two measure files");
  ot->add_option("a", file_a, "first measure file")->required();
  ot->add_option("b", file_b, "second measure file")->required();
  ot->add_option("--p", p, "distance exponent (>= 1)");
  ot->add_option("--quadrature", q, "quadrature order for non-atomic measures");
  ot->add_option("--plan", plan_out, "write the optimal plan as CSV");

  auto* ce = app.add_subcommand("counterexample", "uniqueness-failure reproduction suite");
  ce->add_option("--out", out_dir, "output directory");
  ce->add_option("--truncation", truncation, "staircase truncation index");
  ce->add_option("--seed", seed, "seed for the sampled pairs");

  auto* demo = app.add_subcommand("demo", "named demonstration reports");
  demo->add_option("kind", demo_kind, "demo name (f1-discontinuity)")->required();
  demo->add_option("--out", out_dir, "output directory");
  demo->add_option("--r", f1_r, "inner exclusion radius");
  demo->add_option("--eps", f1_eps, "near-mass ball radius");
  demo->add_option("--radius", f1_radius, "kernel support radius");
  demo->add_option("--p", p, "distance exponent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, threads, seed, has_seed);
    if (conv->parsed()) return cmd_converge(config_path, out_dir, threads, seed, has_seed);
    if (bnd->parsed()) return cmd_bounds(config_path, traj_a, traj_b, out_dir, threads);
    if (ot->parsed()) return cmd_ot(file_a, file_b, p, q, plan_out);
    if (ce->parsed()) return cmd_counterexample(out_dir, truncation, seed);
    if (demo->parsed()) {
      if (demo_kind != "f1-discontinuity") {
        std::cerr << "unknown demo: " << demo_kind << '\n';
        return 2;
      }
      return cmd_demo_f1(out_dir, f1_r, f1_eps, f1_radius, p);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
