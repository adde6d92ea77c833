#include "wavelab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wavelab/estimate.hpp"
#include "wavelab/exponents.hpp"
#include "wavelab/io.hpp"
#include "wavelab/monodromy.hpp"
#include "wavelab/norms.hpp"
#include "wavelab/picard.hpp"
#include "wavelab/propagate.hpp"
#include "wavelab/rays.hpp"

namespace wavelab {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json field_stats(const GridSpec& grid, const Field& f) {
  return json{{"l2", format_double(l2_norm(grid, f))},
              {"sup", format_double(f.abs().maxCoeff())}};
}

std::vector<double> to_vector(const Field& f) {
  return std::vector<double>(f.data(), f.data() + f.size());
}

// ---------------------------------------------------------------------------
// Shared option groups. Each subcommand owns its instances so defaults can
// differ; the resolved values are echoed verbatim into every artifact.
// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string out = ".";
  std::uint64_t seed = 20260819ull;
  int threads = 0;
  bool plot = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--out", c.out,
                  "Output directory (WAVELAB_OUT overrides the default; the flag wins)")
      ->envname("WAVELAB_OUT")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Root seed; every random draw derives from it")
      ->capture_default_str();
  cmd->add_option("--threads", c.threads, "Parallelism cap (0: hardware default)")
      ->capture_default_str();
  cmd->add_flag("--plot", c.plot, "Also write a gnuplot script reading the CSVs");
}

struct MetricArgs {
  std::string family = "unit";
  double amplitude = 0.5;
  double rho = 1.0;
  double period = 1.0;
  double mod_depth = 0.5;
};

void add_metric_options(CLI::App* cmd, MetricArgs& m) {
  cmd->add_option("--metric", m.family, "Coefficient family")
      ->check(CLI::IsMember({"unit", "static_bump", "periodic_bump"}))
      ->capture_default_str();
  cmd->add_option("--amplitude", m.amplitude, "Bump amplitude (> -1)")->capture_default_str();
  cmd->add_option("--rho", m.rho, "Radius outside which a == 1")->capture_default_str();
  cmd->add_option("--period", m.period, "Time period (periodic_bump)")->capture_default_str();
  cmd->add_option("--mod-depth", m.mod_depth, "Modulation depth in [0, 1) (periodic_bump)")
      ->capture_default_str();
}

Metric build_metric(const MetricArgs& m) {
  if (m.family == "unit") return make_unit_metric(m.rho);
  if (m.family == "static_bump") return make_static_bump(m.amplitude, m.rho);
  return make_periodic_bump(m.amplitude, m.rho, m.period, m.mod_depth);
}

json metric_config(const MetricArgs& m) {
  json j{{"family", m.family}, {"rho", m.rho}};
  if (m.family != "unit") j["amplitude"] = m.amplitude;
  if (m.family == "periodic_bump") {
    j["period"] = m.period;
    j["mod_depth"] = m.mod_depth;
  }
  return j;
}

struct GridArgs {
  std::string kind = "radial";
  int n = 3;
  double extent = 5.0;
  int points = 400;
  double dt = 0.0;
  std::string boundary = "dod";
};

void add_grid_options(CLI::App* cmd, GridArgs& g) {
  cmd->add_option("--grid", g.kind, "Grid kind")
      ->check(CLI::IsMember({"radial", "full"}))
      ->capture_default_str();
  cmd->add_option("--n", g.n, "Spatial dimension")->capture_default_str();
  cmd->add_option("--extent", g.extent, "Domain half-width / radial extent")
      ->capture_default_str();
  cmd->add_option("--points", g.points, "Points per axis")->capture_default_str();
  cmd->add_option("--dt", g.dt, "Time step (0: derived from the stability bound)")
      ->capture_default_str();
  cmd->add_option("--boundary", g.boundary, "Boundary handling")
      ->check(CLI::IsMember({"dod", "periodic"}))
      ->capture_default_str();
}

GridSpec build_grid(const GridArgs& g) {
  GridSpec spec;
  spec.kind = g.kind == "radial" ? GridKind::Radial : GridKind::Full;
  spec.n = g.n;
  spec.extent = g.extent;
  spec.points_per_axis = g.points;
  spec.dt = g.dt;
  spec.boundary = g.boundary == "periodic" ? Boundary::Periodic : Boundary::DomainOfDependence;
  spec.check();
  return spec;
}

json grid_config(const GridArgs& g) {
  return json{{"kind", g.kind},   {"n", g.n},   {"extent", g.extent},
              {"points", g.points}, {"dt", g.dt}, {"boundary", g.boundary}};
}

struct NonlinArgs {
  double k = 3.0;
  std::string sign = "focusing";
  std::string form = "pure_power";
  double mu = 0.0;
  double scale = 1.0;
};

void add_nonlinearity_options(CLI::App* cmd, NonlinArgs& f) {
  cmd->add_option("--k", f.k, "Nonlinearity power")->capture_default_str();
  cmd->add_option("--sign", f.sign, "Focusing or defocusing")
      ->check(CLI::IsMember({"focusing", "defocusing"}))
      ->capture_default_str();
  cmd->add_option("--form", f.form, "Pointwise form of f")
      ->check(CLI::IsMember({"pure_power", "smoothed_power"}))
      ->capture_default_str();
  cmd->add_option("--mu", f.mu, "Smoothing floor (smoothed_power)")->capture_default_str();
  cmd->add_option("--scale", f.scale, "Overall strength; 0 disables f")->capture_default_str();
}

Nonlinearity build_nonlinearity(const NonlinArgs& f) {
  Nonlinearity nl;
  nl.k = f.k;
  nl.sign = f.sign == "focusing" ? Nonlinearity::Sign::Focusing : Nonlinearity::Sign::Defocusing;
  nl.form = f.form == "pure_power" ? Nonlinearity::Form::PurePower
                                   : Nonlinearity::Form::SmoothedPower;
  nl.mu = f.mu;
  nl.scale = f.scale;
  nl.validate();
  return nl;
}

json nonlinearity_config(const NonlinArgs& f) {
  return json{{"k", f.k}, {"sign", f.sign}, {"form", f.form}, {"mu", f.mu}, {"scale", f.scale}};
}

// ---------------------------------------------------------------------------
// Artifact plumbing: every run writes a JSON report echoing the resolved
// configuration, and every CSV carries that echo as a comment line.
// ---------------------------------------------------------------------------

struct RunContext {
  std::string subcommand;
  fs::path dir;
  json config;
  std::vector<std::string> files;
  bool plot = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

RunContext make_context(const std::string& subcommand, const CommonArgs& c, json config) {
  RunContext ctx;
  ctx.subcommand = subcommand;
  ctx.dir = c.out;
  ctx.plot = c.plot;
  // The output directory is deliberately not echoed: it determines where
  // artifacts land, never what is in them, and identical runs must produce
  // identical bytes wherever they are written.
  config["seed"] = c.seed;
  config["threads"] = c.threads;
  ctx.config = std::move(config);
  fs::create_directories(ctx.dir);
  return ctx;
}

void emit_csv(RunContext& ctx, const std::string& name, CsvTable table) {
  table.comments.insert(table.comments.begin(),
                        {std::string(version_stamp), "config: " + ctx.config.dump()});
  write_csv(ctx.dir / name, table);
  ctx.files.push_back(name);
  std::cout << "wrote " << (ctx.dir / name).string() << "\n";
}

void emit_plot_script(RunContext& ctx, const std::string& name, const std::string& body) {
  if (!ctx.plot) return;
  std::string script = "# gnuplot script; run from the output directory:\n";
  script += "#   gnuplot -p " + name + "\n";
  script += "set datafile separator comma\n" + body;
  write_text_file(ctx.dir / name, script);
  ctx.files.push_back(name);
  std::cout << "wrote " << (ctx.dir / name).string() << "\n";
}

void write_report(RunContext& ctx, json results) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  json report;
  report["version"] = version_stamp;
  report["subcommand"] = ctx.subcommand;
  report["config"] = ctx.config;
  report["results"] = std::move(results);
  report["files"] = ctx.files;
  report["timing"] = json{{"wall_seconds", wall}};
  const fs::path path = ctx.dir / ("report_" + ctx.subcommand + ".json");
  write_text_file(path, report.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

/// Unit-norm random packet template on the grid (the energy-pair norm is 1),
/// centered inside |x| <= rho + 1.
StatePair packet_template(const GridSpec& grid, double rho, std::uint64_t seed) {
  PacketBand band;
  band.center_radius = rho + 1.0;
  StatePair data = random_packet_data(grid, band, seed);
  const double norm = energy_pair_norm(grid, data);
  if (!(norm > 0.0))
    throw DegenerateError("packet template: the random draw has zero energy norm");
  data.u /= norm;
  data.v /= norm;
  return data;
}

// ---------------------------------------------------------------------------
// exponents
// ---------------------------------------------------------------------------

struct ExponentsArgs {
  int n = 3;
  std::optional<double> k;
  double gamma = 1.0;
  std::string regime = "local";
  std::optional<double> p, q;
  std::optional<int> n_to;
};

void run_exponents(const ExponentsArgs& a, const CommonArgs& common) {
  const Regime regime = a.regime == "global" ? Regime::Global : Regime::Local;
  json config{{"n", a.n}, {"gamma", a.gamma}, {"regime", a.regime}};
  if (a.k) config["k"] = *a.k;
  if (a.p) config["p"] = *a.p;
  if (a.q) config["q"] = *a.q;
  if (a.n_to) config["n_to"] = *a.n_to;
  RunContext ctx = make_context("exponents", common, std::move(config));

  json results;
  const KWindow w = k_window(a.n, regime);
  results["k_window"] = json{{"n", w.n},
                             {"regime", to_string(w.regime)},
                             {"lower", w.lower},
                             {"lower_fraction", {w.lower_num, w.lower_den}},
                             {"upper", w.upper},
                             {"upper_fraction", {w.upper_num, w.upper_den}},
                             {"upper_closed", w.upper_closed}};
  if (a.k) {
    results["k_window"]["contains_k"] = w.contains(*a.k);
    const ExponentSet s = strichartz_pair_for_k(a.n, *a.k, regime);
    results["strichartz_pair_for_k"] =
        json{{"p", s.p},
             {"q", s.q},
             {"gamma", s.gamma},
             {"d", s.d},
             {"admissible_local", s.admissible_local},
             {"admissible_global", s.admissible_global}};
    results["lifespan_exponent"] = s.d;
  }
  if (a.p && a.q) {
    const AdmissibilityReport r = check_admissible(a.n, *a.p, *a.q, a.gamma, regime);
    results["check_admissible"] = json{{"admissible", r.admissible},
                                       {"scaling_ok", r.scaling_ok},
                                       {"knapp_ok", r.knapp_ok},
                                       {"p_strict_ok", r.p_strict_ok},
                                       {"gamma_used", r.gamma_used},
                                       {"scaling_lhs", r.scaling_lhs},
                                       {"scaling_rhs", r.scaling_rhs},
                                       {"knapp_lhs", r.knapp_lhs},
                                       {"knapp_rhs", r.knapp_rhs}};
  }

  if (a.n_to) {
    if (*a.n_to < a.n) throw ConfigError("exponents: --n-to must be >= --n");
    CsvTable t;
    t.comments = {"columns from k_window(n, regime)"};
    t.header = {"n", "regime", "k_window_lower", "k_window_upper", "k_window_upper_closed"};
    for (int nn = a.n; nn <= *a.n_to; ++nn) {
      const KWindow wn = k_window(nn, regime);
      t.rows.push_back({std::to_string(nn), a.regime, format_double(wn.lower),
                        format_double(wn.upper), wn.upper_closed ? "1" : "0"});
    }
    emit_csv(ctx, "exponents_windows.csv", std::move(t));
  }

  std::cout << results.dump(2) << "\n";
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  double t_final = 2.0;
  double epsilon = 1.0;
  int snapshots = 2;
  int stride = 1;
  std::vector<double> q_list;
};

void run_simulate(const SimulateArgs& a, const MetricArgs& margs, const GridArgs& gargs,
                  const CommonArgs& common) {
  if (!(a.t_final > 0.0)) throw ConfigError("simulate: --t-final must be positive");
  if (a.snapshots < 0) throw ConfigError("simulate: --snapshots cannot be negative");
  if (a.stride < 1) throw ConfigError("simulate: --stride must be >= 1");

  json config{{"metric", metric_config(margs)},
              {"grid", grid_config(gargs)},
              {"t_final", a.t_final},
              {"epsilon", a.epsilon},
              {"snapshots", a.snapshots},
              {"stride", a.stride},
              {"q_list", a.q_list}};
  RunContext ctx = make_context("simulate", common, std::move(config));

  const Metric metric = build_metric(margs);
  GridSpec grid = build_grid(gargs);
  if (grid.dt == 0.0) {
    const double bound = cfl_dt(grid, metric);
    grid.dt = a.t_final / std::ceil(a.t_final / bound);
  }
  const int levels = static_cast<int>(std::lround(a.t_final / grid.dt));

  StatePair data = packet_template(grid, metric.rho, common.seed);
  data.u *= a.epsilon;
  data.v *= a.epsilon;

  CsvTable series;
  series.comments = {"columns from norms(state) sampled on the time grid"};
  series.header = {"time", "h1dot", "l2", "energy"};
  for (double q : a.q_list) series.header.push_back("lq_" + format_double(q));

  std::vector<int> snap_levels;
  for (int j = 0; j <= a.snapshots; ++j)
    snap_levels.push_back(a.snapshots == 0 ? 0 : static_cast<int>(std::lround(
                                                     j * double(levels) / a.snapshots)));
  json snapshot_index = json::array();

  PropagateOptions opts;
  opts.observer = [&](int level, double t, const Field& u, const Field& v) {
    StatePair at{u, v, t};
    if (level % a.stride == 0 || level == levels) {
      const NormReport r = norms(metric, grid, at, a.q_list);
      std::vector<std::string> row = {format_double(t), format_double(r.h1dot),
                                      format_double(r.l2), format_double(r.energy)};
      for (double q : a.q_list) row.push_back(format_double(r.lq.at(q)));
      series.rows.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < snap_levels.size(); ++j) {
      if (snap_levels[j] != level) continue;
      char name[64];
      std::snprintf(name, sizeof name, "simulate_snapshot_%03zu.bin", j);
      write_field_snapshot(ctx.dir / name, grid, at);
      ctx.files.push_back(name);
      snapshot_index.push_back(json{{"file", name}, {"time", t}});
    }
  };

  const PropagateResult run = propagate_run(metric, grid, data, 0.0, a.t_final, opts);

  emit_csv(ctx, "simulate_norms.csv", std::move(series));
  emit_plot_script(ctx, "plot_simulate.gp",
                   "set xlabel 'time'\n"
                   "plot 'simulate_norms.csv' using 1:4 with lines title 'energy', \\\n"
                   "     '' using 1:2 with lines title 'h1dot'\n");

  json results;
  results["propagate"] = json{{"steps_taken", run.steps_taken},
                              {"dt_used", run.dt_used},
                              {"final_time", run.state.time}};
  const NormReport first = norms(metric, grid, data, a.q_list);
  const NormReport last = norms(metric, grid, run.state, a.q_list);
  results["norms"] = json{{"initial", {{"h1dot", first.h1dot}, {"l2", first.l2},
                                       {"energy", first.energy}}},
                          {"final", {{"h1dot", last.h1dot}, {"l2", last.l2},
                                     {"energy", last.energy}}}};
  if (!metric.time_dependent() && first.energy > 0.0)
    results["energy_drift"] = std::abs(last.energy - first.energy) / first.energy;
  results["snapshots"] = std::move(snapshot_index);

  std::cout << "simulate: " << run.steps_taken << " steps to t = "
            << format_double(run.state.time) << ", final energy "
            << format_double(last.energy) << "\n";
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// picard
// ---------------------------------------------------------------------------

struct PicardArgs {
  double epsilon = 0.01;
  double t1 = 0.5;
  double tol = 1e-8;
  int max_iters = 25;
  double blowup_threshold = 1e6;
  std::string constants_file;
};

BudgetConstants load_constants(const fs::path& path, int n, double k, json* echo) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read constants file: " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const std::exception& e) {
    throw ConfigError("constants file is not valid JSON: " + std::string(e.what()));
  }
  for (const char* key : {"n", "k", "A_k", "C3", "C7"})
    if (!doc.contains(key))
      throw ConfigError("constants file is missing the field '" + std::string(key) + "'");
  if (doc["n"].get<int>() != n || doc["k"].get<double>() != k)
    throw ConfigError("constants file was calibrated for (n, k) = (" +
                      doc["n"].dump() + ", " + doc["k"].dump() +
                      "), not the requested problem");
  BudgetConstants c;
  c.A_k = doc["A_k"].get<double>();
  c.C3 = doc["C3"].get<double>();
  c.C7 = doc["C7"].get<double>();
  if (echo) *echo = doc;
  return c;
}

void run_picard(const PicardArgs& a, const MetricArgs& margs, const GridArgs& gargs,
                const NonlinArgs& fargs, const CommonArgs& common) {
  json config{{"metric", metric_config(margs)},
              {"grid", grid_config(gargs)},
              {"nonlinearity", nonlinearity_config(fargs)},
              {"epsilon", a.epsilon},
              {"t1", a.t1},
              {"tol", a.tol},
              {"max_iters", a.max_iters},
              {"blowup_threshold", a.blowup_threshold}};
  if (!a.constants_file.empty()) config["constants_file"] = a.constants_file;
  RunContext ctx = make_context("picard", common, std::move(config));

  const Metric metric = build_metric(margs);
  const GridSpec grid = build_grid(gargs);
  const Nonlinearity nl = build_nonlinearity(fargs);

  StatePair data = packet_template(grid, metric.rho, common.seed);
  data.u *= a.epsilon;
  data.v *= a.epsilon;
  const double g_norm = energy_pair_norm(grid, data);

  json results;
  results["data_norm"] = g_norm;
  if (!a.constants_file.empty()) {
    json calib;
    const BudgetConstants c = load_constants(a.constants_file, grid.n, nl.k, &calib);
    const Budget b = existence_budget(grid.n, nl.k, g_norm, c);
    results["existence_budget"] = json{{"M", b.M},   {"alpha", b.alpha}, {"t1", b.t1},
                                       {"T1", b.T1}, {"p", b.p},         {"q", b.q}};
    results["t1_within_budget"] = a.t1 <= b.T1;
    results["constants"] = std::move(calib);
  }

  PicardConfig cfg;
  cfg.max_iters = a.max_iters;
  cfg.tol = a.tol;
  cfg.t1 = a.t1;
  cfg.blowup_threshold = a.blowup_threshold;
  const PicardResult r = picard_solve(metric, grid, data, nl, cfg);

  CsvTable iters;
  iters.comments = {"columns from picard_solve diagnostics (per-iteration Y-norm gaps)"};
  iters.header = {"iteration", "difference", "ratio"};
  for (std::size_t i = 0; i < r.diagnostics.differences.size(); ++i) {
    const double d = r.diagnostics.differences[i];
    const double ratio = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                                : d / r.diagnostics.differences[i - 1];
    iters.rows.push_back(
        {std::to_string(i + 1), format_double(d), format_double(ratio)});
  }
  emit_csv(ctx, "picard_iterations.csv", std::move(iters));
  emit_plot_script(ctx, "plot_picard.gp",
                   "set logscale y\nset xlabel 'iteration'\n"
                   "plot 'picard_iterations.csv' using 1:2 with linespoints "
                   "title 'successive difference'\n");

  results["picard_solve"] = json{{"converged", r.diagnostics.converged},
                                 {"iters_used", r.diagnostics.iters_used},
                                 {"contraction_ratio", r.diagnostics.contraction_ratio},
                                 {"exploratory_k", r.diagnostics.exploratory_k},
                                 {"p", r.diagnostics.p},
                                 {"q", r.diagnostics.q},
                                 {"y_norm", r.diagnostics.y_norm},
                                 {"differences", r.diagnostics.differences}};
  const int last = r.history.levels() - 1;
  StatePair final_state{r.history.u[last], r.history.v[last], r.history.time_at(last)};
  const NormReport nr = norms(metric, grid, final_state);
  results["norms"] =
      json{{"final", {{"h1dot", nr.h1dot}, {"l2", nr.l2}, {"energy", nr.energy}}}};

  std::cout << "picard: " << (r.diagnostics.converged ? "converged" : "stopped") << " in "
            << r.diagnostics.iters_used << " iterations, contraction ratio "
            << format_double(r.diagnostics.contraction_ratio) << "\n";
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// lifespan
// ---------------------------------------------------------------------------

struct LifespanArgs {
  std::vector<double> epsilons;
  double horizon = 3.0;
  std::string tmpl = "packet";
};

void run_lifespan(const LifespanArgs& a, const MetricArgs& margs, const GridArgs& gargs,
                  const NonlinArgs& fargs, const CommonArgs& common) {
  json config{{"metric", metric_config(margs)},
              {"grid", grid_config(gargs)},
              {"nonlinearity", nonlinearity_config(fargs)},
              {"epsilons", a.epsilons},
              {"horizon", a.horizon},
              {"template", a.tmpl}};
  RunContext ctx = make_context("lifespan", common, std::move(config));

  const Metric metric = build_metric(margs);
  const GridSpec grid = build_grid(gargs);
  const Nonlinearity nl = build_nonlinearity(fargs);

  StatePair tmpl;
  if (a.tmpl == "constant") {
    const auto count = static_cast<Eigen::Index>(grid.node_count());
    tmpl.u = Field::Constant(count, 1.0);
    tmpl.v = Field::Zero(count);
  } else {
    tmpl = packet_template(grid, metric.rho, common.seed);
  }

  const SweepResult sweep =
      lifespan_sweep(metric, grid, tmpl, nl, a.epsilons, a.horizon, common.threads);

  CsvTable t;
  t.comments = {"columns from lifespan_sweep records; slope_fit repeats the "
                "whole-sweep log-log fit"};
  t.header = {"epsilon", "t_star", "censored", "t1_theory", "slope_fit"};
  for (const LifespanRecord& rec : sweep.records)
    t.rows.push_back({format_double(rec.epsilon), format_double(rec.t_star),
                      rec.censored ? "1" : "0", format_double(rec.t1_theory),
                      format_double(sweep.slope_fit)});
  emit_csv(ctx, "lifespan_sweep.csv", std::move(t));
  emit_plot_script(ctx, "plot_lifespan.gp",
                   "set logscale xy\nset xlabel 'epsilon'\nset ylabel 't_star'\n"
                   "plot 'lifespan_sweep.csv' using 1:2 with points title 'measured', \\\n"
                   "     '' using 1:4 with lines title 'anchored theory'\n");

  json records = json::array();
  for (const LifespanRecord& rec : sweep.records)
    records.push_back(json{{"epsilon", rec.epsilon},
                           {"t_star", rec.t_star},
                           {"censored", rec.censored},
                           {"t1_theory", rec.t1_theory},
                           {"iters_used", rec.iters_used}});
  json results;
  results["lifespan_sweep"] = json{{"slope_fit", sweep.slope_fit},
                                   {"d_theory", sweep.d_theory},
                                   {"anchor_coefficient", sweep.anchor_coefficient},
                                   {"records", std::move(records)}};

  std::cout << "lifespan: slope fit " << format_double(sweep.slope_fit) << " (theory d = "
            << format_double(sweep.d_theory) << ") over " << sweep.records.size()
            << " amplitudes\n";
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// rays
// ---------------------------------------------------------------------------

struct RaysArgs {
  int n = 3;
  int n_rays = 100;
  double sigma_max = 20.0;
  double step = 0.005;
  std::vector<double> radii;
  std::vector<double> trace_x, trace_xi;
};

void run_rays(const RaysArgs& a, const MetricArgs& margs, const CommonArgs& common) {
  const Metric metric = build_metric(margs);
  std::vector<double> radii = a.radii;
  if (radii.empty())
    radii = {metric.rho + 1.0, metric.rho + 2.0, metric.rho + 4.0};

  // Default traced ray: launched on the support boundary with an outward
  // frequency, which on the forward sheet moves inward through the lens —
  // the worst case of the scan fan.
  Vec x0 = Vec::Zero(a.n), xi0 = Vec::Zero(a.n);
  x0[0] = metric.rho;
  xi0[0] = 1.0;
  if (!a.trace_x.empty()) x0 = Eigen::Map<const Vec>(a.trace_x.data(), a.trace_x.size());
  if (!a.trace_xi.empty())
    xi0 = Eigen::Map<const Vec>(a.trace_xi.data(), a.trace_xi.size());

  json config{{"metric", metric_config(margs)},
              {"n", a.n},
              {"n_rays", a.n_rays},
              {"sigma_max", a.sigma_max},
              {"step", a.step},
              {"radii", radii},
              {"trace_x", to_vector(x0.array())},
              {"trace_xi", to_vector(xi0.array())}};
  RunContext ctx = make_context("rays", common, std::move(config));

  const RayState launch = make_null_ray(metric, 0.0, x0, xi0);
  const Trajectory traj = trace_ray(metric, launch, a.sigma_max, a.step, radii);

  CsvTable dump;
  dump.comments = {"columns from trace_ray samples; constraint_drift is the "
                   "relative null-constraint residual"};
  dump.header = {"sigma", "t"};
  for (int i = 0; i < a.n; ++i) dump.header.push_back("x" + std::to_string(i));
  dump.header.push_back("tau");
  for (int i = 0; i < a.n; ++i) dump.header.push_back("xi" + std::to_string(i));
  dump.header.push_back("constraint_drift");
  for (const RayState& s : traj.samples) {
    std::vector<std::string> row = {format_double(s.sigma), format_double(s.t)};
    for (int i = 0; i < a.n; ++i) row.push_back(format_double(s.x[i]));
    row.push_back(format_double(s.tau));
    for (int i = 0; i < a.n; ++i) row.push_back(format_double(s.xi[i]));
    row.push_back(format_double(s.constraint_residual(metric)));
    dump.rows.push_back(std::move(row));
  }
  emit_csv(ctx, "rays_trajectory.csv", std::move(dump));

  ScanConfig cfg;
  cfg.n = a.n;
  cfg.n_rays = a.n_rays;
  cfg.sigma_max = a.sigma_max;
  cfg.step = a.step;
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  const EscapeTable table = nontrapping_scan(metric, radii, cfg);

  CsvTable esc;
  esc.comments = {"columns from nontrapping_scan; S_R is the worst first-escape "
                  "parameter over the fan (nan: some ray never escaped)",
                  "verdict: " + std::string(to_string(table.verdict))};
  esc.header = {"R", "S_R", "escaped_rays"};
  for (std::size_t i = 0; i < table.R_values.size(); ++i)
    esc.rows.push_back({format_double(table.R_values[i]), format_double(table.S_R[i]),
                        std::to_string(table.escaped_rays[i])});
  emit_csv(ctx, "rays_escapes.csv", std::move(esc));
  emit_plot_script(ctx, "plot_rays.gp",
                   "set xlabel 'sigma'\nset ylabel 'coordinate'\n"
                   "plot 'rays_trajectory.csv' using 1:3 with lines title 'x0', \\\n"
                   "     '' using 1:2 with lines title 't'\n");

  json escapes = json::object();
  for (double R : radii) escapes[format_double(R)] = traj.escape_at(R);
  json results;
  results["trace_ray"] = json{{"samples", traj.samples.size()},
                              {"max_drift", traj.max_drift},
                              {"escape_sigma", std::move(escapes)}};
  results["nontrapping_scan"] = json{{"verdict", to_string(table.verdict)},
                                     {"R_values", table.R_values},
                                     {"S_R", table.S_R},
                                     {"escaped_rays", table.escaped_rays},
                                     {"rays_launched", table.rays_launched},
                                     {"rays_drifted", table.rays_drifted},
                                     {"max_drift", table.max_drift},
                                     {"sigma_max", table.sigma_max},
                                     {"seed", table.seed}};

  std::cout << "rays: verdict " << to_string(table.verdict) << " (" << table.rays_launched
            << " rays, " << table.rays_drifted << " drifted)\n";
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// monodromy
// ---------------------------------------------------------------------------

struct MonodromyArgs {
  double T = 0.0;
  std::vector<int> n_values = {0, 1, 2, 3, 4};
  int probes = 8;
  int refine_steps = 5;
  double budget_mb = 512.0;
};

void run_monodromy(const MonodromyArgs& a, const MetricArgs& margs, const GridArgs& gargs,
                   const CommonArgs& common) {
  const Metric metric = build_metric(margs);
  double T = a.T;
  if (T == 0.0) {
    if (!metric.time_dependent())
      throw ConfigError("monodromy: pass --T to pick the period for a static coefficient");
    T = metric.period;
  }

  json config{{"metric", metric_config(margs)},
              {"grid", grid_config(gargs)},
              {"T", T},
              {"n_values", a.n_values},
              {"probes", a.probes},
              {"refine_steps", a.refine_steps},
              {"budget_mb", a.budget_mb}};
  RunContext ctx = make_context("monodromy", common, std::move(config));

  const GridSpec reference = build_grid(gargs);
  ProbeOptions opts;
  opts.probes = a.probes;
  opts.refine_steps = a.refine_steps;
  opts.seed = common.seed;
  opts.threads = common.threads;
  opts.memory_budget_mb = a.budget_mb;

  const DecaySeries series = measure_decay_series(metric, reference, T, a.n_values, opts);

  CsvTable t;
  t.comments = {"columns from measure_decay_series / cutoff_norm_estimate"};
  t.header = {"N", "estimate", "probes", "skipped"};
  for (std::size_t i = 0; i < series.N_values.size(); ++i)
    t.rows.push_back({std::to_string(series.N_values[i]),
                      format_double(series.norm_estimates[i]),
                      std::to_string(a.probes), series.skipped[i] ? "1" : "0"});
  emit_csv(ctx, "monodromy_series.csv", std::move(t));
  emit_plot_script(ctx, "plot_monodromy.gp",
                   "set logscale y\nset xlabel 'N'\nset ylabel 'estimate'\n"
                   "plot 'monodromy_series.csv' using 1:2 with linespoints "
                   "title 'cutoff norm estimate'\n");

  json results;
  {
    const GridSpec g0 = monodromy_grid(reference, metric, T, 0, a.budget_mb);
    const CutoffPair cut = make_cutoff_pair(g0, metric, T);
    results["make_cutoff_pair"] =
        json{{"inner_radius", cut.inner_radius}, {"outer_radius", cut.outer_radius}};
  }
  results["measure_decay_series"] = json{{"N_values", series.N_values},
                                         {"norm_estimates", series.norm_estimates},
                                         {"skipped", series.skipped},
                                         {"period", series.period}};

  int usable = 0;
  for (std::size_t i = 0; i < series.skipped.size(); ++i)
    if (!series.skipped[i]) ++usable;
  if (usable >= 5) {
    const DecayFit fit = decay_fit(series);
    results["decay_fit"] = json{{"best", to_string(fit.best)},
                                {"c_exp", fit.c_exp},
                                {"delta", fit.delta},
                                {"residual_exp", fit.residual_exp},
                                {"c_log", fit.c_log},
                                {"residual_log", fit.residual_log},
                                {"partial_sum", fit.partial_sum},
                                {"tail", fit.tail},
                                {"summability", fit.summability},
                                {"terms_used", fit.terms_used}};
    std::cout << "monodromy: best decay model " << to_string(fit.best) << ", summability "
              << format_double(fit.summability) << "\n";
  } else {
    results["decay_fit"] = nullptr;
    results["decay_fit_note"] = "needs at least 5 unskipped estimates";
    std::cout << "monodromy: " << usable << " estimates (fit needs 5)\n";
  }
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateArgs {
  int trials = 8;
  double horizon = 1.5;
  double t1_source = 1.5;
  double slack = 1.0;
  double check_gnorm = 0.05;
  std::string constants_out = "constants.json";
};

void run_calibrate(const CalibrateArgs& a, const MetricArgs& margs, const GridArgs& gargs,
                   const NonlinArgs& fargs, const CommonArgs& common) {
  if (a.trials < 1) throw ConfigError("calibrate: --trials must be >= 1");
  if (!(a.slack >= 1.0)) throw ConfigError("calibrate: --slack must be >= 1");

  json config{{"metric", metric_config(margs)},
              {"grid", grid_config(gargs)},
              {"nonlinearity", nonlinearity_config(fargs)},
              {"trials", a.trials},
              {"horizon", a.horizon},
              {"t1_source", a.t1_source},
              {"slack", a.slack},
              {"check_gnorm", a.check_gnorm},
              {"constants_out", a.constants_out}};
  RunContext ctx = make_context("calibrate", common, std::move(config));

  const Metric metric = build_metric(margs);
  const GridSpec grid = build_grid(gargs);
  const Nonlinearity nl = build_nonlinearity(fargs);

  const ExponentSet pair = strichartz_pair_for_k(grid.n, nl.k, Regime::Local);
  const double a_raw = estimate_strichartz_constant(metric, grid, pair.p, pair.q, a.trials,
                                                    a.horizon, mix_seed(common.seed, 1),
                                                    common.threads);
  const double inhom_raw = estimate_inhomogeneous_constant(
      metric, grid, pair.p, pair.q, a.trials, a.t1_source, mix_seed(common.seed, 2),
      common.threads);

  const double c_f = nl.lipschitz_constant();
  BudgetConstants c;
  c.A_k = a.slack * a_raw;
  c.C3 = a.slack * inhom_raw * c_f;
  c.C7 = c.C3;

  // Round-trip: the budget re-verifies both contraction inequalities on the
  // produced (M, T1); an inconsistent constants set throws here.
  const Budget budget = existence_budget(grid.n, nl.k, a.check_gnorm, c);

  json constants{{"version", version_stamp},
                 {"n", grid.n},
                 {"k", nl.k},
                 {"p", pair.p},
                 {"q", pair.q},
                 {"A_k", c.A_k},
                 {"C3", c.C3},
                 {"C7", c.C7},
                 {"C_f", c_f},
                 {"estimate_strichartz_constant", a_raw},
                 {"estimate_inhomogeneous_constant", inhom_raw},
                 {"slack", a.slack},
                 {"trials", a.trials},
                 {"horizon", a.horizon},
                 {"t1_source", a.t1_source},
                 {"seed", common.seed},
                 {"metric", metric_config(margs)},
                 {"grid", grid_config(gargs)}};
  write_text_file(ctx.dir / a.constants_out, constants.dump(2) + "\n");
  ctx.files.push_back(a.constants_out);
  std::cout << "wrote " << (ctx.dir / a.constants_out).string() << "\n";

  json results;
  results["estimate_strichartz_constant"] = a_raw;
  results["estimate_inhomogeneous_constant"] = inhom_raw;
  results["lipschitz_constant"] = c_f;
  results["A_k"] = c.A_k;
  results["C3"] = c.C3;
  results["C7"] = c.C7;
  results["existence_budget"] = json{{"g_norm", a.check_gnorm}, {"M", budget.M},
                                     {"alpha", budget.alpha},   {"t1", budget.t1},
                                     {"T1", budget.T1},         {"p", budget.p},
                                     {"q", budget.q}};

  std::cout << "calibrate: A_k = " << format_double(c.A_k) << ", C3 = C7 = "
            << format_double(c.C3) << ", budget T1(" << format_double(a.check_gnorm)
            << ") = " << format_double(budget.T1) << "\n";
  write_report(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

void run_selftest(const CommonArgs& common) {
  RunContext ctx = make_context("selftest", common, json::object());

  struct Check {
    const char* name;
    std::function<bool()> fn;
  };

  GridSpec small;
  small.kind = GridKind::Radial;
  small.n = 3;
  small.extent = 4.0;
  small.points_per_axis = 160;

  // Packets that fit the small grid with room for one unit of travel.
  auto compact_packet = [&small](std::uint64_t seed) {
    PacketBand band;
    band.center_radius = 1.0;
    band.sigma_lo = 0.2;
    band.sigma_hi = 0.4;
    StatePair data = random_packet_data(small, band, seed);
    const double norm = energy_pair_norm(small, data);
    data.u /= norm;
    data.v /= norm;
    return data;
  };

  const std::vector<Check> checks = {
      {"exponent windows and the quartic pair",
       [] {
         const KWindow w = k_window(3, Regime::Local);
         const ExponentSet s = strichartz_pair_for_k(3, 4.0, Regime::Global);
         return w.lower == 3.0 && w.upper == 5.0 && !w.upper_closed && w.contains(4.0) &&
                !w.contains(3.0) && s.p == 8.0 && s.q == 8.0 && s.d == 6.0 &&
                k_window(6, Regime::Local).upper_closed &&
                !k_window(6, Regime::Global).upper_closed;
       }},
      {"coefficient families meet their declared bounds",
       [&] {
         const ValidationReport r = validate(make_static_bump(0.5, 1.0), small, 3);
         return r.ok() && std::abs(r.max_value - 1.5) < 1e-3 && r.min_value >= 1.0;
       }},
      {"radial grid weights integrate the ball exactly",
       [&] {
         const double total = volume_weights(small).sum();
         const double ball = unit_sphere_area(3) * std::pow(small.extent, 3) / 3.0;
         return std::abs(total - ball) <= 1e-12 * ball;
       }},
      {"zero data stays zero under the flow",
       [&] {
         StatePair zero{Field::Zero(160), Field::Zero(160), 0.0};
         const StatePair out = propagate(make_unit_metric(), small, zero, 0.0, 0.5);
         return out.u.abs().maxCoeff() == 0.0 && out.v.abs().maxCoeff() == 0.0;
       }},
      {"energy is flat for a static lens",
       [&] {
         const Metric lens = make_static_bump(0.5, 1.0);
         StatePair data = compact_packet(7u);
         const double e0 = energy_value(lens, small, data);
         const StatePair out = propagate(lens, small, data, 0.0, 1.0);
         // Second-order drift at this resolution sits near 9e-4; a real
         // conservation bug shows up orders of magnitude above this gate.
         return std::abs(energy_value(lens, small, out) - e0) <= 3e-3 * e0;
       }},
      {"zero nonlinearity fixes the linear flow in one pass",
       [&] {
         Nonlinearity off;
         off.scale = 0.0;
         StatePair data = compact_packet(7u);
         PicardConfig cfg;
         cfg.t1 = 0.25;
         const PicardResult r = picard_solve(make_unit_metric(), small, data, off, cfg);
         return r.diagnostics.converged && r.diagnostics.iters_used == 1 &&
                r.diagnostics.differences.at(0) <= 1e-12;
       }},
      {"free rays fly straight at the light speed",
       [] {
         const Metric unit = make_unit_metric();
         Vec x = Vec::Zero(3), dir = Vec::Zero(3);
         dir[0] = 1.0;
         const Trajectory t =
             trace_ray(unit, make_null_ray(unit, 0.0, x, dir), 1.0, 0.01, {1.5});
         const RayState& last = t.samples.back();
         return std::abs(last.x.norm() - 2.0) <= 1e-12 && t.max_drift <= 1e-14 &&
                std::abs(t.escape_at(1.5) - 0.75) <= 1e-12;
       }},
      {"cutoff plateaus are exact",
       [&] {
         const Metric unit = make_unit_metric();
         const GridSpec g = monodromy_grid(small, unit, 0.5, 0);
         const CutoffPair cut = make_cutoff_pair(g, unit, 0.5);
         const Field r = radial_distance_field(g);
         bool ok = true;
         for (Eigen::Index i = 0; i < r.size(); ++i) {
           if (r[i] <= cut.inner_radius && cut.psi1[i] != 1.0) ok = false;
           if (r[i] >= cut.outer_radius && cut.psi1[i] != 0.0) ok = false;
         }
         return ok;
       }},
      {"the energy pair norm is homogeneous",
       [&] {
         StatePair data = compact_packet(11u);
         StatePair twice{2.0 * data.u, 2.0 * data.v, 0.0};
         const double a1 = energy_pair_norm(small, data);
         const double a2 = energy_pair_norm(small, twice);
         return std::abs(a2 - 2.0 * a1) <= 1e-12 * a2;
       }},
      {"field snapshots round-trip bitwise",
       [&] {
         StatePair data = compact_packet(13u);
         data.time = 0.75;
         const fs::path p = ctx.dir / "selftest_snapshot.bin";
         write_field_snapshot(p, small, data);
         GridSpec back;
         const StatePair read = read_field_snapshot(p, back);
         return back.points_per_axis == small.points_per_axis &&
                back.extent == small.extent && read.time == data.time &&
                (read.u == data.u).all() && (read.v == data.v).all();
       }},
  };

  json report = json::array();
  int failures = 0;
  for (const Check& c : checks) {
    bool pass = false;
    std::string note;
    try {
      pass = c.fn();
    } catch (const std::exception& e) {
      note = e.what();
    }
    if (!pass) ++failures;
    std::cout << (pass ? "ok   " : "FAIL ") << c.name << (note.empty() ? "" : ": " + note)
              << "\n";
    json entry{{"name", c.name}, {"pass", pass}};
    if (!note.empty()) entry["error"] = note;
    report.push_back(std::move(entry));
  }
  ctx.files.push_back("selftest_snapshot.bin");

  json results;
  results["checks"] = std::move(report);
  results["failures"] = failures;
  write_report(ctx, std::move(results));
  if (failures > 0)
    throw NumericalError("selftest: " + std::to_string(failures) + " of " +
                         std::to_string(checks.size()) + " checks failed");
  std::cout << "selftest: all " << checks.size() << " checks passed\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"wavelab: a numerical laboratory for semilinear waves on "
               "variable sound-speed backgrounds"};
  app.set_version_flag("--version", std::string(version_stamp));
  app.set_config("--config", "",
                 "Read options from a key = value file (TOML-style sections per "
                 "subcommand); command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  // exponents ---------------------------------------------------------------
  ExponentsArgs ea;
  CommonArgs e_common;
  CLI::App* exponents =
      app.add_subcommand("exponents", "Admissible windows, space-time pairs, and "
                                      "lifespan exponents");
  exponents->add_option("--n", ea.n, "Spatial dimension (>= 3)")->capture_default_str();
  exponents->add_option("--k", ea.k, "Nonlinearity power to resolve");
  exponents->add_option("--gamma", ea.gamma, "Regularity for admissibility checks")
      ->capture_default_str();
  exponents->add_option("--regime", ea.regime, "local or global estimates")
      ->check(CLI::IsMember({"local", "global"}))
      ->capture_default_str();
  exponents->add_option("--p", ea.p, "Time exponent of a pair to check");
  exponents->add_option("--q", ea.q, "Space exponent of a pair to check");
  exponents->add_option("--n-to", ea.n_to,
                        "Also write the window table for n in [--n, --n-to]");
  add_common_options(exponents, e_common);

  // simulate ----------------------------------------------------------------
  SimulateArgs sa;
  MetricArgs s_metric;
  GridArgs s_grid;
  s_grid.extent = 8.0;
  s_grid.points = 640;
  CommonArgs s_common;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Propagate random packet data and record norms "
                                     "and snapshots");
  simulate->add_option("--t-final", sa.t_final, "Propagation time")->capture_default_str();
  simulate->add_option("--epsilon", sa.epsilon, "Data amplitude (unit-norm template)")
      ->capture_default_str();
  simulate->add_option("--snapshots", sa.snapshots, "Binary snapshots after the initial one")
      ->capture_default_str();
  simulate->add_option("--stride", sa.stride, "Record norms every this many levels")
      ->capture_default_str();
  simulate->add_option("--q-list", sa.q_list, "Extra Lebesgue exponents for the series")
      ->delimiter(',');
  add_metric_options(simulate, s_metric);
  add_grid_options(simulate, s_grid);
  add_common_options(simulate, s_common);

  // picard ------------------------------------------------------------------
  PicardArgs pa;
  MetricArgs p_metric;
  GridArgs p_grid;
  p_grid.extent = 6.0;
  p_grid.points = 480;
  NonlinArgs p_nl;
  CommonArgs p_common;
  CLI::App* picard =
      app.add_subcommand("picard", "Fixed-point solve of the Duhamel equation on [0, t1]");
  picard->add_option("--epsilon", pa.epsilon, "Data amplitude (unit-norm template)")
      ->capture_default_str();
  picard->add_option("--t1", pa.t1, "Interval length")->capture_default_str();
  picard->add_option("--tol", pa.tol, "Convergence tolerance in the iteration norm")
      ->capture_default_str();
  picard->add_option("--max-iters", pa.max_iters, "Iteration cap")->capture_default_str();
  picard->add_option("--blowup-threshold", pa.blowup_threshold, "Sup-norm abort level")
      ->capture_default_str();
  picard->add_option("--constants", pa.constants_file,
                     "Calibrated constants file; adds the existence budget to the report");
  add_metric_options(picard, p_metric);
  add_grid_options(picard, p_grid);
  add_nonlinearity_options(picard, p_nl);
  add_common_options(picard, p_common);

  // lifespan ------------------------------------------------------------------
  LifespanArgs la;
  MetricArgs l_metric;
  GridArgs l_grid;
  l_grid.extent = 8.0;
  l_grid.points = 320;
  NonlinArgs l_nl;
  CommonArgs l_common;
  CLI::App* lifespan =
      app.add_subcommand("lifespan", "Amplitude sweep: existence time against data size");
  lifespan->add_option("--epsilons", la.epsilons, "Amplitudes, strictly decreasing")
      ->required()
      ->delimiter(',');
  lifespan->add_option("--horizon", la.horizon, "Censoring horizon")->capture_default_str();
  lifespan->add_option("--template", la.tmpl, "Data template")
      ->check(CLI::IsMember({"packet", "constant"}))
      ->capture_default_str();
  add_metric_options(lifespan, l_metric);
  add_grid_options(lifespan, l_grid);
  add_nonlinearity_options(lifespan, l_nl);
  add_common_options(lifespan, l_common);

  // rays ----------------------------------------------------------------------
  RaysArgs ra;
  MetricArgs r_metric;
  CommonArgs r_common;
  CLI::App* rays =
      app.add_subcommand("rays", "Bicharacteristic tracing and the non-trapping scan");
  rays->add_option("--n", ra.n, "Spatial dimension")->capture_default_str();
  rays->add_option("--rays", ra.n_rays, "Fan size for the scan")->capture_default_str();
  rays->add_option("--sigma-max", ra.sigma_max, "Per-ray parameter budget")
      ->capture_default_str();
  rays->add_option("--step", ra.step, "Integrator step")->capture_default_str();
  rays->add_option("--radii", ra.radii, "Escape radii (default: rho + 1, 2, 4)")
      ->delimiter(',');
  rays->add_option("--trace-x", ra.trace_x, "Launch position of the dumped ray")
      ->delimiter(',');
  rays->add_option("--trace-xi", ra.trace_xi, "Launch frequency of the dumped ray")
      ->delimiter(',');
  add_metric_options(rays, r_metric);
  add_common_options(rays, r_common);

  // monodromy -------------------------------------------------------------------
  MonodromyArgs ma;
  MetricArgs m_metric;
  m_metric.family = "periodic_bump";
  m_metric.amplitude = 0.3;
  GridArgs m_grid;
  CommonArgs m_common;
  CLI::App* monodromy =
      app.add_subcommand("monodromy", "Cutoff period-map norms over multiples of the "
                                      "period, with a decay fit");
  monodromy->add_option("--T", ma.T,
                        "Period (0: take the coefficient's own period)")
      ->capture_default_str();
  monodromy->add_option("--n-values", ma.n_values, "Period multiples N to probe")
      ->delimiter(',')
      ->capture_default_str();
  monodromy->add_option("--probes", ma.probes, "Random starts per estimate")
      ->capture_default_str();
  monodromy->add_option("--refine-steps", ma.refine_steps, "Refinement sweeps per start")
      ->capture_default_str();
  monodromy->add_option("--budget-mb", ma.budget_mb, "Memory budget per horizon grid")
      ->capture_default_str();
  add_metric_options(monodromy, m_metric);
  add_grid_options(monodromy, m_grid);
  add_common_options(monodromy, m_common);

  // calibrate ---------------------------------------------------------------------
  CalibrateArgs ca;
  MetricArgs c_metric;
  GridArgs c_grid;
  c_grid.extent = 7.0;
  c_grid.points = 280;
  NonlinArgs c_nl;
  c_nl.k = 4.0;
  CommonArgs c_common;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Measure flow constants and write a constants file "
                                      "for the existence budget");
  calibrate->add_option("--trials", ca.trials, "Random draws per estimator")
      ->capture_default_str();
  calibrate->add_option("--horizon", ca.horizon, "Time window for the homogeneous estimate")
      ->capture_default_str();
  calibrate->add_option("--t1-source", ca.t1_source, "Source support for the forced estimate")
      ->capture_default_str();
  calibrate->add_option("--slack", ca.slack, "Safety factor applied to measured constants")
      ->capture_default_str();
  calibrate->add_option("--check-gnorm", ca.check_gnorm,
                        "Data norm for the budget round-trip check")
      ->capture_default_str();
  calibrate->add_option("--constants-out", ca.constants_out, "Constants file name")
      ->capture_default_str();
  add_metric_options(calibrate, c_metric);
  add_grid_options(calibrate, c_grid);
  add_nonlinearity_options(calibrate, c_nl);
  add_common_options(calibrate, c_common);

  // selftest ------------------------------------------------------------------------
  CommonArgs t_common;
  CLI::App* selftest =
      app.add_subcommand("selftest", "Fast cross-module invariant checks");
  add_common_options(selftest, t_common);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("wavelab");
  for (const std::string& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;  // help / version requests
    return dynamic_cast<const CLI::ConfigError*>(&e) != nullptr ? 2 : 1;
  }

  try {
    if (exponents->parsed()) run_exponents(ea, e_common);
    else if (simulate->parsed()) run_simulate(sa, s_metric, s_grid, s_common);
    else if (picard->parsed()) run_picard(pa, p_metric, p_grid, p_nl, p_common);
    else if (lifespan->parsed()) run_lifespan(la, l_metric, l_grid, l_nl, l_common);
    else if (rays->parsed()) run_rays(ra, r_metric, r_common);
    else if (monodromy->parsed()) run_monodromy(ma, m_metric, m_grid, m_common);
    else if (calibrate->parsed()) run_calibrate(ca, c_metric, c_grid, c_nl, c_common);
    else if (selftest->parsed()) run_selftest(t_common);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace wavelab
