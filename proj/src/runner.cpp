#include "scalelaw/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "scalelaw/asymptotics.hpp"
#include "scalelaw/dmft_discrete.hpp"
#include "scalelaw/dmft_fourier.hpp"
#include "scalelaw/ensemble.hpp"
#include "scalelaw/parallel.hpp"
#include "scalelaw/sgd_online.hpp"
#include "scalelaw/simulator.hpp"

namespace scalelaw {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CellResult {
  std::string label;
  std::vector<std::string> outputs;
  json diagnostics = json::object();
  bool converged = true;
  bool failed = false;
  std::string error;
  Table curve;  // main curve, used for sweep grids
};

Provenance provenance(const RunConfig& cfg, const std::string& solver) {
  Provenance p;
  p.config_hash = cfg.hash;
  p.seeds = cfg.seeds;
  p.extra = {{"solver", solver}, {"tool_version", kToolVersion}};
  return p;
}

void emit(CellResult& cell, const RunConfig& cfg, const std::string& path, const Table& t,
          std::vector<std::pair<std::string, std::string>> extra = {}) {
  Provenance p = provenance(cfg, to_string(cfg.solver));
  for (auto& e : extra) p.extra.push_back(std::move(e));
  write_csv(path, p, t.columns, t.rows);
  cell.outputs.push_back(path);
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

OptimizerKind optimizer_kind(const RunConfig& cfg) {
  if (cfg.optimizer == "momentum") return OptimizerKind::discrete_gd_momentum;
  if (cfg.optimizer == "flow") return OptimizerKind::gradient_flow_exact;
  if (cfg.optimizer == "sgd") return OptimizerKind::one_pass_sgd;
  return OptimizerKind::discrete_gd;
}

Table loss_table(const LossCurve& c, double time_unit) {
  Table t{{"t", "train_loss", "test_loss", "std_train", "std_test"}, {}};
  for (std::size_t i = 0; i < c.size(); ++i)
    t.rows.push_back({c.t[i] * time_unit, c.train[i], c.test[i],
                      c.std_train.empty() ? 0.0 : c.std_train[i],
                      c.std_test.empty() ? 0.0 : c.std_test[i]});
  return t;
}

LossCurve simulate_seeds(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape) {
  OptimizerConfig opt;
  opt.kind = optimizer_kind(cfg);
  opt.eta = cfg.eta;
  opt.mu = cfg.mu;
  opt.batch = cfg.batch;
  opt.steps = cfg.steps;
  return multi_seed(cfg.seeds, [&](std::uint64_t s) { return simulate(spec, shape, opt, s); });
}

void run_simulate(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape,
                  const std::string& dir, CellResult& cell) {
  LossCurve c = simulate_seeds(cfg, spec, shape);
  // Gradient flow already reports continuous time.
  double unit = optimizer_kind(cfg) == OptimizerKind::gradient_flow_exact ? 1.0 : cfg.eta;
  cell.curve = loss_table(c, unit);
  emit(cell, cfg, dir + "/simulation.csv", cell.curve);
}

void run_dmft(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape,
              const std::string& dir, CellResult& cell) {
  OrderParameters ops = solve_discrete(spec, shape, cfg.steps, cfg.eta, cfg.mu);
  auto test = ops.test_loss(), train = ops.train_loss(), gap = train_test_gap(ops);
  cell.curve.columns = {"t", "test_loss", "train_loss", "gap"};
  for (std::size_t i = 0; i < ops.T; ++i)
    cell.curve.rows.push_back({double(i) * cfg.eta, test[i], train[i], gap[i]});
  cell.diagnostics["iterations"] = ops.correlation_diag.iterations;
  cell.diagnostics["residual"] = ops.correlation_diag.residual;
  cell.diagnostics["converged"] = ops.correlation_diag.converged;
  cell.converged = ops.correlation_diag.converged;
  emit(cell, cfg, dir + "/dmft.csv", cell.curve);
  if (cfg.with_simulation) {
    RunConfig sim = cfg;
    sim.optimizer = cfg.mu > 0.0 ? "momentum" : "gd";
    LossCurve c = simulate_seeds(sim, spec, shape);
    emit(cell, cfg, dir + "/simulation.csv", loss_table(c, cfg.eta));
  }
}

void run_fourier(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape,
                 const std::string& dir, CellResult& cell) {
  FourierSettings fs;
  fs.talbot_nodes_2d = cfg.talbot_nodes;
  auto times = time_grid(cfg);
  TheoryCurve c = fourier_loss_curve(spec, shape, times, fs);
  cell.curve.columns = {"t", "test_loss", "train_loss"};
  for (std::size_t i = 0; i < times.size(); ++i)
    cell.curve.rows.push_back({times[i], c.test[i], c.train[i]});
  cell.diagnostics["talbot_nodes"] = cfg.talbot_nodes;
  emit(cell, cfg, dir + "/fourier.csv", cell.curve);
}

void run_sgd(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape,
             const std::string& dir, CellResult& cell) {
  SgdSolution s = solve_sgd_dmft(spec, shape, cfg.batch, cfg.eta, cfg.steps);
  cell.curve.columns = {"t", "loss", "bias_component", "variance_component"};
  for (std::size_t i = 0; i < s.curve.size(); ++i)
    cell.curve.rows.push_back({double(i) * cfg.eta, s.curve.test[i], s.bias_component[i],
                               s.variance_component[i]});
  SgdPlateau p = sgd_asymptote(s);
  cell.diagnostics["iterations"] = s.ops.diag.iterations;
  cell.diagnostics["residual"] = s.ops.diag.residual;
  cell.diagnostics["converged"] = s.ops.diag.converged;
  cell.diagnostics["plateau"] = p.value;
  cell.diagnostics["plateau_reached"] = p.reached;
  cell.diagnostics["plateau_drift"] = p.drift;
  cell.converged = s.ops.diag.converged;
  emit(cell, cfg, dir + "/sgd.csv", cell.curve,
       {{"plateau", fmt(p.value)}, {"plateau_reached", p.reached ? "true" : "false"}});
}

void run_ensemble(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape,
                  const std::string& dir, CellResult& cell) {
  auto times = time_grid(cfg);
  EnsembleCurve e = ensembled_loss(spec, shape, times, cfg.E, cfg.bags, cfg.talbot_nodes);
  cell.curve.columns = {"t", "loss_ens", "bias", "var_init", "var_data", "var_inter"};
  for (std::size_t i = 0; i < times.size(); ++i)
    cell.curve.rows.push_back(
        {times[i], e.loss_ens[i], e.bias[i], e.var_init[i], e.var_data[i], e.var_inter[i]});
  cell.diagnostics["divergent"] = e.divergent;
  cell.converged = !e.divergent;
  emit(cell, cfg, dir + "/ensemble.csv", cell.curve,
       {{"E", fmt(cfg.E)}, {"bags", fmt(cfg.bags)}});
  if (cfg.width_compute) {
    WidthEnsembleTable tab =
        ensemble_vs_width(spec, shape, *cfg.width_compute, cfg.width_t, cfg.width_E, cfg.talbot_nodes);
    Table t{{"nu", "E", "loss"}, {}};
    for (const auto& r : tab.rows) t.rows.push_back({r.nu, r.E, r.loss});
    cell.diagnostics["width_best_E"] = tab.rows[tab.best].E;
    cell.diagnostics["bias_monotone"] = tab.bias_monotone;
    cell.diagnostics["variance_monotone"] = tab.variance_monotone;
    emit(cell, cfg, dir + "/recommendation.csv", t,
         {{"compute", fmt(*cfg.width_compute)}, {"t", fmt(cfg.width_t)},
          {"best_E", fmt(tab.rows[tab.best].E)}});
  }
}

void run_asymptote(const RunConfig& cfg, const Spectrum& spec, const SystemShape& shape,
                   const std::string& dir, CellResult& cell) {
  AsymptoticSolution sol = solve_r(spec, shape);
  FinalLoss fl = final_loss(sol, spec, shape);
  SystemShape kshape = shape;
  kshape.N = kInf;
  double kernel = kernel_regression_limit(spec, kshape).test;
  cell.curve.columns = {"N", "P", "r", "test", "train", "kernel_test"};
  cell.curve.rows.push_back({shape.N, shape.P, sol.r, fl.test, fl.train, kernel});
  cell.diagnostics["branch"] = sol.branch == Branch::over ? "over" : "under";
  cell.diagnostics["divergent"] = fl.divergent;
  std::vector<std::pair<std::string, std::string>> extra = {
      {"branch", sol.branch == Branch::over ? "over" : "under"}};
  if (cfg.spectrum.kind == SpectrumSource::Kind::power_law) {
    ScalingReport r = compute_optimal(cfg.spectrum.a, cfg.spectrum.b);
    cell.diagnostics["r_t"] = r.r_t;
    cell.diagnostics["r_N"] = r.r_N;
    cell.diagnostics["r_P"] = r.r_P;
    cell.diagnostics["compute_optimal_loss_exponent"] = r.c_L;
    extra.push_back({"r_t", fmt(r.r_t)});
    extra.push_back({"r_N", fmt(r.r_N)});
  }
  emit(cell, cfg, dir + "/asymptote.csv", cell.curve, extra);
}

CellResult run_cell(const RunConfig& cfg, const std::string& dir, const std::string& label) {
  CellResult cell;
  cell.label = label;
  try {
    Spectrum spec = build_spectrum(cfg);
    SystemShape shape = build_shape(cfg, spec);
    fs::create_directories(dir);
    switch (cfg.solver) {
      case SolverKind::simulate: run_simulate(cfg, spec, shape, dir, cell); break;
      case SolverKind::dmft: run_dmft(cfg, spec, shape, dir, cell); break;
      case SolverKind::fourier:
      case SolverKind::frontier: run_fourier(cfg, spec, shape, dir, cell); break;
      case SolverKind::sgd: run_sgd(cfg, spec, shape, dir, cell); break;
      case SolverKind::ensemble: run_ensemble(cfg, spec, shape, dir, cell); break;
      case SolverKind::asymptote: run_asymptote(cfg, spec, shape, dir, cell); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const SolverError& e) {
    cell.failed = true;
    cell.converged = false;
    cell.error = e.what();
    cell.diagnostics["residual"] = e.residual;
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.converged = false;
    cell.error = e.what();
  }
  return cell;
}

std::string timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int finish(const RunConfig& cfg, const std::vector<CellResult>& cells,
           const std::vector<std::string>& extra_outputs, json extra, double wall,
           std::ostream& log) {
  json m;
  m["tool_version"] = kToolVersion;
  m["started"] = timestamp();
  m["wall_time_s"] = wall;
  m["config_sha256"] = cfg.hash;
  m["config"] = cfg.text;
  m["solver"] = to_string(cfg.solver);
  m["seeds"] = cfg.seeds;
  json outputs = json::array(), runs = json::array();
  int code = 0;
  for (const auto& c : cells) {
    json r;
    r["label"] = c.label;
    r["outputs"] = c.outputs;
    r["diagnostics"] = c.diagnostics;
    r["converged"] = c.converged;
    r["failed"] = c.failed;
    if (!c.error.empty()) r["error"] = c.error;
    runs.push_back(r);
    for (const auto& o : c.outputs) outputs.push_back(o);
    if (c.failed || !c.converged) {
      code = 2;
      log << "run " << (c.label.empty() ? "main" : c.label) << ": "
          << (c.error.empty() ? "not converged" : c.error) << "\n";
    }
  }
  for (const auto& o : extra_outputs) outputs.push_back(o);
  m["outputs"] = outputs;
  m["runs"] = runs;
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["status"] = code == 0 ? "ok" : "not_converged";

  fs::create_directories(cfg.output);
  std::string path = cfg.output + "/manifest.json";
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    out << m.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest");
  }
  fs::rename(tmp, path);
  return code;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<double> time_grid(const RunConfig& cfg) {
  std::vector<double> t;
  const std::size_t n = cfg.t_points;
  for (std::size_t i = 0; i < n; ++i) {
    double u = n == 1 ? 0.0 : double(i) / double(n - 1);
    t.push_back(std::exp(std::log(cfg.t_min) + u * (std::log(cfg.t_max) - std::log(cfg.t_min))));
  }
  return t;
}

int execute(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.sweep_parameter.empty())
    return execute_sweep(cfg, cfg.sweep_parameter, cfg.sweep_values, log);
  if (cfg.solver == SolverKind::frontier)
    throw ConfigError("solver 'frontier' needs [sweep] parameter = N with a value list");
  auto t0 = std::chrono::steady_clock::now();
  CellResult cell = run_cell(cfg, cfg.output, "");
  return finish(cfg, {cell}, {}, json::object(), seconds_since(t0), log);
}

int execute_sweep(const RunConfig& cfg, const std::string& parameter,
                  const std::vector<double>& values, std::ostream& log) {
  const auto& allowed = sweep_parameters();
  if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end())
    throw ConfigError("sweep parameter '" + parameter + "' is not one of N, P, B, E, eta, a, b");
  if (values.empty()) throw ConfigError("sweep over '" + parameter + "' has an empty value list");
  if (cfg.solver == SolverKind::frontier && parameter != "N")
    throw ConfigError("solver 'frontier' sweeps N only, got '" + parameter + "'");
  std::size_t removed = 0;
  std::vector<double> vals = dedup_values(values, &removed);
  if (removed)
    log << "warning: removed " << removed << " duplicate value(s) from the '" << parameter
        << "' sweep\n";

  // Validate every cell before running any.
  std::vector<RunConfig> cfgs;
  for (double v : vals) {
    RunConfig c = with_parameter(cfg, parameter, v);
    build_shape(c, build_spectrum(c));
    cfgs.push_back(std::move(c));
  }

  auto t0 = std::chrono::steady_clock::now();
  std::vector<CellResult> cells(vals.size());
  parallel_for(vals.size(), [&](std::size_t i) {
    std::string label = parameter + "=" + fmt(vals[i]);
    cells[i] = run_cell(cfgs[i], cfg.output + "/" + label, label);
  });

  // Combined grid: the parameter, a validity flag and the cell's main curve.
  std::vector<std::string> cols;
  for (const auto& c : cells)
    if (!c.failed && !c.curve.columns.empty()) {
      cols = c.curve.columns;
      break;
    }
  Table grid;
  // The asymptote curve has its own N and P columns.
  bool clash = std::find(cols.begin(), cols.end(), parameter) != cols.end();
  grid.columns = {clash ? "sweep_" + parameter : parameter, "valid"};
  grid.columns.insert(grid.columns.end(), cols.begin(), cols.end());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (c.failed || c.curve.columns != cols) {
      std::vector<double> row(grid.columns.size(), kNaN);
      row[0] = vals[i];
      row[1] = 0.0;
      grid.rows.push_back(row);
      continue;
    }
    for (const auto& r : c.curve.rows) {
      std::vector<double> row = {vals[i], c.converged ? 1.0 : 0.0};
      row.insert(row.end(), r.begin(), r.end());
      grid.rows.push_back(row);
    }
  }
  Provenance prov = provenance(cfg, to_string(cfg.solver));
  prov.extra.push_back({"sweep", parameter});
  std::vector<std::string> extra_outputs;
  std::string grid_path = cfg.output + "/grid.csv";
  write_csv(grid_path, prov, grid.columns, grid.rows);
  extra_outputs.push_back(grid_path);

  json extra = json::object();
  extra["sweep"] = {{"parameter", parameter}, {"values", vals}, {"duplicates_removed", removed}};

  if (cfg.solver == SolverKind::frontier) {
    std::vector<SurfacePoint> surface;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].failed) continue;
      for (const auto& r : cells[i].curve.rows) surface.push_back({vals[i], r[0], r[1]});
    }
    auto front = pareto_frontier(surface, cfg.frontier_buckets);
    Table ft{{"C", "loss_star", "N_star", "t_star"}, {}};
    std::vector<double> C, L;
    for (const auto& f : front) {
      ft.rows.push_back({f.C, f.loss, f.N, f.t});
      C.push_back(f.C);
      L.push_back(f.loss);
    }
    std::vector<std::pair<std::string, std::string>> fe;
    try {
      PowerLawFit fit = fit_power_law(C, L, cfg.fit_min, cfg.fit_max);
      extra["frontier_fit"] = {{"exponent", fit.exponent}, {"prefactor", fit.prefactor},
                               {"r2", fit.r2}, {"points", fit.points}};
      fe.push_back({"fit_exponent", fmt(fit.exponent)});
    } catch (const InvalidArgument& e) {
      extra["frontier_fit"] = {{"error", e.what()}};
    }
    prov.extra.insert(prov.extra.end(), fe.begin(), fe.end());
    std::string fpath = cfg.output + "/frontier.csv";
    write_csv(fpath, prov, ft.columns, ft.rows);
    extra_outputs.push_back(fpath);
  }
  return finish(cfg, cells, extra_outputs, extra, seconds_since(t0), log);
}

}  // namespace scalelaw
