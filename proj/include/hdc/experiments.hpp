#pragma once
/**
 * @file experiments.hpp
 * @brief Declarative experiment runs behind the `hdc` command.
 *
 * Each run_* function takes a RunConfig, writes its files below
 * `config.output` and returns the in-memory results together with an exit
 * code. CSV and Markdown outputs are deterministic; timings and evaluation
 * counts go to `summary.json` only.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdc/ivp.hpp"
#include "hdc/oracle.hpp"
#include "hdc/pde.hpp"
#include "hdc/problems.hpp"
#include "hdc/stability.hpp"
#include "hdc/steppers.hpp"
#include "hdc/table.hpp"

namespace hdc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitIo = 74;

/// Bad configuration: unknown names, malformed step lists and the like.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output or cache files could not be written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Convergence, Stability, Pde, Solve, List };
enum class TableFormat { Csv, Markdown };

inline std::optional<Command> parse_command(const std::string& s) {
  if (s == "convergence") return Command::Convergence;
  if (s == "stability") return Command::Stability;
  if (s == "pde") return Command::Pde;
  if (s == "solve") return Command::Solve;
  if (s == "list") return Command::List;
  return std::nullopt;
}

struct RunConfig {
  Command command = Command::Convergence;
  std::string problem;
  ParamMap params;
  std::vector<StepperKind> methods;
  std::vector<double> steps;          // step sizes k, strictly decreasing
  std::vector<std::size_t> n_steps;   // alternative: step counts N, strictly increasing
  std::string output = "hdc-out";
  TableFormat format = TableFormat::Csv;
  double ref_tol = 1e-12;
  std::string ref_cache;              // empty: fall back to HDC_REF_CACHE
  StepperKind ref_generator = StepperKind::Dc6Rk24;
  std::size_t ref_factor = 4;         // reference runs at >= this multiple of the finest N
  std::uint64_t ref_budget = 1'000'000'000ULL;  // total reference steps over all doublings
  std::size_t max_samples = 0;        // 0: ODE / PDE default cap
  BoundaryKind bc = BoundaryKind::Dirichlet;
  std::size_t m = 0;                  // grid intervals, 0: problem default
  std::vector<double> snapshots;      // PDE snapshot times
  RasterSpec raster;
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

inline StepperKind parse_method_or_throw(const std::string& s) {
  auto k = parse_stepper(s);
  if (!k) throw UsageError("unknown method '" + s + "' (expected RK2, RK4, RK6 or DC6RK24)");
  return *k;
}

inline BoundaryKind parse_bc_or_throw(const std::string& s) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "DBC" || u == "DIRICHLET") return BoundaryKind::Dirichlet;
  if (u == "NBC" || u == "NEUMANN") return BoundaryKind::Neumann;
  throw UsageError("unknown boundary condition '" + s + "' (expected DBC or NBC)");
}

inline TableFormat parse_format_or_throw(const std::string& s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  throw UsageError("unknown format '" + s + "' (expected csv or markdown)");
}

/// Parse "name=value" into `params`.
inline void parse_param(const std::string& kv, ParamMap& params) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + kv + "'");
  try {
    std::size_t used = 0;
    const std::string val = kv.substr(eq + 1);
    const double v = std::stod(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
    params[kv.substr(0, eq)] = v;
  } catch (const std::exception&) {
    throw UsageError("--param value is not a number: '" + kv + "'");
  }
}

/**
 * Overlay a JSON document onto `cfg`. Keys mirror the RunConfig fields;
 * unknown keys are rejected so typos do not pass silently.
 */
inline void apply_json(const nlohmann::json& j, RunConfig& cfg) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") {
        auto c = parse_command(v.get<std::string>());
        if (!c) throw UsageError("unknown command '" + v.get<std::string>() + "'");
        cfg.command = *c;
      } else if (key == "problem") {
        cfg.problem = v.get<std::string>();
      } else if (key == "params") {
        for (const auto& [pk, pv] : v.items()) cfg.params[pk] = pv.get<double>();
      } else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& s : v) cfg.methods.push_back(parse_method_or_throw(s.get<std::string>()));
      } else if (key == "steps") {
        cfg.steps = v.get<std::vector<double>>();
      } else if (key == "n_steps") {
        cfg.n_steps = v.get<std::vector<std::size_t>>();
      } else if (key == "output") {
        cfg.output = v.get<std::string>();
      } else if (key == "format") {
        cfg.format = parse_format_or_throw(v.get<std::string>());
      } else if (key == "ref_tol") {
        cfg.ref_tol = v.get<double>();
      } else if (key == "ref_cache") {
        cfg.ref_cache = v.get<std::string>();
      } else if (key == "ref_generator") {
        cfg.ref_generator = parse_method_or_throw(v.get<std::string>());
      } else if (key == "ref_factor") {
        cfg.ref_factor = v.get<std::size_t>();
      } else if (key == "ref_budget") {
        cfg.ref_budget = v.get<std::uint64_t>();
      } else if (key == "max_samples") {
        cfg.max_samples = v.get<std::size_t>();
      } else if (key == "bc") {
        cfg.bc = parse_bc_or_throw(v.get<std::string>());
      } else if (key == "m") {
        cfg.m = v.get<std::size_t>();
      } else if (key == "snapshots") {
        cfg.snapshots = v.get<std::vector<double>>();
      } else if (key == "raster") {
        for (const auto& [rk, rv] : v.items()) {
          if (rk == "re_min") cfg.raster.re_min = rv.get<double>();
          else if (rk == "re_max") cfg.raster.re_max = rv.get<double>();
          else if (rk == "im_min") cfg.raster.im_min = rv.get<double>();
          else if (rk == "im_max") cfg.raster.im_max = rv.get<double>();
          else if (rk == "nx") cfg.raster.nx = rv.get<std::size_t>();
          else if (rk == "ny") cfg.raster.ny = rv.get<std::size_t>();
          else throw UsageError("unknown raster key '" + rk + "'");
        }
      } else {
        throw UsageError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config type error: ") + e.what());
  }
}

inline RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  apply_json(j, base);
  return base;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace detail {

/// Step counts for the configured steps; validates ordering.
inline std::vector<std::size_t> resolve_step_counts(const RunConfig& cfg, double t_end) {
  if (!cfg.steps.empty() && !cfg.n_steps.empty())
    throw UsageError("give either steps (k) or n_steps (N), not both");
  std::vector<std::size_t> ns;
  if (!cfg.steps.empty()) {
    for (std::size_t i = 0; i < cfg.steps.size(); ++i) {
      const double k = cfg.steps[i];
      if (!(k > 0.0)) throw UsageError("step sizes must be positive");
      if (i > 0 && !(k < cfg.steps[i - 1])) throw UsageError("steps must be strictly decreasing in k");
      try {
        ns.push_back(steps_for(t_end, k));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  } else {
    for (std::size_t i = 0; i < cfg.n_steps.size(); ++i) {
      if (cfg.n_steps[i] == 0) throw UsageError("n_steps must be positive");
      if (i > 0 && !(cfg.n_steps[i] > cfg.n_steps[i - 1]))
        throw UsageError("n_steps must be strictly increasing");
      ns.push_back(cfg.n_steps[i]);
    }
  }
  if (ns.empty()) throw UsageError("no steps given");
  return ns;
}

inline void require_methods(const RunConfig& cfg) {
  if (cfg.methods.empty()) throw UsageError("no methods given");
}

inline std::filesystem::path ensure_output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

/**
 * Union of sample times of all runs, each run sampled with `cap` points.
 *
 * Samples are merged as integer positions on the common lcm grid: the same
 * instant computed from two step sizes may round to different doubles.
 */
inline std::vector<double> union_sample_times(const std::vector<std::size_t>& ns, double t_end,
                                              std::size_t cap) {
  std::size_t l = 1;
  for (std::size_t n : ns) l = std::lcm(l, n);
  std::set<std::size_t> positions;
  for (std::size_t n : ns)
    for (std::size_t idx : sample_indices(n, cap)) positions.insert(idx * (l / n));
  std::vector<double> times;
  times.reserve(positions.size());
  for (std::size_t pos : positions) times.push_back(t_end * static_cast<double>(pos) / static_cast<double>(l));
  return times;
}

/// Smallest common multiple of all N, doubled until it is >= factor * max N.
inline std::size_t reference_start(const std::vector<std::size_t>& ns, std::size_t factor) {
  std::size_t l = 1;
  for (std::size_t n : ns) l = std::lcm(l, n);
  const std::size_t target = factor * *std::max_element(ns.begin(), ns.end());
  while (l < target) l *= 2;
  return l;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string slug(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convergence tables (ODE and PDE)
// ---------------------------------------------------------------------------

struct CellSummary {
  StepperKind method{};
  double step = 0.0;
  std::size_t n_steps = 0;
  bool diverged = false;
  std::size_t diverged_at_step = 0;
  std::uint64_t rhs_evals = 0;
  double wall_seconds = 0.0;
};

struct ConvergenceResult {
  int exit_code = kExitOk;
  std::vector<std::pair<StepperKind, ConvergenceTable>> tables;
  std::vector<CellSummary> cells;
  std::optional<ReferenceTrajectory> reference;
  std::vector<std::filesystem::path> files;

  const ConvergenceTable& table(StepperKind kind) const {
    for (const auto& [k, t] : tables)
      if (k == kind) return t;
    throw std::out_of_range("no table for method " + std::string(to_string(kind)));
  }
};

namespace detail {

enum class ErrorNorm { MaxAbsPerComponent, EuclideanPerBlock };

/**
 * Shared table pipeline: integrate every (method, N) cell, measure errors
 * against the exact solution or an oracle reference and assign orders.
 */
inline ConvergenceResult convergence_tables(const RunConfig& cfg, const OdeProblem& problem,
                                            ErrorNorm norm, std::size_t blocks,
                                            std::vector<std::string> labels, std::ostream* log) {
  require_methods(cfg);
  const auto ns = resolve_step_counts(cfg, problem.t_end);
  const std::size_t cap = cfg.max_samples > 0
                              ? cfg.max_samples
                              : (norm == ErrorNorm::MaxAbsPerComponent ? kOdeSampleCap : kPdeSampleCap);
  if (cap < 2) throw UsageError("max_samples must be at least 2");

  ConvergenceResult result;
  if (!problem.exact) {
    const auto times = union_sample_times(ns, problem.t_end, cap);
    const std::size_t start = reference_start(ns, cfg.ref_factor);
    if (log) *log << "reference for " << problem.tag << ": start N = " << start << ", tol = " << cfg.ref_tol << '\n';
    try {
      result.reference = obtain_reference(problem, times, cfg.ref_tol, cfg.ref_generator, start,
                                          resolve_cache_dir(cfg.ref_cache), cfg.ref_budget);
    } catch (const OracleError&) {
      throw;
    } catch (const std::runtime_error& e) {
      // anything else out of the cache layer is a file-system failure
      throw IoError(e.what());
    }
  }

  for (StepperKind kind : cfg.methods) {
    ConvergenceTable table;
    table.title = problem.tag + ", " + std::string(to_string(kind));
    table.components = labels;
    for (std::size_t n : ns) {
      const auto t0 = std::chrono::steady_clock::now();
      TrajectoryRun run = integrate(problem, kind, n, cap);
      CellSummary cell{kind, run.step, n, !run.completed(), run.diverged_at_step, run.rhs_evals,
                       seconds_since(t0)};
      ConvergenceRecord rec;
      rec.step = run.step;
      rec.n_steps = n;
      rec.diverged = !run.completed();
      if (rec.diverged) {
        rec.errors.assign(labels.size(), std::numeric_limits<double>::quiet_NaN());
        result.exit_code = kExitPartial;
      } else if (problem.exact) {
        rec.errors = norm == ErrorNorm::MaxAbsPerComponent ? max_abs_error(run, *problem.exact)
                                                           : euclidean_error(run, *problem.exact, blocks);
      } else {
        const auto ref = result.reference->aligned_with(run);
        rec.errors = norm == ErrorNorm::MaxAbsPerComponent ? max_abs_error(run, ref)
                                                           : euclidean_error(run, ref, blocks);
      }
      if (log) {
        *log << to_string(kind) << " N=" << n << (rec.diverged ? " DIVERGED" : " ok");
        if (!rec.diverged)
          for (double e : rec.errors) *log << ' ' << detail::sci3(e);
        *log << " (" << detail::sig3(cell.wall_seconds) << " s)\n";
      }
      table.rows.push_back(std::move(rec));
      result.cells.push_back(cell);
    }
    assign_orders(table.rows);
    result.tables.emplace_back(kind, std::move(table));
  }
  return result;
}

inline nlohmann::json cells_json(const std::vector<CellSummary>& cells) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json j = {{"method", std::string(to_string(c.method))},
                        {"k", c.step},
                        {"n_steps", c.n_steps},
                        {"status", c.diverged ? "DIVERGED" : "COMPLETED"},
                        {"rhs_evals", c.rhs_evals},
                        {"wall_seconds", c.wall_seconds}};
    if (c.diverged) j["diverged_at_step"] = c.diverged_at_step;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline void write_tables(const RunConfig& cfg, const std::string& stem, ConvergenceResult& result) {
  const auto dir = ensure_output_dir(cfg);
  for (const auto& [kind, table] : result.tables) {
    const std::string base = stem + "_" + std::string(to_string(kind));
    if (cfg.format == TableFormat::Csv) {
      std::ostringstream os;
      write_csv(os, table);
      write_text(dir / (base + ".csv"), os.str());
      result.files.push_back(dir / (base + ".csv"));
    } else {
      write_text(dir / (base + ".md"), render_markdown(table));
      result.files.push_back(dir / (base + ".md"));
    }
  }
  nlohmann::json summary = {{"problem", stem}, {"exit_code", result.exit_code}, {"cells", cells_json(result.cells)}};
  if (result.reference) {
    summary["reference"] = {{"id", result.reference->problem_id},
                            {"generator", std::string(to_string(result.reference->generator))},
                            {"n_steps_finest", result.reference->n_steps_finest},
                            {"agreement", result.reference->agreement},
                            {"agreement_history", result.reference->agreement_history}};
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  result.files.push_back(dir / "summary.json");
}

inline OdeProblem make_ode_or_throw(const RunConfig& cfg) {
  try {
    return make_ode_problem(cfg.problem, cfg.params);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline std::size_t default_intervals(const std::string& name) { return name == "fisher" ? 80 : 100; }

inline RdProblem make_pde_or_throw(const RunConfig& cfg) {
  std::optional<double> t_end;
  for (const auto& [k, v] : cfg.params) {
    if (k != "T") throw UsageError("PDE problem '" + cfg.problem + "' has no parameter '" + k + "'");
    t_end = v;
  }
  const std::size_t m = cfg.m > 0 ? cfg.m : default_intervals(cfg.problem);
  try {
    return make_pde_problem(cfg.problem, m, cfg.bc, t_end);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline bool is_pde_name(const std::string& name) {
  return name == "fisher" || name == "bistable" || name == "three_species";
}

}  // namespace detail

/// Error tables for an ODE benchmark; max-abs error per component.
inline ConvergenceResult run_convergence(const RunConfig& cfg, std::ostream* log = nullptr) {
  const OdeProblem problem = detail::make_ode_or_throw(cfg);
  auto result = detail::convergence_tables(cfg, problem, detail::ErrorNorm::MaxAbsPerComponent, 1,
                                           component_labels(problem.dim), log);
  detail::write_tables(cfg, problem.name, result);
  return result;
}

struct PdeResult : ConvergenceResult {
  /// One entry per snapshot time: per-species profiles on the full grid.
  std::vector<std::pair<double, std::vector<std::vector<double>>>> snapshots;
  std::vector<double> grid;
};

/// Error tables for a reaction-diffusion benchmark; Euclidean norm per species.
inline PdeResult run_pde(const RunConfig& cfg, std::ostream* log = nullptr) {
  const RdProblem pde = detail::make_pde_or_throw(cfg);
  std::vector<std::string> labels =
      pde.species == 1 ? std::vector<std::string>{"u"} : std::vector<std::string>{"u", "v", "w"};
  PdeResult result;
  static_cast<ConvergenceResult&>(result) = detail::convergence_tables(
      cfg, pde.as_ode, detail::ErrorNorm::EuclideanPerBlock, pde.species, labels, log);
  const std::string stem = pde.name + "_" + std::string(to_string(pde.bc)) + "_M" + std::to_string(pde.intervals);
  detail::write_tables(cfg, stem, result);

  if (!cfg.snapshots.empty()) {
    // Snapshots come from the first method at the finest step count.
    const auto ns = detail::resolve_step_counts(cfg, pde.as_ode.t_end);
    const std::size_t n = ns.back();
    const double k = pde.as_ode.t_end / static_cast<double>(n);
    std::vector<std::size_t> idx;
    for (double t : cfg.snapshots) {
      const double pos = t / k;
      const double r = std::round(pos);
      if (t < 0.0 || r > static_cast<double>(n) || std::abs(pos - r) > 1e-6)
        throw UsageError("snapshot time " + detail::slug(t) + " is not on the grid of N = " + std::to_string(n));
      const auto i = static_cast<std::size_t>(r);
      if (!idx.empty() && i <= idx.back()) throw UsageError("snapshot times must be strictly increasing");
      idx.push_back(i);
    }
    const auto run = integrate_at(pde.as_ode, cfg.methods.front(), n, idx);
    if (!run.completed()) result.exit_code = kExitPartial;
    const auto dir = detail::ensure_output_dir(cfg);
    result.grid = pde.grid();
    for (std::size_t s = 0; s < run.sample_times.size(); ++s) {
      const double t = cfg.snapshots[s];
      auto profiles = pde.physical(run.sample_times[s], run.sample_states[s]);
      for (std::size_t sp = 0; sp < profiles.size(); ++sp) {
        std::ostringstream os;
        os << "x,value\n";
        for (std::size_t j = 0; j < result.grid.size(); ++j)
          os << format_exact(result.grid[j]) << ',' << format_exact(profiles[sp][j]) << '\n';
        std::string name = stem + "_snapshot";
        if (profiles.size() > 1) name += "_" + labels[sp];
        name += "_t" + detail::slug(t) + ".csv";
        detail::write_text(dir / name, os.str());
        result.files.push_back(dir / name);
      }
      result.snapshots.emplace_back(t, std::move(profiles));
    }
  }
  return result;
}

struct StabilityMetrics {
  StepperKind method{};
  std::optional<double> real_boundary;
  std::optional<double> imag_extent;
};

struct StabilityResult {
  int exit_code = kExitOk;
  std::vector<StabilityMetrics> metrics;
  std::optional<std::vector<Complex>> containment_violations;  // RK6 inside DC6RK24, when both requested
  std::size_t left_half_violations = 0;                         // those with Re z <= 0
  std::vector<std::filesystem::path> files;
};

/// Region rasters, boundary points, real/imaginary extents and the containment verdict.
inline StabilityResult run_stability(const RunConfig& cfg, std::ostream* log = nullptr) {
  try {
    validate(cfg.raster);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<StepperKind> methods = cfg.methods;
  if (methods.empty()) methods = {StepperKind::Dc6Rk24, StepperKind::Rk6, StepperKind::Rk4};
  const auto dir = detail::ensure_output_dir(cfg);
  StabilityResult result;
  std::ostringstream metrics_csv;
  metrics_csv << "method,real_boundary,imag_extent\n";
  for (StepperKind kind : methods) {
    const auto poly = expand_coefficients(kind);
    const std::string name(to_string(kind));
    const auto raster = stability_raster(poly, cfg.raster);
    write_pgm(raster, dir / (name + "_region.pgm"));
    result.files.push_back(dir / (name + "_region.pgm"));

    std::ostringstream bcsv;
    bcsv << "re,im\n";
    for (const auto& z : boundary_points(raster))
      bcsv << format_exact(z.real()) << ',' << format_exact(z.imag()) << '\n';
    detail::write_text(dir / (name + "_boundary.csv"), bcsv.str());
    result.files.push_back(dir / (name + "_boundary.csv"));

    StabilityMetrics m{kind, real_axis_boundary(poly), imaginary_extent(poly)};
    metrics_csv << name << ',' << (m.real_boundary ? format_exact(*m.real_boundary) : "") << ','
                << (m.imag_extent ? format_exact(*m.imag_extent) : "") << '\n';
    if (log)
      *log << name << ": real boundary " << (m.real_boundary ? detail::slug(*m.real_boundary) : "NOT_FOUND")
           << ", imaginary extent " << (m.imag_extent ? detail::slug(*m.imag_extent) : "NOT_FOUND") << '\n';
    result.metrics.push_back(m);
  }
  detail::write_text(dir / "stability_metrics.csv", metrics_csv.str());
  result.files.push_back(dir / "stability_metrics.csv");

  const auto has = [&](StepperKind k) { return std::find(methods.begin(), methods.end(), k) != methods.end(); };
  nlohmann::json summary = {{"raster",
                             {{"re_min", cfg.raster.re_min},
                              {"re_max", cfg.raster.re_max},
                              {"im_min", cfg.raster.im_min},
                              {"im_max", cfg.raster.im_max},
                              {"nx", cfg.raster.nx},
                              {"ny", cfg.raster.ny}}}};
  if (has(StepperKind::Rk6) && has(StepperKind::Dc6Rk24)) {
    auto v = containment_check(expand_coefficients(StepperKind::Rk6),
                               expand_coefficients(StepperKind::Dc6Rk24), cfg.raster);
    std::ostringstream os;
    os << "re,im\n";
    for (const auto& z : v) os << format_exact(z.real()) << ',' << format_exact(z.imag()) << '\n';
    detail::write_text(dir / "containment_violations.csv", os.str());
    result.files.push_back(dir / "containment_violations.csv");
    // RK6 has a small right-half-plane lobe that DC6RK24 does not cover, so
    // the verdict is also reported for the closed left half-plane.
    result.left_half_violations = static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [](Complex z) { return z.real() <= 0.0; }));
    summary["containment"] = {{"inner", "RK6"},
                              {"outer", "DC6RK24"},
                              {"violations", v.size()},
                              {"holds", v.empty()},
                              {"left_half_violations", result.left_half_violations},
                              {"holds_left_half", result.left_half_violations == 0}};
    if (log)
      *log << "RK6 region inside DC6RK24 region: " << (v.empty() ? "yes" : "NO") << " (" << v.size()
           << " violations, " << result.left_half_violations << " with Re z <= 0)\n";
    result.containment_violations = std::move(v);
  }
  detail::write_text(dir / "summary.json", summary.dump(2) + "\n");
  result.files.push_back(dir / "summary.json");
  return result;
}

struct SolveResult {
  int exit_code = kExitOk;
  TrajectoryRun run;
  double wall_seconds = 0.0;
  std::vector<std::filesystem::path> files;
};

/// One method, one step: sampled trajectory CSV plus a run summary.
inline SolveResult run_solve(const RunConfig& cfg, std::ostream* log = nullptr) {
  if (cfg.methods.size() != 1) throw UsageError("solve takes exactly one method");
  const bool pde = detail::is_pde_name(cfg.problem);
  std::optional<RdProblem> rd;
  if (pde) rd = detail::make_pde_or_throw(cfg);
  const OdeProblem problem = pde ? rd->as_ode : detail::make_ode_or_throw(cfg);
  const auto ns = detail::resolve_step_counts(cfg, problem.t_end);
  if (ns.size() != 1) throw UsageError("solve takes exactly one step");
  const std::size_t cap = cfg.max_samples > 0 ? cfg.max_samples : (pde ? kPdeSampleCap : kOdeSampleCap);
  if (cap < 2) throw UsageError("max_samples must be at least 2");

  SolveResult result;
  const auto t0 = std::chrono::steady_clock::now();
  result.run = integrate(problem, cfg.methods.front(), ns.front(), cap);
  result.wall_seconds = detail::seconds_since(t0);
  if (!result.run.completed()) result.exit_code = kExitPartial;

  const auto dir = detail::ensure_output_dir(cfg);
  std::ostringstream os;
  os << 't';
  for (const auto& l : component_labels(problem.dim)) os << ',' << l;
  os << '\n';
  for (std::size_t s = 0; s < result.run.sample_times.size(); ++s) {
    os << format_exact(result.run.sample_times[s]);
    for (double x : result.run.sample_states[s]) os << ',' << format_exact(x);
    os << '\n';
  }
  const std::string stem = problem.name + "_" + std::string(to_string(cfg.methods.front()));
  detail::write_text(dir / (stem + "_trajectory.csv"), os.str());
  result.files.push_back(dir / (stem + "_trajectory.csv"));

  nlohmann::json summary = {{"problem", problem.tag},
                            {"method", std::string(to_string(cfg.methods.front()))},
                            {"k", result.run.step},
                            {"n_steps", result.run.n_steps},
                            {"status", result.run.completed() ? "COMPLETED" : "DIVERGED"},
                            {"rhs_evals", result.run.rhs_evals},
                            {"wall_seconds", result.wall_seconds}};
  if (!result.run.completed()) summary["diverged_at_step"] = result.run.diverged_at_step;
  detail::write_text(dir / "summary.json", summary.dump(2) + "\n");
  result.files.push_back(dir / "summary.json");
  if (log)
    *log << summary["status"].get<std::string>() << ": " << result.run.rhs_evals << " rhs evaluations in "
         << detail::slug(result.wall_seconds) << " s\n";
  return result;
}

/// Human-readable catalog of problems and methods.
inline void run_list(std::ostream& os) {
  os << "ODE problems (use --param name=value):\n";
  for (const auto& p : ode_problem_catalog()) os << "  " << p.name << "  [" << p.params << "]  " << p.summary << '\n';
  os << "PDE problems (use --m, --bc, --param T=value):\n"
     << "  fisher         [M=80 bc=DBC|NBC T=10]  u_t = u_xx + 6u(1-u), exact solution\n"
     << "  bistable       [M=100 NBC T=0.0295]    u_t = u_xx - 1e4 u(u-1)(u-0.25), reference via oracle\n"
     << "  three_species  [M=100 DBC T=1]         three coupled species, reference via oracle\n"
     << "Methods:\n";
  for (StepperKind k : kAllSteppers) os << "  " << to_string(k) << "  (" << evals_per_step(k) << " evaluations per step)\n";
}

}  // namespace hdc
