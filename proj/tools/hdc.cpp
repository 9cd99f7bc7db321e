// hdc: convergence tables, stability regions and PDE runs from the command line.
//
//   hdc list
//   hdc convergence --problem b5 --methods DC6RK24,RK4 --steps 2e-4,4e-5,2e-5
//   hdc stability --output regions/
//   hdc pde --problem bistable --m 100 --bc NBC --n-steps 500,800,1200 --snapshots 0,0.0059
//   hdc solve --problem robertson --param T=100 --methods DC6RK24 --n-steps 100000
//
// Any option may also come from --config file.json; options on the command
// line take precedence. Exit codes: 0 ok, 2 some cells diverged, 64 usage, 74 I/O.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdc/hdc.hpp"

namespace {

struct Flags {
  std::string config;
  std::string problem;
  std::vector<std::string> params;
  std::vector<std::string> methods;
  std::vector<double> steps;
  std::vector<std::size_t> n_steps;
  std::string output;
  std::string format;
  double ref_tol = 0.0;
  std::string ref_cache;
  std::string ref_generator;
  std::size_t ref_factor = 0;
  std::uint64_t ref_budget = 0;
  std::size_t max_samples = 0;
  std::string bc;
  std::size_t m = 0;
  std::vector<double> snapshots;
  double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
  std::size_t nx = 0, ny = 0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration; command-line options override it");
  sub->add_option("--output,-o", f.output, "output directory");
}

void add_problem_options(CLI::App* sub, Flags& f) {
  sub->add_option("--problem,-p", f.problem, "problem name (see `hdc list`)");
  sub->add_option("--param", f.params, "problem parameter override name=value (repeatable)");
  sub->add_option("--methods", f.methods, "methods: RK2, RK4, RK6, DC6RK24")->delimiter(',');
  sub->add_option("--steps,-k", f.steps, "step sizes k, strictly decreasing")->delimiter(',');
  sub->add_option("--n-steps,-N", f.n_steps, "step counts N, strictly increasing")->delimiter(',');
  sub->add_option("--max-samples", f.max_samples, "cap on stored samples per run");
}

void add_table_options(CLI::App* sub, Flags& f) {
  sub->add_option("--format", f.format, "csv or markdown");
  sub->add_option("--ref-tol", f.ref_tol, "reference agreement tolerance");
  sub->add_option("--ref-cache", f.ref_cache, "reference cache directory (default: $HDC_REF_CACHE)");
  sub->add_option("--ref-generator", f.ref_generator, "method used for references");
  sub->add_option("--ref-factor", f.ref_factor, "reference starts at >= this multiple of the finest N");
  sub->add_option("--ref-budget", f.ref_budget, "total reference steps allowed over all doublings");
}

/// Overlay options that were given on the command line.
void apply_flags(const CLI::App& sub, const Flags& f, hdc::RunConfig& cfg) {
  auto given = [&](const char* name) { return sub.get_option_no_throw(name) && sub.get_option(name)->count() > 0; };
  if (given("--problem")) cfg.problem = f.problem;
  if (given("--param"))
    for (const auto& kv : f.params) hdc::parse_param(kv, cfg.params);
  if (given("--methods")) {
    cfg.methods.clear();
    for (const auto& m : f.methods) cfg.methods.push_back(hdc::parse_method_or_throw(m));
  }
  if (given("--steps")) {
    cfg.steps = f.steps;
    cfg.n_steps.clear();
  }
  if (given("--n-steps")) {
    cfg.n_steps = f.n_steps;
    if (!given("--steps")) cfg.steps.clear();
  }
  if (given("--max-samples")) cfg.max_samples = f.max_samples;
  if (given("--output")) cfg.output = f.output;
  if (given("--format")) cfg.format = hdc::parse_format_or_throw(f.format);
  if (given("--ref-tol")) cfg.ref_tol = f.ref_tol;
  if (given("--ref-cache")) cfg.ref_cache = f.ref_cache;
  if (given("--ref-generator")) cfg.ref_generator = hdc::parse_method_or_throw(f.ref_generator);
  if (given("--ref-factor")) cfg.ref_factor = f.ref_factor;
  if (given("--ref-budget")) cfg.ref_budget = f.ref_budget;
  if (given("--bc")) cfg.bc = hdc::parse_bc_or_throw(f.bc);
  if (given("--m")) cfg.m = f.m;
  if (given("--snapshots")) cfg.snapshots = f.snapshots;
  if (given("--re-min")) cfg.raster.re_min = f.re_min;
  if (given("--re-max")) cfg.raster.re_max = f.re_max;
  if (given("--im-min")) cfg.raster.im_min = f.im_min;
  if (given("--im-max")) cfg.raster.im_max = f.im_max;
  if (given("--nx")) cfg.raster.nx = f.nx;
  if (given("--ny")) cfg.raster.ny = f.ny;
}

int print_table_paths(const std::vector<std::filesystem::path>& files, int code) {
  for (const auto& p : files) std::cout << p.string() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdc: sixth-order hybrid deferred correction experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* conv = app.add_subcommand("convergence", "error/order tables for an ODE benchmark");
  add_common(conv, f);
  add_problem_options(conv, f);
  add_table_options(conv, f);

  auto* pde = app.add_subcommand("pde", "error/order tables for a reaction-diffusion benchmark");
  add_common(pde, f);
  add_problem_options(pde, f);
  add_table_options(pde, f);
  pde->add_option("--bc", f.bc, "DBC or NBC (fisher only)");
  pde->add_option("--m", f.m, "grid intervals M");
  pde->add_option("--snapshots", f.snapshots, "times at which to write x,value profiles")->delimiter(',');

  auto* stab = app.add_subcommand("stability", "stability regions, extents and containment");
  add_common(stab, f);
  stab->add_option("--methods", f.methods, "methods to analyse")->delimiter(',');
  stab->add_option("--re-min", f.re_min);
  stab->add_option("--re-max", f.re_max);
  stab->add_option("--im-min", f.im_min);
  stab->add_option("--im-max", f.im_max);
  stab->add_option("--nx", f.nx, "raster columns");
  stab->add_option("--ny", f.ny, "raster rows");

  auto* solve = app.add_subcommand("solve", "one trajectory with one method and one step");
  add_common(solve, f);
  add_problem_options(solve, f);
  solve->add_option("--bc", f.bc, "DBC or NBC (fisher only)");
  solve->add_option("--m", f.m, "grid intervals M (PDE problems)");

  auto* list = app.add_subcommand("list", "list problems and methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hdc::kExitUsage;
  }

  try {
    if (list->parsed()) {
      hdc::run_list(std::cout);
      return hdc::kExitOk;
    }
    CLI::App* sub = app.get_subcommands().front();
    hdc::RunConfig cfg;
    if (!f.config.empty()) cfg = hdc::load_config_file(f.config);
    apply_flags(*sub, f, cfg);

    if (sub == conv) {
      if (cfg.problem.empty()) throw hdc::UsageError("--problem is required");
      auto r = hdc::run_convergence(cfg, &std::cerr);
      return print_table_paths(r.files, r.exit_code);
    }
    if (sub == pde) {
      if (cfg.problem.empty()) throw hdc::UsageError("--problem is required");
      auto r = hdc::run_pde(cfg, &std::cerr);
      return print_table_paths(r.files, r.exit_code);
    }
    if (sub == stab) {
      auto r = hdc::run_stability(cfg, &std::cerr);
      return print_table_paths(r.files, r.exit_code);
    }
    if (sub == solve) {
      if (cfg.problem.empty()) throw hdc::UsageError("--problem is required");
      auto r = hdc::run_solve(cfg, &std::cerr);
      return print_table_paths(r.files, r.exit_code);
    }
  } catch (const hdc::UsageError& e) {
    std::cerr << "hdc: " << e.what() << '\n';
    return hdc::kExitUsage;
  } catch (const hdc::IoError& e) {
    std::cerr << "hdc: " << e.what() << '\n';
    return hdc::kExitIo;
  } catch (const hdc::OracleError& e) {
    std::cerr << "hdc: reference generation failed: " << e.what() << '\n';
    return hdc::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "hdc: " << e.what() << '\n';
    return 1;
  }
  return hdc::kExitUsage;
}
