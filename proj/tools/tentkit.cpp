// Command line front-end: convergence studies, growth sweeps and tableau
// order verification for the tent pitching library.
//
// Exit codes: 0 success, 1 configuration error (including a failed tableau
// check), 2 solver failure.

#include <CLI11.hpp>
#include <algorithm>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "tentkit/errors.hpp"
#include "tentkit/harness.hpp"
#include "tentkit/models.hpp"
#include "tentkit/tableau.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;

// Flag storage for the study subcommands. Values given on the command line
// override the JSON config file, which overrides the defaults.
struct StudyFlags {
  tentkit::RunConfig values;
  std::string config_path;
  std::string levels;
  std::string gnuplot;
  std::vector<int> r_list;
  CLI::App* cmd = nullptr;
};

void add_study_flags(CLI::App* cmd, StudyFlags& f) {
  f.cmd = cmd;
  cmd->add_option("--config", f.config_path,
                  "JSON config file with the same keys as the flags");
  cmd->add_option("--model", f.values.model, "burgers1d | advection1d")
      ->capture_default_str();
  cmd->add_option("--scheme", f.values.scheme, "builtin scheme name")
      ->capture_default_str();
  cmd->add_option("--p", f.values.p, "polynomial degree")
      ->capture_default_str();
  cmd->add_option("--r", f.values.r, "substeps per tent")
      ->capture_default_str();
  cmd->add_option("--cmax", f.values.c_max, "wavespeed bound for pitching")
      ->capture_default_str();
  cmd->add_option("--gamma", f.values.gamma, "causality safety factor in (0,1)")
      ->capture_default_str();
  cmd->add_option("--tmax", f.values.t_max, "slab end time")
      ->capture_default_str();
  cmd->add_option("--levels", f.levels,
                  "mesh level range i0..i1 with h = h0 * 2^-i (default 0..6)");
  cmd->add_option("--h0", f.values.h0, "coarsest mesh size")
      ->capture_default_str();
  cmd->add_option("--speed", f.values.speed, "advection transport speed")
      ->capture_default_str();
  cmd->add_option("--out", f.values.out, "CSV output path");
  cmd->add_option("--gnuplot", f.gnuplot,
                  "write a gnuplot script rendering the --out CSV");
  cmd->add_option("--threads", f.values.threads,
                  "concurrent tents per causal level")
      ->capture_default_str();
  cmd->add_option("--seed", f.values.seed, "seed for randomized studies")
      ->capture_default_str();
}

tentkit::RunConfig resolve_config(const StudyFlags& f) {
  tentkit::RunConfig cfg;
  if (!f.config_path.empty()) cfg = tentkit::config_from_json_file(f.config_path);
  const CLI::App* cmd = f.cmd;
  auto given = [&](const std::string& flag) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--model")) cfg.model = f.values.model;
  if (given("--scheme")) cfg.scheme = f.values.scheme;
  if (given("--p")) cfg.p = f.values.p;
  if (given("--r")) cfg.r = f.values.r;
  if (given("--cmax")) cfg.c_max = f.values.c_max;
  if (given("--gamma")) cfg.gamma = f.values.gamma;
  if (given("--tmax")) cfg.t_max = f.values.t_max;
  if (given("--levels"))
    tentkit::parse_levels(f.levels, cfg.level_lo, cfg.level_hi);
  if (given("--h0")) cfg.h0 = f.values.h0;
  if (given("--speed")) cfg.speed = f.values.speed;
  if (given("--out")) cfg.out = f.values.out;
  if (given("--threads")) cfg.threads = f.values.threads;
  if (given("--seed")) cfg.seed = f.values.seed;
  if (given("--r-list")) cfg.r_list = f.r_list;
  if (!f.gnuplot.empty())
    tentkit::require(!cfg.out.empty(),
                     "--gnuplot needs --out to point at the CSV it renders");
  tentkit::validate(cfg);
  return cfg;
}

void print_convergence_table(const tentkit::RunConfig& cfg,
                             const std::vector<tentkit::ConvergenceRow>& rows) {
  std::cout << "model " << cfg.model << ", scheme " << cfg.scheme << ", p "
            << cfg.p << ", r " << cfg.r << "\n";
  std::cout << "level             h    dof          error      eoc\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const tentkit::ConvergenceRow& row = rows[i];
    std::cout << std::setw(5) << cfg.level_lo + static_cast<int>(i) << "  "
              << std::scientific << std::setprecision(6) << row.h << "  "
              << std::setw(5) << row.dof << "  " << std::setprecision(6)
              << row.error << "  ";
    if (row.has_eoc)
      std::cout << std::fixed << std::setprecision(3) << std::setw(7)
                << row.eoc;
    else
      std::cout << "      -";
    std::cout << "\n";
  }
  std::cout.unsetf(std::ios::floatfield);
}

int run_converge(const StudyFlags& flags) {
  tentkit::RunConfig cfg;
  std::unique_ptr<tentkit::FluxModel> model;
  try {
    cfg = resolve_config(flags);
    model = tentkit::make_model(cfg);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  const tentkit::ConvergenceResult result = tentkit::run_convergence(cfg, *model);
  print_convergence_table(cfg, result.rows);
  try {
    if (!cfg.out.empty()) tentkit::write_csv(result.rows, cfg.out);
    if (!flags.gnuplot.empty())
      tentkit::write_gnuplot_convergence(cfg.out, flags.gnuplot);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  if (result.failed) {
    std::cerr << "solver failure: " << result.diagnostic << "\n";
    return kSolverError;
  }
  return kOk;
}

int run_stability_cmd(const StudyFlags& flags) {
  tentkit::RunConfig cfg;
  std::unique_ptr<tentkit::FluxModel> model;
  try {
    cfg = resolve_config(flags);
    model = tentkit::make_model(cfg);
    tentkit::require(
        tentkit::scheme_kind(cfg.scheme) == tentkit::SchemeKind::sark,
        "growth sweeps analyze the structure aware schemes; got '", cfg.scheme,
        "'");
    tentkit::require(model->is_linear(), "growth sweeps need a linear model; '",
                     model->name(), "' is nonlinear");
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  tentkit::StabilityReport report;
  try {
    report = tentkit::run_stability(cfg, *model);
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  }
  std::cout << "scheme " << report.scheme << " (" << report.stages
            << " stages), p " << report.p << "\n";
  std::cout << "    r           cbar\n";
  for (const tentkit::StabilityPoint& point : report.points)
    std::cout << std::setw(5) << point.r << "  " << std::scientific
              << std::setprecision(6) << point.cbar << "\n";
  std::cout.unsetf(std::ios::floatfield);
  std::cout << "log-log slope of cbar vs r";
  if (report.fit_from > 0) std::cout << " (fit on r >= " << report.fit_from << ")";
  std::cout << ": " << std::setprecision(4) << report.slope << "\n";
  try {
    if (!cfg.out.empty()) tentkit::write_csv(report, cfg.out);
    if (!flags.gnuplot.empty())
      tentkit::write_gnuplot_stability(cfg.out, flags.gnuplot);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

int run_tableau_check(const std::string& name, double tol) {
  std::vector<std::string> names;
  if (name.empty()) {
    names = tentkit::builtin_sark_names();
  } else {
    const std::vector<std::string> rk = tentkit::builtin_rk_names();
    if (std::find(rk.begin(), rk.end(), name) != rk.end()) {
      std::cerr << "configuration error: '" << name
                << "' is a classical Runge-Kutta tableau; the order check "
                   "covers the structure aware schemes\n";
      return kConfigError;
    }
    names.push_back(name);
  }

  bool all_nominal = true;
  std::cout << std::setprecision(17);
  try {
    for (const std::string& scheme_name : names) {
      const tentkit::SarkTableau scheme = tentkit::builtin_sark(scheme_name);
      const tentkit::OrderReport report =
          tentkit::order_residuals(scheme, tol);
      std::cout << scheme.name << ": stages " << scheme.stages
                << ", nominal order " << scheme.nominal_order
                << ", attained order " << report.attained_order << "\n";
      std::cout << "  order 1 residual: " << report.r1 << "\n";
      std::cout << "  order 2 residuals:";
      for (double r : report.r2) std::cout << ' ' << r;
      std::cout << "\n  order 3 residuals:";
      for (double r : report.r3) std::cout << ' ' << r;
      std::cout << "\n";
      all_nominal = all_nominal &&
                    report.attained_order == scheme.nominal_order;
    }
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  if (!all_nominal) {
    std::cerr << "order check failed: attained order below nominal\n";
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tent pitching studies for 1D hyperbolic conservation laws"};
  app.require_subcommand(1);

  CLI::App* tableau =
      app.add_subcommand("tableau", "inspect the builtin schemes");
  tableau->require_subcommand(1);
  CLI::App* check = tableau->add_subcommand(
      "check", "verify the order conditions of the structure aware schemes");
  std::string scheme_name;
  double tol = 1e-12;
  check->add_option("name", scheme_name,
                    "builtin structure aware scheme (default: all)");
  check->add_option("--tol", tol, "residual tolerance")->capture_default_str();

  CLI::App* converge =
      app.add_subcommand("converge", "mesh refinement study with EOC table");
  StudyFlags converge_flags;
  add_study_flags(converge, converge_flags);

  CLI::App* stability = app.add_subcommand(
      "stability", "tent growth sweep over substep counts");
  StudyFlags stability_flags;
  add_study_flags(stability, stability_flags);
  stability->add_option("--r-list", stability_flags.r_list,
                        "substep counts to sweep (default 2,4,8,16,32)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (app.got_subcommand(tableau)) return run_tableau_check(scheme_name, tol);
  if (app.got_subcommand(converge)) return run_converge(converge_flags);
  return run_stability_cmd(stability_flags);
}
