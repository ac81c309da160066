#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "tentkit/dg1d.hpp"
#include "tentkit/stability.hpp"

namespace tentkit {

/// Integrator family selected by a builtin scheme name.
enum class SchemeKind { sark, classical };

/// Family encoded in the name prefix: "sark..." or "rk...". Throws on
/// anything else.
SchemeKind scheme_kind(const std::string& scheme);

/// Inputs of one study run. Convergence studies sweep the mesh levels
/// h = h0 * 2^-i for i in [level_lo, level_hi] on the unit interval;
/// stability sweeps use the coarsest level's mesh and the substep counts
/// in r_list.
struct RunConfig {
  std::string model = "burgers1d";  // burgers1d | advection1d
  std::string scheme = "sark2-ralston";
  int p = 2;
  int r = 4;
  double c_max = 8.0;
  double gamma = 0.99;
  double t_max = 0.1;
  int level_lo = 0;
  int level_hi = 6;
  double h0 = 0.1;
  double speed = 1.0;  // advection transport speed
  std::vector<int> r_list = {2, 4, 8, 16, 32};
  int threads = 1;
  unsigned seed = 0;  // reserved for randomized studies
  std::string out;    // CSV path; empty writes no file
};

/// Rejects inconsistent configurations with a descriptive error.
void validate(const RunConfig& cfg);

/// Parses "i0..i1" (or a single "i") into [level_lo, level_hi].
void parse_levels(const std::string& text, int& lo, int& hi);

/// Reads a config from JSON text; keys match the CLI flag names (model,
/// scheme, p, r, cmax, gamma, tmax, levels, h0, speed, r-list, threads,
/// seed, out). Unknown keys are rejected. The result is validated.
RunConfig config_from_json(const std::string& text);
RunConfig config_from_json_file(const std::string& path);

/// Model factory for the builtin names: burgers1d carries the Gaussian
/// pulse datum, advection1d transports sin(2 pi x) with cfg.speed.
std::unique_ptr<FluxModel> make_model(const RunConfig& cfg);

/// One measured mesh level of a convergence study.
struct ConvergenceRow {
  double h = 0.0;
  int dof = 0;
  double error = 0.0;
  double eoc = 0.0;      // log(e_prev/e) / log(h_prev/h)
  bool has_eoc = false;  // false on the first row
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;  // completed levels only
  bool failed = false;               // true when a level aborted
  std::string diagnostic;            // context of the aborted level
};

/// Mesh refinement study: per level builds the mesh, projects the model's
/// initial datum, pitches a slab to t_max and propagates every tent with the
/// configured scheme (structure aware or classical per scheme_kind), then
/// measures the L2 error against the model's exact solution at t_max. A
/// failing level ends the study; the completed rows are still returned
/// together with the failure context.
ConvergenceResult run_convergence(const RunConfig& cfg, const FluxModel& model);
ConvergenceResult run_convergence(const RunConfig& cfg);

/// Growth sweep over cfg.r_list on the coarsest configured mesh level.
/// Requires a linear model (the growth factors are operator norms).
StabilityReport run_stability(const RunConfig& cfg, const FluxModel& model);
StabilityReport run_stability(const RunConfig& cfg);

/// CSV writers: UTF-8, '.' decimal separator, scientific notation with 16
/// significant digits. Convergence header "h,dof,error,eoc" (first row's
/// eoc empty), stability header "r,p,s,scheme,cbar". The file variants
/// surface I/O failures as errors.
void emit_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);
void emit_csv(const StabilityReport& report, std::ostream& os);
void write_csv(const std::vector<ConvergenceRow>& rows,
               const std::string& path);
void write_csv(const StabilityReport& report, const std::string& path);

/// Companion gnuplot scripts rendering a previously written CSV.
void write_gnuplot_convergence(const std::string& csv_path,
                               const std::string& script_path);
void write_gnuplot_stability(const std::string& csv_path,
                             const std::string& script_path);

}  // namespace tentkit
