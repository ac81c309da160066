#include "tentkit/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

#include "json.hpp"
#include "tentkit/errors.hpp"
#include "tentkit/mesh_tents.hpp"
#include "tentkit/models.hpp"
#include "tentkit/tableau.hpp"

namespace tentkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

int parse_int_strict(const std::string& text, const char* what) {
  int v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  require(res.ec == std::errc() && res.ptr == end, what,
          ": cannot parse integer from '", text, "'");
  return v;
}

// Scientific notation with 16 significant digits and a '.' separator,
// independent of the global locale.
std::string sci(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::scientific << std::setprecision(16) << v;
  return os.str();
}

int level_elements(const RunConfig& cfg, int level) {
  const double h = cfg.h0 * std::pow(2.0, -level);
  const long n = std::lround(1.0 / h);
  require(n >= 2, "level ", level, ": mesh size h = ", h,
          " leaves fewer than 2 elements on the unit interval");
  return static_cast<int>(n);
}

template <class Scheme>
void advance(const RunConfig& cfg, const FluxModel& model,
             const DgSpace& space, const TentSlab& slab, const Scheme& scheme,
             GlobalState& state) {
  propagate_slab(space, model, slab, scheme, cfg.r, state, cfg.threads);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  require(file.good(), "cannot open '", path, "' for writing");
  return file;
}

void finish_output(std::ofstream& file, const std::string& path) {
  file.flush();
  require(file.good(), "writing '", path, "' failed");
}

}  // namespace

SchemeKind scheme_kind(const std::string& scheme) {
  if (scheme.rfind("sark", 0) == 0) return SchemeKind::sark;
  if (scheme.rfind("rk", 0) == 0) return SchemeKind::classical;
  fail("unknown scheme family in '", scheme,
       "' (structure aware names start with 'sark', classical ones with "
       "'rk')");
}

void validate(const RunConfig& cfg) {
  require(cfg.model == "burgers1d" || cfg.model == "advection1d",
          "unknown model '", cfg.model,
          "' (valid: burgers1d, advection1d)");
  // Resolving the name also verifies the family prefix and membership in
  // the builtin catalogue.
  if (scheme_kind(cfg.scheme) == SchemeKind::sark)
    builtin_sark(cfg.scheme);
  else
    builtin_rk(cfg.scheme);
  require(cfg.p >= 1, "polynomial degree must be positive, got ", cfg.p);
  require(cfg.r >= 1, "substep count must be positive, got ", cfg.r);
  require(cfg.c_max > 0.0, "c_max must be positive, got ", cfg.c_max);
  require(cfg.gamma > 0.0 && cfg.gamma < 1.0,
          "gamma must lie in (0,1), got ", cfg.gamma);
  require(cfg.t_max > 0.0, "t_max must be positive, got ", cfg.t_max);
  require(cfg.h0 > 0.0, "h0 must be positive, got ", cfg.h0);
  require(cfg.level_lo >= 0 && cfg.level_lo <= cfg.level_hi,
          "levels must satisfy 0 <= first <= last, got ", cfg.level_lo, "..",
          cfg.level_hi);
  require(!cfg.r_list.empty(), "r-list must not be empty");
  for (int r : cfg.r_list)
    require(r >= 1, "r-list entries must be positive, got ", r);
  require(cfg.threads >= 1, "threads must be positive, got ", cfg.threads);
}

void parse_levels(const std::string& text, int& lo, int& hi) {
  const std::size_t pos = text.find("..");
  if (pos == std::string::npos) {
    lo = hi = parse_int_strict(text, "levels");
    return;
  }
  lo = parse_int_strict(text.substr(0, pos), "levels");
  hi = parse_int_strict(text.substr(pos + 2), "levels");
}

RunConfig config_from_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail("config: invalid JSON: ", e.what());
  }
  require(root.is_object(), "config: top level must be a JSON object");

  auto get_string = [](const nlohmann::json& v, const std::string& key) {
    require(v.is_string(), "config: '", key, "' must be a string");
    return v.get<std::string>();
  };
  auto get_int = [](const nlohmann::json& v, const std::string& key) {
    require(v.is_number_integer(), "config: '", key, "' must be an integer");
    return v.get<int>();
  };
  auto get_double = [](const nlohmann::json& v, const std::string& key) {
    require(v.is_number(), "config: '", key, "' must be a number");
    return v.get<double>();
  };

  RunConfig cfg;
  for (const auto& [key, value] : root.items()) {
    if (key == "model") {
      cfg.model = get_string(value, key);
    } else if (key == "scheme") {
      cfg.scheme = get_string(value, key);
    } else if (key == "p") {
      cfg.p = get_int(value, key);
    } else if (key == "r") {
      cfg.r = get_int(value, key);
    } else if (key == "cmax") {
      cfg.c_max = get_double(value, key);
    } else if (key == "gamma") {
      cfg.gamma = get_double(value, key);
    } else if (key == "tmax") {
      cfg.t_max = get_double(value, key);
    } else if (key == "h0") {
      cfg.h0 = get_double(value, key);
    } else if (key == "speed") {
      cfg.speed = get_double(value, key);
    } else if (key == "levels") {
      if (value.is_string()) {
        parse_levels(value.get<std::string>(), cfg.level_lo, cfg.level_hi);
      } else if (value.is_array() && value.size() == 2) {
        cfg.level_lo = get_int(value[0], key);
        cfg.level_hi = get_int(value[1], key);
      } else if (value.is_number_integer()) {
        cfg.level_lo = cfg.level_hi = value.get<int>();
      } else {
        fail("config: 'levels' must be \"i0..i1\", [i0, i1] or an integer");
      }
    } else if (key == "r-list" || key == "r_list") {
      require(value.is_array(), "config: '", key,
              "' must be an array of integers");
      cfg.r_list.clear();
      for (const auto& entry : value) cfg.r_list.push_back(get_int(entry, key));
    } else if (key == "threads") {
      cfg.threads = get_int(value, key);
    } else if (key == "seed") {
      const int s = get_int(value, key);
      require(s >= 0, "config: 'seed' must be nonnegative");
      cfg.seed = static_cast<unsigned>(s);
    } else if (key == "out") {
      cfg.out = get_string(value, key);
    } else {
      fail("config: unknown key '", key,
           "' (valid: model, scheme, p, r, cmax, gamma, tmax, levels, h0, "
           "speed, r-list, threads, seed, out)");
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  require(file.good(), "cannot open config file '", path, "'");
  std::ostringstream text;
  text << file.rdbuf();
  require(!file.bad(), "reading config file '", path, "' failed");
  return config_from_json(text.str());
}

std::unique_ptr<FluxModel> make_model(const RunConfig& cfg) {
  if (cfg.model == "burgers1d") return std::make_unique<Burgers1D>();
  if (cfg.model == "advection1d")
    return std::make_unique<Advection1D>(
        cfg.speed, [](double x) { return std::sin(2.0 * kPi * x); });
  fail("unknown model '", cfg.model, "' (valid: burgers1d, advection1d)");
}

ConvergenceResult run_convergence(const RunConfig& cfg,
                                  const FluxModel& model) {
  validate(cfg);
  require(model.has_exact(), "model '", model.name(),
          "' has no exact solution to measure errors against");
  const SchemeKind kind = scheme_kind(cfg.scheme);
  SarkTableau sark;
  ButcherTableau rk;
  if (kind == SchemeKind::sark)
    sark = builtin_sark(cfg.scheme);
  else
    rk = builtin_rk(cfg.scheme);

  ConvergenceResult result;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const int n = level_elements(cfg, level);
    try {
      Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, n, model.is_periodic());
      const DgSpace space(mesh, cfg.p);
      const TentSlab slab = pitch_slab(mesh, cfg.c_max, cfg.t_max, cfg.gamma);
      GlobalState state =
          project_initial(space, [&](double x) { return model.initial(x); });
      if (kind == SchemeKind::sark)
        advance(cfg, model, space, slab, sark, state);
      else
        advance(cfg, model, space, slab, rk, state);

      ConvergenceRow row;
      row.h = mesh.h(0);
      row.dof = n * (cfg.p + 1);
      row.error = l2_error(
          space, state, [&](double x) { return model.exact(x, cfg.t_max); });
      if (!result.rows.empty()) {
        const ConvergenceRow& prev = result.rows.back();
        row.eoc = std::log(prev.error / row.error) / std::log(prev.h / row.h);
        row.has_eoc = true;
      }
      result.rows.push_back(row);
    } catch (const std::exception& e) {
      result.failed = true;
      std::ostringstream os;
      os << "level " << level << " (" << n << " elements): " << e.what();
      result.diagnostic = os.str();
      break;
    }
  }
  return result;
}

ConvergenceResult run_convergence(const RunConfig& cfg) {
  validate(cfg);
  return run_convergence(cfg, *make_model(cfg));
}

StabilityReport run_stability(const RunConfig& cfg, const FluxModel& model) {
  validate(cfg);
  require(scheme_kind(cfg.scheme) == SchemeKind::sark,
          "growth sweeps analyze the structure aware schemes; got '",
          cfg.scheme, "'");
  require(model.is_linear(), "growth sweeps need a linear model; '",
          model.name(), "' is nonlinear");
  const int n = level_elements(cfg, cfg.level_lo);
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, n, model.is_periodic());
  const DgSpace space(mesh, cfg.p);
  const TentSlab slab = pitch_slab(mesh, cfg.c_max, cfg.t_max, cfg.gamma);
  return stability_sweep(space, model, slab, builtin_sark(cfg.scheme),
                         cfg.r_list);
}

StabilityReport run_stability(const RunConfig& cfg) {
  validate(cfg);
  return run_stability(cfg, *make_model(cfg));
}

void emit_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
  os << "h,dof,error,eoc\n";
  for (const ConvergenceRow& row : rows) {
    os << sci(row.h) << ',' << row.dof << ',' << sci(row.error) << ',';
    if (row.has_eoc) os << sci(row.eoc);
    os << '\n';
  }
}

void emit_csv(const StabilityReport& report, std::ostream& os) {
  os << "r,p,s,scheme,cbar\n";
  for (const StabilityPoint& point : report.points)
    os << point.r << ',' << report.p << ',' << report.stages << ','
       << report.scheme << ',' << sci(point.cbar) << '\n';
}

void write_csv(const std::vector<ConvergenceRow>& rows,
               const std::string& path) {
  std::ofstream file = open_output(path);
  emit_csv(rows, file);
  finish_output(file, path);
}

void write_csv(const StabilityReport& report, const std::string& path) {
  std::ofstream file = open_output(path);
  emit_csv(report, file);
  finish_output(file, path);
}

void write_gnuplot_convergence(const std::string& csv_path,
                               const std::string& script_path) {
  std::ofstream file = open_output(script_path);
  file << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel 'h'\n"
       << "set ylabel 'L2 error'\n"
       << "set key left top\n"
       << "plot '" << csv_path
       << "' every ::1 using 1:3 with linespoints title 'error'\n";
  finish_output(file, script_path);
}

void write_gnuplot_stability(const std::string& csv_path,
                             const std::string& script_path) {
  std::ofstream file = open_output(script_path);
  file << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel 'substeps r'\n"
       << "set ylabel 'growth factor'\n"
       << "set key right top\n"
       << "plot '" << csv_path
       << "' every ::1 using 1:5 with linespoints title 'cbar'\n";
  finish_output(file, script_path);
}

}  // namespace tentkit
