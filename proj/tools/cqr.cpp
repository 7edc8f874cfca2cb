// cqr: command line front end for the Casimir-Polder and quantum reflection library.
//
//   cqr potential --atom Rb --field-t 14 --out rb.csv --plot
//   cqr qr --atom He --energy-nev 10 --format json
//   cqr sweep --atom Rb --mode field --energy-nev 1e-5 --out staircase.csv
//   cqr crossings --mu-ev 0.115

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cqr/atoms.hpp"
#include "cqr/constants.hpp"
#include "cqr/errors.hpp"
#include "cqr/lifshitz.hpp"
#include "cqr/sweep.hpp"
#include "cqr/wkb.hpp"

namespace {

using json = nlohmann::json;

enum ExitCode { kOk = 0, kPartial = 1, kInvalid = 2, kAborted = 3 };

struct Settings {
  std::string config;
  std::string atom = "He";
  double energy_nev = 10.0;
  double field_t = 0.0;
  double mu_ev = 0.115;
  std::string out;
  std::string format = "csv";
  bool plot = false;
  int workers = 1;
  bool no_cache = false;
  bool wall_time = false;

  double tol = cqr::kDefaultQuadratureTol;
  double ode_tol = cqr::kDefaultOdeTol;
  int points_per_decade = 48;
  double grid_z_min = 1e-9;
  double grid_z_max = 1e-3;
  double z_floor = cqr::kShortDistanceFloor;
  double tau = 1.84e-13;
  double v_f = 1e6;

  std::string mode = "energy";
  std::optional<double> start, stop;
  std::optional<int> points;
  std::optional<std::string> spacing;
  bool ratio = false;

  int n_first = 1;
  int n_last = 10;
};

// Every option may also be set from the config file under its long name.
class Registry {
 public:
  template <class T>
  CLI::Option* add(CLI::App& app, const std::string& name, T& target, const std::string& help) {
    auto* opt = app.add_option("--" + name, target, help);
    entries_[name].options.push_back(opt);
    entries_[name].apply = [&target](const json& v) { target = v.get<T>(); };
    return opt;
  }

  template <class T>
  CLI::Option* add(CLI::App& app, const std::string& name, std::optional<T>& target,
                   const std::string& help) {
    auto* opt = app.add_option("--" + name, target, help);
    entries_[name].options.push_back(opt);
    entries_[name].apply = [&target](const json& v) { target = v.get<T>(); };
    return opt;
  }

  CLI::Option* flag(CLI::App& app, const std::string& name, bool& target, const std::string& help) {
    auto* opt = app.add_flag("--" + name, target, help);
    entries_[name].options.push_back(opt);
    entries_[name].apply = [&target](const json& v) { target = v.get<bool>(); };
    return opt;
  }

  /// Applies config values to every option the command line left unset.
  void apply(const json& config) const {
    for (const auto& [key, value] : config.items()) {
      if (key == "species" || key == "config") continue;
      const auto it = entries_.find(key);
      if (it == entries_.end()) throw cqr::InvalidSpec("config: unknown key '" + key + "'");
      bool given = false;
      for (const auto* opt : it->second.options) given = given || opt->count() > 0;
      if (given) continue;
      try {
        it->second.apply(value);
      } catch (const json::exception& e) {
        throw cqr::InvalidSpec("config: bad value for '" + key + "': " + e.what());
      }
    }
  }

 private:
  struct Entry {
    std::vector<CLI::Option*> options;
    std::function<void(const json&)> apply;
  };
  std::map<std::string, Entry> entries_;
};

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cqr::InvalidSpec("cannot open config file '" + path + "'");
  try {
    auto j = json::parse(in);
    if (!j.is_object()) throw cqr::InvalidSpec("config: top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw cqr::InvalidSpec("config: " + std::string(e.what()));
  }
}

// "species": [{"name": "Rb", "mass_kg": 1.41e-25}, {"name": "Cs", "mass_kg": ..., "alpha0_au":
// ..., "xi_l_ev": ...}]. Missing fields fall back to the built-in entry of the same name.
cqr::AtomTable species_table(const json& config) {
  auto table = cqr::AtomTable::builtin();
  if (!config.contains("species")) return table;
  const auto& list = config.at("species");
  if (!list.is_array()) throw cqr::InvalidSpec("config: 'species' must be an array");
  for (const auto& entry : list) {
    try {
      const auto name = entry.at("name").get<std::string>();
      cqr::AtomSpecies base;
      bool known = true;
      try {
        base = table.lookup(name);
      } catch (const cqr::UnknownSpecies&) {
        known = false;
      }
      if (!known && !(entry.contains("mass_kg") && entry.contains("alpha0_au") &&
                      entry.contains("xi_l_ev")))
        throw cqr::InvalidSpec("config: new species '" + name +
                               "' needs mass_kg, alpha0_au and xi_l_ev");
      const double mass = entry.value("mass_kg", base.mass);
      const double alpha_au =
          entry.value("alpha0_au", cqr::units::si_to_au_polarizability(base.alpha0));
      const double xi_ev = entry.value("xi_l_ev", cqr::units::rad_per_s_to_ev(base.xi_l));
      auto s = cqr::AtomSpecies::from_table_units(known ? base.name : name, mass, alpha_au, xi_ev);
      if (known) {
        if (!entry.contains("alpha0_au")) s.alpha0 = base.alpha0;
        if (!entry.contains("xi_l_ev")) s.xi_l = base.xi_l;
      }
      s.validate();
      table = table.with_species(s);
    } catch (const json::exception& e) {
      throw cqr::InvalidSpec("config: bad species entry: " + std::string(e.what()));
    } catch (const cqr::DomainError& e) {
      throw cqr::InvalidSpec(e.what());
    }
  }
  return table;
}

cqr::OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return cqr::OutputFormat::csv;
  if (s == "json") return cqr::OutputFormat::json;
  throw cqr::InvalidSpec("unknown format '" + s + "' (expected csv or json)");
}

cqr::SweepSpec base_spec(const Settings& s, const cqr::AtomTable& table) {
  cqr::SweepSpec spec;
  spec.atom = s.atom;
  spec.fixed["mu_c"] = s.mu_ev;
  spec.output_path = s.out;
  spec.quadrature_tol = s.tol;
  spec.ode_tol = s.ode_tol;
  spec.points_per_decade = s.points_per_decade;
  spec.z_min = s.grid_z_min;
  spec.z_max = s.grid_z_max;
  spec.z_floor = s.z_floor;
  spec.tau = s.tau;
  spec.v_F = s.v_f;
  spec.workers = s.workers;
  spec.species = table;
  return spec;
}

void set_range(cqr::SweepSpec& spec, const Settings& s) {
  using cqr::Spacing;
  using cqr::SweepMode;
  double start = 1e-9, stop = 1e-3;
  int points = 61;
  Spacing spacing = Spacing::log;
  switch (spec.mode) {
    case SweepMode::energy:
      start = 1e-3, stop = 1e4;
      break;
    case SweepMode::field:
      start = 1.0, stop = 14.0, points = 131, spacing = Spacing::linear;
      break;
    case SweepMode::q_profile:
      start = 1e-9, stop = 1e-5, points = 161;
      break;
    case SweepMode::potential:
    case SweepMode::ratio:
      break;
  }
  spec.range.start = s.start.value_or(start);
  spec.range.stop = s.stop.value_or(stop);
  spec.range.spacing = s.spacing ? cqr::parse_spacing(*s.spacing) : spacing;
  if (s.points) {
    spec.range.points = *s.points;
  } else if (spec.mode == SweepMode::energy && spec.range.spacing == Spacing::log &&
             spec.range.start > 0.0 && spec.range.stop >= spec.range.start) {
    const double decades = std::log10(spec.range.stop / spec.range.start);
    spec.range.points = std::max(2, static_cast<int>(std::lround(25.0 * decades)) + 1);
  } else {
    spec.range.points = points;
  }
}

int write_sweep(const Settings& s, const cqr::SweepSpec& spec,
                const std::vector<cqr::SweepRecord>& records) {
  const auto format = parse_format(s.format);
  if (s.out.empty()) {
    if (s.plot) throw cqr::InvalidSpec("--plot needs --out");
    if (format == cqr::OutputFormat::csv)
      cqr::write_csv(std::cout, spec, records, s.wall_time);
    else
      cqr::write_json(std::cout, spec, records, s.wall_time);
  } else {
    for (const auto& p : cqr::emit(records, spec, s.out, format, s.plot, s.wall_time))
      std::cerr << "wrote " << p.string() << "\n";
  }
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed() ? 1 : 0;
  if (failed > 0) {
    std::cerr << failed << " of " << records.size() << " points failed\n";
    return kPartial;
  }
  return kOk;
}

int run_sweep_command(const Settings& s, cqr::SweepSpec spec) {
  spec.validate();
  std::optional<cqr::CurveCache> cache;
  if (!s.no_cache) cache = cqr::CurveCache::from_environment();
  cqr::SweepOptions opts;
  opts.cache = cache ? &*cache : nullptr;
  return write_sweep(s, spec, cqr::run_sweep(spec, opts));
}

int cmd_potential(const Settings& s, const cqr::AtomTable& table) {
  auto spec = base_spec(s, table);
  spec.mode = s.ratio ? cqr::SweepMode::ratio : cqr::SweepMode::potential;
  spec.fixed["B"] = s.field_t;
  set_range(spec, s);
  return run_sweep_command(s, spec);
}

int cmd_sweep(const Settings& s, const cqr::AtomTable& table) {
  auto spec = base_spec(s, table);
  spec.mode = cqr::parse_mode(s.mode);
  if (spec.mode != cqr::SweepMode::field) spec.fixed["B"] = s.field_t;
  if (spec.mode == cqr::SweepMode::field || spec.mode == cqr::SweepMode::q_profile)
    spec.fixed["E"] = s.energy_nev;
  set_range(spec, s);
  return run_sweep_command(s, spec);
}

int cmd_qr(const Settings& s, const cqr::AtomTable& table) {
  auto spec = base_spec(s, table);
  spec.mode = cqr::SweepMode::energy;
  spec.fixed["B"] = s.field_t;
  spec.range = {s.energy_nev, s.energy_nev, 2, cqr::Spacing::log};
  spec.validate();
  const auto format = parse_format(s.format);

  const auto& atom = spec.resolve_atom();
  const auto cfg = spec.graphene(s.field_t);
  cqr::TabulationOptions topt;
  topt.z_min = spec.z_min;
  topt.z_max = spec.z_max;
  topt.points_per_decade = spec.points_per_decade;
  topt.tol = spec.quadrature_tol;
  topt.workers = spec.workers;
  auto curve = std::make_shared<const cqr::PotentialCurve>(
      s.no_cache ? cqr::tabulate(atom, cfg, topt)
                 : cqr::CurveCache::from_environment().get(atom, cfg, topt));

  cqr::SolveOptions so;
  so.ode_tol = spec.ode_tol;
  so.z_floor = spec.z_floor;
  so.workers = spec.workers;
  const auto sol = cqr::solve_qr(atom, cqr::units::nev_to_joule(s.energy_nev), curve, so);
  for (const auto& w : sol.warnings) std::cerr << "warning: " << w << "\n";

  std::ostringstream body;
  if (format == cqr::OutputFormat::json) {
    body << sol.to_json() << "\n";
  } else {
    body << "# atom=" << atom.name << "\n# E_neV=" << s.energy_nev << "\n# B=" << s.field_t
         << "\n# mu_c=" << s.mu_ev << "\n# R=" << sol.reflection_probability
         << "\n# z_m=" << sol.z_m << "\n# converged=" << (sol.converged ? "true" : "false")
         << "\n";
    sol.write_q_csv(body);
  }
  if (s.out.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(s.out, std::ios::binary);
    if (!out || !(out << body.str())) throw cqr::IoError("cannot write '" + s.out + "'");
    std::cerr << "R = " << sol.reflection_probability << "\n";
  }
  return kOk;
}

int cmd_crossings(const Settings& s) {
  if (s.n_first < 1 || s.n_last < s.n_first)
    throw cqr::InvalidSpec("crossings: need 1 <= n-first <= n-last");
  auto cfg = cqr::GrapheneConfig::with_field(0.0, s.mu_ev);
  cfg.tau = s.tau;
  cfg.v_F = s.v_f;
  cfg.validate();
  const auto fields =
      cqr::landau_crossing_fields(cqr::units::ev_to_joule(s.mu_ev), cfg, s.n_first, s.n_last);
  // fields ascend in B, so level n_last comes first
  std::ostringstream body;
  body.precision(17);
  if (parse_format(s.format) == cqr::OutputFormat::json) {
    json j;
    j["mu_c"] = s.mu_ev;
    j["v_F"] = s.v_f;
    auto& rows = j["crossings"] = json::array();
    for (std::size_t i = 0; i < fields.size(); ++i)
      rows.push_back({{"n", s.n_last - static_cast<int>(i)}, {"B_T", fields[i]}});
    body << j.dump(2) << "\n";
  } else {
    body << "# mu_c=" << s.mu_ev << "\n# v_F=" << s.v_f << "\nn,B_T\n";
    for (std::size_t i = 0; i < fields.size(); ++i)
      body << s.n_last - static_cast<int>(i) << ',' << fields[i] << "\n";
  }
  if (s.out.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(s.out, std::ios::binary);
    if (!out || !(out << body.str())) throw cqr::IoError("cannot write '" + s.out + "'");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  Registry reg;
  CLI::App app{"Casimir-Polder potentials and quantum reflection off graphene in a magnetic field"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", s.config, "JSON file mirroring the long options")
      ->check(CLI::ExistingFile);
  reg.add(app, "atom", s.atom, "Species label (He, Na, Rb or one from the config)");
  reg.add(app, "energy-nev", s.energy_nev, "Incident energy in neV");
  reg.add(app, "field-t", s.field_t, "Magnetic field in T");
  reg.add(app, "mu-ev", s.mu_ev, "Graphene chemical potential in eV");
  reg.add(app, "out", s.out, "Output path (stdout when omitted)");
  reg.add(app, "format", s.format, "csv or json");
  reg.flag(app, "plot", s.plot, "Also write a gnuplot script next to --out");
  reg.add(app, "workers", s.workers, "Worker threads")->check(CLI::PositiveNumber);
  reg.flag(app, "no-cache", s.no_cache, "Do not read or write the curve cache");
  reg.flag(app, "wall-time", s.wall_time, "Add a wall_time_s column");
  reg.add(app, "tol", s.tol, "Relative quadrature tolerance");
  reg.add(app, "ode-tol", s.ode_tol, "Amplitude ODE tolerance");
  reg.add(app, "points-per-decade", s.points_per_decade, "Potential grid density");
  reg.add(app, "grid-z-min", s.grid_z_min, "Potential grid start in m");
  reg.add(app, "grid-z-max", s.grid_z_max, "Potential grid end in m");
  reg.add(app, "z-floor", s.z_floor, "Smallest trusted z_i in m");
  reg.add(app, "tau", s.tau, "Graphene relaxation time in s");
  reg.add(app, "v-f", s.v_f, "Fermi velocity in m/s");

  auto* potential = app.add_subcommand("potential", "Tabulate U(z) or U^B/U^0 over z");
  auto* qr = app.add_subcommand("qr", "Reflection probability at one energy");
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep");
  auto* crossings = app.add_subcommand("crossings", "Fields where Landau levels cross mu_c");

  for (auto* sub : {potential, sweep}) {
    reg.add(*sub, "start", s.start, "First swept value");
    reg.add(*sub, "stop", s.stop, "Last swept value");
    reg.add(*sub, "points", s.points, "Number of sweep points");
    reg.add(*sub, "spacing", s.spacing, "log or linear");
  }
  reg.flag(*potential, "ratio", s.ratio, "Emit U^B/U^0 instead of U");
  reg.add(*sweep, "mode", s.mode, "energy, field, q_profile, potential or ratio");
  reg.add(*crossings, "n-first", s.n_first, "Lowest Landau index");
  reg.add(*crossings, "n-last", s.n_last, "Highest Landau index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    json config = json::object();
    if (!s.config.empty()) {
      config = read_config(s.config);
      reg.apply(config);
    }
    const auto table = species_table(config);
    if (*potential) return cmd_potential(s, table);
    if (*qr) return cmd_qr(s, table);
    if (*sweep) return cmd_sweep(s, table);
    return cmd_crossings(s);
  } catch (const cqr::SweepAborted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAborted;
  } catch (const cqr::InvalidSpec& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kInvalid;
  } catch (const cqr::UnknownSpecies& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kInvalid;
  } catch (const cqr::DomainError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kInvalid;
  } catch (const cqr::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAborted;
  }
}
