#include "cqr/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "cqr/constants.hpp"
#include "cqr/detail/parallel.hpp"

namespace cqr {

namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError("cannot parse number '" + s + "'");
  }
  if (used != s.size()) throw IoError("cannot parse number '" + s + "'");
  return v;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ch == ',' ? ';' : ' ';
  return s;
}

std::vector<std::string> required_fixed(SweepMode m) {
  switch (m) {
    case SweepMode::energy:
      return {"B", "mu_c"};
    case SweepMode::field:
      return {"E", "mu_c"};
    case SweepMode::q_profile:
      return {"E", "B", "mu_c"};
    case SweepMode::potential:
    case SweepMode::ratio:
      return {"B", "mu_c"};
  }
  return {};
}

// FNV-1a, stable across platforms and runs.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

PotentialSource cp_source(const AtomSpecies& atom, const GrapheneConfig& cfg, double tol) {
  return [atom, cfg, tol](double z) {
    const auto s = cp_sample(z, atom, cfg, tol);
    return PotentialSample{s.U, s.dU, s.d2U};
  };
}

}  // namespace

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::energy:
      return "energy";
    case SweepMode::field:
      return "field";
    case SweepMode::q_profile:
      return "q_profile";
    case SweepMode::potential:
      return "potential";
    case SweepMode::ratio:
      return "ratio";
  }
  return "";
}

std::string to_string(Spacing spacing) { return spacing == Spacing::log ? "log" : "linear"; }

SweepMode parse_mode(const std::string& s) {
  for (auto m : {SweepMode::energy, SweepMode::field, SweepMode::q_profile, SweepMode::potential,
                 SweepMode::ratio})
    if (to_string(m) == s) return m;
  throw InvalidSpec("unknown sweep mode '" + s +
                    "'; expected energy, field, q_profile, potential or ratio");
}

Spacing parse_spacing(const std::string& s) {
  if (s == "log") return Spacing::log;
  if (s == "linear") return Spacing::linear;
  throw InvalidSpec("unknown spacing '" + s + "'; expected log or linear");
}

std::pair<std::string, std::string> column_names(SweepMode mode) {
  switch (mode) {
    case SweepMode::energy:
      return {"E_neV", "R"};
    case SweepMode::field:
      return {"B_T", "R"};
    case SweepMode::q_profile:
      return {"z_m", "Q"};
    case SweepMode::potential:
      return {"z_m", "U_J"};
    case SweepMode::ratio:
      return {"z_m", "ratio"};
  }
  return {};
}

std::vector<double> SweepRange::values() const {
  if (points < 2) throw InvalidSpec("sweep range needs at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(points));
  const double n = points - 1;
  for (int i = 0; i < points; ++i) {
    if (spacing == Spacing::log)
      v[i] = std::exp(std::log(start) + (std::log(stop) - std::log(start)) * i / n);
    else
      v[i] = start + (stop - start) * i / n;
  }
  v.front() = start;
  v.back() = stop;
  return v;
}

void SweepSpec::validate() const {
  if (atom.empty()) throw InvalidSpec("sweep: no atom given");
  try {
    resolve_atom();
  } catch (const UnknownSpecies& e) {
    throw InvalidSpec(e.what());
  }
  if (range.points < 2) throw InvalidSpec("sweep: range needs at least 2 points");
  if (!std::isfinite(range.start) || !std::isfinite(range.stop) || range.start > range.stop)
    throw InvalidSpec("sweep: range needs start <= stop");
  if (range.spacing == Spacing::log && !(range.start > 0.0))
    throw InvalidSpec("sweep: log spacing needs a positive start");
  if (mode != SweepMode::field && !(range.start > 0.0))
    throw InvalidSpec("sweep: swept values must be positive");
  if (mode == SweepMode::field && range.start < 0.0)
    throw InvalidSpec("sweep: field values must be >= 0");
  for (const auto& key : required_fixed(mode))
    if (!fixed.count(key))
      throw InvalidSpec("sweep: mode " + to_string(mode) + " needs fixed parameter '" + key + "'");
  for (const auto& [k, v] : fixed)
    if (!std::isfinite(v)) throw InvalidSpec("sweep: fixed parameter '" + k + "' is not finite");
  if (fixed.count("E") && !(fixed.at("E") > 0.0)) throw InvalidSpec("sweep: E must be > 0");
  if (fixed.count("B") && fixed.at("B") < 0.0) throw InvalidSpec("sweep: B must be >= 0");
  if (fixed.count("mu_c") && !(fixed.at("mu_c") > 0.0))
    throw InvalidSpec("sweep: mu_c must be > 0");
  if (!(quadrature_tol > 0.0) || quadrature_tol > 1e-2)
    throw InvalidSpec("sweep: quadrature tolerance must lie in (0, 1e-2]");
  if (!(ode_tol > 0.0)) throw InvalidSpec("sweep: ode tolerance must be > 0");
  if (points_per_decade < 16) throw InvalidSpec("sweep: points_per_decade must be >= 16");
  if (!(z_min > 0.0) || !(z_max > z_min)) throw InvalidSpec("sweep: need 0 < z_min < z_max");
  if (!(z_floor >= 0.0)) throw InvalidSpec("sweep: z_floor must be >= 0");
  if (!(tau > 0.0) || !(v_F > 0.0)) throw InvalidSpec("sweep: tau and v_F must be > 0");
  if (workers < 1) throw InvalidSpec("sweep: workers must be >= 1");
}

const AtomSpecies& SweepSpec::resolve_atom() const {
  return (species ? *species : AtomTable::builtin()).lookup(atom);
}

double SweepSpec::fixed_or(const std::string& key, double fallback) const {
  const auto it = fixed.find(key);
  return it == fixed.end() ? fallback : it->second;
}

GrapheneConfig SweepSpec::graphene(double B) const {
  auto cfg = GrapheneConfig::with_field(B, fixed_or("mu_c", 0.115));
  cfg.tau = tau;
  cfg.v_F = v_F;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

CurveCache::CurveCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

CurveCache CurveCache::from_environment() {
  if (const char* d = std::getenv("CQR_CACHE_DIR"); d && *d) return CurveCache(d);
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x)
    return CurveCache(std::filesystem::path(x) / "casimir_qr");
  if (const char* h = std::getenv("HOME"); h && *h)
    return CurveCache(std::filesystem::path(h) / ".cache" / "casimir_qr");
  return CurveCache(std::filesystem::temp_directory_path() / "casimir_qr");
}

std::string CurveCache::key(const AtomSpecies& atom, const GrapheneConfig& cfg,
                            const TabulationOptions& opts) {
  std::ostringstream s;
  s << "atom=" << atom.name << ";m=" << fmt17(atom.mass) << ";a0=" << fmt17(atom.alpha0)
    << ";xl=" << fmt17(atom.xi_l) << ";B=" << fmt17(cfg.B) << ";mu=" << fmt17(cfg.mu_c)
    << ";tau=" << fmt17(cfg.tau) << ";vF=" << fmt17(cfg.v_F) << ";nmax=" << cfg.n_max
    << ";tail=" << fmt17(cfg.tail_tol) << ";zmin=" << fmt17(opts.z_min)
    << ";zmax=" << fmt17(opts.z_max) << ";ppd=" << opts.points_per_decade
    << ";tol=" << fmt17(opts.tol) << ";const=" << kConstantsVersion << ";tool=" << kToolVersion;
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.str())));
  return buf;
}

std::optional<PotentialCurve> CurveCache::load(const AtomSpecies& atom, const GrapheneConfig& cfg,
                                               const TabulationOptions& opts) const {
  const auto path = dir_ / (key(atom, cfg, opts) + ".csv");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    auto curve = PotentialCurve::read_csv(in);
    const auto& m = curve.metadata();
    if (!m.atom || m.atom->name != atom.name || !m.graphene || m.graphene->B != cfg.B ||
        curve.z_grid().front() != opts.z_min || curve.z_grid().back() != opts.z_max)
      return std::nullopt;
    return curve.with_source(cp_source(atom, cfg, opts.tol));
  } catch (const Error&) {
    return std::nullopt;
  }
}

void CurveCache::store(const PotentialCurve& curve, const TabulationOptions& opts) const {
  const auto& m = curve.metadata();
  if (!m.atom || !m.graphene) throw IoError("curve cache: curve lacks atom/graphene metadata");
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("curve cache: cannot create " + dir_.string() + ": " + ec.message());
  const auto final_path = dir_ / (key(*m.atom, *m.graphene, opts) + ".csv");
  std::random_device rd;
  const auto tmp = dir_ / (final_path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("curve cache: cannot write " + tmp.string());
    curve.write_csv(out);
    if (!out) throw IoError("curve cache: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("curve cache: cannot rename into " + final_path.string());
  }
}

PotentialCurve CurveCache::get(const AtomSpecies& atom, const GrapheneConfig& cfg,
                               const TabulationOptions& opts) const {
  if (auto c = load(atom, cfg, opts)) return std::move(*c);
  auto curve = tabulate(atom, cfg, opts);
  try {
    store(curve, opts);
  } catch (const IoError&) {
    // An unwritable cache only costs time on the next run.
  }
  return curve;
}

// ---------------------------------------------------------------------------

std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
  spec.validate();
  const auto xs = spec.range.values();
  const AtomSpecies atom = spec.resolve_atom();

  TabulationOptions topt;
  topt.z_min = spec.z_min;
  topt.z_max = spec.z_max;
  topt.points_per_decade = spec.points_per_decade;
  topt.tol = spec.quadrature_tol;

  auto curve_for = [&](double B, int workers) {
    auto t = topt;
    t.workers = workers;
    const auto cfg = spec.graphene(B);
    return std::make_shared<const PotentialCurve>(opts.cache ? opts.cache->get(atom, cfg, t)
                                                             : tabulate(atom, cfg, t));
  };

  SolveOptions so;
  so.ode_tol = spec.ode_tol;
  so.z_floor = spec.z_floor;

  std::vector<SweepRecord> records(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    records[i].swept_value = xs[i];
    records[i].value = kNaN;
    records[i].z_m = kNaN;
  }

  std::shared_ptr<const PotentialCurve> shared;
  double peak = kNaN;
  if (spec.mode == SweepMode::energy) {
    shared = curve_for(spec.fixed.at("B"), spec.workers);
  } else if (spec.mode == SweepMode::q_profile) {
    auto t = topt;
    t.z_min = std::min(spec.z_min, xs.front());
    t.z_max = std::max(spec.z_max, xs.back());
    t.workers = spec.workers;
    const auto cfg = spec.graphene(spec.fixed.at("B"));
    shared = std::make_shared<const PotentialCurve>(opts.cache ? opts.cache->get(atom, cfg, t)
                                                               : tabulate(atom, cfg, t));
    QRProblem pr{atom, units::nev_to_joule(spec.fixed.at("E")), shared, 0.0, 0.0, spec.ode_tol};
    try {
      peak = find_q_peak(pr);
    } catch (const NoBadlandsRegion&) {
    }
  }

  auto evaluate = [&](std::size_t i) {
    auto& rec = records[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (spec.mode) {
        case SweepMode::energy: {
          const auto sol = solve_qr(atom, units::nev_to_joule(rec.swept_value), shared, so);
          rec.value = sol.reflection_probability;
          rec.z_m = sol.z_m;
          rec.converged = sol.converged;
          break;
        }
        case SweepMode::field: {
          const auto curve = curve_for(rec.swept_value, 1);
          const auto sol = solve_qr(atom, units::nev_to_joule(spec.fixed.at("E")), curve, so);
          rec.value = sol.reflection_probability;
          rec.z_m = sol.z_m;
          rec.converged = sol.converged;
          break;
        }
        case SweepMode::q_profile: {
          QRProblem pr{atom, units::nev_to_joule(spec.fixed.at("E")), shared, 0.0, 0.0,
                       spec.ode_tol};
          rec.value = badlands_q(rec.swept_value, pr);
          rec.z_m = peak;
          rec.converged = true;
          break;
        }
        case SweepMode::potential:
          rec.value = cp_potential(rec.swept_value, atom, spec.graphene(spec.fixed.at("B")),
                                   spec.quadrature_tol);
          rec.converged = true;
          break;
        case SweepMode::ratio: {
          const double ub = cp_potential(rec.swept_value, atom,
                                         spec.graphene(spec.fixed.at("B")), spec.quadrature_tol);
          const double u0 =
              cp_potential(rec.swept_value, atom, spec.graphene(0.0), spec.quadrature_tol);
          if (!(std::abs(u0) > 0.0)) throw Error("ratio: U at B = 0 vanishes");
          rec.value = ub / u0;
          rec.converged = true;
          break;
        }
      }
    } catch (const std::exception& e) {
      rec.value = kNaN;
      rec.converged = false;
      rec.note = e.what();
      if (rec.note.empty()) rec.note = "unknown failure";
    }
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  detail::parallel_for(xs.size(), spec.workers, evaluate);

  const auto failures = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed(); }));
  if (static_cast<double>(failures) > opts.max_failure_fraction * static_cast<double>(xs.size())) {
    std::ostringstream msg;
    msg << "sweep aborted: " << failures << " of " << xs.size() << " points failed";
    for (const auto& r : records)
      if (r.failed()) {
        msg << "; first failure at " << fmt17(r.swept_value) << ": " << r.note;
        break;
      }
    throw SweepAborted(msg.str(), std::move(records));
  }
  return records;
}

std::vector<double> landau_crossing_fields(double mu_c, const GrapheneConfig& cfg, int n_first,
                                           int n_last) {
  if (!(mu_c > 0.0)) throw DomainError("landau_crossing_fields: mu_c must be > 0");
  if (n_first < 1 || n_last < n_first)
    throw DomainError("landau_crossing_fields: need 1 <= n_first <= n_last");
  std::vector<double> out;
  for (int n = n_last; n >= n_first; --n)
    out.push_back(mu_c * mu_c / (2.0 * K::hbar * K::e * cfg.v_F * cfg.v_F * n));
  return out;
}

std::vector<Discontinuity> detect_discontinuities(const std::vector<SweepRecord>& records) {
  if (records.size() < 16)
    throw DomainError("detect_discontinuities: need at least 16 records, got " +
                      std::to_string(records.size()));
  std::vector<const SweepRecord*> ok;
  for (const auto& r : records)
    if (!r.failed() && std::isfinite(r.value)) ok.push_back(&r);
  if (ok.size() < 2) return {};
  std::vector<double> diffs;
  for (std::size_t i = 1; i < ok.size(); ++i) diffs.push_back(std::abs(ok[i]->value - ok[i - 1]->value));
  auto sorted = diffs;
  const auto mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
  double median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + mid);
    median = 0.5 * (median + lower);
  }
  std::vector<Discontinuity> out;
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 5.0 * median)
      out.push_back({ok[i]->swept_value, ok[i + 1]->swept_value, ok[i + 1]->value - ok[i]->value});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::pair<std::string, std::string>> header_entries(const SweepSpec& spec) {
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("atom", spec.atom);
  h.emplace_back("mode", to_string(spec.mode));
  for (const auto& [k, v] : spec.fixed) h.emplace_back(k, fmt17(v));
  h.emplace_back("range_start", fmt17(spec.range.start));
  h.emplace_back("range_stop", fmt17(spec.range.stop));
  h.emplace_back("range_points", std::to_string(spec.range.points));
  h.emplace_back("range_spacing", to_string(spec.range.spacing));
  h.emplace_back("tau", fmt17(spec.tau));
  h.emplace_back("v_F", fmt17(spec.v_F));
  h.emplace_back("tol", fmt17(spec.quadrature_tol));
  h.emplace_back("ode_tol", fmt17(spec.ode_tol));
  h.emplace_back("points_per_decade", std::to_string(spec.points_per_decade));
  h.emplace_back("z_min", fmt17(spec.z_min));
  h.emplace_back("z_max", fmt17(spec.z_max));
  h.emplace_back("z_floor", fmt17(spec.z_floor));
  const auto& a = spec.resolve_atom();
  h.emplace_back("atom_mass_kg", fmt17(a.mass));
  h.emplace_back("atom_alpha0_si", fmt17(a.alpha0));
  h.emplace_back("atom_xi_l_rad_s", fmt17(a.xi_l));
  if (spec.fixed.count("B"))
    h.emplace_back("field_floor_applied", spec.fixed.at("B") < GrapheneConfig::kFieldFloor ? "1" : "0");
  h.emplace_back("constants_version", kConstantsVersion);
  h.emplace_back("tool_version", kToolVersion);
  return h;
}

const std::vector<std::string> kReserved = {
    "atom", "mode", "range_start", "range_stop", "range_points", "range_spacing", "tau", "v_F",
    "tol", "ode_tol", "points_per_decade", "z_min", "z_max", "z_floor", "atom_mass_kg",
    "atom_alpha0_si", "atom_xi_l_rad_s", "field_floor_applied", "constants_version",
    "tool_version"};

std::string json_number_or_null(double v) { return std::isfinite(v) ? fmt17(v) : "null"; }

}  // namespace

void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRecord>& records,
               bool include_wall_time) {
  for (const auto& [k, v] : header_entries(spec)) os << "# " << k << '=' << v << '\n';
  const auto [xname, yname] = column_names(spec.mode);
  os << xname << ',' << yname << ",z_m_peak,converged,note";
  if (include_wall_time) os << ",wall_time_s";
  os << '\n';
  for (const auto& r : records) {
    os << fmt17(r.swept_value) << ',' << fmt17(r.value) << ',' << fmt17(r.z_m) << ','
       << (r.converged ? 1 : 0) << ',' << sanitize(r.note);
    if (include_wall_time) os << ',' << fmt17(r.wall_time);
    os << '\n';
  }
}

void write_json(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRecord>& records,
                bool include_wall_time) {
  // Hand-assembled so that numbers keep the same %.17g text as the CSV.
  const auto [xname, yname] = column_names(spec.mode);
  os << "{\n  \"metadata\": {";
  bool first = true;
  for (const auto& [k, v] : header_entries(spec)) {
    os << (first ? "\n" : ",\n") << "    " << json(k).dump() << ": " << json(v).dump();
    first = false;
  }
  os << "\n  },\n  \"records\": [";
  first = true;
  for (const auto& r : records) {
    os << (first ? "\n" : ",\n") << "    {" << json(xname).dump() << ": "
       << json_number_or_null(r.swept_value) << ", " << json(yname).dump() << ": "
       << json_number_or_null(r.value) << ", \"z_m_peak\": " << json_number_or_null(r.z_m)
       << ", \"converged\": " << (r.converged ? "true" : "false")
       << ", \"note\": " << json(r.note).dump();
    if (include_wall_time) os << ", \"wall_time_s\": " << json_number_or_null(r.wall_time);
    os << "}";
    first = false;
  }
  os << (records.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

ParsedSweep read_csv(std::istream& is) {
  ParsedSweep out;
  std::map<std::string, std::string> h;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) != 0) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("sweep CSV: malformed header line '" + line + "'");
    h[line.substr(2, eq - 2)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = h.find(k);
    if (it == h.end()) throw IoError("sweep CSV: header lacks '" + k + "'");
    return it->second;
  };
  auto& spec = out.spec;
  spec.atom = need("atom");
  spec.mode = parse_mode(need("mode"));
  spec.range.start = parse_double(need("range_start"));
  spec.range.stop = parse_double(need("range_stop"));
  spec.range.points = std::stoi(need("range_points"));
  spec.range.spacing = parse_spacing(need("range_spacing"));
  spec.tau = parse_double(need("tau"));
  spec.v_F = parse_double(need("v_F"));
  spec.quadrature_tol = parse_double(need("tol"));
  spec.ode_tol = parse_double(need("ode_tol"));
  spec.points_per_decade = std::stoi(need("points_per_decade"));
  spec.z_min = parse_double(need("z_min"));
  spec.z_max = parse_double(need("z_max"));
  spec.z_floor = parse_double(need("z_floor"));
  for (const auto& [k, v] : h)
    if (std::find(kReserved.begin(), kReserved.end(), k) == kReserved.end())
      spec.fixed[k] = parse_double(v);

  const AtomSpecies listed{spec.atom, parse_double(need("atom_mass_kg")),
                           parse_double(need("atom_alpha0_si")),
                           parse_double(need("atom_xi_l_rad_s"))};
  bool builtin_match = false;
  try {
    const auto& b = AtomTable::builtin().lookup(spec.atom);
    builtin_match = b.mass == listed.mass && b.alpha0 == listed.alpha0 && b.xi_l == listed.xi_l;
  } catch (const UnknownSpecies&) {
  }
  if (!builtin_match) spec.species = AtomTable::builtin().with_species(listed);

  const auto [xname, yname] = column_names(spec.mode);
  const std::string expected = xname + "," + yname + ",z_m_peak,converged,note";
  if (line != expected && line != expected + ",wall_time_s")
    throw IoError("sweep CSV: unexpected column row '" + line + "'");
  const bool has_wall = line != expected;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    const std::size_t want = has_wall ? 6 : 5;
    if (cells.size() != want) throw IoError("sweep CSV: bad row '" + line + "'");
    SweepRecord r;
    r.swept_value = parse_double(cells[0]);
    r.value = parse_double(cells[1]);
    r.z_m = parse_double(cells[2]);
    r.converged = cells[3] == "1";
    r.note = cells[4];
    if (has_wall) r.wall_time = parse_double(cells[5]);
    out.records.push_back(std::move(r));
  }
  return out;
}

std::vector<std::filesystem::path> emit(const std::vector<SweepRecord>& records,
                                        const SweepSpec& spec, const std::filesystem::path& path,
                                        OutputFormat format, bool plot_script,
                                        bool include_wall_time) {
  std::vector<std::filesystem::path> written;
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    if (format == OutputFormat::csv)
      write_csv(out, spec, records, include_wall_time);
    else
      write_json(out, spec, records, include_wall_time);
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
  }
  written.push_back(path);
  if (!plot_script) return written;

  auto gp = path;
  gp.replace_extension(".gp");
  std::ofstream out(gp, std::ios::binary);
  if (!out) throw IoError("cannot open '" + gp.string() + "' for writing");
  const auto [xname, yname] = column_names(spec.mode);
  const bool logx = spec.range.spacing == Spacing::log;
  const bool logy = spec.mode == SweepMode::q_profile || spec.mode == SweepMode::potential;
  out << "# gnuplot script for " << path.filename().string() << "\n";
  if (format == OutputFormat::csv) {
    const auto header_lines = header_entries(spec).size() + 1;
    out << "set datafile separator ','\n";
    if (logx) out << "set logscale x\n";
    if (logy && spec.mode == SweepMode::q_profile) out << "set logscale y\n";
    out << "set xlabel '" << xname << "'\nset ylabel '" << yname << "'\nset grid\n";
    if (spec.mode == SweepMode::potential)
      out << "plot '" << path.filename().string() << "' skip " << header_lines
          << " using 1:(-$2) with linespoints title '-" << yname << "'\n";
    else
      out << "plot '" << path.filename().string() << "' skip " << header_lines
          << " using 1:2 with linespoints title '" << yname << "'\n";
  } else {
    out << "# JSON output; convert to CSV (--format csv) to plot with gnuplot\n";
  }
  if (!out) throw IoError("write to '" + gp.string() + "' failed");
  written.push_back(gp);
  return written;
}

}  // namespace cqr
