#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cqr/atoms.hpp"
#include "cqr/errors.hpp"
#include "cqr/graphene.hpp"
#include "cqr/lifshitz.hpp"
#include "cqr/potential_curve.hpp"
#include "cqr/wkb.hpp"

namespace cqr {

enum class SweepMode { energy, field, q_profile, potential, ratio };
enum class Spacing { log, linear };

std::string to_string(SweepMode mode);
std::string to_string(Spacing spacing);
SweepMode parse_mode(const std::string& s);
Spacing parse_spacing(const std::string& s);

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
  Spacing spacing = Spacing::log;

  /// Sample positions, start and stop included.
  std::vector<double> values() const;
};

/**
 * A parameter sweep. Fixed parameters use interface units: "B" in T,
 * "mu_c" in eV and "E" in neV. Swept values are neV (energy), T (field)
 * or m (q_profile, potential, ratio).
 */
struct SweepSpec {
  std::string atom;
  SweepMode mode = SweepMode::energy;
  std::map<std::string, double> fixed;
  SweepRange range;
  std::string output_path;

  double quadrature_tol = kDefaultQuadratureTol;
  double ode_tol = kDefaultOdeTol;
  int points_per_decade = 48;
  double z_min = 1e-9;
  double z_max = 1e-3;
  double z_floor = kShortDistanceFloor;
  double tau = 1.84e-13;
  double v_F = 1e6;
  int workers = 1;

  /// Species available to this sweep; the built-in table when empty.
  std::optional<AtomTable> species;

  void validate() const;
  const AtomSpecies& resolve_atom() const;
  double fixed_or(const std::string& key, double fallback) const;
  /// Graphene configuration for field B (T) with this spec's mu_c, tau and v_F.
  GrapheneConfig graphene(double B) const;
};

struct SweepRecord {
  double swept_value = 0.0;
  double value = 0.0;  // R, Q, U or the ratio depending on the mode
  double z_m = 0.0;    // NaN unless the mode solves a reflection problem
  bool converged = false;
  std::string note;    // empty on success, the error text otherwise
  double wall_time = 0.0;

  bool failed() const { return !note.empty(); }
};

class SweepAborted : public Error {
 public:
  SweepAborted(const std::string& what, std::vector<SweepRecord> records)
      : Error(what), records_(std::move(records)) {}
  const std::vector<SweepRecord>& records() const { return records_; }

 private:
  std::vector<SweepRecord> records_;
};

/**
 * On-disk store of tabulated curves keyed by a hash of everything that
 * determines them. Writes go to a temporary file that is renamed into
 * place. CQR_CACHE_DIR overrides the default location.
 */
class CurveCache {
 public:
  explicit CurveCache(std::filesystem::path dir);
  static CurveCache from_environment();

  const std::filesystem::path& dir() const { return dir_; }
  static std::string key(const AtomSpecies& atom, const GrapheneConfig& cfg,
                         const TabulationOptions& opts);

  std::optional<PotentialCurve> load(const AtomSpecies& atom, const GrapheneConfig& cfg,
                                     const TabulationOptions& opts) const;
  void store(const PotentialCurve& curve, const TabulationOptions& opts) const;

  /// Cached curve when present, else a fresh tabulation that is then stored.
  PotentialCurve get(const AtomSpecies& atom, const GrapheneConfig& cfg,
                     const TabulationOptions& opts) const;

 private:
  std::filesystem::path dir_;
};

struct SweepOptions {
  const CurveCache* cache = nullptr;
  double max_failure_fraction = 0.2;
};

/// Evaluates every point of the sweep; records come back in sweep order.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const SweepOptions& opts = {});

/// B*_n = mu_c^2 / (2 hbar e v_F^2 n) for n in [n_first, n_last], ascending in B.
std::vector<double> landau_crossing_fields(double mu_c, const GrapheneConfig& cfg, int n_first,
                                           int n_last);

struct Discontinuity {
  double B_low = 0.0;
  double B_high = 0.0;
  double jump = 0.0;
};

/// Adjacent pairs whose |dR| exceeds five times the median adjacent |dR|.
std::vector<Discontinuity> detect_discontinuities(const std::vector<SweepRecord>& records);

enum class OutputFormat { csv, json };

void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRecord>& records,
               bool include_wall_time = false);
void write_json(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRecord>& records,
                bool include_wall_time = false);

struct ParsedSweep {
  SweepSpec spec;
  std::vector<SweepRecord> records;
};

/// Inverse of write_csv: rebuilds the spec from the header and the records from the rows.
ParsedSweep read_csv(std::istream& is);

/**
 * Writes the sweep to `path` and, when requested, a gnuplot script next to
 * it (same stem, .gp). Returns the paths written.
 */
std::vector<std::filesystem::path> emit(const std::vector<SweepRecord>& records,
                                        const SweepSpec& spec, const std::filesystem::path& path,
                                        OutputFormat format, bool plot_script,
                                        bool include_wall_time = false);

/// Column names of the swept value and the result for a mode.
std::pair<std::string, std::string> column_names(SweepMode mode);

}  // namespace cqr
