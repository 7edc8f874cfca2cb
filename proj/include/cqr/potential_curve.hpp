#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cqr/atoms.hpp"
#include "cqr/graphene.hpp"

namespace cqr {

struct PotentialSample {
  double U = 0.0;
  double dU = 0.0;
  double d2U = 0.0;
};

using PotentialSource = std::function<PotentialSample(double z)>;

/// Provenance carried alongside a tabulated curve.
struct CurveMetadata {
  std::string kind = "casimir-polder";
  std::optional<AtomSpecies> atom;
  std::optional<GrapheneConfig> graphene;
  double quadrature_tol = 0.0;
  int points_per_decade = 0;
};

/**
 * Potential tabulated on a log-spaced grid. Between nodes each column is
 * interpolated by the cubic through the four surrounding nodes in
 * (ln z, ln|v|) coordinates, or (ln z, v) when the column changes sign or
 * touches zero. Immutable once built.
 */
class PotentialCurve {
 public:
  PotentialCurve(std::vector<double> z, std::vector<double> U, std::vector<double> dU,
                 std::vector<double> d2U, CurveMetadata meta, PotentialSource source = {});

  /// Log-spaced grid from z_min to z_max (both included), evaluated point-wise.
  static PotentialCurve tabulate(const PotentialSource& source, double z_min, double z_max,
                                 int points_per_decade, CurveMetadata meta, int workers = 1);

  const std::vector<double>& z_grid() const { return z_; }
  const std::vector<double>& U_values() const { return u_; }
  const std::vector<double>& dU_values() const { return du_; }
  const std::vector<double>& d2U_values() const { return d2u_; }
  const CurveMetadata& metadata() const { return meta_; }

  double z_min() const { return z_.front(); }
  double z_max() const { return z_.back(); }
  bool contains(double z) const;

  double U(double z) const;
  double dU(double z) const;
  double d2U(double z) const;
  PotentialSample at(double z) const;

  bool can_extend() const { return static_cast<bool>(source_); }
  PotentialCurve with_source(PotentialSource source) const;
  /// Appends grid nodes with the same log spacing until z_max >= z_new_max.
  PotentialCurve extended_to(double z_new_max, int workers = 1) const;
  PotentialCurve extended_from(double z_new_min, int workers = 1) const;

  /// CSV with one '# {json}' metadata line, a header row, and %.17g rows.
  void write_csv(std::ostream& os) const;
  static PotentialCurve read_csv(std::istream& is);

 private:
  struct Column {
    std::vector<double> mapped;
    int mode = 0;  // 0 identity, +1 log(v), -1 log(-v)
    static Column build(const std::vector<double>& raw);
  };
  double interpolate(const Column& col, double z) const;
  void rebuild();

  std::vector<double> z_, u_, du_, d2u_;
  Column cu_, cdu_, cd2u_;
  double log_z0_ = 0.0;
  double log_step_ = 0.0;
  CurveMetadata meta_;
  PotentialSource source_;
};

std::string to_json_string(const CurveMetadata& meta);

}  // namespace cqr
