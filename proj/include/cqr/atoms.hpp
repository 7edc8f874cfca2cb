#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cqr {

/**
 * One atomic species in the single Lorentz-oscillator model.
 * All fields SI: mass in kg, alpha0 in C^2 m^2 / J, xi_l in rad/s.
 */
struct AtomSpecies {
  std::string name;
  double mass = 0.0;
  double alpha0 = 0.0;
  double xi_l = 0.0;

  /// Builds a species from table units (atomic units of polarizability, eV).
  static AtomSpecies from_table_units(std::string name, double mass_kg, double alpha0_au,
                                      double xi_l_ev);

  void validate() const;
};

/// alpha(i xi) = alpha0 / (1 + xi^2 / xi_l^2). Throws DomainError for xi < 0.
double polarizability(const AtomSpecies& atom, double xi);

/**
 * Immutable lookup table of species. Built-in entries are He, Na, Rb;
 * with_species() returns a copy with a species added or replaced.
 */
class AtomTable {
 public:
  static const AtomTable& builtin();

  const AtomSpecies& lookup(std::string_view name) const;
  AtomTable with_species(AtomSpecies species) const;
  std::vector<std::string> names() const;

 private:
  std::vector<AtomSpecies> species_;
};

/// Case-insensitive lookup in the built-in table.
const AtomSpecies& atom_lookup(std::string_view name);

}  // namespace cqr
