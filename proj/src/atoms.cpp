#include "cqr/atoms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cqr/constants.hpp"
#include "cqr/errors.hpp"

namespace cqr {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

AtomTable make_builtin() {
  // Masses of the dominant isotopes 4He, 23Na, 87Rb.
  return AtomTable{}
      .with_species(AtomSpecies::from_table_units("He", 6.6465e-27, 1.384, 27.64))
      .with_species(AtomSpecies::from_table_units("Na", 3.8175e-26, 162.6, 2.13))
      .with_species(AtomSpecies::from_table_units("Rb", 1.4432e-25, 318.6, 1.68));
}

}  // namespace

AtomSpecies AtomSpecies::from_table_units(std::string name, double mass_kg, double alpha0_au,
                                          double xi_l_ev) {
  AtomSpecies s{std::move(name), mass_kg, units::au_to_si_polarizability(alpha0_au),
                units::ev_to_rad_per_s(xi_l_ev)};
  s.validate();
  return s;
}

void AtomSpecies::validate() const {
  if (name.empty()) throw DomainError("atom species needs a name");
  if (!(mass > 0.0) || !(alpha0 > 0.0) || !(xi_l > 0.0))
    throw DomainError("atom species '" + name + "' needs mass, alpha0 and xi_l > 0");
}

double polarizability(const AtomSpecies& atom, double xi) {
  if (!(xi >= 0.0)) throw DomainError("polarizability: xi must be >= 0");
  const double r = xi / atom.xi_l;
  return atom.alpha0 / (1.0 + r * r);
}

const AtomTable& AtomTable::builtin() {
  static const AtomTable table = make_builtin();
  return table;
}

const AtomSpecies& AtomTable::lookup(std::string_view name) const {
  for (const auto& s : species_)
    if (iequals(s.name, name)) return s;
  std::string msg = "unknown species '" + std::string(name) + "'; available:";
  for (const auto& n : names()) msg += " " + n;
  throw UnknownSpecies(msg);
}

AtomTable AtomTable::with_species(AtomSpecies species) const {
  species.validate();
  AtomTable out = *this;
  auto it = std::find_if(out.species_.begin(), out.species_.end(),
                         [&](const AtomSpecies& s) { return iequals(s.name, species.name); });
  if (it != out.species_.end())
    *it = std::move(species);
  else
    out.species_.push_back(std::move(species));
  return out;
}

std::vector<std::string> AtomTable::names() const {
  std::vector<std::string> out;
  for (const auto& s : species_) out.push_back(s.name);
  return out;
}

const AtomSpecies& atom_lookup(std::string_view name) { return AtomTable::builtin().lookup(name); }

}  // namespace cqr
