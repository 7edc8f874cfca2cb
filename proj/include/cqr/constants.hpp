#pragma once

// CODATA 2018 values, 10 significant digits. Everything inside the library
// is SI; the helpers below are the only unit conversion surface.

namespace cqr {

struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;   // J s
  static constexpr double c = 299792458.0;          // m/s
  static constexpr double e = 1.602176634e-19;      // C
  static constexpr double eps0 = 8.8541878128e-12;  // F/m
  static constexpr double mu0 = 1.25663706212e-6;   // H/m
  static constexpr double eta0_sq = mu0 / eps0;     // Ohm^2
  static constexpr double ev_to_joule = e;          // J/eV
  static constexpr double au_polarizability = 1.648e-41;  // C^2 m^2 / J per atomic unit
};

using K = PhysicalConstants;

inline constexpr const char* kConstantsVersion = "CODATA-2018";
inline constexpr const char* kToolVersion = "1.0.0";

namespace units {

constexpr double ev_to_joule(double ev) { return ev * K::ev_to_joule; }
constexpr double joule_to_ev(double j) { return j / K::ev_to_joule; }
constexpr double nev_to_joule(double nev) { return nev * 1e-9 * K::ev_to_joule; }
constexpr double joule_to_nev(double j) { return j / (1e-9 * K::ev_to_joule); }
/// Photon energy in eV to angular frequency in rad/s.
constexpr double ev_to_rad_per_s(double ev) { return ev * K::ev_to_joule / K::hbar; }
constexpr double rad_per_s_to_ev(double w) { return w * K::hbar / K::ev_to_joule; }
constexpr double au_to_si_polarizability(double au) { return au * K::au_polarizability; }
constexpr double si_to_au_polarizability(double si) { return si / K::au_polarizability; }

}  // namespace units
}  // namespace cqr
