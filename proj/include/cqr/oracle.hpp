#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cqr/atoms.hpp"
#include "cqr/graphene.hpp"
#include "cqr/potential_curve.hpp"

namespace cqr::oracle {

enum class ModelKind { power3, power4, interpolating };

/// Closed-form test potentials: -C3/z^3, -C4/z^4 or -C4/[z^3 (z + ell)].
struct ModelPotential {
  ModelKind kind = ModelKind::power4;
  double C3 = 0.0;   // J m^3
  double C4 = 0.0;   // J m^4
  double ell = 0.0;  // m

  static ModelPotential power3(double c3);
  static ModelPotential power4(double c4);
  static ModelPotential interpolating(double c4, double ell);

  void validate() const;
  double U(double z) const;
  PotentialSample sample(double z) const;
  PotentialSource source() const;
  std::string name() const;
};

struct DirectResult {
  double R = 0.0;
  int points_per_wavelength = 0;
  std::size_t steps = 0;
  double last_change = 0.0;
};

/**
 * Reflection probability from the Schrodinger equation integrated with
 * classical RK4 on a fixed grid. The wave at z_i is purely incoming,
 * psi' = -i p psi / hbar, and at z_f it is split into e^{-ikz} and e^{+ikz}
 * with k = sqrt(2 m E) / hbar. The grid density doubles until R moves by
 * less than 1e-4. Steps land exactly on every breakpoint so that
 * piecewise-constant potentials are handled without smearing.
 */
DirectResult direct_reflection(const std::function<double(double)>& U, double mass, double energy,
                               double z_i, double z_f, std::vector<double> breakpoints = {});

struct BruteForceResult {
  double value = 0.0;  // J, from the finer grid
  double error = 0.0;  // |fine - coarse|
};

/// Lifshitz double integral by the trapezoid rule on an n x n grid and on 2n x 2n.
BruteForceResult brute_force_cp(double z, const AtomSpecies& atom, const GrapheneConfig& cfg,
                                int n = 1000);

}  // namespace cqr::oracle
