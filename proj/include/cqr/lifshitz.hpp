#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "cqr/atoms.hpp"
#include "cqr/graphene.hpp"
#include "cqr/potential_curve.hpp"

namespace cqr {

inline constexpr double kDefaultQuadratureTol = 1e-6;

/// U, dU/dz, d2U/dz2 at one distance plus the quadrature error estimate on U.
struct CpSample {
  double U = 0.0;
  double dU = 0.0;
  double d2U = 0.0;
  double error = 0.0;
};

/// Casimir-Polder energy (J) of an atom at distance z (m) from the sheet.
double cp_potential(double z, const AtomSpecies& atom, const GrapheneConfig& cfg,
                    double tol = kDefaultQuadratureTol);

/// First and second derivatives, differentiated under the integral sign.
std::pair<double, double> cp_derivatives(double z, const AtomSpecies& atom,
                                         const GrapheneConfig& cfg,
                                         double tol = kDefaultQuadratureTol);

/// All three quantities from a single pass over the (xi, kappa) integrand.
CpSample cp_sample(double z, const AtomSpecies& atom, const GrapheneConfig& cfg,
                   double tol = kDefaultQuadratureTol);

struct TabulationOptions {
  double z_min = 1e-9;
  double z_max = 1e-3;
  int points_per_decade = 48;
  double tol = kDefaultQuadratureTol;
  int workers = 1;
};

/**
 * Tabulates U, dU, d2U on a log grid. The returned curve keeps a source so
 * solvers can extend it past z_max. Quadrature failures are rethrown with
 * the offending z attached. Checks the attractive/monotone invariants.
 */
PotentialCurve tabulate(const AtomSpecies& atom, const GrapheneConfig& cfg,
                        const TabulationOptions& opts = {});

/// C4 (J m^4) from a -C4/z^4 fit over the last decade of the curve.
double asymptotic_c4(const PotentialCurve& curve);

struct RatioPoint {
  double z = 0.0;
  double ratio = 0.0;
};

/// U^B(z) / U^{B=0}(z) at each z.
std::vector<RatioPoint> ratio_curve(const AtomSpecies& atom, const GrapheneConfig& cfg_B,
                                    const GrapheneConfig& cfg_B0, const std::vector<double>& z_grid,
                                    double tol = kDefaultQuadratureTol);

namespace detail {

using AlphaFn = std::function<double(double xi)>;
using SigmaFn = std::function<ConductivityPair(double xi)>;

/**
 * The Lifshitz double integral for arbitrary polarizability and sheet
 * response. xi_scale is the polarizability's characteristic frequency,
 * used only to place the lower end of the frequency integration.
 */
CpSample cp_sample_generic(double z, const AlphaFn& alpha, const SigmaFn& sigma, double xi_scale,
                           double tol);

}  // namespace detail
}  // namespace cqr
