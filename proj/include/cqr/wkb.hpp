#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "cqr/atoms.hpp"
#include "cqr/potential_curve.hpp"

namespace cqr {

inline constexpr double kDefaultOdeTol = 1e-10;
/// Largest phase advance allowed in one ODE step, in radians.
inline constexpr double kMaxPhaseStep = 0.1;
/// Smallest wall distance at which the tabulated potential is trusted.
inline constexpr double kShortDistanceFloor = 1e-9;

/// One normal-incidence reflection problem on a fixed domain [z_i, z_f].
struct QRProblem {
  AtomSpecies atom;
  double energy = 0.0;  // J
  std::shared_ptr<const PotentialCurve> potential;
  double z_i = 0.0;
  double z_f = 0.0;
  double ode_tol = kDefaultOdeTol;

  void validate() const;
};

struct QPoint {
  double z = 0.0;
  double q = 0.0;
};

struct DomainRecord {
  double z_i = 0.0;
  double z_f = 0.0;
  double R = 0.0;
};

struct QRSolution {
  double reflection_probability = 0.0;
  std::complex<double> c_plus_final{0.0, 0.0};
  std::complex<double> c_minus_final{1.0, 0.0};
  double z_m = 0.0;  // NaN when Q has no peak (free particle)
  std::vector<QPoint> q_profile;
  bool converged = false;
  std::vector<DomainRecord> domain_history;
  std::vector<std::string> warnings;

  double z_i = 0.0;
  double z_f = 0.0;
  double phase_final = 0.0;         // phi(z_f), radians
  double max_amplitude_ratio = 0.0; // max |c+|/|c-| along the trajectory
  double flux_drift = 0.0;          // | |c-|^2 - |c+|^2 - 1 | at z_f
  std::size_t steps = 0;

  std::string to_json() const;
  void write_q_csv(std::ostream& os) const;
};

/// p(z) = sqrt(2 m (E - U(z))), using the potential interpolant.
double local_momentum(double z, const QRProblem& problem);

/// WKB badlands function Q(z) from U, U', U'' by the chain rule.
double badlands_q(double z, const QRProblem& problem);

/**
 * Global maximizer of Q over the potential grid, refined by golden-section
 * search in ln z. Secondary local maxima above half the peak are reported
 * through `warnings` when given.
 */
double find_q_peak(const QRProblem& problem, std::vector<std::string>* warnings = nullptr);

/// Integrates the coupled amplitude equations from z_i (c+ = 0, c- = 1) to z_f.
QRSolution integrate_amplitudes(const QRProblem& problem);

struct SolveOptions {
  double ode_tol = kDefaultOdeTol;
  int max_iterations = 10;
  double z_floor = kShortDistanceFloor;
  int workers = 1;  // used when the potential grid must be extended
};

/**
 * Reflection probability with the domain convergence loop: start from
 * [z_m/100, 100 z_m], halve z_i and double z_f until two successive
 * changes of R both stay below max(1e-3 R, 1e-6). z_i never goes below
 * opts.z_floor; the grid is extended in either direction when it has a
 * source. Throws ShortDistanceUnresolved when the floor sits above z_m/10.
 */
QRSolution solve_qr(const AtomSpecies& atom, double energy,
                    std::shared_ptr<const PotentialCurve> potential, const SolveOptions& opts = {});

}  // namespace cqr
