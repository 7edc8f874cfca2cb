#pragma once

#include <cstdint>

namespace cqr {

/// Graphene sheet parameters. SI units: B in T, mu_c in J, tau in s, v_F in m/s.
struct GrapheneConfig {
  double B = 0.0;
  double mu_c = 0.0;
  double tau = 1.84e-13;
  double v_F = 1.0e6;
  std::int64_t n_max = 200000;
  double tail_tol = 1e-8;

  /// Below this field the Landau sum is evaluated at the floor value instead.
  static constexpr double kFieldFloor = 1e-3;

  static GrapheneConfig with_field(double B_tesla, double mu_c_ev);

  void validate() const;
  bool uses_field_floor() const { return B < kFieldFloor; }
  double effective_field() const { return uses_field_floor() ? kFieldFloor : B; }
};

/// Conductivities on the imaginary frequency axis, in Siemens.
struct ConductivityPair {
  double sigma_xx = 0.0;
  double sigma_xy = 0.0;
};

struct ReflectionPair {
  double r_ss = 0.0;
  double r_pp = 0.0;
};

/// M_n = sqrt(n) * sqrt(2 hbar e B v_F^2), in J. Uses the configured B as given.
double landau_level(std::int64_t n, const GrapheneConfig& cfg);

/// Index of the highest Landau level with M_n <= mu_c (Theta(0) = 1).
std::int64_t highest_filled_level(const GrapheneConfig& cfg);

/**
 * Longitudinal and Hall conductivities at imaginary frequency i*xi.
 *
 * The zero-temperature Landau sums are summed explicitly up to a dynamic
 * cutoff and closed by the Euler-Maclaurin tail of the interband series,
 * which has an elementary antiderivative. The cutoff is doubled until both
 * conductivities move by less than cfg.tail_tol, up to cfg.n_max.
 */
ConductivityPair conductivities(double xi, const GrapheneConfig& cfg);

/// r^{s,s} and r^{p,p} at in-plane wavevector k and imaginary frequency xi.
ReflectionPair reflection_coefficients(double k, double xi, const GrapheneConfig& cfg);
ReflectionPair reflection_coefficients(double k, double xi, const ConductivityPair& sigma);

/// Same as above with kappa = sqrt(xi^2/c^2 + k^2) already known.
ReflectionPair reflection_coefficients_kappa(double kappa, double xi,
                                             const ConductivityPair& sigma);

namespace detail {

/// Literal Theta-function summands of the two Landau sums (without prefactors).
struct LandauTerm {
  double xx = 0.0;
  double xy = 0.0;
};
LandauTerm landau_term(std::int64_t n, double xi, const GrapheneConfig& cfg);

/// Prefactors multiplying the sums for sigma_xx and sigma_xy.
double sigma_xx_prefactor(double xi, const GrapheneConfig& cfg);
double sigma_xy_prefactor(const GrapheneConfig& cfg);

/// Sum over n >= first of 2 / (S_n (S_n^2 + Gamma^2)), S_n = M_{n+1} + M_n.
double interband_tail(std::int64_t first, double m1, double gamma);

}  // namespace detail
}  // namespace cqr
