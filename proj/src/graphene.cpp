#include "cqr/graphene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cqr/constants.hpp"
#include "cqr/errors.hpp"

namespace cqr {

namespace {

double first_level(const GrapheneConfig& cfg) {
  return std::sqrt(2.0 * K::hbar * K::e * cfg.effective_field() * cfg.v_F * cfg.v_F);
}

// Zero-temperature occupation, Theta(mu - E) with Theta(0) = 1.
double occupation(double energy, double mu) { return energy <= mu ? 1.0 : 0.0; }

double level(std::int64_t n, double m1) { return std::sqrt(static_cast<double>(n)) * m1; }

// Integral over t in [t0, inf) of (t^4 - 1) / (t^4 (a^2 t^2 + g^2)) dt, times 1/a.
// t = sqrt(x+1) + sqrt(x) maps the continuous level index onto S = a t.
double tail_integral(double t0, double a, double g) {
  const double at = a * t0;
  const double i1 = (0.5 * std::numbers::pi - std::atan(at / g)) / (a * g);
  double i2;
  const double q = g / at;
  if (q < 0.5) {
    // Series in (g / a t0)^2; the closed form cancels catastrophically here.
    double term = 1.0 / (a * a * std::pow(t0, 5));
    i2 = 0.0;
    for (int j = 0; j < 60; ++j) {
      const double add = term / (2 * j + 5);
      i2 += (j % 2 == 0) ? add : -add;
      if (std::abs(add) < 1e-18 * std::abs(i2)) break;
      term *= q * q;
    }
  } else {
    const double g2 = g * g;
    i2 = 1.0 / (3.0 * g2 * t0 * t0 * t0) - a * a / (g2 * g2 * t0) +
         std::pow(a, 4) / (g2 * g2) * i1;
  }
  return (i1 - i2) / a;
}

}  // namespace

GrapheneConfig GrapheneConfig::with_field(double B_tesla, double mu_c_ev) {
  GrapheneConfig cfg;
  cfg.B = B_tesla;
  cfg.mu_c = units::ev_to_joule(mu_c_ev);
  return cfg;
}

void GrapheneConfig::validate() const {
  if (!(B >= 0.0)) throw DomainError("graphene: B must be >= 0");
  if (!(mu_c > 0.0)) throw DomainError("graphene: mu_c must be > 0");
  if (!(tau > 0.0)) throw DomainError("graphene: tau must be > 0");
  if (!(v_F > 0.0)) throw DomainError("graphene: v_F must be > 0");
  if (n_max < 1) throw DomainError("graphene: n_max must be >= 1");
  if (!(tail_tol > 0.0)) throw DomainError("graphene: tail_tol must be > 0");
}

double landau_level(std::int64_t n, const GrapheneConfig& cfg) {
  if (n < 0) throw DomainError("landau_level: n must be >= 0");
  const double m1 = std::sqrt(2.0 * K::hbar * K::e * cfg.B * cfg.v_F * cfg.v_F);
  return level(n, m1);
}

std::int64_t highest_filled_level(const GrapheneConfig& cfg) {
  const double m1 = first_level(cfg);
  const double ratio = cfg.mu_c / m1;
  auto n = static_cast<std::int64_t>(std::floor(ratio * ratio));
  while (level(n + 1, m1) <= cfg.mu_c) ++n;
  while (n > 0 && level(n, m1) > cfg.mu_c) --n;
  return n;
}

namespace detail {

LandauTerm landau_term(std::int64_t n, double xi, const GrapheneConfig& cfg) {
  const double m1 = first_level(cfg);
  const double mu = cfg.mu_c;
  const double g = K::hbar * (xi + 1.0 / cfg.tau);
  const double mn = level(n, m1);
  const double mn1 = level(n + 1, m1);

  const double num_xx = occupation(mn, mu) - occupation(mn1, mu) + occupation(-mn1, mu) -
                        occupation(-mn, mu);
  const double num_xx_c = occupation(-mn, mu) - occupation(mn1, mu) + occupation(-mn1, mu) -
                          occupation(mn, mu);
  const double num_xy = occupation(mn, mu) - occupation(mn1, mu) - occupation(-mn1, mu) +
                        occupation(-mn, mu);

  const double dm = mn1 - mn;
  const double sm = mn1 + mn;
  const double d = dm * dm + g * g;
  const double dc = sm * sm + g * g;

  LandauTerm t;
  if (num_xx != 0.0) t.xx += num_xx / (d * dm);
  if (num_xx_c != 0.0) t.xx += num_xx_c / (dc * sm);
  if (num_xy != 0.0) t.xy = num_xy * (1.0 / d + 1.0 / dc);
  return t;
}

double sigma_xx_prefactor(double xi, const GrapheneConfig& cfg) {
  const double e3 = K::e * K::e * K::e;
  return e3 * cfg.v_F * cfg.v_F * cfg.effective_field() * K::hbar * (xi + 1.0 / cfg.tau) /
         std::numbers::pi;
}

double sigma_xy_prefactor(const GrapheneConfig& cfg) {
  const double e3 = K::e * K::e * K::e;
  return -e3 * cfg.v_F * cfg.v_F * cfg.effective_field() / std::numbers::pi;
}

double interband_tail(std::int64_t first, double m1, double gamma) {
  // Midpoint Euler-Maclaurin: sum_{n>=K} f(n) = int_{K-1/2}^inf f + f'(K-1/2)/24 + ...
  const double x0 = static_cast<double>(first) - 0.5;
  const double t0 = std::sqrt(x0 + 1.0) + std::sqrt(x0);
  const double s = m1 * t0;
  const double ds = s / (2.0 * std::sqrt(x0 * (x0 + 1.0)));
  const double s2 = s * s;
  const double g2 = gamma * gamma;
  const double df = -2.0 * (3.0 * s2 + g2) / (s2 * (s2 + g2) * (s2 + g2)) * ds;
  return tail_integral(t0, m1, gamma) + df / 24.0;
}

}  // namespace detail

ConductivityPair conductivities(double xi, const GrapheneConfig& cfg) {
  if (!(xi > 0.0)) throw DomainError("conductivities: xi must be > 0");
  cfg.validate();

  const double m1 = first_level(cfg);
  const double g = K::hbar * (xi + 1.0 / cfg.tau);
  const std::int64_t filled = highest_filled_level(cfg);
  const double ratio = cfg.mu_c / m1;

  // Every numerator vanishes below the highest filled level, so the explicit
  // part starts there. Beyond it only the interband companion terms survive.
  std::int64_t cutoff =
      std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(ratio * ratio)) + 64, 512);
  if (cutoff > cfg.n_max)
    throw LandauSumNotConverged("Landau sum cutoff " + std::to_string(cutoff) +
                                    " exceeds n_max = " + std::to_string(cfg.n_max),
                                1.0);

  double sum_xx = 0.0;
  double sum_xy = 0.0;
  std::int64_t n = filled;
  auto advance_to = [&](std::int64_t stop) {
    for (; n < stop; ++n) {
      const auto t = detail::landau_term(n, xi, cfg);
      sum_xx += t.xx;
      sum_xy += t.xy;
    }
  };

  advance_to(cutoff);
  double prev_xx = sum_xx + detail::interband_tail(cutoff, m1, g);
  double prev_xy = sum_xy;
  for (;;) {
    const std::int64_t next = 2 * cutoff;
    if (next > cfg.n_max) {
      const double tail = detail::interband_tail(cutoff, m1, g);
      throw LandauSumNotConverged(
          "Landau sum not converged at n_max = " + std::to_string(cfg.n_max),
          std::abs(tail / prev_xx));
    }
    advance_to(next);
    const double cur_xx = sum_xx + detail::interband_tail(next, m1, g);
    const double cur_xy = sum_xy;
    const double dxx = std::abs(cur_xx - prev_xx) / std::abs(cur_xx);
    const double dxy = cur_xy == 0.0 ? 0.0 : std::abs(cur_xy - prev_xy) / std::abs(cur_xy);
    prev_xx = cur_xx;
    prev_xy = cur_xy;
    cutoff = next;
    if (dxx < cfg.tail_tol && dxy < cfg.tail_tol) break;
  }

  return {detail::sigma_xx_prefactor(xi, cfg) * prev_xx, detail::sigma_xy_prefactor(cfg) * prev_xy};
}

ReflectionPair reflection_coefficients_kappa(double kappa, double xi,
                                             const ConductivityPair& sigma) {
  const double zh = xi * K::mu0 / kappa;
  const double ze = kappa / (xi * K::eps0);
  const double sxx = sigma.sigma_xx;
  const double sxy = sigma.sigma_xy;
  const double quad = K::eta0_sq * (sxx * sxx + sxy * sxy);
  const double delta = (2.0 + zh * sxx) * (2.0 + ze * sxx) + K::eta0_sq * sxy * sxy;
  if (!(std::abs(delta) > 0.0) || !std::isfinite(delta))
    throw DegenerateSheetResponse("degenerate sheet response: Delta = " + std::to_string(delta));
  return {-(2.0 * sxx * zh + quad) / delta, (2.0 * sxx * ze + quad) / delta};
}

ReflectionPair reflection_coefficients(double k, double xi, const ConductivityPair& sigma) {
  if (!(k >= 0.0)) throw DomainError("reflection_coefficients: k must be >= 0");
  if (!(xi > 0.0)) throw DomainError("reflection_coefficients: xi must be > 0");
  const double kappa = std::sqrt(xi * xi / (K::c * K::c) + k * k);
  return reflection_coefficients_kappa(kappa, xi, sigma);
}

ReflectionPair reflection_coefficients(double k, double xi, const GrapheneConfig& cfg) {
  return reflection_coefficients(k, xi, conductivities(xi, cfg));
}

}  // namespace cqr
