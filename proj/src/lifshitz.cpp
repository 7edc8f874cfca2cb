#include "cqr/lifshitz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cqr/constants.hpp"
#include "cqr/detail/quadrature.hpp"
#include "cqr/errors.hpp"

namespace cqr {

namespace detail {

namespace {

// e^{-2 kappa z} has dropped below e^{-40} at kappa_min + 40/(2z).
constexpr double kKappaWindow = 40.0;
// e^{-2 xi z / c} below 1e-20 of its peak.
constexpr double kXiCutoff = 23.0;

}  // namespace

CpSample cp_sample_generic(double z, const AlphaFn& alpha, const SigmaFn& sigma, double xi_scale,
                           double tol) {
  if (!(z > 0.0)) throw DomainError("cp_potential: z must be > 0");
  if (!(tol > 0.0 && tol <= 1e-2)) throw DomainError("cp_potential: tol must be in (0, 1e-2]");

  const double inner_tol = std::max(tol * 1e-2, 1e-11);
  const double two_z = 2.0 * z;

  // Integral over kappa in [xi/c, inf) at fixed xi, as a function of
  // t = 2 z (kappa - xi/c). Returns the three moments {1, -2 kappa, 4 kappa^2}.
  auto inner = [&](double xi) {
    const ConductivityPair s = sigma(xi);
    const double kappa_min = xi / K::c;
    auto integrand = [&](double t) -> Vec<3> {
      const double ds = t / two_z;
      const double kappa = kappa_min + ds;
      const double w = ds * K::c / xi;  // c (kappa - kappa_min) / xi
      const auto r = reflection_coefficients_kappa(kappa, xi, s);
      const double mix = 1.0 + 2.0 * w * (2.0 + w);  // 1 + 2 c^2 k^2 / xi^2
      const double base = 0.5 * std::exp(-t) * (r.r_ss - mix * r.r_pp) / two_z;
      return {base, -2.0 * kappa * base, 4.0 * kappa * kappa * base};
    };
    auto res = integrate_adaptive<3>(integrand, 0.0, kKappaWindow, inner_tol, 4, 200);
    if (!res.converged)
      throw QuadratureFailure("quadrature failure in kappa integral", res.error[0] /
                                  std::abs(res.value[0]), z);
    return res.value;
  };

  auto outer_linear = [&](double xi) -> Vec<3> {
    const double pref = xi * xi * alpha(xi) * std::exp(-two_z * xi / K::c);
    const auto v = inner(xi);
    return {pref * v[0], pref * v[1], pref * v[2]};
  };
  auto outer_log = [&](double u) -> Vec<3> {
    const double xi = std::exp(u);
    const auto v = outer_linear(xi);
    return {xi * v[0], xi * v[1], xi * v[2]};
  };

  const double retard = K::c / z;
  const double xi_switch = 1e-4 * std::min(xi_scale, retard);
  const double xi_max = kXiCutoff * retard;

  const auto low = integrate_adaptive<3>(outer_linear, 0.0, xi_switch, tol, 1, 200);
  const double lo = std::log(xi_switch);
  const double hi = std::log(xi_max);
  const int decades = std::max(1, static_cast<int>(std::ceil((hi - lo) / std::numbers::ln10)));
  const auto high = integrate_adaptive<3>(outer_log, lo, hi, tol, decades, 600);

  if (!low.converged || !high.converged) {
    const double est = (low.error[0] + high.error[0]) / std::abs(low.value[0] + high.value[0]);
    std::ostringstream msg;
    msg << "quadrature failure at z = " << z << " m (relative error estimate " << est << ")";
    throw QuadratureFailure(msg.str(), est, z);
  }

  const double pref = K::hbar / (K::eps0 * K::c * K::c * 4.0 * std::numbers::pi * std::numbers::pi);
  CpSample out;
  out.U = pref * (low.value[0] + high.value[0]);
  out.dU = pref * (low.value[1] + high.value[1]);
  out.d2U = pref * (low.value[2] + high.value[2]);
  out.error = pref * (low.error[0] + high.error[0]);
  return out;
}

}  // namespace detail

CpSample cp_sample(double z, const AtomSpecies& atom, const GrapheneConfig& cfg, double tol) {
  cfg.validate();
  return detail::cp_sample_generic(
      z, [&](double xi) { return polarizability(atom, xi); },
      [&](double xi) { return conductivities(xi, cfg); }, atom.xi_l, tol);
}

double cp_potential(double z, const AtomSpecies& atom, const GrapheneConfig& cfg, double tol) {
  return cp_sample(z, atom, cfg, tol).U;
}

std::pair<double, double> cp_derivatives(double z, const AtomSpecies& atom,
                                         const GrapheneConfig& cfg, double tol) {
  const auto s = cp_sample(z, atom, cfg, tol);
  return {s.dU, s.d2U};
}

PotentialCurve tabulate(const AtomSpecies& atom, const GrapheneConfig& cfg,
                        const TabulationOptions& opts) {
  cfg.validate();
  atom.validate();
  CurveMetadata meta;
  meta.atom = atom;
  meta.graphene = cfg;
  meta.quadrature_tol = opts.tol;
  const double tol = opts.tol;
  PotentialSource source = [atom, cfg, tol](double z) {
    const auto s = cp_sample(z, atom, cfg, tol);
    return PotentialSample{s.U, s.dU, s.d2U};
  };
  auto curve = PotentialCurve::tabulate(source, opts.z_min, opts.z_max, opts.points_per_decade,
                                        std::move(meta), opts.workers);
  const auto& u = curve.U_values();
  const auto& du = curve.dU_values();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] < 0.0) || !(du[i] > 0.0))
      throw Error("tabulate: potential not attractive at z = " +
                  std::to_string(curve.z_grid()[i]));
    if (i > 0 && !(u[i] > u[i - 1]))
      throw Error("tabulate: potential not monotone at z = " + std::to_string(curve.z_grid()[i]));
  }
  return curve;
}

double asymptotic_c4(const PotentialCurve& curve) {
  const auto& z = curve.z_grid();
  if (const auto& atom = curve.metadata().atom) {
    if (curve.z_max() < 100.0 * K::c / atom->xi_l)
      throw DomainError("asymptotic_c4: curve must extend two decades beyond c/xi_l");
  }
  std::vector<double> y;
  const double start = curve.z_max() / 10.0 * (1 - 1e-12);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < start) continue;
    const double u = curve.U_values()[i];
    if (!(u < 0.0)) throw NotRetardedRegime("asymptotic_c4: potential not attractive");
    y.push_back(std::log(-u) + 4.0 * std::log(z[i]));
  }
  if (y.size() < 2) throw DomainError("asymptotic_c4: last decade holds fewer than 2 points");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double rms = 0.0;
  for (double v : y) rms += (v - mean) * (v - mean);
  rms = std::sqrt(rms / static_cast<double>(y.size()));
  if (rms > 0.01) {
    std::ostringstream msg;
    msg << "not in retarded regime: -C4/z^4 fit residual " << rms << " (log RMS) exceeds 1%";
    throw NotRetardedRegime(msg.str());
  }
  return std::exp(mean);
}

std::vector<RatioPoint> ratio_curve(const AtomSpecies& atom, const GrapheneConfig& cfg_B,
                                    const GrapheneConfig& cfg_B0, const std::vector<double>& z_grid,
                                    double tol) {
  if (cfg_B0.B != 0.0) throw DomainError("ratio_curve: reference config must have B = 0");
  if (cfg_B.mu_c != cfg_B0.mu_c || cfg_B.tau != cfg_B0.tau || cfg_B.v_F != cfg_B0.v_F)
    throw DomainError("ratio_curve: configs must share mu_c, tau and v_F");
  std::vector<RatioPoint> out;
  out.reserve(z_grid.size());
  for (double z : z_grid) {
    const double u0 = cp_potential(z, atom, cfg_B0, tol);
    if (!(std::abs(u0) > 0.0)) throw Error("ratio_curve: U(B=0) vanished");
    const double ub = cfg_B.B == cfg_B0.B && cfg_B.n_max == cfg_B0.n_max &&
                              cfg_B.tail_tol == cfg_B0.tail_tol
                          ? u0
                          : cp_potential(z, atom, cfg_B, tol);
    out.push_back({z, ub / u0});
  }
  return out;
}

}  // namespace cqr
