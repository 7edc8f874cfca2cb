#include "cqr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "cqr/constants.hpp"
#include "cqr/errors.hpp"

namespace cqr::oracle {

ModelPotential ModelPotential::power3(double c3) {
  ModelPotential m;
  m.kind = ModelKind::power3;
  m.C3 = c3;
  m.validate();
  return m;
}

ModelPotential ModelPotential::power4(double c4) {
  ModelPotential m;
  m.kind = ModelKind::power4;
  m.C4 = c4;
  m.validate();
  return m;
}

ModelPotential ModelPotential::interpolating(double c4, double ell) {
  ModelPotential m;
  m.kind = ModelKind::interpolating;
  m.C4 = c4;
  m.ell = ell;
  m.validate();
  return m;
}

void ModelPotential::validate() const {
  switch (kind) {
    case ModelKind::power3:
      if (!(C3 > 0.0)) throw DomainError("power3 model needs C3 > 0");
      break;
    case ModelKind::power4:
      if (!(C4 > 0.0)) throw DomainError("power4 model needs C4 > 0");
      break;
    case ModelKind::interpolating:
      if (!(C4 > 0.0) || !(ell > 0.0))
        throw DomainError("interpolating model needs C4 > 0 and ell > 0");
      break;
  }
}

PotentialSample ModelPotential::sample(double z) const {
  if (!(z > 0.0)) throw DomainError("model potential: z must be > 0");
  switch (kind) {
    case ModelKind::power3: {
      const double z3 = z * z * z;
      return {-C3 / z3, 3.0 * C3 / (z3 * z), -12.0 * C3 / (z3 * z * z)};
    }
    case ModelKind::power4: {
      const double z4 = z * z * z * z;
      return {-C4 / z4, 4.0 * C4 / (z4 * z), -20.0 * C4 / (z4 * z * z)};
    }
    case ModelKind::interpolating: {
      const double d = z * z * z * (z + ell);
      const double d1 = 4.0 * z * z * z + 3.0 * ell * z * z;
      const double d2 = 12.0 * z * z + 6.0 * ell * z;
      return {-C4 / d, C4 * d1 / (d * d), C4 * (d2 * d - 2.0 * d1 * d1) / (d * d * d)};
    }
  }
  return {};
}

double ModelPotential::U(double z) const { return sample(z).U; }

PotentialSource ModelPotential::source() const {
  const ModelPotential self = *this;
  return [self](double z) { return self.sample(z); };
}

std::string ModelPotential::name() const {
  switch (kind) {
    case ModelKind::power3:
      return "power3";
    case ModelKind::power4:
      return "power4";
    case ModelKind::interpolating:
      return "interpolating";
  }
  return "";
}

namespace {

using cplx = std::complex<double>;

struct Wave {
  cplx psi, dpsi;
};

}  // namespace

DirectResult direct_reflection(const std::function<double(double)>& U, double mass, double energy,
                               double z_i, double z_f, std::vector<double> breakpoints) {
  if (!(mass > 0.0) || !(energy > 0.0)) throw DomainError("direct_reflection: need m, E > 0");
  if (!(z_i > 0.0) || !(z_f > z_i)) throw DomainError("direct_reflection: need 0 < z_i < z_f");

  std::vector<double> nodes{z_i};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double b : breakpoints)
    if (b > z_i && b < z_f) nodes.push_back(b);
  nodes.push_back(z_f);

  const double hb = K::hbar;
  const double two_m = 2.0 * mass;
  auto momentum = [&](double u) {
    const double kin = energy - u;
    if (!(kin > 0.0)) throw DomainError("direct_reflection: E - U <= 0");
    return std::sqrt(two_m * kin);
  };

  auto run = [&](int nper, std::size_t& steps) {
    const double zi_in = std::nextafter(nodes[0], nodes[1]);
    Wave w{1.0, cplx(0.0, -momentum(U(zi_in)) / hb)};
    steps = 0;
    for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
      const double a = nodes[s], b = nodes[s + 1];
      const double lo = std::nextafter(a, b), hi = std::nextafter(b, a);
      auto pot = [&](double z) { return U(std::clamp(z, lo, hi)); };
      auto f = [&](double z, const Wave& y) {
        return Wave{y.dpsi, y.psi * (two_m * (pot(z) - energy) / (hb * hb))};
      };
      double z = a;
      while (z < b) {
        const double lambda = 2.0 * std::numbers::pi * hb / momentum(pot(z));
        double h = std::min(lambda, 0.5 * z) / nper;
        if (z + h >= b - 1e-12 * b) h = b - z;
        const Wave k1 = f(z, w);
        const Wave k2 = f(z + 0.5 * h, {w.psi + 0.5 * h * k1.psi, w.dpsi + 0.5 * h * k1.dpsi});
        const Wave k3 = f(z + 0.5 * h, {w.psi + 0.5 * h * k2.psi, w.dpsi + 0.5 * h * k2.dpsi});
        const Wave k4 = f(z + h, {w.psi + h * k3.psi, w.dpsi + h * k3.dpsi});
        w.psi += h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
        w.dpsi += h / 6.0 * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi);
        z = (h == b - z) ? b : z + h;
        ++steps;
      }
    }
    const double k = std::sqrt(two_m * energy) / hb;
    const cplx ik(0.0, k);
    const cplx incident = 0.5 * (w.psi - w.dpsi / ik);
    const cplx reflected = 0.5 * (w.psi + w.dpsi / ik);
    return std::norm(reflected) / std::norm(incident);
  };

  DirectResult out;
  std::size_t steps = 0;
  double prev = run(16, steps);
  for (int nper = 32; nper <= 8192; nper *= 2) {
    const double r = run(nper, steps);
    if (std::abs(r - prev) < 1e-4) {
      out.R = r;
      out.points_per_wavelength = nper;
      out.steps = steps;
      out.last_change = std::abs(r - prev);
      return out;
    }
    prev = r;
  }
  std::ostringstream msg;
  msg << "direct_reflection: R not stable under grid doubling (last R = " << prev << ")";
  throw OracleFailure(msg.str());
}

namespace {

double trapezoid_cp(double z, const AtomSpecies& atom, const GrapheneConfig& cfg, int n) {
  const double c = K::c;
  const double xi_lo = 1e-7 * std::min(atom.xi_l, c / z);
  const double xi_hi = 30.0 * c / z;
  const double u0 = std::log(xi_lo), u1 = std::log(xi_hi);
  const double du = (u1 - u0) / (n - 1);
  const double s0 = -30.0, s1 = std::log(50.0);
  const double ds = (s1 - s0) / (n - 1);

  double outer = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = std::exp(u0 + du * i);
    const auto sigma = conductivities(xi, cfg);
    const double kmin = xi / c;
    double inner = 0.0;
    for (int j = 0; j < n; ++j) {
      const double t = std::exp(s0 + ds * j) / (2.0 * z);
      const double kappa = kmin + t;
      const auto r = reflection_coefficients_kappa(kappa, xi, sigma);
      const double weight = 2.0 * c * c * kappa * kappa / (xi * xi) - 1.0;
      const double g = 0.5 * std::exp(-2.0 * kappa * z) * (r.r_ss - weight * r.r_pp) * t;
      inner += (j == 0 || j == n - 1) ? 0.5 * g : g;
    }
    inner *= ds;
    const double g = xi * xi * polarizability(atom, xi) * inner * xi;
    outer += (i == 0 || i == n - 1) ? 0.5 * g : g;
  }
  outer *= du;
  return K::hbar / (K::eps0 * c * c * 4.0 * std::numbers::pi * std::numbers::pi) * outer;
}

}  // namespace

BruteForceResult brute_force_cp(double z, const AtomSpecies& atom, const GrapheneConfig& cfg,
                                int n) {
  if (!(z > 0.0)) throw DomainError("brute_force_cp: z must be > 0");
  if (n < 1000) throw DomainError("brute_force_cp: grid must be at least 1000 x 1000");
  cfg.validate();
  const double coarse = trapezoid_cp(z, atom, cfg, n);
  const double fine = trapezoid_cp(z, atom, cfg, 2 * n);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace cqr::oracle
