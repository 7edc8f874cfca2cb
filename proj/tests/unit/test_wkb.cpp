#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <memory>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "cqr/atoms.hpp"
#include "cqr/constants.hpp"
#include "cqr/errors.hpp"
#include "cqr/lifshitz.hpp"
#include "cqr/oracle.hpp"
#include "cqr/wkb.hpp"

using namespace cqr;

namespace {

constexpr double kC4 = 3.9616e-58;  // He, B = 0 tail

std::shared_ptr<const PotentialCurve> power4(double z_min, double z_max, bool extendable = true) {
  const auto model = oracle::ModelPotential::power4(kC4);
  auto c = PotentialCurve::tabulate(model.source(), z_min, z_max, 48, CurveMetadata{});
  if (!extendable)
    c = PotentialCurve(c.z_grid(), c.U_values(), c.dU_values(), c.d2U_values(), {});
  return std::make_shared<const PotentialCurve>(std::move(c));
}

std::shared_ptr<const PotentialCurve> flat() {
  std::vector<double> z, zero;
  for (int i = 0; i <= 96; ++i) {
    z.push_back(1e-9 * std::pow(10.0, i / 16.0));
    zero.push_back(0.0);
  }
  return std::make_shared<const PotentialCurve>(z, zero, zero, zero, CurveMetadata{});
}

// Q for U = -A/z^4 written through P = p^2: Q = hbar^2 (P'' - 5 P'^2 / (4 P)) / (4 P^2).
double q_closed(double z, double mass, double energy) {
  const double p2 = 2.0 * mass * (energy + kC4 / std::pow(z, 4));
  const double d1 = -8.0 * mass * kC4 / std::pow(z, 5);
  const double d2 = 40.0 * mass * kC4 / std::pow(z, 6);
  return K::hbar * K::hbar * (d2 - 1.25 * d1 * d1 / p2) / (4.0 * p2 * p2);
}

const AtomSpecies& he() { return atom_lookup("He"); }

}  // namespace

TEST_CASE("free particle") {
  const double e = units::nev_to_joule(5.0);
  QRProblem pr{he(), e, flat(), 1e-8, 1e-5};
  for (double z : {1e-8, 1e-7, 1e-6}) {
    CHECK(local_momentum(z, pr) == doctest::Approx(std::sqrt(2.0 * he().mass * e)));
    CHECK(badlands_q(z, pr) == 0.0);
  }
  CHECK_THROWS_AS(find_q_peak(pr), NoBadlandsRegion);
  const auto sol = integrate_amplitudes(pr);
  CHECK(sol.reflection_probability == 0.0);
  CHECK(std::abs(sol.c_plus_final) == 0.0);
  CHECK(std::abs(sol.c_minus_final) == doctest::Approx(1.0));
  CHECK(std::isnan(sol.z_m));
  for (const auto& q : sol.q_profile) CHECK(q.q == 0.0);
  CHECK_THROWS_AS(solve_qr(he(), e, flat()), NoBadlandsRegion);
}

TEST_CASE("problem validation") {
  const auto c = power4(1e-9, 1e-3);
  QRProblem pr{he(), 0.0, c, 1e-8, 1e-5};
  CHECK_THROWS_AS(pr.validate(), DomainError);
  pr.energy = 1e-27;
  pr.z_f = 1e-2;
  CHECK_THROWS_AS(pr.validate(), DomainError);
  pr.z_f = 1e-9;
  CHECK_THROWS_AS(pr.validate(), DomainError);
  CHECK_THROWS_AS(solve_qr(he(), -1.0, c), DomainError);
}

TEST_CASE("local momentum") {
  const double e = units::nev_to_joule(1.0);
  QRProblem pr{he(), e, power4(1e-9, 1e-3), 1e-8, 1e-4};
  double prev = local_momentum(1e-9, pr);
  for (double z = 1.3e-9; z < 1e-4; z *= 1.3) {
    const double p = local_momentum(z, pr);
    CHECK(p < prev);
    CHECK(p > std::sqrt(2.0 * he().mass * e));
    prev = p;
  }
  CHECK(local_momentum(9e-4, pr) == doctest::Approx(std::sqrt(2.0 * he().mass * e)).epsilon(1e-9));
}

TEST_CASE("badlands function for the power law") {
  for (double nev : {1e-3, 1.0, 100.0}) {
    const double e = units::nev_to_joule(nev);
    QRProblem pr{he(), e, power4(1e-9, 1e-3), 1e-8, 1e-4};
    const auto& grid = pr.potential->z_grid();
    for (std::size_t i = 0; i < grid.size(); i += 5)
      CHECK(badlands_q(grid[i], pr) == doctest::Approx(q_closed(grid[i], he().mass, e)).epsilon(1e-6));
    // dQ/dz = 0 at A / (E z^4) = 1.
    const double z_m = std::pow(kC4 / e, 0.25);
    std::vector<std::string> warnings;
    CHECK(find_q_peak(pr, &warnings) == doctest::Approx(z_m).epsilon(1e-4));
    CHECK(warnings.empty());
  }

  double prev = 1.0;
  for (double nev = 1e-4; nev < 1e3; nev *= 10.0) {
    QRProblem pr{he(), units::nev_to_joule(nev), power4(1e-9, 1e-3), 1e-8, 1e-4};
    const double z_m = find_q_peak(pr);
    CHECK(z_m < prev);
    prev = z_m;
  }
}

TEST_CASE("phase and derivative consistency on the He curve") {
  TabulationOptions opts;
  opts.z_min = 1e-9;
  opts.z_max = 1e-5;
  opts.workers = 4;
  auto curve = std::make_shared<const PotentialCurve>(
      tabulate(he(), GrapheneConfig::with_field(0.0, 0.115), opts));
  const double e = units::nev_to_joule(10.0);
  QRProblem pr{he(), e, curve, 1e-9, 1e-6};

  const auto sol = integrate_amplitudes(pr);
  CHECK(sol.reflection_probability > 0.0);
  CHECK(sol.reflection_probability < 1.0);
  CHECK(sol.max_amplitude_ratio <= 1.0);

  // The interpolant is smooth between nodes, so one Gauss-Kronrod panel per cell.
  std::vector<double> edges{pr.z_i};
  for (double z : curve->z_grid())
    if (z > pr.z_i && z < pr.z_f) edges.push_back(z);
  edges.push_back(pr.z_f);
  double phase = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    phase += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) {
          const double z = std::exp(s);
          return z * local_momentum(z, pr) / K::hbar;
        },
        std::log(edges[i]), std::log(edges[i + 1]), 0);
  CHECK(sol.phase_final == doctest::Approx(phase).epsilon(1e-8));

  // Q from finite differences of phi' = p / hbar.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(std::log(2e-9), std::log(5e-6));
  for (int i = 0; i < 20; ++i) {
    const double z = std::exp(u(rng));
    const double h = 1e-3 * z;
    auto phi1 = [&](double x) { return local_momentum(x, pr) / K::hbar; };
    const double f0 = phi1(z);
    const double f1 = (phi1(z + h) - phi1(z - h)) / (2.0 * h);
    const double f2 = (phi1(z + h) - 2.0 * f0 + phi1(z - h)) / (h * h);
    const double q = (f2 / f0 - 1.5 * (f1 / f0) * (f1 / f0)) / (2.0 * f0 * f0);
    INFO("z = " << z);
    CHECK(badlands_q(z, pr) == doctest::Approx(q).epsilon(1e-3));
  }
}

TEST_CASE("domain convergence") {
  // The model is valid at any z, so the short-distance floor is lifted.
  const auto c = power4(1e-9, 1e-3);
  const double e = units::nev_to_joule(5.0);
  const auto sol = solve_qr(he(), e, c, {.z_floor = 0.0});
  CHECK(sol.converged);
  CHECK(sol.reflection_probability > 0.05);
  CHECK(sol.reflection_probability < 0.95);
  CHECK(sol.z_i <= sol.z_m / 10.0);
  CHECK(sol.z_f >= 10.0 * sol.z_m);
  CHECK(sol.domain_history.size() >= 3);
  CHECK(sol.flux_drift < 1e-6);

  // One further expansion stays within 1e-3 relative.
  QRProblem pr{he(), e, c, sol.z_i / 2.0, 2.0 * sol.z_f};
  auto wider =
      std::make_shared<const PotentialCurve>(c->extended_to(pr.z_f).extended_from(pr.z_i));
  pr.potential = wider;
  const auto next = integrate_amplitudes(pr);
  CHECK(std::abs(next.reflection_probability - sol.reflection_probability) <
        1e-3 * sol.reflection_probability);

  const auto direct = oracle::direct_reflection(
      [](double z) { return -kC4 / std::pow(z, 4); }, he().mass, e, sol.z_i, sol.z_f);
  CHECK(std::abs(direct.R - sol.reflection_probability) <= 1e-3);

  const auto j = nlohmann::json::parse(sol.to_json());
  CHECK(j.at("R").get<double>() == sol.reflection_probability);
  CHECK(j.at("domain_history").size() == sol.domain_history.size());
  std::ostringstream q;
  sol.write_q_csv(q);
  CHECK(q.str().rfind("z_m,Q\n", 0) == 0);
}

TEST_CASE("limits of the reflection probability") {
  const auto c = power4(1e-9, 1e-3);
  CHECK(solve_qr(he(), units::nev_to_joule(1e-6), c).reflection_probability > 0.99);
  CHECK(solve_qr(he(), units::nev_to_joule(1e3), c, {.z_floor = 1e-11})
            .reflection_probability < 1e-2);
}

TEST_CASE("short-distance floor") {
  // z_m = (C4 / E)^{1/4} is about 3 nm at 1e4 neV, so z_i would need to reach 0.3 nm.
  const double e = units::nev_to_joule(1e4);
  CHECK_THROWS_AS(solve_qr(he(), e, power4(1e-9, 1e-3)), ShortDistanceUnresolved);
  CHECK_THROWS_AS(solve_qr(he(), e, power4(1e-9, 1e-3, false), {.z_floor = 0.0}),
                  ShortDistanceUnresolved);
  const auto sol = solve_qr(he(), units::nev_to_joule(1e3), power4(1e-9, 1e-3), {.z_floor = 1e-11});
  CHECK(sol.z_i < 1e-9);
}
