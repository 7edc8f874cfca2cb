#include "cqr/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "cqr/constants.hpp"
#include "cqr/detail/dopri.hpp"
#include "cqr/errors.hpp"

namespace cqr {

namespace {

constexpr double kFlatQ = 1e-30;

struct Momentum {
  double p, dp, d2p;
};

Momentum momentum_chain(double z, const QRProblem& pr) {
  const auto s = pr.potential->at(z);
  const double m = pr.atom.mass;
  const double kinetic = pr.energy - s.U;
  if (!(kinetic > 0.0)) {
    std::ostringstream msg;
    msg << "E - U(z) <= 0 at z = " << z << " m; the potential must stay below the energy";
    throw Error(msg.str());
  }
  const double p = std::sqrt(2.0 * m * kinetic);
  const double dp = -m * s.dU / p;
  const double d2p = -m * s.d2U / p - m * m * s.dU * s.dU / (p * p * p);
  return {p, dp, d2p};
}

double q_from_chain(const Momentum& mo) {
  const double a = mo.dp / mo.p;
  return K::hbar * K::hbar / (2.0 * mo.p * mo.p) * (mo.d2p / mo.p - 1.5 * a * a);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void QRProblem::validate() const {
  atom.validate();
  if (!potential) throw DomainError("QR problem has no potential");
  if (!(energy > 0.0)) throw DomainError("QR problem: energy must be > 0");
  if (!(z_i > 0.0) || !(z_f > z_i)) throw DomainError("QR problem: need 0 < z_i < z_f");
  if (!potential->contains(z_i) || !potential->contains(z_f))
    throw DomainError("QR problem: [z_i, z_f] must lie inside the potential grid");
  if (!(ode_tol > 0.0)) throw DomainError("QR problem: ode_tol must be > 0");
}

double local_momentum(double z, const QRProblem& problem) {
  const double u = problem.potential->U(z);
  const double kinetic = problem.energy - u;
  if (!(kinetic > 0.0)) throw Error("local_momentum: E - U(z) <= 0");
  return std::sqrt(2.0 * problem.atom.mass * kinetic);
}

double badlands_q(double z, const QRProblem& problem) {
  return q_from_chain(momentum_chain(z, problem));
}

double find_q_peak(const QRProblem& problem, std::vector<std::string>* warnings) {
  const auto& grid = problem.potential->z_grid();
  std::vector<double> q(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) q[i] = badlands_q(grid[i], problem);

  const auto best = static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
  if (!(q[best] > kFlatQ))
    throw NoBadlandsRegion("no badlands region: Q(z) is flat (max " + fmt17(q[best]) +
                           "); energy is far outside the quantum reflection regime");

  if (warnings) {
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
      if (i == best) continue;
      if (q[i] > q[i - 1] && q[i] >= q[i + 1] && q[i] > 0.5 * q[best])
        warnings->push_back("secondary Q peak at z = " + fmt17(grid[i]) + " m");
    }
    if (best == 0 || best + 1 == q.size())
      warnings->push_back("Q peak sits on the edge of the potential grid");
  }

  // Golden-section refinement in ln z between the neighbouring nodes.
  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  auto f = [&](double x) { return badlands_q(std::exp(x), problem); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return f(x) >= q[best] ? std::exp(x) : grid[best];
}

QRSolution integrate_amplitudes(const QRProblem& problem) {
  problem.validate();
  QRSolution sol;
  sol.z_i = problem.z_i;
  sol.z_f = problem.z_f;
  try {
    sol.z_m = find_q_peak(problem, &sol.warnings);
  } catch (const NoBadlandsRegion&) {
    sol.z_m = std::numeric_limits<double>::quiet_NaN();
  }

  const double m = problem.atom.mass;
  // State: Re c+, Im c+, Re c-, Im c-, phi.
  using State = std::array<double, 5>;
  auto rhs = [&](double z, const State& y) -> State {
    const auto s = problem.potential->at(z);
    const double kinetic = problem.energy - s.U;
    if (!(kinetic > 0.0)) throw Error("integrate_amplitudes: E - U(z) <= 0");
    const double p2 = 2.0 * m * kinetic;
    const double g = -0.5 * m * s.dU / p2;  // p'/(2p)
    const double c = std::cos(2.0 * y[4]);
    const double sn = std::sin(2.0 * y[4]);
    // e^{-2i phi} c-  and  e^{+2i phi} c+
    const double ap_re = c * y[2] + sn * y[3];
    const double ap_im = c * y[3] - sn * y[2];
    const double am_re = c * y[0] - sn * y[1];
    const double am_im = c * y[1] + sn * y[0];
    return {g * ap_re, g * ap_im, g * am_re, g * am_im, std::sqrt(p2) / K::hbar};
  };
  auto cap = [&](double z, const State&) {
    return kMaxPhaseStep * K::hbar / local_momentum(z, problem);
  };
  double max_ratio = 0.0;
  auto observe = [&](double, const State& y) {
    const double cp = std::hypot(y[0], y[1]);
    const double cm = std::hypot(y[2], y[3]);
    max_ratio = std::max(max_ratio, cp / cm);
  };

  const auto res = detail::dopri45<5>(rhs, cap, observe, State{0.0, 0.0, 1.0, 0.0, 0.0},
                                      problem.z_i, problem.z_f, problem.ode_tol, problem.ode_tol);
  if (res.status == detail::OdeStatus::step_underflow)
    throw StiffOscillationFailure("stiff oscillation failure: step size underflow at z = " +
                                      fmt17(res.z) + " m",
                                  res.z);

  sol.c_plus_final = {res.y[0], res.y[1]};
  sol.c_minus_final = {res.y[2], res.y[3]};
  sol.phase_final = res.y[4];
  sol.steps = res.steps;
  sol.max_amplitude_ratio = max_ratio;
  sol.flux_drift = std::abs(std::norm(sol.c_minus_final) - std::norm(sol.c_plus_final) - 1.0);

  const double r = std::norm(sol.c_plus_final) / std::norm(sol.c_minus_final);
  if (r > 1.0 + 1e-6)
    throw UnitarityViolation("unitarity violation: R = " + fmt17(r) + " exceeds 1");
  sol.reflection_probability = std::clamp(r, 0.0, 1.0);

  for (double z : problem.potential->z_grid())
    if (z > problem.z_i && z < problem.z_f) sol.q_profile.push_back({z, badlands_q(z, problem)});
  sol.q_profile.insert(sol.q_profile.begin(), {problem.z_i, badlands_q(problem.z_i, problem)});
  sol.q_profile.push_back({problem.z_f, badlands_q(problem.z_f, problem)});
  sol.domain_history.push_back({problem.z_i, problem.z_f, sol.reflection_probability});
  return sol;
}

QRSolution solve_qr(const AtomSpecies& atom, double energy,
                    std::shared_ptr<const PotentialCurve> potential, const SolveOptions& opts) {
  if (!(energy > 0.0)) throw DomainError("solve_qr: energy must be > 0");
  if (!potential) throw DomainError("solve_qr: no potential");

  QRProblem pr{atom, energy, potential, 0.0, 0.0, opts.ode_tol};
  std::vector<std::string> warnings;
  const double z_m = find_q_peak(pr, &warnings);

  const double floor = std::max(opts.z_floor, 0.0);
  auto reach_high = [&](double z_f) {
    if (z_f > pr.potential->z_max()) {
      if (pr.potential->can_extend())
        pr.potential =
            std::make_shared<const PotentialCurve>(pr.potential->extended_to(z_f, opts.workers));
      else
        z_f = pr.potential->z_max();
    }
    return z_f;
  };
  auto reach_low = [&](double z_i) {
    z_i = std::max(z_i, floor);
    if (z_i < pr.potential->z_min()) {
      if (pr.potential->can_extend())
        pr.potential =
            std::make_shared<const PotentialCurve>(pr.potential->extended_from(z_i, opts.workers));
      else
        z_i = pr.potential->z_min();
    }
    return std::max(z_i, pr.potential->z_min());
  };

  pr.z_i = reach_low(z_m / 100.0);
  if (pr.z_i > z_m / 10.0)
    throw ShortDistanceUnresolved("short-distance regime unresolved: z_m = " + fmt17(z_m) +
                                  " m requires z_i <= " + fmt17(z_m / 10.0) +
                                  " m, below the trusted range starting at " + fmt17(pr.z_i) +
                                  " m");
  if (pr.z_i > z_m / 100.0) warnings.push_back("z_i pinned at " + fmt17(pr.z_i) + " m");
  pr.z_f = reach_high(100.0 * z_m);
  if (pr.z_f < 10.0 * z_m)
    throw DomainError("solve_qr: potential grid ends before 10 z_m and cannot be extended");

  std::vector<DomainRecord> history;
  QRSolution sol = integrate_amplitudes(pr);
  history.push_back({pr.z_i, pr.z_f, sol.reflection_probability});

  // Two consecutive small changes are required so that one accidental
  // near-coincidence of R values does not end the expansion.
  bool previous_settled = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double zi = reach_low(pr.z_i / 2.0);
    const double zf = reach_high(2.0 * pr.z_f);
    if (zi == pr.z_i && zf == pr.z_f)
      throw ConvergenceFailure("solve_qr: domain cannot be expanded further");
    pr.z_i = zi;
    pr.z_f = zf;
    const double r_prev = sol.reflection_probability;
    sol = integrate_amplitudes(pr);
    history.push_back({pr.z_i, pr.z_f, sol.reflection_probability});
    const double r = sol.reflection_probability;
    const bool settled = std::abs(r - r_prev) < std::max(1e-3 * r, 1e-6);
    if (settled && previous_settled) {
      sol.converged = true;
      sol.z_m = z_m;
      sol.domain_history = std::move(history);
      warnings.insert(warnings.end(), sol.warnings.begin(), sol.warnings.end());
      std::sort(warnings.begin(), warnings.end());
      warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
      sol.warnings = std::move(warnings);
      return sol;
    }
    previous_settled = settled;
  }
  std::ostringstream msg;
  msg << "solve_qr: R did not settle after " << opts.max_iterations << " domain expansions;";
  for (const auto& h : history) msg << " [" << h.z_i << ", " << h.z_f << "] R=" << h.R << ";";
  throw ConvergenceFailure(msg.str());
}

std::string QRSolution::to_json() const {
  nlohmann::json j;
  j["R"] = reflection_probability;
  j["z_m"] = std::isnan(z_m) ? nlohmann::json(nullptr) : nlohmann::json(z_m);
  j["z_i"] = z_i;
  j["z_f"] = z_f;
  j["converged"] = converged;
  j["c_plus"] = {c_plus_final.real(), c_plus_final.imag()};
  j["c_minus"] = {c_minus_final.real(), c_minus_final.imag()};
  j["phase_final"] = phase_final;
  j["flux_drift"] = flux_drift;
  j["steps"] = steps;
  auto& h = j["domain_history"] = nlohmann::json::array();
  for (const auto& d : domain_history) h.push_back({{"z_i", d.z_i}, {"z_f", d.z_f}, {"R", d.R}});
  j["warnings"] = warnings;
  return j.dump(2);
}

void QRSolution::write_q_csv(std::ostream& os) const {
  os << "z_m,Q\n";
  for (const auto& p : q_profile) os << fmt17(p.z) << ',' << fmt17(p.q) << '\n';
}

}  // namespace cqr
