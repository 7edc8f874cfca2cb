// Acceptance suite: one PASS/FAIL line per criterion, details on the same line.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cqr/atoms.hpp"
#include "cqr/constants.hpp"
#include "cqr/errors.hpp"
#include "cqr/lifshitz.hpp"
#include "cqr/oracle.hpp"
#include "cqr/sweep.hpp"
#include "cqr/wkb.hpp"

using namespace cqr;
namespace fs = std::filesystem;

namespace {

constexpr double kMu = 0.115;  // eV
const char* const kAtoms[] = {"He", "Na", "Rb"};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::vector<double> all_r;  // every reflection probability produced in this run

void report(int n, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", n, name.c_str(),
              o.detail.c_str(), sec);
  std::fflush(stdout);
}

GrapheneConfig cfg_at(double b) { return GrapheneConfig::with_field(b, kMu); }

// Tabulated curves shared between criteria, keyed by (atom, B, z_max).
std::map<std::string, std::shared_ptr<const PotentialCurve>> curves;

std::shared_ptr<const PotentialCurve> curve(const std::string& atom, double b,
                                            double z_max = 1e-3) {
  const auto key = atom + fmt("/%g/%g", b, z_max);
  auto& slot = curves[key];
  if (!slot) {
    TabulationOptions opts;
    opts.z_max = z_max;
    opts.workers = workers();
    slot = std::make_shared<const PotentialCurve>(tabulate(atom_lookup(atom), cfg_at(b), opts));
  }
  return slot;
}

double reflect(const std::string& atom, double b, double nev) {
  SolveOptions so;
  so.workers = workers();
  const double r =
      solve_qr(atom_lookup(atom), units::nev_to_joule(nev), curve(atom, b), so).reflection_probability;
  all_r.push_back(r);
  return r;
}

Outcome low_energy_limit() {
  bool pass = true;
  std::string d;
  for (double nev : {1e-8, 1e4}) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string what;
    bool ok = false;
    try {
      const double r = reflect("He", 0.0, nev);
      ok = nev < 1.0 ? r > 0.99 : r < 1e-3;
      what = fmt("R=%.6g", r);
    } catch (const std::exception& e) {
      what = e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && sec < 300.0;
    pass = pass && ok;
    d += fmt("%sE=%g neV: %s [%s, %.1f s]", d.empty() ? "" : "; ", nev, what.c_str(),
             ok ? "ok" : "not met", sec);
  }
  return {pass, d};
}

Outcome field_ordering() {
  struct Case {
    const char* atom;
    double nev;
  };
  bool pass = true;
  std::string d;
  for (const Case& c : {Case{"He", 10.0}, Case{"Rb", 1e-5}, Case{"Na", 1e-3}}) {
    const double r0 = reflect(c.atom, 0.0, c.nev);
    const double r2 = reflect(c.atom, 2.0, c.nev);
    const double r14 = reflect(c.atom, 14.0, c.nev);
    bool ok = false;
    const std::string atom = c.atom;
    if (atom == "He") ok = r14 < r2 && r2 < r0;
    if (atom == "Rb") ok = r14 > r2 && r2 > r0;
    if (atom == "Na") ok = r2 < r0 && r14 > r0;
    pass = pass && ok;
    d += fmt("%s%s %g neV R(0)=%.6f R(2)=%.6f R(14)=%.6f [%s]", d.empty() ? "" : "; ", c.atom,
             c.nev, r0, r2, r14, ok ? "ok" : "order not met");
  }
  return {pass, d};
}

Outcome discontinuities() {
  SweepSpec s;
  s.atom = "Rb";
  s.mode = SweepMode::field;
  s.fixed = {{"E", 1e-5}, {"mu_c", kMu}};
  s.range = {1.0, 14.0, 131, Spacing::linear};
  s.workers = workers();
  const auto recs = run_sweep(s);
  for (const auto& r : recs)
    if (!r.failed()) all_r.push_back(r.value);
  const auto jumps = detect_discontinuities(recs);
  const auto predicted =
      landau_crossing_fields(units::ev_to_joule(kMu), s.graphene(1.0), 1, 40);

  int matched = 0;
  std::string unmatched;
  for (const auto& j : jumps) {
    const bool hit = std::any_of(predicted.begin(), predicted.end(),
                                 [&](double b) { return b >= j.B_low && b <= j.B_high; });
    if (hit)
      ++matched;
    else
      unmatched += fmt(" [%.1f,%.1f]", j.B_low, j.B_high);
  }

  // Plateaus: runs of records strictly between consecutive detected jumps.
  double worst = 0.0;
  std::size_t start = 0;
  auto close_plateau = [&](std::size_t end) {
    if (end <= start + 1) return;
    double lo = recs[start].value, hi = lo, sum = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      lo = std::min(lo, recs[i].value);
      hi = std::max(hi, recs[i].value);
      sum += recs[i].value;
    }
    worst = std::max(worst, (hi - lo) / (sum / static_cast<double>(end - start)));
  };
  for (const auto& j : jumps) {
    std::size_t k = start;
    while (k < recs.size() && recs[k].swept_value < j.B_high) ++k;
    close_plateau(k);
    start = k;
  }
  close_plateau(recs.size());

  const bool every = unmatched.empty();
  const bool enough = jumps.size() >= 3;
  const bool flat = worst < 0.02;
  std::string d = fmt("%zu jumps detected, %d contain a predicted B*_n", jumps.size(), matched);
  if (!every) d += "; without B*_n:" + unmatched;
  d += fmt("; largest plateau variation %.3g%%", 100.0 * worst);
  return {every && enough && flat, d};
}

Outcome quadrature_oracle() {
  double worst = 0.0;
  std::string d;
  const double zs[] = {1e-8, 1e-6, 1e-4};
  const double bs[] = {0.0, 14.0, 2.0};
  for (const char* a : kAtoms)
    for (int i = 0; i < 3; ++i) {
      const auto& atom = atom_lookup(a);
      const double u = cp_potential(zs[i], atom, cfg_at(bs[i]));
      const auto bf = oracle::brute_force_cp(zs[i], atom, cfg_at(bs[i]));
      worst = std::max(worst, std::abs(u - bf.value) / std::abs(bf.value));
    }
  d = fmt("9 (atom, z, B) points, max relative deviation %.2e (limit 1e-4)", worst);
  return {worst <= 1e-4, d};
}

Outcome solver_oracle() {
  const auto& he = atom_lookup("He");
  const double c4 = -cp_potential(0.1, he, cfg_at(0.0)) * std::pow(0.1, 4);
  const double beta = std::sqrt(2.0 * he.mass * c4) / K::hbar;
  const double eps = K::hbar * K::hbar / (2.0 * he.mass * beta * beta);
  const auto model = oracle::ModelPotential::power4(c4);
  const auto mc = std::make_shared<const PotentialCurve>(
      PotentialCurve::tabulate(model.source(), 1e-3 * beta, 1e3 * beta, 48, {}, workers()));
  SolveOptions so;
  so.z_floor = 0.0;  // the model holds at every z
  double worst = 0.0, r_lo = 1.0, r_hi = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double e = eps * std::pow(10.0, -3.5 + 3.5 * i / 9.0);
    const auto s = solve_qr(he, e, mc, so);
    const auto direct =
        oracle::direct_reflection([&](double z) { return model.U(z); }, he.mass, e, s.z_i, s.z_f);
    all_r.push_back(s.reflection_probability);
    worst = std::max(worst, std::abs(s.reflection_probability - direct.R));
    r_lo = std::min(r_lo, s.reflection_probability);
    r_hi = std::max(r_hi, s.reflection_probability);
  }
  const bool spans = r_lo >= 0.05 && r_hi <= 0.95;
  return {worst <= 1e-3 && spans,
          fmt("C4=%.5g J m^4, 10 energies with R in [%.3f, %.3f], max |dR| %.2e (limit 1e-3)", c4,
              r_lo, r_hi, worst)};
}

double loglog_slope(const PotentialCurve& c) {
  const auto& z = c.z_grid();
  const double start = c.z_max() / 10.0 * (1 - 1e-12);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < start) continue;
    const double x = std::log(z[i]), y = std::log(-c.U_values()[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome retarded_asymptote() {
  // Tabulated out to 1 cm; the 1 mm slope is shown alongside.
  bool pass = true;
  std::string d;
  for (const char* a : kAtoms) {
    const auto c0 = curve(a, 0.0, 1e-2);
    const auto c14 = curve(a, 14.0, 1e-2);
    const double slope = loglog_slope(*c0);
    const double slope_mm = loglog_slope(*curve(a, 0.0));
    const double k0 = asymptotic_c4(*c0);
    const double k14 = asymptotic_c4(*c14);
    const bool ok = std::abs(slope + 4.0) <= 0.05 && k14 < k0;
    pass = pass && ok;
    d += fmt("%s%s slope %.4f (1 mm grid %.4f) C4(0)=%.4g C4(14)=%.4g", d.empty() ? "" : "; ", a,
             slope, slope_mm, k0, k14);
  }
  return {pass, d};
}

Outcome ratio_sign_structure() {
  std::vector<double> zs;
  for (int i = 0; i <= 48; ++i) zs.push_back(1e-9 * std::pow(10.0, i / 8.0));
  bool pass = true;
  std::string d;
  for (const char* a : kAtoms) {
    const auto pts = ratio_curve(atom_lookup(a), cfg_at(14.0), cfg_at(0.0), zs);
    int crossings = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if ((pts[i].ratio - 1.0) * (pts[i - 1].ratio - 1.0) < 0.0) ++crossings;
    const bool ok = pts.front().ratio > 1.0 && pts.back().ratio < 1.0 && crossings == 1;
    pass = pass && ok;
    d += fmt("%s%s ratio %.5f at 1 nm, %.5f at 1 mm, %d crossings", d.empty() ? "" : "; ", a,
             pts.front().ratio, pts.back().ratio, crossings);
  }
  return {pass, d};
}

Outcome badlands_ordering() {
  auto peak = [](const char* a, double nev) {
    QRProblem pr{atom_lookup(a), units::nev_to_joule(nev), curve(a, 0.0), 0.0, 0.0};
    return find_q_peak(pr);
  };
  const double he = peak("He", 10.0), na = peak("Na", 1e-3), rb = peak("Rb", 1e-5);
  return {he < na && na < rb,
          fmt("z_m He %.4g m < Na %.4g m < Rb %.4g m", he, na, rb)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome invariants() {
  std::vector<std::string> bad;

  // Unitarity over every R produced above.
  const bool unitary = std::all_of(all_r.begin(), all_r.end(),
                                   [](double r) { return r >= 0.0 && r <= 1.0; });
  if (!unitary) bad.push_back("R outside [0,1]");

  // Free particle.
  {
    std::vector<double> z, zero;
    for (int i = 0; i <= 96; ++i) {
      z.push_back(1e-9 * std::pow(10.0, i / 16.0));
      zero.push_back(0.0);
    }
    auto flat = std::make_shared<const PotentialCurve>(z, zero, zero, zero, CurveMetadata{});
    const auto& he = atom_lookup("He");
    QRProblem pr{he, units::nev_to_joule(1.0), flat, 1e-8, 1e-4};
    double qmax = 0.0;
    for (double x : z) qmax = std::max(qmax, std::abs(badlands_q(x, pr)));
    const double r = integrate_amplitudes(pr).reflection_probability;
    const double rd =
        oracle::direct_reflection([](double) { return 0.0; }, he.mass, pr.energy, 1e-8, 1e-6).R;
    if (qmax != 0.0 || r != 0.0 || rd > 1e-12) bad.push_back("U=0 gives nonzero Q or R");
  }

  // Derivatives under the integral against finite differences.
  double worst_d1 = 0.0, worst_d2 = 0.0;
  for (const char* a : kAtoms)
    for (double z : {3e-9, 1e-7, 1e-5}) {
      const auto& atom = atom_lookup(a);
      const auto cfg = cfg_at(14.0);
      const double h = 1e-4 * z, tol = 1e-10;
      const double up = cp_potential(z + h, atom, cfg, tol);
      const double mid = cp_potential(z, atom, cfg, tol);
      const double dn = cp_potential(z - h, atom, cfg, tol);
      const auto [d1, d2] = cp_derivatives(z, atom, cfg, tol);
      worst_d1 = std::max(worst_d1, std::abs(d1 / ((up - dn) / (2 * h)) - 1.0));
      worst_d2 = std::max(worst_d2, std::abs(d2 / ((up - 2 * mid + dn) / (h * h)) - 1.0));
    }
  if (worst_d1 > 1e-3 || worst_d2 > 1e-2) bad.push_back("dU/d2U finite-difference mismatch");

  // Q by the chain rule against finite differences of p / hbar.
  double worst_q = 0.0;
  {
    QRProblem pr{atom_lookup("Na"), units::nev_to_joule(1e-3), curve("Na", 0.0), 0.0, 0.0};
    // Sampled up to 100 z_m; further out Q falls by ~15 orders and the
    // second difference of p is pure cancellation.
    const double z_m = find_q_peak(pr);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(std::log(2e-9), std::log(100.0 * z_m));
    for (int i = 0; i < 20; ++i) {
      const double z = std::exp(u(rng));
      const double h = 1e-3 * z;
      auto f = [&](double x) { return local_momentum(x, pr) / K::hbar; };
      const double f0 = f(z), f1 = (f(z + h) - f(z - h)) / (2 * h);
      const double f2 = (f(z + h) - 2 * f0 + f(z - h)) / (h * h);
      const double q = (f2 / f0 - 1.5 * (f1 / f0) * (f1 / f0)) / (2 * f0 * f0);
      worst_q = std::max(worst_q, std::abs(badlands_q(z, pr) / q - 1.0));
    }
  }
  if (worst_q > 1e-3) bad.push_back("Q chain rule vs finite differences");

  // Byte-identical CSV across reruns and worker counts.
  SweepSpec s;
  s.atom = "Rb";
  s.mode = SweepMode::energy;
  s.fixed = {{"B", 7.0}, {"mu_c", kMu}};
  s.range = {1e-6, 1e-4, 6, Spacing::log};
  const auto dir = fs::temp_directory_path() / "cqr_acceptance";
  fs::create_directories(dir);
  std::vector<std::string> texts;
  for (int w : {1, 1, 4}) {
    s.workers = w;
    const auto recs = run_sweep(s);
    for (const auto& r : recs) all_r.push_back(r.value);
    const auto path = dir / fmt("sweep_w%d_%zu.csv", w, texts.size());
    emit(recs, s, path, OutputFormat::csv, false);
    texts.push_back(slurp(path));
  }
  fs::remove_all(dir);
  const bool same = texts[0] == texts[1] && texts[1] == texts[2];
  if (!same) bad.push_back("sweep CSV differs between runs");

  std::string d = fmt("%zu R values in [0,1]: %s; U=0 -> Q=0, R=0; dU rel %.1e, d2U rel %.1e; "
                      "Q chain rel %.1e; CSV identical across reruns and 1/4 workers: %s",
                      all_r.size(), unitary ? "yes" : "no", worst_d1, worst_d2, worst_q,
                      same ? "yes" : "no");
  for (const auto& b : bad) d += "; FAILED: " + b;
  return {bad.empty(), d};
}

}  // namespace

int main() {
  report(1, "low-energy limit", low_energy_limit);
  report(2, "field ordering", field_ordering);
  report(3, "discontinuity placement", discontinuities);
  report(4, "quadrature oracle", quadrature_oracle);
  report(5, "solver oracle", solver_oracle);
  report(6, "retarded asymptote", retarded_asymptote);
  report(7, "ratio sign structure", ratio_sign_structure);
  report(8, "badlands ordering", badlands_ordering);
  report(9, "invariant suites", invariants);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
