#include "cqr/potential_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "cqr/constants.hpp"
#include "cqr/detail/parallel.hpp"
#include "cqr/errors.hpp"

namespace cqr {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json meta_to_json(const CurveMetadata& m) {
  json j;
  j["kind"] = m.kind;
  if (m.atom) {
    j["atom"] = m.atom->name;
    j["atom_mass_kg"] = m.atom->mass;
    j["atom_alpha0_si"] = m.atom->alpha0;
    j["atom_xi_l_rad_s"] = m.atom->xi_l;
  }
  if (m.graphene) {
    const auto& g = *m.graphene;
    j["B_T"] = g.B;
    j["B_effective_T"] = g.effective_field();
    j["field_floor_applied"] = g.uses_field_floor();
    j["mu_c_eV"] = units::joule_to_ev(g.mu_c);
    j["tau_s"] = g.tau;
    j["v_F_m_s"] = g.v_F;
    j["n_max"] = g.n_max;
    j["tail_tol"] = g.tail_tol;
  }
  j["tol"] = m.quadrature_tol;
  j["points_per_decade"] = m.points_per_decade;
  j["constants_version"] = kConstantsVersion;
  j["tool_version"] = kToolVersion;
  return j;
}

CurveMetadata meta_from_json(const json& j) {
  CurveMetadata m;
  m.kind = j.value("kind", "casimir-polder");
  if (j.contains("atom"))
    m.atom = AtomSpecies{j.at("atom").get<std::string>(), j.at("atom_mass_kg").get<double>(),
                         j.at("atom_alpha0_si").get<double>(),
                         j.at("atom_xi_l_rad_s").get<double>()};
  if (j.contains("B_T")) {
    GrapheneConfig g;
    g.B = j.at("B_T").get<double>();
    g.mu_c = units::ev_to_joule(j.at("mu_c_eV").get<double>());
    g.tau = j.at("tau_s").get<double>();
    g.v_F = j.at("v_F_m_s").get<double>();
    g.n_max = j.value("n_max", g.n_max);
    g.tail_tol = j.value("tail_tol", g.tail_tol);
    m.graphene = g;
  }
  m.quadrature_tol = j.value("tol", 0.0);
  m.points_per_decade = j.value("points_per_decade", 0);
  return m;
}

std::vector<double> log_grid(double z_min, double z_max, int ppd) {
  const int intervals =
      std::max(1, static_cast<int>(std::ceil(ppd * std::log10(z_max / z_min) - 1e-9)));
  std::vector<double> z(intervals + 1);
  const double step = std::log(z_max / z_min) / intervals;
  for (int i = 0; i <= intervals; ++i) z[i] = z_min * std::exp(step * i);
  z.front() = z_min;
  z.back() = z_max;
  return z;
}

std::vector<PotentialSample> evaluate_all(const PotentialSource& source,
                                          const std::vector<double>& z, int workers) {
  std::vector<PotentialSample> out(z.size());
  detail::parallel_for(z.size(), workers, [&](std::size_t i) { out[i] = source(z[i]); });
  return out;
}

}  // namespace

std::string to_json_string(const CurveMetadata& meta) { return meta_to_json(meta).dump(); }

PotentialCurve::Column PotentialCurve::Column::build(const std::vector<double>& raw) {
  Column c;
  const bool all_neg = std::all_of(raw.begin(), raw.end(), [](double v) { return v < 0.0; });
  const bool all_pos = std::all_of(raw.begin(), raw.end(), [](double v) { return v > 0.0; });
  c.mode = all_neg ? -1 : (all_pos ? 1 : 0);
  c.mapped.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    c.mapped[i] = c.mode == 0 ? raw[i] : std::log(c.mode * raw[i]);
  return c;
}

PotentialCurve::PotentialCurve(std::vector<double> z, std::vector<double> U,
                               std::vector<double> dU, std::vector<double> d2U,
                               CurveMetadata meta, PotentialSource source)
    : z_(std::move(z)),
      u_(std::move(U)),
      du_(std::move(dU)),
      d2u_(std::move(d2U)),
      meta_(std::move(meta)),
      source_(std::move(source)) {
  rebuild();
}

void PotentialCurve::rebuild() {
  if (z_.size() < 4) throw DomainError("potential curve needs at least 4 grid points");
  if (u_.size() != z_.size() || du_.size() != z_.size() || d2u_.size() != z_.size())
    throw DomainError("potential curve columns differ in length");
  for (std::size_t i = 1; i < z_.size(); ++i)
    if (!(z_[i] > z_[i - 1])) throw DomainError("potential curve grid must increase");
  if (!(z_.front() > 0.0)) throw DomainError("potential curve grid must be positive");
  log_z0_ = std::log(z_.front());
  log_step_ = (std::log(z_.back()) - log_z0_) / static_cast<double>(z_.size() - 1);
  for (std::size_t i = 1; i + 1 < z_.size(); ++i) {
    const double expect = log_z0_ + log_step_ * static_cast<double>(i);
    if (std::abs(std::log(z_[i]) - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw DomainError("potential curve grid must be uniformly log-spaced");
  }
  cu_ = Column::build(u_);
  cdu_ = Column::build(du_);
  cd2u_ = Column::build(d2u_);
}

PotentialCurve PotentialCurve::tabulate(const PotentialSource& source, double z_min,
                                        double z_max, int points_per_decade, CurveMetadata meta,
                                        int workers) {
  if (!(z_min > 0.0) || !(z_max > z_min))
    throw DomainError("tabulate: need 0 < z_min < z_max");
  if (points_per_decade < 16) throw DomainError("tabulate: points_per_decade must be >= 16");
  meta.points_per_decade = points_per_decade;
  auto z = log_grid(z_min, z_max, points_per_decade);
  const auto s = evaluate_all(source, z, workers);
  std::vector<double> u(z.size()), du(z.size()), d2u(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    u[i] = s[i].U;
    du[i] = s[i].dU;
    d2u[i] = s[i].d2U;
  }
  return PotentialCurve(std::move(z), std::move(u), std::move(du), std::move(d2u),
                        std::move(meta), source);
}

bool PotentialCurve::contains(double z) const {
  return z >= z_.front() * (1 - 1e-12) && z <= z_.back() * (1 + 1e-12);
}

double PotentialCurve::interpolate(const Column& col, double z) const {
  if (!contains(z))
    throw DomainError("potential curve evaluated outside its grid at z = " + fmt17(z));
  const double x = (std::log(z) - log_z0_) / log_step_;
  const auto last = static_cast<std::ptrdiff_t>(z_.size()) - 1;
  auto j = static_cast<std::ptrdiff_t>(std::floor(x));
  j = std::clamp<std::ptrdiff_t>(j, 0, last - 1);
  const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(j - 1, 0, last - 3);
  const double t = x - static_cast<double>(lo);
  // Lagrange cubic on nodes lo..lo+3 at unit spacing.
  const double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  const double w1 = t * (t - 2) * (t - 3) / 2.0;
  const double w2 = -t * (t - 1) * (t - 3) / 2.0;
  const double w3 = t * (t - 1) * (t - 2) / 6.0;
  const auto& m = col.mapped;
  const double v = w0 * m[lo] + w1 * m[lo + 1] + w2 * m[lo + 2] + w3 * m[lo + 3];
  return col.mode == 0 ? v : col.mode * std::exp(v);
}

double PotentialCurve::U(double z) const { return interpolate(cu_, z); }
double PotentialCurve::dU(double z) const { return interpolate(cdu_, z); }
double PotentialCurve::d2U(double z) const { return interpolate(cd2u_, z); }
PotentialSample PotentialCurve::at(double z) const { return {U(z), dU(z), d2U(z)}; }

PotentialCurve PotentialCurve::extended_to(double z_new_max, int workers) const {
  if (z_new_max <= z_max()) return *this;
  if (!can_extend()) throw DomainError("potential curve has no source to extend from");
  std::vector<double> extra;
  for (std::size_t k = 1;; ++k) {
    const double zk = std::exp(std::log(z_.back()) + log_step_ * static_cast<double>(k));
    extra.push_back(zk);
    if (zk >= z_new_max) break;
  }
  const auto s = evaluate_all(source_, extra, workers);
  auto z = z_;
  auto u = u_;
  auto du = du_;
  auto d2u = d2u_;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    z.push_back(extra[i]);
    u.push_back(s[i].U);
    du.push_back(s[i].dU);
    d2u.push_back(s[i].d2U);
  }
  return PotentialCurve(std::move(z), std::move(u), std::move(du), std::move(d2u), meta_,
                        source_);
}

PotentialCurve PotentialCurve::extended_from(double z_new_min, int workers) const {
  if (z_new_min >= z_min()) return *this;
  if (!(z_new_min > 0.0)) throw DomainError("extended_from: z must be > 0");
  if (!can_extend()) throw DomainError("potential curve has no source to extend from");
  std::vector<double> extra;
  for (std::size_t k = 1;; ++k) {
    const double zk = std::exp(std::log(z_.front()) - log_step_ * static_cast<double>(k));
    extra.push_back(zk);
    if (zk <= z_new_min) break;
  }
  std::reverse(extra.begin(), extra.end());
  const auto s = evaluate_all(source_, extra, workers);
  std::vector<double> z, u, du, d2u;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    z.push_back(extra[i]);
    u.push_back(s[i].U);
    du.push_back(s[i].dU);
    d2u.push_back(s[i].d2U);
  }
  z.insert(z.end(), z_.begin(), z_.end());
  u.insert(u.end(), u_.begin(), u_.end());
  du.insert(du.end(), du_.begin(), du_.end());
  d2u.insert(d2u.end(), d2u_.begin(), d2u_.end());
  return PotentialCurve(std::move(z), std::move(u), std::move(du), std::move(d2u), meta_,
                        source_);
}

PotentialCurve PotentialCurve::with_source(PotentialSource source) const {
  PotentialCurve out = *this;
  out.source_ = std::move(source);
  return out;
}

void PotentialCurve::write_csv(std::ostream& os) const {
  os << "# " << meta_to_json(meta_).dump() << "\n";
  os << "z_m,U_J,dU,d2U\n";
  for (std::size_t i = 0; i < z_.size(); ++i)
    os << fmt17(z_[i]) << ',' << fmt17(u_[i]) << ',' << fmt17(du_[i]) << ',' << fmt17(d2u_[i])
       << '\n';
}

PotentialCurve PotentialCurve::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    throw IoError("potential CSV: missing metadata line");
  CurveMetadata meta;
  try {
    meta = meta_from_json(json::parse(line.substr(2)));
  } catch (const json::exception& e) {
    throw IoError(std::string("potential CSV: bad metadata: ") + e.what());
  }
  if (!std::getline(is, line) || line != "z_m,U_J,dU,d2U")
    throw IoError("potential CSV: unexpected header");
  std::vector<double> z, u, du, d2u;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<double, 4> v{};
    std::istringstream ls(line);
    std::string cell;
    for (double& x : v) {
      if (!std::getline(ls, cell, ',')) throw IoError("potential CSV: short row");
      x = std::strtod(cell.c_str(), nullptr);
    }
    z.push_back(v[0]);
    u.push_back(v[1]);
    du.push_back(v[2]);
    d2u.push_back(v[3]);
  }
  return PotentialCurve(std::move(z), std::move(u), std::move(du), std::move(d2u),
                        std::move(meta));
}

}  // namespace cqr
