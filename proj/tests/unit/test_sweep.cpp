#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cqr/constants.hpp"
#include "cqr/errors.hpp"
#include "cqr/sweep.hpp"

using namespace cqr;
namespace fs = std::filesystem;

namespace {

SweepSpec potential_spec(int points) {
  SweepSpec s;
  s.atom = "Na";
  s.mode = SweepMode::potential;
  s.fixed = {{"B", 2.0}, {"mu_c", 0.115}};
  s.range = {1e-8, 1e-5, points, Spacing::log};
  return s;
}

std::vector<SweepRecord> field_records(const std::vector<double>& values) {
  std::vector<SweepRecord> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRecord r;
    r.swept_value = 1.0 + 0.1 * static_cast<double>(i);
    r.value = values[i];
    r.converged = true;
    out.push_back(r);
  }
  return out;
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cqr_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ranges") {
  const auto v = SweepRange{1e-3, 1e4, 8, Spacing::log}.values();
  REQUIRE(v.size() == 8);
  CHECK(v.front() == 1e-3);
  CHECK(v.back() == 1e4);
  CHECK(v[3] == doctest::Approx(1.0));
  const auto lin = SweepRange{1.0, 14.0, 131, Spacing::linear}.values();
  CHECK(lin[10] == doctest::Approx(2.0));
  const auto same = SweepRange{5.0, 5.0, 2, Spacing::linear}.values();
  CHECK(same == std::vector<double>{5.0, 5.0});
  CHECK(parse_mode("q_profile") == SweepMode::q_profile);
  CHECK(to_string(SweepMode::ratio) == "ratio");
  CHECK_THROWS_AS(parse_mode("nope"), InvalidSpec);
  CHECK_THROWS_AS(parse_spacing("cubic"), InvalidSpec);
}

TEST_CASE("spec validation") {
  auto s = potential_spec(4);
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.atom = "Xe";
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = s;
  bad.range.points = 1;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = s;
  bad.range.start = 1.0;
  bad.range.stop = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = s;
  bad.mode = SweepMode::field;
  bad.range = {1.0, 14.0, 20, Spacing::linear};
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);  // field mode needs E
  bad.fixed["E"] = 1e-5;
  CHECK_NOTHROW(bad.validate());
  bad = s;
  bad.fixed.erase("B");
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = s;
  bad.points_per_decade = 8;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  CHECK_THROWS_AS(run_sweep(bad), InvalidSpec);
}

TEST_CASE("crossing fields") {
  const auto cfg = GrapheneConfig::with_field(0.0, 0.115);
  const auto b = landau_crossing_fields(units::ev_to_joule(0.115), cfg, 1, 10);
  REQUIRE(b.size() == 10);
  CHECK(b.back() == doctest::Approx(10.046).epsilon(1e-3));
  for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] > b[i - 1]);
  // b[6] is level n = 4
  CHECK(b[6] == doctest::Approx(b.back() / 4.0).epsilon(1e-14));
  const auto higher = landau_crossing_fields(units::ev_to_joule(0.2), cfg, 1, 10);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(higher[i] > b[i]);
}

TEST_CASE("discontinuity detection") {
  CHECK(detect_discontinuities(field_records(std::vector<double>(20, 0.4))).empty());

  std::vector<double> steps;
  for (int i = 0; i < 30; ++i) steps.push_back((i < 17 ? 0.5 : 0.6) + 1e-5 * i);
  const auto found = detect_discontinuities(field_records(steps));
  REQUIRE(found.size() == 1);
  CHECK(found[0].B_low == doctest::Approx(2.6));
  CHECK(found[0].B_high == doctest::Approx(2.7));
  CHECK(found[0].jump == doctest::Approx(0.1 + 1e-5));

  CHECK_THROWS_AS(detect_discontinuities(field_records(std::vector<double>(10, 0.4))),
                  DomainError);
}

TEST_CASE("potential sweep, CSV round trip and determinism") {
  auto spec = potential_spec(6);
  const auto serial = run_sweep(spec);
  spec.workers = 3;
  const auto parallel = run_sweep(spec);
  REQUIRE(serial.size() == 6);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].value < 0.0);
    CHECK(serial[i].converged);
    CHECK(serial[i].value == parallel[i].value);
  }

  std::ostringstream a, b;
  write_csv(a, potential_spec(6), serial);
  write_csv(b, potential_spec(6), parallel);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("# atom=Na\n") != std::string::npos);
  CHECK(a.str().find("# constants_version=") != std::string::npos);

  std::istringstream in(a.str());
  const auto parsed = read_csv(in);
  CHECK(parsed.spec.atom == "Na");
  CHECK(parsed.spec.mode == SweepMode::potential);
  CHECK(parsed.spec.fixed.at("B") == 2.0);
  CHECK(parsed.spec.range.points == 6);
  REQUIRE(parsed.records.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(parsed.records[i].swept_value == serial[i].swept_value);
    CHECK(parsed.records[i].value == serial[i].value);
    CHECK(parsed.records[i].converged == serial[i].converged);
  }
  // The header alone reproduces the run.
  const auto rerun = run_sweep(parsed.spec);
  std::ostringstream c;
  write_csv(c, parsed.spec, rerun);
  CHECK(c.str() == a.str());

  std::ostringstream j;
  write_json(j, potential_spec(6), serial);
  const auto doc = nlohmann::json::parse(j.str());
  CHECK(doc.at("records").size() == 6);
}

TEST_CASE("emit") {
  const auto dir = scratch_dir("emit");
  const auto spec = potential_spec(4);
  const auto files = emit({}, spec, dir / "empty.csv", OutputFormat::csv, true);
  REQUIRE(files.size() == 2);
  const auto text = slurp(files[0]);
  CHECK(text.find("z_m,U_J,z_m_peak,converged,note\n") != std::string::npos);
  CHECK(text.substr(text.size() - 32).find("note\n") != std::string::npos);
  CHECK(slurp(files[1]).find("empty.csv") != std::string::npos);

  auto failed = field_records(std::vector<double>(3, 0.5));
  failed[1].value = std::nan("");
  failed[1].note = "no badlands region, flat Q";
  emit(failed, spec, dir / "f.csv", OutputFormat::csv, false);
  std::ifstream in(dir / "f.csv");
  const auto back = read_csv(in);
  CHECK(back.records[1].failed());
  CHECK(std::isnan(back.records[1].value));

  CHECK_THROWS_AS(emit({}, spec, dir / "missing" / "x.csv", OutputFormat::csv, false), IoError);
  fs::remove_all(dir);
}

TEST_CASE("curve cache") {
  const auto dir = scratch_dir("cache");
  const CurveCache cache(dir);
  const auto& he = atom_lookup("He");
  const auto cfg = GrapheneConfig::with_field(3.0, 0.115);
  TabulationOptions opts;
  opts.z_min = 1e-8;
  opts.z_max = 1e-7;
  opts.points_per_decade = 16;
  CHECK_FALSE(cache.load(he, cfg, opts).has_value());
  const auto fresh = cache.get(he, cfg, opts);
  const auto stored = cache.load(he, cfg, opts);
  REQUIRE(stored.has_value());
  CHECK(stored->U_values() == fresh.U_values());
  CHECK(stored->d2U_values() == fresh.d2U_values());
  CHECK(stored->can_extend());

  auto other = cfg;
  other.B = 3.5;
  CHECK(CurveCache::key(he, cfg, opts) != CurveCache::key(he, other, opts));
  auto looser = opts;
  looser.tol = 1e-5;
  CHECK(CurveCache::key(he, cfg, opts) != CurveCache::key(he, cfg, looser));
  looser = opts;
  looser.workers = 8;
  CHECK(CurveCache::key(he, cfg, opts) == CurveCache::key(he, cfg, looser));
  fs::remove_all(dir);
}

TEST_CASE("failing points abort the sweep") {
  SweepSpec s;
  s.atom = "He";
  s.mode = SweepMode::energy;
  s.fixed = {{"B", 0.0}, {"mu_c", 0.115}};
  s.range = {1e3, 1e4, 3, Spacing::log};
  s.z_max = 1e-6;
  try {
    run_sweep(s);
    FAIL("expected SweepAborted");
  } catch (const SweepAborted& e) {
    CHECK(e.records().size() == 3);
    for (const auto& r : e.records()) {
      CHECK(r.failed());
      CHECK(r.note.find("short-distance") != std::string::npos);
    }
  }
}
