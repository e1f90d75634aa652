#include "coarse/error.hpp"
#include "coarse/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace coarse;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = COARSE_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("coarse_scenario_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("bell on a single piece passes with a zero variation profile") {
  auto o = run_scenario(kSource / "scenarios/bell_single_piece.json");
  CHECK(o.exit_code == 0);
  REQUIRE(o.certificate);
  CHECK(o.certificate->pass);
  REQUIRE_FALSE(o.certificate->variation.empty());
  for (auto [R, v] : o.certificate->variation) CHECK(v == 0.0);
}

TEST_CASE("glue with a piece witness missing a point exits 2 naming it") {
  auto o = run_scenario(kSource / "tests/data/glue_missing_point.json");
  CHECK(o.exit_code == 2);
  CHECK_FALSE(o.certificate);
  CHECK(o.error.find("piece 1") != std::string::npos);
  CHECK(o.error.find("'4'") != std::string::npos);
}

TEST_CASE("group pipeline on Z_60 / C_12 and the halved epsilon") {
  auto ok = run_scenario(kSource / "scenarios/group_z60_c12.json");
  CHECK(ok.exit_code == 0);
  REQUIRE(ok.certificate);
  const auto& body = ok.certificate->body;
  CHECK(body["pass"].get<bool>());
  CHECK(body["checked_inequalities"].size() > 5);
  auto half = run_scenario(kSource / "tests/data/group_z60_c12_half_epsilon.json");
  CHECK(half.exit_code == 2);
  CHECK(half.error.find("Lebesgue number 1 < required 2") != std::string::npos);
}

TEST_CASE("a violated inequality exits 1 with a witness pair") {
  auto o = run_scenario(kSource / "tests/data/bell_tight_epsilon.json");
  CHECK(o.exit_code == 1);
  REQUIRE(o.certificate);
  bool found = false;
  for (const auto& q : o.certificate->body["checked_inequalities"])
    if (!q["pass"].get<bool>()) {
      found = true;
      CHECK(q.contains("witness_pair"));
      CHECK(q["lhs"].get<double>() > q["rhs"].get<double>());
    }
  CHECK(found);
  for (const auto& q : o.certificate->body["checked_inequalities"])
    if (q["pass"].get<bool>()) CHECK_FALSE(q.contains("witness_pair"));
}

TEST_CASE("parse errors exit 2 with a location") {
  auto o = run_scenario(kSource / "tests/data/malformed.json");
  CHECK(o.exit_code == 2);
  CHECK(o.error.find("line 6") != std::string::npos);
  auto f = run_scenario(kSource / "tests/data/bad_field.json");
  CHECK(f.exit_code == 2);
  CHECK(f.error.find("inputs.space.metric.d[1][1]") != std::string::npos);
  auto missing = run_scenario(kSource / "tests/data/does_not_exist.json");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("profile export") {
  SUBCASE("uniform ball tail on [0,10]") {
    auto o = run_scenario(kSource / "tests/data/uniform_ball_tail.json");
    REQUIRE(o.certificate);
    const std::string csv = tail_csv(*o.certificate);
    std::istringstream rows(csv);
    std::string header, first, second;
    std::getline(rows, header);
    std::getline(rows, first);
    std::getline(rows, second);
    CHECK(header == "S,tail");
    CHECK(first.rfind("0,", 0) == 0);
    CHECK(std::stod(first.substr(2)) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(second == "1,0");
    const auto dir = scratch("export");
    auto files = export_profiles(*o.certificate, "csv", dir);
    REQUIRE(files.size() == 2);
    CHECK(slurp(dir / "uniform_ball_tail.tail.csv") == csv);
    CHECK(slurp(dir / "uniform_ball_tail.variation.csv").rfind("R,variation\n", 0) == 0);
  }
  SUBCASE("dirac tails are zero") {
    auto o = run_scenario(kSource / "scenarios/glue_path_bell_weights.json");
    REQUIRE(o.certificate);
    REQUIRE_FALSE(o.certificate->tail.empty());
    for (auto [S, t] : o.certificate->tail) CHECK(t == 0.0);
    // Net points sit within c = 1, so only the S = 0 tail is nonzero.
    auto n = run_scenario(kSource / "scenarios/net_evens.json");
    REQUIRE(n.certificate);
    for (auto [S, t] : n.certificate->tail) CHECK((S >= 1.0 ? t == 0.0 : t == 1.0));
  }
  SUBCASE("empty S grid gives a header-only table") {
    auto o = run_scenario(kSource / "tests/data/empty_grid.json");
    REQUIRE(o.certificate);
    CHECK(tail_csv(*o.certificate) == "S,tail\n");
  }
  SUBCASE("unsupported format") {
    auto o = run_scenario(kSource / "scenarios/bell_single_piece.json");
    REQUIRE(o.certificate);
    CHECK_THROWS_AS(export_profiles(*o.certificate, "parquet", scratch("bad_format")), InputError);
  }
}

TEST_CASE("suite") {
  SUBCASE("empty directory") {
    auto s = run_suite(scratch("empty"), 2);
    CHECK(s.total == 0);
    CHECK(s.passed == 0);
    CHECK(s.exit_code() == 0);
  }
  SUBCASE("one pass and one exit-2 scenario") {
    const auto dir = scratch("mixed");
    // The passing scenario references data/p5.json relative to itself.
    fs::copy_file(kSource / "scenarios/bell_single_piece.json", dir / "a_pass.json");
    fs::create_directories(dir / "data");
    fs::copy_file(kSource / "scenarios/data/p5.json", dir / "data/p5.json");
    fs::copy_file(kSource / "tests/data/glue_missing_point.json", dir / "b_error.json");
    auto s = run_suite(dir, 2);
    REQUIRE(s.total == 2);
    CHECK(s.passed == 1);
    CHECK(s.entries[0].file == "a_pass.json");
    CHECK(s.entries[0].exit_code == 0);
    CHECK(s.entries[1].exit_code == 2);
    CHECK(s.exit_code() != 0);
  }
  SUBCASE("the shipped scenarios all pass") {
    auto s = run_suite(kSource / "scenarios", 4);
    CHECK(s.total >= 10);
    CHECK(s.passed == s.total);
  }
}

TEST_CASE("certificates are byte-identical across runs and thread counts") {
  for (const auto& entry : fs::directory_iterator(kSource / "scenarios")) {
    if (entry.path().extension() != ".json") continue;
    auto a = run_scenario(entry.path());
    auto b = run_scenario(entry.path());
    REQUIRE(a.certificate);
    REQUIRE(b.certificate);
    CHECK(certificate_text(*a.certificate) == certificate_text(*b.certificate));
  }
  const auto one = scratch("det1"), four = scratch("det4");
  run_suite(kSource / "scenarios", 1, one);
  run_suite(kSource / "scenarios", 4, four);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(one)) {
    CHECK(slurp(entry.path()) == slurp(four / entry.path().filename()));
    ++compared;
  }
  CHECK(compared >= 10);
}
