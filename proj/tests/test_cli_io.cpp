#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <sstream>

#include "mltraffic/errors.hpp"
#include "mltraffic/output.hpp"
#include "mltraffic/scenario.hpp"

using namespace mltraffic;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mltraffic_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kMinimal = R"(
# two lanes, one AV
[lanes]
lane = 2, 1
lane = 2, 1

[grid]
x_min = 0
x_max = 4
n_cells = 40

[source]
tau = 0.01

[ic]
lane1 = constant 0.3
lane2 = sin 0.5 0.25 2

[avs]
av = 1, 1.5, 0:1;0.5:0.5

[run]
t_final = 1
outputs = 0, 0.5, 1
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse a hand-written config") {
  const auto c = parse_config(kMinimal);
  CHECK(c.name == "custom");
  CHECK(c.lanes.size() == 2);
  CHECK(c.grid.n_cells == 40);
  CHECK(c.grid.boundary == Boundary::kZeroGradient);
  CHECK(c.tau == 0.01);
  CHECK(c.ic[1].kind == IcProfile::Kind::kSin);
  CHECK(c.ic[1].omega == 2.0);
  REQUIRE(c.avs.size() == 1);
  CHECK(c.avs[0].lane == 1);
  CHECK(c.avs[0].schedule.value_at(0.7) == 0.5);
  CHECK(c.outputs == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("config errors name the problem and line") {
  CHECK(error_of("") == "missing [lanes]");
  CHECK(error_of("[lanes]\nlane = 1, 1\n") == "missing [grid]");
  std::string text = kMinimal;
  CHECK(error_of(text + "[bogus]\n").find("unknown section") != std::string::npos);
  auto bad_key = std::string(kMinimal);
  bad_key.replace(bad_key.find("x_min"), 5, "x_mim");
  const auto msg = error_of(bad_key);
  CHECK(msg.find("line 8") != std::string::npos);
  CHECK(msg.find("unknown key 'x_mim'") != std::string::npos);
  auto bad_number = std::string(kMinimal);
  bad_number.replace(bad_number.find("tau = 0.01"), 10, "tau = 0.0x");
  CHECK(error_of(bad_number).find("malformed number") != std::string::npos);
  auto missing_profile = std::string(kMinimal);
  missing_profile.replace(missing_profile.find("lane2 = sin"), 11, "lane3 = sin");
  CHECK(!error_of(missing_profile).empty());
}

TEST_CASE("AV desired speed above the lane's free-flow speed is rejected") {
  ScenarioConfig c = builtin_scenario("threelane");
  c.avs[2].schedule = SpeedSchedule(120.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_config(serialize_config(c)), ConfigError);
  c.avs[2].schedule = SpeedSchedule(100.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("threelane holds the published constants") {
  const auto c = builtin_scenario("threelane");
  REQUIRE(c.lanes.size() == 3);
  CHECK(c.lanes[0].v_max == 50.0);
  CHECK(c.lanes[1].v_max == 80.0);
  CHECK(c.lanes[2].v_max == 100.0);
  for (const auto& l : c.lanes) CHECK(l.r_max == 1.0);
  CHECK(c.tau == 0.05);
  CHECK(c.grid.dx() == doctest::Approx(0.02));
  CHECK(c.grid.x_min == 0.0);
  CHECK(c.grid.x_max == 10.0);
  CHECK(c.t_final == 0.1);
  REQUIRE(c.avs.size() == 3);
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(c.avs[a].lane == a + 1);
    CHECK(c.avs[a].y0 == static_cast<double>(a + 1));
    CHECK(c.avs[a].schedule.max_value() == 30.0);
  }
  CHECK(c.ic[0].value(1.0) == doctest::Approx(1.0));   // 0.5 + 0.5 sin(pi/2)
  CHECK(c.ic[1].value(0.0) == doctest::Approx(1.0));   // 0.5 + 0.5 cos(0)
  CHECK(c.ic[2].value(0.5) == doctest::Approx(1.0));   // 0.5 + 0.5 sin(pi/2)
}

TEST_CASE("relax and mb catalog entries") {
  const auto c1 = builtin_scenario("relax-c1");
  for (const auto& l : c1.lanes) CHECK(l.v_max == 80.0);
  CHECK(c1.avs.empty());
  CHECK(c1.t_final == doctest::Approx(1.0 / 60.0));
  const auto c2 = builtin_scenario("relax-c2");
  CHECK(c2.lanes[0].v_max == 60.0);
  CHECK(c2.limit_spec().base().max_speed() == doctest::Approx(80.0));
  CHECK(c2.limit_spec().aggregate().max_density() == doctest::Approx(3.0));
  const auto ic3 = builtin_scenario("mb-ic3");
  CHECK(ic3.lanes.size() == 2);
  CHECK(ic3.lanes[0].v_max == 2.0);
  CHECK(ic3.tau == 0.01);
  CHECK(ic3.t_final == 2.0);
  CHECK(ic3.ic[0].offset == 0.3);
  CHECK(ic3.avs[0].schedule.value_at(1.3) == 1.0);
  const double expected[] = {0.05, 0.15, 0.3, 0.45, 0.75};
  for (int i = 1; i <= 5; ++i) {
    CHECK(builtin_scenario("mb-ic" + std::to_string(i)).ic[1].offset == expected[i - 1]);
  }
  CHECK_THROWS_AS(builtin_scenario("mb-ic6"), ConfigError);
}

TEST_CASE("catalog round-trips through the config format") {
  for (const auto& name : builtin_scenario_names()) {
    const auto c = builtin_scenario(name);
    CHECK(parse_config(serialize_config(c)) == c);
  }
  CHECK(parse_config(serialize_config(parse_config(kMinimal))) == parse_config(kMinimal));
}

TEST_CASE("every builtin scenario validates and runs one step") {
  for (const auto& name : builtin_scenario_names()) {
    CAPTURE(name);
    const auto c = builtin_scenario(name);
    CHECK_NOTHROW(c.validate());
    auto state = c.initial_state();
    const auto diag = step(state, c.model());
    CHECK(diag.dt_used > 0.0);
  }
}

TEST_CASE("initial data are exact cell averages") {
  const IcProfile p{IcProfile::Kind::kSin, 0.5, 0.5, 0.5};
  // Mean of 0.5 + 0.5 sin(pi x / 2) over [0, 2] is 0.5 + 0.5 * 2/pi.
  CHECK(p.cell_average(0.0, 2.0) == doctest::Approx(0.5 + 1.0 / std::numbers::pi).epsilon(1e-14));
  const IcProfile q{IcProfile::Kind::kCos, 0.5, 0.5, 1.0};
  CHECK(q.cell_average(0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("write_outputs produces the documented files deterministically") {
  ScenarioConfig c = builtin_scenario("threelane");
  c.t_final = 0.005;
  c.outputs = {0.0, 0.0025, 0.005};
  const auto traj = run(c.initial_state(), c.model(), c.t_final, c.outputs);
  auto bundle = make_bundle(traj, c.grid);
  const auto a = scratch("a"), b = scratch("b");
  const auto files = write_outputs(bundle, a);
  write_outputs(make_bundle(run(c.initial_state(), c.model(), c.t_final, c.outputs), c.grid), b);

  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  CHECK(names == std::vector<std::string>{"density_lane1.csv", "density_lane2.csv",
                                          "density_lane3.csv", "total_density.csv",
                                          "av_trajectories.csv"});
  for (const auto& f : files) CHECK(slurp(f) == slurp(b / f.filename()));

  std::istringstream lane1(slurp(a / "density_lane1.csv"));
  std::string header, row;
  std::getline(lane1, header);
  CHECK(header.rfind("t\\x,0.01,0.03,", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(lane1, row)) {
    ++rows;
    CHECK(std::count(row.begin(), row.end(), ',') == 500);
  }
  CHECK(rows == 3);
  std::istringstream traj_csv(slurp(a / "av_trajectories.csv"));
  std::getline(traj_csv, header);
  CHECK(header == "t,lane,av_index,y,realized_speed,constraint_active");
}

TEST_CASE("no sample times: only trajectory and report files") {
  OutputBundle bundle;
  StudyReport report;
  report.title = "t";
  report.columns = {"a"};
  report.rows.push_back({"r", {1.5}});
  bundle.reports.emplace_back("report", report);
  bundle.plot_scripts = true;
  const auto dir = scratch("empty");
  const auto files = write_outputs(bundle, dir);
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  CHECK(names == std::vector<std::string>{"av_trajectories.csv", "report.csv", "plot_densities.py"});
  CHECK(slurp(dir / "report.csv") == "label,a\nr,1.5\n");
}

TEST_CASE("I/O failures name the path") {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  OutputBundle bundle;
  try {
    write_outputs(bundle, dir / "file" / "sub");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("file") != std::string::npos);
  }
}

TEST_CASE("load_scenario reads files and rejects unknown names") {
  const auto dir = scratch("load");
  fs::create_directories(dir);
  std::ofstream(dir / "s.cfg") << kMinimal;
  CHECK(load_scenario((dir / "s.cfg").string()).grid.n_cells == 40);
  CHECK(load_scenario("relax-c2").name == "relax-c2");
  CHECK_THROWS_AS(load_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("set_dx keeps the domain") {
  ScenarioConfig c = builtin_scenario("threelane");
  c.set_dx(0.01);
  CHECK(c.grid.n_cells == 1000);
  CHECK_THROWS_AS(c.set_dx(0.0), ConfigError);
  CHECK_THROWS_AS(c.set_dx(100.0), ConfigError);
}
