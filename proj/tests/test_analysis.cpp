#include <doctest.h>

#include <cmath>
#include <random>

#include "mltraffic/analysis.hpp"
#include "mltraffic/errors.hpp"

using namespace mltraffic;

TEST_CASE("l1 distance") {
  const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
  CHECK(l1_distance(a, a, 0.5) == 0.0);
  CHECK(l1_distance(a, b, 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(l1_distance(a, {1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("l1 distance is a homogeneous metric") {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(30), b(30), c(30);
    for (std::size_t k = 0; k < 30; ++k) {
      a[k] = d(gen);
      b[k] = d(gen);
      c[k] = d(gen);
    }
    const double ab = l1_distance(a, b, 0.1);
    CHECK(ab == doctest::Approx(l1_distance(b, a, 0.1)));
    CHECK(ab >= 0.0);
    CHECK(ab <= l1_distance(a, c, 0.1) + l1_distance(c, b, 0.1) + 1e-14);
    const double scale = std::abs(d(gen)) * 3.0;
    std::vector<double> sa = a, sb = b;
    for (auto& v : sa) v *= scale;
    for (auto& v : sb) v *= scale;
    CHECK(l1_distance(sa, sb, 0.1) == doctest::Approx(scale * ab).epsilon(1e-12));
  }
}

TEST_CASE("total variation") {
  CHECK(total_variation({0.3, 0.3, 0.3}) == 0.0);
  CHECK(total_variation({0.0, 1.0, 0.0}) == 2.0);
  CHECK(total_variation({0.1, 0.4, 0.45, 0.9}) == doctest::Approx(0.8));
  CHECK(total_variation({0.5}) == 0.0);
}

TEST_CASE("total density sums lanes and is TV-subadditive") {
  MultiLaneState s;
  s.rho = {{0.0, 0.0}, {0.0, 0.0}};
  CHECK(total_density(s) == std::vector<double>{0.0, 0.0});
  s.rho = {{0.3, 0.3}, {0.3, 0.3}};
  CHECK(total_density(s)[0] == doctest::Approx(0.6));
  CHECK(builtin_scenario("mb-ic3").initial_total_density() == std::vector<double>(800, 0.6));

  std::mt19937 gen(2);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    s.rho.assign(3, std::vector<double>(40));
    for (auto& lane : s.rho) for (auto& r : lane) r = d(gen);
    double lanes_tv = 0.0;
    for (const auto& lane : s.rho) lanes_tv += total_variation(lane);
    CHECK(total_variation(total_density(s)) <= lanes_tv + 1e-12);
  }
}

TEST_CASE("AV traces") {
  const GridSpec g{0.0, 1.0, 100};
  MultiLaneState s;
  s.rho = {std::vector<double>(100, 0.37)};
  AvState av;
  av.y = 0.5;
  const auto t = extract_av_traces(s, av, g);
  CHECK(t.left == 0.37);
  CHECK(t.right == 0.37);

  for (std::size_t k = 0; k < 100; ++k) s.rho[0][k] = static_cast<double>(k);
  const auto ramp = extract_av_traces(s, av, g, 3);
  CHECK(ramp.left == 47.0);
  CHECK(ramp.right == 53.0);
  av.y = 0.02;
  CHECK_THROWS_AS(extract_av_traces(s, av, g), TraceError);
  av.y = 0.97;
  CHECK_THROWS_AS(extract_av_traces(s, av, g), TraceError);
  CHECK_THROWS_AS(extract_av_traces(s, av, g, 0), std::invalid_argument);
}

TEST_CASE("trace ordering margin") {
  CHECK(trace_ordering_margin({0.85, 0.15}, {0.8, 0.2}) == doctest::Approx(0.05));
  CHECK(trace_ordering_margin({0.85, 0.15}, {0.9, 0.2}) < 0.0);
}

TEST_CASE("relaxation study at equilibrium matches the scalar model for any large tau") {
  // Identical lanes with identical data: the lanes never exchange and the total obeys
  // f(r) = M F(r/M) exactly, so only round-off separates the two runs.
  ScenarioConfig c = builtin_scenario("relax-c1");
  c.grid.n_cells = 100;
  c.ic = {c.ic[0], c.ic[0], c.ic[0]};
  const auto report =
      relaxation_study(c, {1e3, 1e9}, c.t_final);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.at(0, "l1_distance") < 1e-10);
  CHECK(report.at(1, "l1_distance") < 1e-10);
  CHECK(report.at(0, "total_mass") == doctest::Approx(report.at(0, "reference_mass")));
  CHECK_THROWS_AS(report.at(0, "nope"), std::out_of_range);
}

TEST_CASE("relaxation study orders tau on C1") {
  ScenarioConfig c = builtin_scenario("relax-c1");
  c.set_dx(0.05);
  const auto report = relaxation_study(c, {1.0, 0.1}, c.t_final);
  CHECK(report.at(1, "l1_distance") < report.at(0, "l1_distance"));
  const auto csv = report.to_csv();
  CHECK(csv.rfind("label,tau,l1_distance,total_mass,reference_mass\n", 0) == 0);
}

TEST_CASE("convergence study") {
  ScenarioConfig c = builtin_scenario("relax-c1");
  c.lanes.resize(1);
  c.ic.resize(1);
  c.tau = std::numeric_limits<double>::infinity();
  SUBCASE("constant data") {
    c.ic[0] = IcProfile{IcProfile::Kind::kConstant, 0.4, 0.0, 0.0};
    const auto r = convergence_study(c, {0.1, 0.05, 0.025}, c.t_final);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.at(0, "l1_difference") == 0.0);
    CHECK(r.at(0, "l1_difference_next") == 0.0);
    CHECK(r.at(0, "rate") == 0.0);
  }
  SUBCASE("smooth data") {
    const auto r = convergence_study(c, {0.08, 0.04, 0.02, 0.01}, c.t_final);
    REQUIRE(r.rows.size() == 2);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      CHECK(std::isfinite(r.at(i, "rate")));
      CHECK(r.at(i, "rate") > 0.7);
    }
  }
  SUBCASE("bad resolution lists") {
    CHECK_THROWS_AS(convergence_study(c, {0.1}, c.t_final), ConfigError);
    CHECK_THROWS_AS(convergence_study(c, {0.1, 0.03}, c.t_final), ConfigError);
  }
}

TEST_CASE("mb comparison reports IC1 as not applicable and IC3 as ordered") {
  const auto ic1 = mb_comparison_study(1, 0.01, 400, 1.0, 1.0);
  CHECK(ic1.at(0, "mb_active") == 0.0);
  CHECK(ic1.at(0, "ordering") == kOrderingNotApplicable);
  const auto ic3 = mb_comparison_study(3, 0.01, 400, 1.0, 1.0);
  CHECK(ic3.at(0, "mb_active") == 1.0);
  CHECK(ic3.at(0, "ordering") == kOrderingHolds);
  CHECK(ic3.at(0, "ordering_margin") > 0.0);
  CHECK_THROWS_AS(mb_comparison_study(6, 0.01, 400, 1.0, 1.0), ConfigError);
}

TEST_CASE("mb comparison IC5: the AV is slowed by dense traffic") {
  const auto ic5 = mb_comparison_study(5, 0.01, 400, 1.0, 1.0);
  // v(0.75) = 0.5 < u, so the AV follows traffic.
  CHECK(ic5.at(0, "min_realized_speed") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(ic5.at(0, "multilane_active") == 0.0);
}
