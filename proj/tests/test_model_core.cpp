#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mltraffic/errors.hpp"
#include "mltraffic/lane.hpp"

using namespace mltraffic;

namespace {

const LaneSpec kLane{2.0, 1.0};

// Independent references written from the closure, not from LaneSpec.
double ref_flux(double rho) { return 2.0 * rho * (1.0 - rho); }

// Entropy solution of the Riemann problem for F = 2 rho (1 - rho), built from
// Rankine-Hugoniot and the inverse of F' = 2 - 4 rho.
double ref_riemann(double l, double r, double xi) {
  if (l == r) return l;
  if (l < r) {
    const double s = (ref_flux(l) - ref_flux(r)) / (l - r);
    return xi < s ? l : r;
  }
  const double fl = 2.0 - 4.0 * l;
  const double fr = 2.0 - 4.0 * r;
  if (xi <= fl) return l;
  if (xi >= fr) return r;
  return (2.0 - xi) / 4.0;
}

}  // namespace

TEST_CASE("velocity follows the linear law") {
  CHECK(kLane.velocity(0.0) == 2.0);
  CHECK(kLane.velocity(1.0) == 0.0);
  CHECK(kLane.velocity(0.6) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(kLane.velocity(1.1), DomainError);
  CHECK_THROWS_AS(kLane.velocity(-0.1), DomainError);
}

TEST_CASE("flux is rho v(rho)") {
  CHECK(kLane.flux(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kLane.flux(0.0) == 0.0);
  CHECK(kLane.flux(0.3) == doctest::Approx(0.42).epsilon(1e-15));
  CHECK(kLane.flux(1.0) == 0.0);
  CHECK(kLane.max_flux() == doctest::Approx(kLane.flux(kLane.critical_density())));
  CHECK_THROWS_AS(kLane.flux(2.0), DomainError);
}

TEST_CASE("hat_rho inverts the speed law") {
  CHECK(kLane.hat_rho(1.0) == doctest::Approx(0.5));
  CHECK(kLane.hat_rho(0.0) == 1.0);
  CHECK(kLane.hat_rho(2.0) == 0.0);
  CHECK_THROWS_AS(kLane.hat_rho(2.5), DomainError);
  for (int i = 0; i <= 100; ++i) {
    const double rho = 0.01 * i;
    CHECK(kLane.hat_rho(kLane.velocity(rho)) == doctest::Approx(rho).epsilon(1e-12));
    const double u = 0.02 * i;
    CHECK(kLane.velocity(kLane.hat_rho(u)) == doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("demand and supply") {
  CHECK(kLane.demand(0.8) == doctest::Approx(0.5));
  CHECK(kLane.demand(0.3) == doctest::Approx(0.42));
  CHECK(kLane.demand(0.0) == 0.0);
  CHECK(kLane.supply(0.3) == doctest::Approx(0.5));
  CHECK(kLane.supply(0.8) == doctest::Approx(0.32));
  CHECK(kLane.supply(1.0) == 0.0);
  CHECK_THROWS_AS(kLane.demand(1.5), DomainError);
  CHECK_THROWS_AS(kLane.supply(-1.0), DomainError);

  for (int i = 0; i <= 100; ++i) {
    const double rho = 0.01 * i;
    CHECK(std::min(kLane.demand(rho), kLane.supply(rho)) == doctest::Approx(kLane.flux(rho)));
    if (i > 0) {
      CHECK(kLane.demand(rho) >= kLane.demand(rho - 0.01));
      CHECK(kLane.supply(rho) <= kLane.supply(rho - 0.01));
    }
  }
}

TEST_CASE("godunov flux") {
  CHECK(kLane.godunov_flux(0.3, 0.8) == doctest::Approx(0.32));
  CHECK(kLane.godunov_flux(0.8, 0.3) == doctest::Approx(0.5));
  CHECK(kLane.godunov_flux(0.0, 0.7) == 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double rho = 0.01 * i;
    CHECK(kLane.godunov_flux(rho, rho) == doctest::Approx(kLane.flux(rho)).epsilon(1e-14));
  }
}

TEST_CASE("riemann_eval matches the closed-form entropy solution") {
  CHECK(riemann_eval(kLane, 0.2, 0.9, 0.0) == 0.9);
  CHECK(riemann_eval(kLane, 0.9, 0.2, 0.0) == doctest::Approx(0.5));
  CHECK(riemann_eval(kLane, 0.4, 0.4, -3.0) == 0.4);
  CHECK(riemann_eval(kLane, 0.4, 0.4, 3.0) == 0.4);
  // Shock exactly on the ray: right state. (0.2 | 0.6) travels at speed 2(1 - 0.8) = 0.4.
  CHECK(riemann_eval(kLane, 0.25, 0.75, 0.0) == 0.75);
  CHECK_THROWS_AS(riemann_eval(kLane, 1.2, 0.1, 0.0), DomainError);

  std::mt19937 gen(7);
  std::uniform_real_distribution<double> rho(0.0, 1.0), xi(-2.5, 2.5);
  for (int i = 0; i < 2000; ++i) {
    const double l = rho(gen), r = rho(gen), s = xi(gen);
    CHECK(riemann_eval(kLane, l, r, s) == doctest::Approx(ref_riemann(l, r, s)).epsilon(1e-12));
  }
}

TEST_CASE("godunov flux equals the flux of the Riemann solution at x/t = 0") {
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    for (int k = 0; k <= 100; ++k) {
      const double l = 0.01 * i, r = 0.01 * k;
      worst = std::max(worst, std::abs(kLane.godunov_flux(l, r) -
                                       kLane.flux(riemann_eval(kLane, l, r, 0.0))));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("lane-change source") {
  const SourceCoupling coupling({kLane, kLane});
  CHECK(coupling.exchange(1, 0.8, 0.2) == doctest::Approx(0.96));
  CHECK(coupling.exchange(1, 0.2, 0.8) == doctest::Approx(-0.96));
  CHECK(coupling.exchange(1, 0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(coupling.exchange(0, 0.1, 0.1), std::out_of_range);
  CHECK_THROWS_AS(coupling.exchange(2, 0.1, 0.1), std::out_of_range);
  CHECK(coupling.lipschitz_bound() == 4.0);
}

TEST_CASE("lane-change source hypotheses on mixed lanes") {
  const SourceCoupling coupling({LaneSpec(50, 1), LaneSpec(80, 1), LaneSpec(100, 1.5)});
  CHECK(coupling.lipschitz_bound() == 200.0);
  for (std::size_t j = 1; j <= 2; ++j) {
    const auto& a = coupling.lanes()[j - 1];
    const auto& b = coupling.lanes()[j];
    CHECK(coupling.exchange(j, 0.0, 0.0) == 0.0);
    CHECK(coupling.exchange(j, a.max_density(), b.max_density()) == 0.0);
    for (int p = 0; p <= 100; ++p) {
      for (int q = 0; q <= 100; ++q) {
        const double u = a.max_density() * 0.01 * p;
        const double w = b.max_density() * 0.01 * q;
        const double s = coupling.exchange(j, u, w);
        if (p < 100) CHECK(coupling.exchange(j, u + 0.01 * a.max_density(), w) >= s);
        if (q < 100) CHECK(coupling.exchange(j, u, w + 0.01 * b.max_density()) <= s);
        if (p > 0 && p < 100 && q > 0 && q < 100) {
          const double dv = b.velocity(w) - a.velocity(u);
          CHECK((s > 0) == (dv > 0));
          CHECK((s < 0) == (dv < 0));
        }
      }
    }
  }
}

TEST_CASE("total exchange telescopes") {
  const SourceCoupling coupling({LaneSpec(50, 1), LaneSpec(80, 1), LaneSpec(100, 1)});
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> rho(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double r1 = rho(gen), r2 = rho(gen), r3 = rho(gen);
    const double s1 = coupling.exchange(1, r1, r2);
    const double s2 = coupling.exchange(2, r2, r3);
    const double net = (0.0 - s1) + (s1 - s2) + (s2 - 0.0);
    const double scale = std::max({1.0, std::abs(s1), std::abs(s2)});
    CHECK(std::abs(net) <= 4.0 * std::numeric_limits<double>::epsilon() * scale);
  }
}

TEST_CASE("lane spec rejects nonpositive parameters") {
  CHECK_THROWS_AS(LaneSpec(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(LaneSpec(1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(SourceCoupling({}), ConfigError);
}
