#include "mltraffic/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mltraffic/errors.hpp"
#include "mltraffic/multilane.hpp"

namespace mltraffic {

LimitSpec::LimitSpec(std::size_t lanes, LaneSpec base)
    : lanes_(lanes),
      base_(base),
      aggregate_(base.max_speed(), static_cast<double>(lanes) * base.max_density()) {
  if (lanes == 0) throw ConfigError("limit model needs at least one lane");
}

namespace {

void check_speed(const LimitSpec& spec, double u) {
  const double v = spec.aggregate().max_speed();
  if (!(u >= 0.0 && u <= v)) {
    throw DomainError("bottleneck speed " + std::to_string(u) + " outside [0, " +
                      std::to_string(v) + "]");
  }
}

}  // namespace

double flux_limiter(const LimitSpec& spec, double u) {
  check_speed(spec, u);
  // f(2r)/2 - r u = r (V - u) - 2 V r^2 / R_tot, maximal at r = (V - u) R_tot / (4 V).
  const double v = spec.aggregate().max_speed();
  const double r_tot = spec.aggregate().max_density();
  return (v - u) * (v - u) * r_tot / (8.0 * v);
}

double flux_limiter_grid_search(const LimitSpec& spec, double u, double resolution) {
  check_speed(spec, u);
  const double half = 0.5 * spec.aggregate().max_density();
  const auto n = static_cast<std::size_t>(std::ceil(half / resolution));
  double best = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double r = std::min(half, static_cast<double>(i) * resolution);
    best = std::max(best, 0.5 * spec.f(2.0 * r) - r * u);
  }
  return best;
}

MbTraces mb_traces(const LimitSpec& spec, double u) {
  const double v = spec.aggregate().max_speed();
  if (!(u > 0.0 && u < v)) {
    throw DomainError("bottleneck traces need u in (0, " + std::to_string(v) + "), got " +
                      std::to_string(u));
  }
  const double r_tot = spec.aggregate().max_density();
  MbTraces t;
  t.u = u;
  t.f_alpha = flux_limiter(spec, u);
  // Resolution fine enough that the quadratic's sampling error stays below 1e-9.
  const double h = std::min(1e-4, std::sqrt(2e-9 * r_tot / v));
  const double searched = flux_limiter_grid_search(spec, u, h);
  if (std::abs(searched - t.f_alpha) > 1e-8) {
    throw std::logic_error("flux limiter closed form " + std::to_string(t.f_alpha) +
                           " disagrees with grid search " + std::to_string(searched));
  }
  // Roots of -(V/R_tot) r^2 + (V - u) r - f_alpha = 0.
  const double a = v / r_tot;
  const double b = v - u;
  const double disc = std::max(0.0, b * b - 4.0 * a * t.f_alpha);
  t.r_check = (b - std::sqrt(disc)) / (2.0 * a);
  t.r_hat = (b + std::sqrt(disc)) / (2.0 * a);
  t.rho_star = spec.base().hat_rho(u);
  t.r_star = spec.aggregate().hat_rho(u);
  return t;
}

namespace {

constexpr double kReconTol = 1e-12;

struct Sampler {
  std::vector<double> times;
  std::vector<std::vector<double>> samples;
  std::size_t next = 0;

  explicit Sampler(std::vector<double> t) : times(std::move(t)) {
    std::sort(times.begin(), times.end());
    samples.resize(times.size());
  }

  void take(double t_prev, const std::vector<double>& prev, double t_cur,
            const std::vector<double>& cur, bool last) {
    while (next < times.size() && (last || times[next] <= t_cur)) {
      samples[next] = std::abs(times[next] - t_prev) < std::abs(times[next] - t_cur) ? prev : cur;
      ++next;
    }
  }
};

void check_initial(const std::vector<double>& r0, const GridSpec& grid, const LimitSpec& spec,
                   double t_final) {
  grid.validate();
  if (r0.size() != grid.n_cells) {
    throw ConfigError("initial data has " + std::to_string(r0.size()) + " cells, grid has " +
                      std::to_string(grid.n_cells));
  }
  for (double r : r0) spec.aggregate().check_density(r);
  if (!(t_final >= 0.0)) throw ConfigError("t_final must be nonnegative");
}

struct BottleneckInput {
  SpeedSchedule schedule;
  double y0;
  MbTraces traces;
};

ScalarTrajectory run_scalar(const std::vector<double>& r0, const GridSpec& grid,
                            const LimitSpec& spec, double t_final,
                            std::vector<double> output_times, double cfl_safety,
                            const std::optional<BottleneckInput>& bottleneck) {
  check_initial(r0, grid, spec, t_final);
  const LaneSpec& law = spec.aggregate();
  const std::vector<LaneSpec> lanes{law};
  const double dx = grid.dx();
  const double dt_cfl = cfl_safety * dx / law.max_wave_speed();

  ScalarTrajectory traj;
  Sampler sampler(std::move(output_times));
  std::vector<std::vector<double>> r{r0};
  double t = 0.0;
  double y = bottleneck ? bottleneck->y0 : 0.0;
  bool in_domain = true;
  double speed = 0.0;
  bool active = false;
  if (bottleneck) {
    if (!(y >= grid.x_min && y <= grid.x_max)) throw ConfigError("AV start outside the grid");
    traj.av_log.push_back({t, y, speed, active});
  }
  sampler.take(t, r[0], t, r[0], false);

  std::vector<double> prev;
  while (t_final - t > 1e-14 * std::max(1.0, t_final)) {
    const double dt = std::min(dt_cfl, t_final - t);
    prev = r[0];
    std::vector<InterfaceFluxes> fluxes{godunov_fluxes(r[0], grid, law)};
    if (bottleneck && in_domain) {
      const auto& tr = bottleneck->traces;
      const double u =
          std::clamp(bottleneck->schedule.average(t, t + dt), 0.0, law.max_speed());
      const std::size_t m = grid.cell_of(y);
      const auto mi = static_cast<std::ptrdiff_t>(m);
      const double left = cell_value(r[0], grid, mi - 1);
      const double right = cell_value(r[0], grid, mi + 1);
      active = false;
      MbTraces local = tr;
      if (u < law.max_speed()) {
        if (u != tr.u) local = mb_traces(spec, std::max(u, 1e-12 * law.max_speed()));
        const double fan = riemann_eval(law, left, right, u);
        active = law.flux(fan) - u * fan > local.f_alpha;
      }
      const double d_raw = (r[0][m] - local.r_check) / (local.r_hat - local.r_check);
      if (active && d_raw >= -kReconTol && d_raw <= 1.0 + kReconTol) {
        const double d = std::clamp(d_raw, 0.0, 1.0);
        const double dt_m = u > 0.0 ? dx * (1.0 - d) / u : std::numeric_limits<double>::infinity();
        const double late = std::clamp(1.0 - dt_m / dt, 0.0, 1.0);
        const double early = std::min(dt_m / dt, 1.0);
        const double left_flux = law.godunov_flux(left, local.r_hat);
        const double right_flux = early * law.flux(local.r_check) + late * law.flux(local.r_hat);
        auto& f = fluxes[0];
        f[m] = left_flux;
        f[m + 1] = right_flux;
        if (grid.boundary == Boundary::kPeriodic) {
          if (m == 0) f[grid.n_cells] = left_flux;
          if (m + 1 == grid.n_cells) f[0] = right_flux;
        }
        traj.max_constrained_flux = std::max(traj.max_constrained_flux, right_flux);
      }
      speed = std::min(u, spec.tilde_v(law.clamp(r[0][m])));
    }
    conservative_update(r, fluxes, grid, lanes, dt);
    if (bottleneck && in_domain) {
      y += speed * dt;
      if (grid.boundary == Boundary::kPeriodic) {
        if (y >= grid.x_max) y -= grid.x_max - grid.x_min;
      } else if (y >= grid.x_max) {
        y = grid.x_max;
        in_domain = false;
      }
    }
    t += dt;
    if (t_final - t <= 1e-14 * std::max(1.0, t_final)) t = t_final;
    ++traj.steps;
    for (double v : r[0]) {
      if (!std::isfinite(v)) {
        throw SimulationError("non-finite density at step " + std::to_string(traj.steps));
      }
    }
    if (bottleneck && (in_domain || traj.av_log.back().y < y)) {
      traj.av_log.push_back({t, y, speed, active});
    }
    sampler.take(t - dt, prev, t, r[0], false);
  }
  sampler.take(t, r[0], t, r[0], true);
  traj.sample_times = std::move(sampler.times);
  traj.samples = std::move(sampler.samples);
  traj.final_r = std::move(r[0]);
  traj.final_t = t;
  traj.final_y = y;
  return traj;
}

}  // namespace

ScalarTrajectory run_limit_lwr(const std::vector<double>& r0, const GridSpec& grid,
                               const LimitSpec& spec, double t_final,
                               std::vector<double> output_times, double cfl_safety) {
  return run_scalar(r0, grid, spec, t_final, std::move(output_times), cfl_safety, std::nullopt);
}

ScalarTrajectory run_mb(const std::vector<double>& r0, const GridSpec& grid,
                        const LimitSpec& spec, const SpeedSchedule& schedule, double y0,
                        double t_final, std::vector<double> output_times, double cfl_safety) {
  const double v = spec.aggregate().max_speed();
  if (schedule.min_value() < 0.0 || schedule.max_value() > v + kDomainTol) {
    throw ConfigError("AV desired speed outside [0, " + std::to_string(v) + "]");
  }
  const double u0 = schedule.value_at(0.0);
  MbTraces traces;
  if (u0 > 0.0 && u0 < v) traces = mb_traces(spec, u0);
  else traces.u = -1.0;  // forces recomputation on first use
  return run_scalar(r0, grid, spec, t_final, std::move(output_times), cfl_safety,
                    BottleneckInput{schedule, y0, traces});
}

}  // namespace mltraffic
