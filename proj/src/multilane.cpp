#include "mltraffic/multilane.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mltraffic/errors.hpp"

namespace mltraffic {

namespace {

constexpr double kStepTol = 1e-12;

double excursion(double rho, double r_max) {
  return std::max({0.0, -rho, rho - r_max});
}

void set_interface(InterfaceFluxes& fluxes, const GridSpec& grid, std::size_t k, double value) {
  fluxes[k] = value;
  if (grid.boundary != Boundary::kPeriodic) return;
  const std::size_t n = grid.n_cells;
  if (k == 0) fluxes[n] = value;
  if (k == n) fluxes[0] = value;
}

}  // namespace

double cfl_dt(const GridSpec& grid, const SourceCoupling& coupling, double tau, double safety) {
  if (!(tau > 0.0)) throw ConfigError("relaxation time tau must be positive");
  double v = 0.0;
  for (const auto& lane : coupling.lanes()) v = std::max(v, lane.max_wave_speed());
  const double transport = grid.dx() / v;
  const double source = tau / (2.0 * coupling.lipschitz_bound());
  return safety * std::min(transport, source);
}

double cell_value(const std::vector<double>& lane, const GridSpec& grid, std::ptrdiff_t k) {
  const auto n = static_cast<std::ptrdiff_t>(grid.n_cells);
  if (k >= 0 && k < n) return lane[static_cast<std::size_t>(k)];
  if (grid.boundary == Boundary::kPeriodic) {
    return lane[static_cast<std::size_t>(((k % n) + n) % n)];
  }
  return k < 0 ? lane.front() : lane.back();
}

InterfaceFluxes godunov_fluxes(const std::vector<double>& lane, const GridSpec& grid,
                               const LaneSpec& spec) {
  const auto n = static_cast<std::ptrdiff_t>(grid.n_cells);
  InterfaceFluxes fluxes(grid.n_cells + 1);
  for (std::ptrdiff_t k = 0; k <= n; ++k) {
    fluxes[static_cast<std::size_t>(k)] =
        spec.godunov_flux(cell_value(lane, grid, k - 1), cell_value(lane, grid, k));
  }
  return fluxes;
}

void conservative_update(std::vector<std::vector<double>>& rho,
                         const std::vector<InterfaceFluxes>& fluxes, const GridSpec& grid,
                         const std::vector<LaneSpec>& lanes, double dt, double* excess) {
  const double dx = grid.dx();
  double worst = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (dt * lanes[j].max_wave_speed() > dx * (1.0 + kStepTol)) {
      throw SimulationError("time step " + std::to_string(dt) + " violates the CFL bound " +
                            std::to_string(dx / lanes[j].max_wave_speed()) + " on lane " +
                            std::to_string(j + 1));
    }
    const double lambda = dt / dx;
    auto& lane = rho[j];
    const auto& f = fluxes[j];
    const double r_max = lanes[j].max_density();
    for (std::size_t k = 0; k < lane.size(); ++k) {
      const double updated = lane[k] - lambda * (f[k + 1] - f[k]);
      worst = std::max(worst, excursion(updated, r_max));
      lane[k] = std::clamp(updated, 0.0, r_max);
    }
  }
  if (excess) *excess = std::max(*excess, worst);
}

void source_relaxation_step(std::vector<std::vector<double>>& rho, const SourceCoupling& coupling,
                            double tau, double dt, double* excess, double* total_change) {
  if (!(tau > 0.0)) throw ConfigError("relaxation time tau must be positive");
  if (dt > tau / (2.0 * coupling.lipschitz_bound()) * (1.0 + kStepTol)) {
    throw SimulationError("time step " + std::to_string(dt) +
                          " violates the source stability bound tau/(2S)");
  }
  const std::size_t lanes = rho.size();
  if (lanes < 2) return;
  const auto& specs = coupling.lanes();
  const std::size_t n = rho.front().size();
  const double ratio = dt / tau;
  std::vector<double> exchange(lanes - 1);
  double worst = 0.0;
  double worst_total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double before = 0.0;
    for (std::size_t j = 0; j < lanes; ++j) before += rho[j][k];
    for (std::size_t j = 0; j + 1 < lanes; ++j) {
      exchange[j] = ratio * coupling.exchange(j + 1, rho[j][k], rho[j + 1][k]);
    }
    double after = 0.0;
    for (std::size_t j = 0; j < lanes; ++j) {
      double updated = rho[j][k];
      if (j > 0) updated += exchange[j - 1];
      if (j + 1 < lanes) updated -= exchange[j];
      worst = std::max(worst, excursion(updated, specs[j].max_density()));
      rho[j][k] = std::clamp(updated, 0.0, specs[j].max_density());
      after += rho[j][k];
    }
    worst_total = std::max(worst_total, std::abs(after - before));
  }
  if (excess) *excess = std::max(*excess, worst);
  if (total_change) *total_change = std::max(*total_change, worst_total);
}

bool av_constraint_active(const AvState& av, double u, const MultiLaneState& state,
                          const GridSpec& grid, const std::vector<LaneSpec>& lanes) {
  if (!av.in_domain) return false;
  const LaneSpec& spec = lanes.at(av.lane);
  if (u >= spec.max_speed()) return false;
  const auto& lane = state.rho.at(av.lane);
  const auto m = static_cast<std::ptrdiff_t>(grid.cell_of(av.y));
  const double fan =
      riemann_eval(spec, cell_value(lane, grid, m - 1), cell_value(lane, grid, m + 1), u);
  return spec.flux(fan) > u * fan;
}

Reconstruction av_reconstruct(double rho_m, double hat_rho, double u, double dx) {
  Reconstruction r;
  r.d = hat_rho > 0.0 ? std::clamp(rho_m / hat_rho, 0.0, 1.0) : 1.0;
  r.dt_m = u > 0.0 ? dx * (1.0 - r.d) / u : std::numeric_limits<double>::infinity();
  if (r.d == 1.0) r.dt_m = 0.0;
  return r;
}

std::pair<double, double> apply_av_fluxes(InterfaceFluxes& fluxes, const GridSpec& grid,
                                          const LaneSpec& spec, std::size_t m, double rho_left,
                                          double hat_rho, double dt_m, double dt) {
  const double left = spec.godunov_flux(rho_left, hat_rho);
  const double factor = std::clamp(1.0 - dt_m / dt, 0.0, 1.0);
  const double right = factor * spec.flux(hat_rho);
  set_interface(fluxes, grid, m, left);
  set_interface(fluxes, grid, m + 1, right);
  return {left, right};
}

AvState av_advance(const AvState& av, double u, double rho_m, const GridSpec& grid,
                   const LaneSpec& spec, double dt, bool constraint_active) {
  AvState next = av;
  if (!av.in_domain) return next;
  const double speed = constraint_active ? u : std::min(u, spec.velocity(spec.clamp(rho_m)));
  next.realized_speed = std::max(speed, 0.0);
  next.constraint_active = constraint_active;
  next.y = av.y + next.realized_speed * dt;
  if (grid.boundary == Boundary::kPeriodic) {
    const double length = grid.x_max - grid.x_min;
    if (next.y >= grid.x_max) next.y -= length;
  } else if (next.y >= grid.x_max) {
    next.y = grid.x_max;
    next.in_domain = false;
  }
  return next;
}

void validate_state(const MultiLaneState& state, const MultiLaneModel& model) {
  model.grid.validate();
  const auto& lanes = model.lanes();
  if (state.rho.size() != lanes.size()) {
    throw ConfigError("state has " + std::to_string(state.rho.size()) + " lanes, model has " +
                      std::to_string(lanes.size()));
  }
  for (std::size_t j = 0; j < lanes.size(); ++j) {
    if (state.rho[j].size() != model.grid.n_cells) {
      throw ConfigError("lane " + std::to_string(j + 1) + " has " +
                        std::to_string(state.rho[j].size()) + " cells, grid has " +
                        std::to_string(model.grid.n_cells));
    }
    for (double r : state.rho[j]) lanes[j].check_density(r);
  }
  std::vector<std::pair<std::size_t, std::size_t>> occupied;
  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    const auto& av = state.avs[a];
    if (av.lane >= lanes.size()) {
      throw ConfigError("AV " + std::to_string(a + 1) + " refers to missing lane " +
                        std::to_string(av.lane + 1));
    }
    if (!av.in_domain) continue;
    if (!(av.y >= model.grid.x_min && av.y <= model.grid.x_max)) {
      throw ConfigError("AV " + std::to_string(a + 1) + " position outside the grid");
    }
    const double v = lanes[av.lane].max_speed();
    if (av.schedule.min_value() < 0.0 || av.schedule.max_value() > v + kDomainTol) {
      throw ConfigError("AV " + std::to_string(a + 1) + " desired speed outside [0, " +
                        std::to_string(v) + "]");
    }
    const std::pair key{av.lane, model.grid.cell_of(av.y)};
    if (std::find(occupied.begin(), occupied.end(), key) != occupied.end()) {
      throw SimulationError("two AVs share cell " + std::to_string(key.second) + " of lane " +
                            std::to_string(key.first + 1));
    }
    occupied.push_back(key);
  }
}

StepDiagnostics step(MultiLaneState& state, const MultiLaneModel& model, double dt_max) {
  const auto& grid = model.grid;
  const auto& lanes = model.lanes();
  StepDiagnostics diag;
  const double dt = std::min(cfl_dt(grid, model.coupling, model.tau, model.cfl_safety), dt_max);
  if (!(dt > 0.0)) throw SimulationError("nonpositive time step");
  diag.dt_used = dt;

  std::vector<InterfaceFluxes> fluxes(lanes.size());
  for (std::size_t j = 0; j < lanes.size(); ++j) {
    fluxes[j] = godunov_fluxes(state.rho[j], grid, lanes[j]);
  }

  // Constraint detection and flux patching read the pre-step densities.
  std::vector<double> speeds(state.avs.size());
  std::vector<bool> active(state.avs.size(), false);
  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    const auto& av = state.avs[a];
    if (!av.in_domain) continue;
    const LaneSpec& spec = lanes[av.lane];
    const double u = std::clamp(av.schedule.average(state.t, state.t + dt), 0.0,
                                spec.max_speed());
    speeds[a] = u;
    AvEvent ev;
    ev.av_index = a;
    ev.cell = grid.cell_of(av.y);
    ev.desired_speed = u;
    ev.active = av_constraint_active(av, u, state, grid, lanes);
    if (ev.active) {
      const auto& lane = state.rho[av.lane];
      const double hat = spec.hat_rho(u);
      const auto rec = av_reconstruct(lane[ev.cell], hat, u, grid.dx());
      ev.d = rec.d;
      ev.dt_m = rec.dt_m;
      // The sub-cell shock exists only when the cell holds no more than hat_rho;
      // a denser cell keeps its Godunov fluxes.
      ev.patched = lane[ev.cell] <= hat * (1.0 + kStepTol);
      if (ev.patched) {
        const auto m = static_cast<std::ptrdiff_t>(ev.cell);
        std::tie(ev.left_flux, ev.right_flux) =
            apply_av_fluxes(fluxes[av.lane], grid, spec, ev.cell, cell_value(lane, grid, m - 1),
                            hat, rec.dt_m, dt);
      }
    }
    active[a] = ev.active;
    diag.av_events.push_back(ev);
  }

  std::vector<double> av_cell_density(state.avs.size(), 0.0);
  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    const auto& av = state.avs[a];
    if (av.in_domain) av_cell_density[a] = state.rho[av.lane][grid.cell_of(av.y)];
  }

  conservative_update(state.rho, fluxes, grid, lanes, dt, &diag.domain_excess);
  source_relaxation_step(state.rho, model.coupling, model.tau, dt, &diag.domain_excess,
                         &diag.source_total_change);

  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    auto& av = state.avs[a];
    if (!av.in_domain) continue;
    av = av_advance(av, speeds[a], av_cell_density[a], grid, lanes[av.lane], dt, active[a]);
  }
  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    for (std::size_t b = a + 1; b < state.avs.size(); ++b) {
      const auto& p = state.avs[a];
      const auto& q = state.avs[b];
      if (p.in_domain && q.in_domain && p.lane == q.lane &&
          grid.cell_of(p.y) == grid.cell_of(q.y)) {
        throw SimulationError("AVs " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                              " collided in lane " + std::to_string(p.lane + 1));
      }
    }
  }

  state.t += dt;
  diag.mass_per_lane.reserve(lanes.size());
  for (const auto& lane : state.rho) diag.mass_per_lane.push_back(lane_mass(lane, grid.dx()));
  return diag;
}

double lane_mass(const std::vector<double>& lane, double dx) {
  return dx * std::accumulate(lane.begin(), lane.end(), 0.0);
}

namespace {

void log_avs(const MultiLaneState& state, std::vector<AvSample>& log,
             std::vector<bool>& exit_logged) {
  exit_logged.resize(state.avs.size(), false);
  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    const auto& av = state.avs[a];
    if (exit_logged[a]) continue;
    if (!av.in_domain) exit_logged[a] = true;
    log.push_back({state.t, a, av.lane, av.y, av.realized_speed, av.constraint_active});
  }
}

}  // namespace

Trajectory run(const MultiLaneState& initial, const MultiLaneModel& model, double t_final,
               std::vector<double> output_times, const StepObserver& observer) {
  validate_state(initial, model);
  if (!(t_final >= initial.t)) throw ConfigError("t_final precedes the initial time");
  std::sort(output_times.begin(), output_times.end());

  Trajectory traj;
  traj.sample_times = output_times;
  traj.samples.resize(output_times.size());
  std::size_t next_out = 0;
  auto flush_outputs = [&](const MultiLaneState& prev, const MultiLaneState& cur, bool last) {
    while (next_out < output_times.size() && (last || output_times[next_out] <= cur.t)) {
      const double target = output_times[next_out];
      traj.samples[next_out] =
          std::abs(target - prev.t) < std::abs(target - cur.t) ? prev : cur;
      ++next_out;
    }
  };

  MultiLaneState state = initial;
  while (next_out < output_times.size() && output_times[next_out] <= state.t) {
    traj.samples[next_out++] = state;
  }
  std::vector<bool> exit_logged;
  log_avs(state, traj.av_log, exit_logged);

  MultiLaneState prev;
  const double t_scale = std::max(1.0, std::abs(t_final));
  while (t_final - state.t > 1e-14 * t_scale) {
    prev = state;
    const auto diag = step(state, model, t_final - state.t);
    ++traj.steps;
    traj.max_domain_excess = std::max(traj.max_domain_excess, diag.domain_excess);
    for (std::size_t j = 0; j < state.rho.size(); ++j) {
      for (std::size_t k = 0; k < state.rho[j].size(); ++k) {
        if (!std::isfinite(state.rho[j][k])) {
          throw SimulationError("non-finite density in lane " + std::to_string(j + 1) +
                                " cell " + std::to_string(k) + " at step " +
                                std::to_string(traj.steps));
        }
      }
    }
    if (t_final - state.t <= 1e-14 * t_scale) state.t = t_final;
    log_avs(state, traj.av_log, exit_logged);
    flush_outputs(prev, state, false);
    if (observer) observer(state, diag);
  }
  flush_outputs(state, state, true);
  std::stable_sort(traj.av_log.begin(), traj.av_log.end(),
                   [](const AvSample& a, const AvSample& b) { return a.av_index < b.av_index; });
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace mltraffic
