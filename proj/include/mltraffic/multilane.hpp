#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "mltraffic/grid.hpp"
#include "mltraffic/lane.hpp"
#include "mltraffic/schedule.hpp"

namespace mltraffic {

/// Safety factor applied to the stability bound.
inline constexpr double kCflSafety = 0.9;

/// One autonomous vehicle acting as a moving flux constraint in its lane.
struct AvState {
  std::size_t lane = 0;  // 0-based
  double y = 0.0;
  SpeedSchedule schedule;
  double realized_speed = 0.0;
  bool constraint_active = false;
  /// False once the vehicle has left through x_max (zero-gradient boundary).
  bool in_domain = true;
};

struct MultiLaneState {
  double t = 0.0;
  std::vector<std::vector<double>> rho;  // rho[lane][cell]
  std::vector<AvState> avs;

  std::size_t lane_count() const { return rho.size(); }
};

/// Everything that stays fixed during a simulation.
struct MultiLaneModel {
  GridSpec grid;
  SourceCoupling coupling;
  double tau = 1.0;
  double cfl_safety = kCflSafety;

  const std::vector<LaneSpec>& lanes() const { return coupling.lanes(); }
};

/// Per-AV record of what the scheme did in one step.
struct AvEvent {
  std::size_t av_index = 0;
  std::size_t cell = 0;
  double desired_speed = 0.0;  // time-averaged u over the step
  bool active = false;
  /// Fluxes replaced; false when active but the AV cell is denser than hat_rho.
  bool patched = false;
  double d = 0.0;
  double dt_m = 0.0;
  double left_flux = 0.0;
  double right_flux = 0.0;
};

struct StepDiagnostics {
  double dt_used = 0.0;
  std::vector<double> mass_per_lane;
  std::vector<AvEvent> av_events;
  /// Largest excursion of any density outside [0, R_j] before clamping
  /// (after either half step). Zero when the invariant domain held exactly.
  double domain_excess = 0.0;
  /// Largest per-cell change of the lane-summed density caused by the source step.
  double source_total_change = 0.0;
};

/// Interface fluxes of one lane; entry k lives on x_{k-1/2}, so there are n_cells + 1.
using InterfaceFluxes = std::vector<double>;

struct Reconstruction {
  double d = 0.0;
  double dt_m = 0.0;
};

/// c_safe * min(dx / max_j V_j, tau / (2 S)).
double cfl_dt(const GridSpec& grid, const SourceCoupling& coupling, double tau,
              double safety = kCflSafety);

/// Density of lane cell k with ghost cells filled by the boundary rule (k may be -1 or n).
double cell_value(const std::vector<double>& lane, const GridSpec& grid, std::ptrdiff_t k);

/// Godunov interface fluxes for one lane.
InterfaceFluxes godunov_fluxes(const std::vector<double>& lane, const GridSpec& grid,
                               const LaneSpec& spec);

/// rho_k -= dt/dx (F_{k+1/2} - F_{k-1/2}) for every lane. Densities are clamped to [0, R_j]
/// after the update; the excursion before clamping is returned through `excess`.
void conservative_update(std::vector<std::vector<double>>& rho,
                         const std::vector<InterfaceFluxes>& fluxes, const GridSpec& grid,
                         const std::vector<LaneSpec>& lanes, double dt, double* excess = nullptr);

/// Explicit lane-changing step rho_j += dt/tau (S_{j-1} - S_j), evaluated at the input state.
void source_relaxation_step(std::vector<std::vector<double>>& rho, const SourceCoupling& coupling,
                            double tau, double dt, double* excess = nullptr,
                            double* total_change = nullptr);

/// True when the Riemann fan between the AV's neighbour cells, read along x/t = u,
/// carries more flux than u times its density.
bool av_constraint_active(const AvState& av, double u, const MultiLaneState& state,
                          const GridSpec& grid, const std::vector<LaneSpec>& lanes);

/// Position d of the non-classical shock inside the AV cell, and the time dt_m
/// it needs to reach the right interface.
Reconstruction av_reconstruct(double rho_m, double hat_rho, double u, double dx);

/// Replaces the two interface fluxes of cell m by the constrained ones. Returns the
/// (left, right) values written.
std::pair<double, double> apply_av_fluxes(InterfaceFluxes& fluxes, const GridSpec& grid,
                                          const LaneSpec& spec, std::size_t m, double rho_left,
                                          double hat_rho, double dt_m, double dt);

/// Explicit Euler position update; `rho_m` is the pre-step density of the AV cell.
AvState av_advance(const AvState& av, double u, double rho_m, const GridSpec& grid,
                   const LaneSpec& spec, double dt, bool constraint_active);

/// Checks densities, AV placement and schedules against the model.
void validate_state(const MultiLaneState& state, const MultiLaneModel& model);

/// One full fractional step. `dt_max` shortens the step (used to land on t_final).
StepDiagnostics step(MultiLaneState& state, const MultiLaneModel& model,
                     double dt_max = std::numeric_limits<double>::infinity());

/// One row of an AV trajectory log.
struct AvSample {
  double t;
  std::size_t av_index;
  std::size_t lane;
  double y;
  double realized_speed;
  bool constraint_active;
};

struct Trajectory {
  std::vector<double> sample_times;        // requested output times
  std::vector<MultiLaneState> samples;     // nearest completed step per output time
  std::vector<AvSample> av_log;            // per AV, strictly increasing t
  MultiLaneState final_state;
  std::size_t steps = 0;
  double max_domain_excess = 0.0;
};

using StepObserver = std::function<void(const MultiLaneState&, const StepDiagnostics&)>;

/// Steps until t_final, shortening the last step to land on it exactly.
Trajectory run(const MultiLaneState& initial, const MultiLaneModel& model, double t_final,
               std::vector<double> output_times = {}, const StepObserver& observer = {});

double lane_mass(const std::vector<double>& lane, double dx);

}  // namespace mltraffic
