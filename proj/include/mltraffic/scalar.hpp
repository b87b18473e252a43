#pragma once

#include <cstddef>
#include <vector>

#include "mltraffic/grid.hpp"
#include "mltraffic/lane.hpp"
#include "mltraffic/schedule.hpp"

namespace mltraffic {

/// Flux of the total density when `lanes` identical lanes are at equilibrium:
/// f(r) = M F(r/M), with speed v~(r) = f(r)/r = v(r/M).
class LimitSpec {
 public:
  LimitSpec(std::size_t lanes, LaneSpec base);

  std::size_t lanes() const { return lanes_; }
  const LaneSpec& base() const { return base_; }
  /// The aggregated law as a lane of maximal density M R (same V).
  const LaneSpec& aggregate() const { return aggregate_; }

  double f(double r) const { return aggregate_.flux(r); }
  double tilde_v(double r) const { return aggregate_.velocity(r); }

 private:
  std::size_t lanes_;
  LaneSpec base_;
  LaneSpec aggregate_;
};

/// max over r of (f(2r)/2 - r u): the largest flow, measured in the frame of a bottleneck
/// moving at u, that fits through half of the road. Closed form for the quadratic law.
double flux_limiter(const LimitSpec& spec, double u);

/// Same quantity by exhaustive search over r in [0, M R / 2]; used as a cross-check.
double flux_limiter_grid_search(const LimitSpec& spec, double u, double resolution = 1e-4);

/// Characteristic densities of the half-capacity moving bottleneck at speed u.
struct MbTraces {
  double u = 0.0;
  double f_alpha = 0.0;   // limiter value
  double r_check = 0.0;   // downstream trace
  double r_hat = 0.0;     // upstream trace
  double rho_star = 0.0;  // single lane: v(rho*) = u
  double r_star = 0.0;    // total density: v~(r*) = u
};

/// Requires u in (0, V). The limiter is cross-checked against grid search; a mismatch
/// above 1e-8 throws.
MbTraces mb_traces(const LimitSpec& spec, double u);

struct ScalarAvSample {
  double t;
  double y;
  double realized_speed;
  bool constraint_active;
};

struct ScalarTrajectory {
  std::vector<double> sample_times;
  std::vector<std::vector<double>> samples;  // nearest completed step per output time
  std::vector<ScalarAvSample> av_log;        // empty for run_limit_lwr
  std::vector<double> final_r;
  double final_t = 0.0;
  double final_y = 0.0;
  std::size_t steps = 0;
  /// Largest right-interface flux applied in the AV cell.
  double max_constrained_flux = 0.0;
};

/// Godunov scheme for the total density r under f, from r0 until t_final.
ScalarTrajectory run_limit_lwr(const std::vector<double>& r0, const GridSpec& grid,
                               const LimitSpec& spec, double t_final,
                               std::vector<double> output_times = {},
                               double cfl_safety = 0.9);

/// Godunov scheme for r with a half-capacity moving bottleneck starting at y0 and
/// following the desired speed `schedule`.
ScalarTrajectory run_mb(const std::vector<double>& r0, const GridSpec& grid,
                        const LimitSpec& spec, const SpeedSchedule& schedule, double y0,
                        double t_final, std::vector<double> output_times = {},
                        double cfl_safety = 0.9);

}  // namespace mltraffic
