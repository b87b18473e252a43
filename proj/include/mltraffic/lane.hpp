#pragma once

#include <cstddef>
#include <vector>

namespace mltraffic {

/// Round-off slack accepted on densities and speeds at API boundaries.
inline constexpr double kDomainTol = 1e-12;

/// Speed-density law of one lane, v(rho) = V (1 - rho/R), with flux F(rho) = rho v(rho).
///
/// The flux is concave with a single maximum at theta = R/2.
class LaneSpec {
 public:
  LaneSpec(double max_speed, double max_density);

  double max_speed() const { return v_max_; }
  double max_density() const { return r_max_; }
  double critical_density() const { return 0.5 * r_max_; }
  double max_flux() const { return 0.25 * v_max_ * r_max_; }

  /// Largest characteristic speed |F'| on [0, R].
  double max_wave_speed() const { return v_max_; }

  double velocity(double rho) const;
  double flux(double rho) const;
  /// F'(rho) = V (1 - 2 rho / R).
  double flux_derivative(double rho) const;
  /// Inverse of F' on [0, R]; the argument is clamped to [-V, V].
  double inverse_flux_derivative(double xi) const;

  /// Density at which traffic moves at speed u, u in [0, V].
  double hat_rho(double u) const;

  double demand(double rho) const;
  double supply(double rho) const;
  double godunov_flux(double left, double right) const;

  /// Throws DomainError when rho is not in [0, R] (with kDomainTol slack).
  void check_density(double rho) const;
  /// Clamps to [0, R].
  double clamp(double rho) const;

  bool operator==(const LaneSpec&) const = default;

 private:
  double v_max_;
  double r_max_;
};

/// Self-similar entropy solution of the Riemann problem for one lane, sampled at x/t = xi.
/// A shock sitting exactly on the ray returns the right state.
double riemann_eval(const LaneSpec& spec, double left, double right, double xi);

/// Lane-changing exchange terms S_j between adjacent lanes, plus the Lipschitz bound
/// used by the time-step restriction.
class SourceCoupling {
 public:
  explicit SourceCoupling(std::vector<LaneSpec> lanes);

  const std::vector<LaneSpec>& lanes() const { return lanes_; }
  std::size_t lane_count() const { return lanes_.size(); }

  /// 2 max_j V_j for the linear speed closure.
  double lipschitz_bound() const { return lipschitz_; }

  /// Net rate from lane j into lane j+1 (1-based j, 1 <= j <= M-1):
  /// (v_{j+1} - v_j)^+ rho_j - (v_{j+1} - v_j)^- rho_{j+1}.
  double exchange(std::size_t j, double rho_j, double rho_jp1) const;

 private:
  std::vector<LaneSpec> lanes_;
  double lipschitz_;
};

}  // namespace mltraffic
