#include "mltraffic/lane.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mltraffic/errors.hpp"

namespace mltraffic {

LaneSpec::LaneSpec(double max_speed, double max_density)
    : v_max_(max_speed), r_max_(max_density) {
  if (!(max_speed > 0.0) || !std::isfinite(max_speed)) {
    throw ConfigError("lane maximal speed must be positive, got " + std::to_string(max_speed));
  }
  if (!(max_density > 0.0) || !std::isfinite(max_density)) {
    throw ConfigError("lane maximal density must be positive, got " +
                      std::to_string(max_density));
  }
}

void LaneSpec::check_density(double rho) const {
  if (!(rho >= -kDomainTol && rho <= r_max_ + kDomainTol)) {
    throw DomainError("density " + std::to_string(rho) + " outside [0, " +
                      std::to_string(r_max_) + "]");
  }
}

double LaneSpec::clamp(double rho) const { return std::clamp(rho, 0.0, r_max_); }

double LaneSpec::velocity(double rho) const {
  check_density(rho);
  return v_max_ * (1.0 - clamp(rho) / r_max_);
}

double LaneSpec::flux(double rho) const {
  check_density(rho);
  const double r = clamp(rho);
  return r * v_max_ * (1.0 - r / r_max_);
}

double LaneSpec::flux_derivative(double rho) const {
  check_density(rho);
  return v_max_ * (1.0 - 2.0 * clamp(rho) / r_max_);
}

double LaneSpec::inverse_flux_derivative(double xi) const {
  const double s = std::clamp(xi, -v_max_, v_max_);
  return 0.5 * r_max_ * (1.0 - s / v_max_);
}

double LaneSpec::hat_rho(double u) const {
  if (!(u >= -kDomainTol && u <= v_max_ + kDomainTol)) {
    throw DomainError("speed " + std::to_string(u) + " outside [0, " + std::to_string(v_max_) +
                      "]");
  }
  const double s = std::clamp(u, 0.0, v_max_);
  return r_max_ * (1.0 - s / v_max_);
}

double LaneSpec::demand(double rho) const {
  check_density(rho);
  return flux(std::min(clamp(rho), critical_density()));
}

double LaneSpec::supply(double rho) const {
  check_density(rho);
  return flux(std::max(clamp(rho), critical_density()));
}

double LaneSpec::godunov_flux(double left, double right) const {
  return std::min(demand(left), supply(right));
}

double riemann_eval(const LaneSpec& spec, double left, double right, double xi) {
  spec.check_density(left);
  spec.check_density(right);
  left = spec.clamp(left);
  right = spec.clamp(right);
  if (left == right) return left;
  if (left < right) {
    // Shock; Rankine-Hugoniot speed for the quadratic flux.
    const double s =
        spec.max_speed() * (1.0 - (left + right) / spec.max_density());
    return xi < s ? left : right;
  }
  if (xi <= spec.flux_derivative(left)) return left;
  if (xi >= spec.flux_derivative(right)) return right;
  return spec.inverse_flux_derivative(xi);
}

SourceCoupling::SourceCoupling(std::vector<LaneSpec> lanes) : lanes_(std::move(lanes)) {
  if (lanes_.empty()) throw ConfigError("source coupling needs at least one lane");
  double v = 0.0;
  for (const auto& l : lanes_) v = std::max(v, l.max_speed());
  lipschitz_ = 2.0 * v;
}

double SourceCoupling::exchange(std::size_t j, double rho_j, double rho_jp1) const {
  if (j < 1 || j + 1 > lanes_.size()) {
    throw std::out_of_range("lane-change index " + std::to_string(j) + " outside [1, " +
                            std::to_string(lanes_.size() - 1) + "]");
  }
  const double dv = lanes_[j].velocity(rho_jp1) - lanes_[j - 1].velocity(rho_j);
  if (dv > 0.0) return dv * lanes_[j - 1].clamp(rho_j);
  if (dv < 0.0) return dv * lanes_[j].clamp(rho_jp1);
  return 0.0;
}

}  // namespace mltraffic
