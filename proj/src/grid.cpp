#include "mltraffic/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mltraffic/errors.hpp"

namespace mltraffic {

std::string to_string(Boundary b) {
  return b == Boundary::kPeriodic ? "periodic" : "zero-gradient";
}

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::kPeriodic;
  if (name == "zero-gradient") return Boundary::kZeroGradient;
  throw ConfigError("unknown boundary '" + name + "' (expected zero-gradient or periodic)");
}

std::size_t GridSpec::cell_of(double y) const {
  const double s = std::floor((y - x_min) / dx());
  if (s <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(s), n_cells - 1);
}

void GridSpec::validate() const {
  if (n_cells == 0) throw ConfigError("grid needs at least one cell");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw ConfigError("grid requires finite x_min < x_max");
  }
}

}  // namespace mltraffic
