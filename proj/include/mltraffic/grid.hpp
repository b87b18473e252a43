#pragma once

#include <cstddef>
#include <string>

namespace mltraffic {

enum class Boundary { kZeroGradient, kPeriodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

/// Uniform 1D mesh of half-open cells [x_{k-1/2}, x_{k+1/2}).
struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_cells = 1;
  Boundary boundary = Boundary::kZeroGradient;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double center(std::size_t k) const { return x_min + (static_cast<double>(k) + 0.5) * dx(); }
  double left_interface(std::size_t k) const { return x_min + static_cast<double>(k) * dx(); }

  /// Cell containing y. A point on an interface belongs to the cell on its right;
  /// y == x_max maps to the last cell.
  std::size_t cell_of(double y) const;

  /// Throws ConfigError unless x_max > x_min and n_cells > 0.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

}  // namespace mltraffic
