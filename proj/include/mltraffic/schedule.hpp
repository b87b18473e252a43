#pragma once

#include <vector>

namespace mltraffic {

/// Piecewise-constant desired speed u(t).
///
/// Piece i holds `values[i]` on [starts[i], starts[i+1]); the first piece extends to
/// -infinity and the last to +infinity.
class SpeedSchedule {
 public:
  struct Piece {
    double start;
    double value;
    bool operator==(const Piece&) const = default;
  };

  SpeedSchedule() = default;
  explicit SpeedSchedule(double constant);
  explicit SpeedSchedule(std::vector<Piece> pieces);

  double value_at(double t) const;
  /// Mean of u over [t0, t1]; value_at(t0) when t1 <= t0.
  double average(double t0, double t1) const;
  double min_value() const;
  double max_value() const;
  const std::vector<Piece>& pieces() const { return pieces_; }

  bool operator==(const SpeedSchedule&) const = default;

 private:
  std::vector<Piece> pieces_{{0.0, 0.0}};
};

}  // namespace mltraffic
