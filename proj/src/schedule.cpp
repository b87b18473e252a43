#include "mltraffic/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "mltraffic/errors.hpp"

namespace mltraffic {

SpeedSchedule::SpeedSchedule(double constant) : pieces_{{0.0, constant}} {}

SpeedSchedule::SpeedSchedule(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ConfigError("speed schedule needs at least one piece");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!std::isfinite(pieces_[i].value) || !std::isfinite(pieces_[i].start)) {
      throw ConfigError("speed schedule entries must be finite");
    }
    if (i > 0 && !(pieces_[i].start > pieces_[i - 1].start)) {
      throw ConfigError("speed schedule breakpoints must be strictly increasing");
    }
  }
}

double SpeedSchedule::value_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double s, const Piece& p) { return s < p.start; });
  if (it == pieces_.begin()) return pieces_.front().value;
  return std::prev(it)->value;
}

double SpeedSchedule::average(double t0, double t1) const {
  if (!(t1 > t0)) return value_at(t0);
  if (pieces_.size() == 1) return pieces_.front().value;
  double integral = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double a = i == 0 ? t0 : std::max(t0, pieces_[i].start);
    const double b = i + 1 == pieces_.size() ? t1 : std::min(t1, pieces_[i + 1].start);
    if (b > a) integral += (b - a) * pieces_[i].value;
  }
  return integral / (t1 - t0);
}

double SpeedSchedule::min_value() const {
  return std::min_element(pieces_.begin(), pieces_.end(),
                          [](const Piece& a, const Piece& b) { return a.value < b.value; })
      ->value;
}

double SpeedSchedule::max_value() const {
  return std::max_element(pieces_.begin(), pieces_.end(),
                          [](const Piece& a, const Piece& b) { return a.value < b.value; })
      ->value;
}

}  // namespace mltraffic
