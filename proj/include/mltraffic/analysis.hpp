#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mltraffic/grid.hpp"
#include "mltraffic/multilane.hpp"
#include "mltraffic/scenario.hpp"

namespace mltraffic {

/// Raised when a trace window would leave the grid.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labelled table of finite metrics.
struct StudyReport {
  struct Row {
    std::string label;
    std::vector<double> values;
  };

  std::string title;
  std::vector<std::string> columns;
  std::vector<Row> rows;

  /// Value of `column` in row `row`; throws std::out_of_range for unknown columns.
  double at(std::size_t row, const std::string& column) const;
  /// CSV with a leading `label` column, numbers at 12 significant digits.
  std::string to_csv() const;
};

double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double dx);
double total_variation(const std::vector<double>& a);
std::vector<double> total_density(const MultiLaneState& state);

/// Default standoff, in cells, between the AV cell and the cells read as its traces.
inline constexpr std::size_t kTraceWindow = 5;

struct TracePair {
  double left = 0.0;
  double right = 0.0;
};

/// Densities `window` cells upstream and downstream of the cell containing y.
TracePair extract_traces(const std::vector<double>& cells, const GridSpec& grid, double y,
                         std::size_t window = kTraceWindow);

/// Traces in the AV's own lane.
TracePair extract_av_traces(const MultiLaneState& state, const AvState& av,
                            const GridSpec& grid, std::size_t window = kTraceWindow);

/// Multilane total density against the equilibrium scalar model, one row per tau.
/// Columns: tau, l1_distance, total_mass, reference_mass.
StudyReport relaxation_study(const ScenarioConfig& scenario, const std::vector<double>& taus,
                             double t_final);

/// Trace ordering status values in mb_comparison_study.
inline constexpr double kOrderingHolds = 1.0;
inline constexpr double kOrderingFails = 0.0;
inline constexpr double kOrderingNotApplicable = -1.0;

/// Two-lane model with one AV against the half-capacity moving-bottleneck model.
///
/// The multilane run uses the mb-icN scenario (tau and n_cells overridable); the scalar
/// run starts from the summed lane data. Columns: u, tau, n_cells, t_final,
/// lane1_left, lane1_right, total_left, total_right, mb_left, mb_right, mb_active,
/// multilane_active, ordering, ordering_margin, min_realized_speed, av_y, mb_y.
StudyReport mb_comparison_study(int ic, double tau, std::size_t n_cells, double t_final,
                                double u);

/// Ordering r(y-) > (rho1+rho2)(y-) > (rho1+rho2)(y+) > r(y+); returns the smallest gap.
double trace_ordering_margin(const TracePair& mb, const TracePair& total);

/// Self-convergence of the multilane scheme (no AVs) over successively halved dx.
///
/// With e_i the L1 gap between resolution i and the cell-pair average of resolution i+1,
/// row i reports e_i, e_{i+1} and the observed order log2(e_i / e_{i+1}).
/// Columns: dx, n_cells, l1_difference, l1_difference_next, rate. Identically zero gaps
/// report rate 0; with only two resolutions a single row carries e_0.
StudyReport convergence_study(const ScenarioConfig& scenario, const std::vector<double>& dxs,
                              double t_final);

}  // namespace mltraffic
