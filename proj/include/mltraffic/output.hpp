#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mltraffic/analysis.hpp"
#include "mltraffic/multilane.hpp"

namespace mltraffic {

/// Everything a run writes to disk.
struct OutputBundle {
  std::vector<double> x;                                // cell centres
  std::vector<double> times;                            // sample times
  std::vector<std::vector<std::vector<double>>> lanes;  // lanes[j][sample][cell]
  std::vector<std::vector<double>> total;               // total[sample][cell]
  std::vector<AvSample> av_rows;
  std::vector<std::pair<std::string, StudyReport>> reports;  // file stem, report
  bool plot_scripts = false;
};

OutputBundle make_bundle(const Trajectory& trajectory, const GridSpec& grid);

/// Writes density_lane<j>.csv and total_density.csv (when there are samples),
/// av_trajectories.csv, one <stem>.csv per report and optionally plot_densities.py.
/// Returns the paths written, in order. Throws std::runtime_error naming the path on I/O failure.
std::vector<std::filesystem::path> write_outputs(const OutputBundle& bundle,
                                                 const std::filesystem::path& out_dir);

/// Shared number format of every CSV: 12 significant digits.
std::string format_number(double v);

}  // namespace mltraffic
