#include "mltraffic/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mltraffic {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string matrix_csv(const std::vector<double>& x, const std::vector<double>& times,
                       const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out << "t\\x";
  for (double xi : x) out << "," << format_number(xi);
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << format_number(times[i]);
    for (double v : rows[i]) out << "," << format_number(v);
    out << "\n";
  }
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
  written.push_back(path);
}

constexpr const char* kPlotScript = R"(#!/usr/bin/env python3
# Heat maps of the density CSVs in this directory, with AV paths overlaid.
import csv, glob, os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def load(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    x = [float(v) for v in rows[0][1:]]
    t = [float(r[0]) for r in rows[1:]]
    z = [[float(v) for v in r[1:]] for r in rows[1:]]
    return x, t, z

paths = {}
traj = os.path.join(here, "av_trajectories.csv")
if os.path.exists(traj):
    with open(traj) as f:
        for row in csv.DictReader(f):
            key = (int(row["lane"]), int(row["av_index"]))
            paths.setdefault(key, []).append((float(row["y"]), float(row["t"])))

for name in sorted(glob.glob(os.path.join(here, "*density*.csv"))):
    x, t, z = load(name)
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(x, t, z, shading="auto", cmap="jet")
    fig.colorbar(mesh, ax=ax)
    stem = os.path.splitext(os.path.basename(name))[0]
    for (lane, _), pts in paths.items():
        if stem == "total_density" or stem == "density_lane%d" % lane:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "k-", lw=1)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(stem)
    fig.savefig(os.path.join(here, stem + ".png"), dpi=120, bbox_inches="tight")
    plt.close(fig)
)";

}  // namespace

OutputBundle make_bundle(const Trajectory& trajectory, const GridSpec& grid) {
  OutputBundle b;
  for (std::size_t k = 0; k < grid.n_cells; ++k) b.x.push_back(grid.center(k));
  b.times = trajectory.sample_times;
  const std::size_t lanes = trajectory.final_state.rho.size();
  b.lanes.assign(lanes, {});
  for (const auto& s : trajectory.samples) {
    for (std::size_t j = 0; j < lanes; ++j) b.lanes[j].push_back(s.rho[j]);
    b.total.push_back(total_density(s));
  }
  b.av_rows = trajectory.av_log;
  return b;
}

std::vector<std::filesystem::path> write_outputs(const OutputBundle& bundle,
                                                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  if (!bundle.times.empty()) {
    for (std::size_t j = 0; j < bundle.lanes.size(); ++j) {
      write_file(out_dir / ("density_lane" + std::to_string(j + 1) + ".csv"),
                 matrix_csv(bundle.x, bundle.times, bundle.lanes[j]), written);
    }
    write_file(out_dir / "total_density.csv", matrix_csv(bundle.x, bundle.times, bundle.total),
               written);
  }
  std::ostringstream traj;
  traj << "t,lane,av_index,y,realized_speed,constraint_active\n";
  for (const auto& r : bundle.av_rows) {
    traj << format_number(r.t) << "," << r.lane + 1 << "," << r.av_index + 1 << ","
         << format_number(r.y) << "," << format_number(r.realized_speed) << ","
         << (r.constraint_active ? 1 : 0) << "\n";
  }
  write_file(out_dir / "av_trajectories.csv", traj.str(), written);
  for (const auto& [stem, report] : bundle.reports) {
    write_file(out_dir / (stem + ".csv"), report.to_csv(), written);
  }
  if (bundle.plot_scripts) write_file(out_dir / "plot_densities.py", kPlotScript, written);
  return written;
}

}  // namespace mltraffic
