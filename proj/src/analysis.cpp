#include "mltraffic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "mltraffic/errors.hpp"
#include "mltraffic/scalar.hpp"

namespace mltraffic {

namespace {

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void check_finite(const StudyReport& report) {
  for (const auto& row : report.rows) {
    for (double v : row.values) {
      if (!std::isfinite(v)) {
        throw SimulationError("non-finite metric in " + report.title + " row " + row.label);
      }
    }
  }
}

}  // namespace

double StudyReport::at(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::out_of_range("no column '" + column + "' in " + title);
  return rows.at(row).values.at(static_cast<std::size_t>(it - columns.begin()));
}

std::string StudyReport::to_csv() const {
  std::ostringstream out;
  out << "label";
  for (const auto& c : columns) out << "," << c;
  out << "\n";
  for (const auto& row : rows) {
    out << row.label;
    for (double v : row.values) out << "," << fmt12(v);
    out << "\n";
  }
  return out.str();
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double dx) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("l1_distance: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " differ");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
  return dx * sum;
}

double total_variation(const std::vector<double>& a) {
  double tv = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) tv += std::abs(a[k] - a[k - 1]);
  return tv;
}

std::vector<double> total_density(const MultiLaneState& state) {
  if (state.rho.empty()) return {};
  std::vector<double> r(state.rho.front().size(), 0.0);
  for (const auto& lane : state.rho) {
    for (std::size_t k = 0; k < r.size(); ++k) r[k] += lane[k];
  }
  return r;
}

TracePair extract_traces(const std::vector<double>& cells, const GridSpec& grid, double y,
                         std::size_t window) {
  if (window == 0) throw std::invalid_argument("trace window must be at least one cell");
  const std::size_t m = grid.cell_of(y);
  if (m < window || m + window >= cells.size()) {
    throw TraceError("AV cell " + std::to_string(m) + " within " + std::to_string(window) +
                     " cells of the boundary");
  }
  return {cells[m - window], cells[m + window]};
}

TracePair extract_av_traces(const MultiLaneState& state, const AvState& av,
                            const GridSpec& grid, std::size_t window) {
  return extract_traces(state.rho.at(av.lane), grid, av.y, window);
}

StudyReport relaxation_study(const ScenarioConfig& scenario, const std::vector<double>& taus,
                             double t_final) {
  ScenarioConfig base = scenario;
  base.avs.clear();
  base.t_final = t_final;
  base.outputs.clear();
  base.validate();
  const double dx = base.grid.dx();

  auto reference = std::async(std::launch::async, [&] {
    return run_limit_lwr(base.initial_total_density(), base.grid, base.limit_spec(), t_final)
        .final_r;
  });
  std::vector<std::future<std::vector<double>>> runs;
  for (double tau : taus) {
    runs.push_back(std::async(std::launch::async, [base, tau, t_final] {
      ScenarioConfig c = base;
      c.tau = tau;
      return total_density(run(c.initial_state(), c.model(), t_final).final_state);
    }));
  }

  StudyReport report;
  report.title = "relaxation study (" + scenario.name + ")";
  report.columns = {"tau", "l1_distance", "total_mass", "reference_mass"};
  const auto ref = reference.get();
  const double ref_mass = lane_mass(ref, dx);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const auto total = runs[i].get();
    report.rows.push_back({"tau=" + fmt12(taus[i]),
                           {taus[i], l1_distance(total, ref, dx), lane_mass(total, dx), ref_mass}});
  }
  check_finite(report);
  return report;
}

double trace_ordering_margin(const TracePair& mb, const TracePair& total) {
  return std::min({mb.left - total.left, total.left - total.right, total.right - mb.right});
}

StudyReport mb_comparison_study(int ic, double tau, std::size_t n_cells, double t_final,
                                double u) {
  if (ic < 1 || ic > 5) throw ConfigError("initial condition id must be 1..5");
  ScenarioConfig c = builtin_scenario("mb-ic" + std::to_string(ic));
  c.tau = tau;
  c.grid.n_cells = n_cells;
  c.t_final = t_final;
  c.outputs.clear();
  for (auto& av : c.avs) av.schedule = SpeedSchedule(u);
  c.validate();

  auto scalar = std::async(std::launch::async, [&] {
    return run_mb(c.initial_total_density(), c.grid, c.limit_spec(), SpeedSchedule(u),
                  c.avs.front().y0, t_final);
  });
  const auto multi = run(c.initial_state(), c.model(), t_final);
  const auto mb = scalar.get();

  const auto& state = multi.final_state;
  const auto& av = state.avs.front();
  const TracePair lane1 = extract_av_traces(state, av, c.grid);
  const TracePair total = extract_traces(total_density(state), c.grid, av.y);
  const TracePair scalar_traces = extract_traces(mb.final_r, c.grid, mb.final_y);
  const bool mb_active = !mb.av_log.empty() && mb.av_log.back().constraint_active;

  double min_speed = u;
  for (const auto& s : multi.av_log) {
    if (s.t > 0.0) min_speed = std::min(min_speed, s.realized_speed);
  }

  const double margin = trace_ordering_margin(scalar_traces, total);
  double ordering = kOrderingNotApplicable;
  if (mb_active) ordering = margin > 0.0 ? kOrderingHolds : kOrderingFails;

  StudyReport report;
  report.title = "moving-bottleneck comparison";
  report.columns = {"u",           "tau",         "n_cells",          "t_final",
                    "lane1_left",  "lane1_right", "total_left",       "total_right",
                    "mb_left",     "mb_right",    "mb_active",        "multilane_active",
                    "ordering",    "ordering_margin", "min_realized_speed", "av_y", "mb_y"};
  report.rows.push_back({"IC" + std::to_string(ic),
                         {u, tau, static_cast<double>(n_cells), t_final, lane1.left,
                          lane1.right, total.left, total.right, scalar_traces.left,
                          scalar_traces.right, mb_active ? 1.0 : 0.0,
                          av.constraint_active ? 1.0 : 0.0, ordering, margin, min_speed, av.y,
                          mb.final_y}});
  check_finite(report);
  return report;
}

StudyReport convergence_study(const ScenarioConfig& scenario, const std::vector<double>& dxs,
                              double t_final) {
  if (dxs.size() < 2) throw ConfigError("convergence study needs at least two resolutions");
  std::vector<ScenarioConfig> configs;
  for (double dx : dxs) {
    ScenarioConfig c = scenario;
    c.avs.clear();
    c.outputs.clear();
    c.t_final = t_final;
    c.set_dx(dx);
    if (!configs.empty() && c.grid.n_cells != 2 * configs.back().grid.n_cells) {
      throw ConfigError("convergence study needs each dx to halve the previous one");
    }
    configs.push_back(std::move(c));
  }
  std::vector<std::future<std::vector<double>>> runs;
  for (const auto& c : configs) {
    runs.push_back(std::async(std::launch::async, [c, t_final] {
      return total_density(run(c.initial_state(), c.model(), t_final).final_state);
    }));
  }
  std::vector<std::vector<double>> solutions;
  for (auto& f : runs) solutions.push_back(f.get());

  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < solutions.size(); ++i) {
    const auto& fine = solutions[i + 1];
    std::vector<double> projected(solutions[i].size());
    for (std::size_t k = 0; k < projected.size(); ++k) {
      projected[k] = 0.5 * (fine[2 * k] + fine[2 * k + 1]);
    }
    diffs.push_back(l1_distance(solutions[i], projected, configs[i].grid.dx()));
  }

  StudyReport report;
  report.title = "self-convergence (" + scenario.name + ")";
  report.columns = {"dx", "n_cells", "l1_difference", "l1_difference_next", "rate"};
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
    const double rate = diffs[i] == 0.0 && diffs[i + 1] == 0.0
                            ? 0.0
                            : std::log2(diffs[i] / diffs[i + 1]);
    report.rows.push_back({"dx=" + fmt12(configs[i].grid.dx()),
                           {configs[i].grid.dx(), static_cast<double>(configs[i].grid.n_cells),
                            diffs[i], diffs[i + 1], rate}});
  }
  if (diffs.size() == 1) {
    report.rows.push_back({"dx=" + fmt12(configs[0].grid.dx()),
                           {configs[0].grid.dx(), static_cast<double>(configs[0].grid.n_cells),
                            diffs[0], 0.0, 0.0}});
  }
  check_finite(report);
  return report;
}

}  // namespace mltraffic
