// Command-line driver: scenario simulation, relaxation and moving-bottleneck studies.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "mltraffic/analysis.hpp"
#include "mltraffic/errors.hpp"
#include "mltraffic/output.hpp"
#include "mltraffic/scalar.hpp"
#include "mltraffic/scenario.hpp"

namespace {

using namespace mltraffic;

constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

struct Overrides {
  std::optional<double> dx;
  std::optional<double> tau;
  std::optional<double> t_final;

  void apply(ScenarioConfig& c) const {
    if (dx) c.set_dx(*dx);
    if (tau) c.tau = *tau;
    if (t_final) {
      c.t_final = *t_final;
      std::erase_if(c.outputs, [&](double t) { return t > c.t_final; });
      if (std::find(c.outputs.begin(), c.outputs.end(), c.t_final) == c.outputs.end()) {
        c.outputs.push_back(c.t_final);
      }
    }
    c.validate();
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--dx", o.dx, "cell width (keeps the domain)")->check(CLI::PositiveNumber);
  cmd->add_option("--tau", o.tau, "lane-changing relaxation time")->check(CLI::PositiveNumber);
  cmd->add_option("--tfinal", o.t_final, "final time")->check(CLI::NonNegativeNumber);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ConfigError("malformed number '" + item + "' in list");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

int simulate(const std::string& scenario, const std::string& out, const Overrides& o,
             bool plots) {
  ScenarioConfig c = load_scenario(scenario);
  o.apply(c);
  const auto traj = run(c.initial_state(), c.model(), c.t_final, c.outputs);
  OutputBundle bundle = make_bundle(traj, c.grid);
  bundle.plot_scripts = plots;
  print_written(write_outputs(bundle, out));
  std::cout << "steps " << traj.steps << ", t = " << format_number(traj.final_state.t) << "\n";
  return 0;
}

int relax_study(const std::string& scenario, const std::string& taus, const std::string& out,
                const Overrides& o, bool plots) {
  ScenarioConfig c = load_scenario(scenario);
  o.apply(c);
  const auto report = relaxation_study(c, parse_list(taus), c.t_final);
  std::cout << report.to_csv();
  OutputBundle bundle;
  bundle.reports.emplace_back("relaxation_study", report);
  bundle.plot_scripts = plots;
  print_written(write_outputs(bundle, out));
  return 0;
}

int mb_compare(const std::string& ic, const std::string& out, double tau, std::size_t cells,
               double t_final, double u) {
  std::string id = ic;
  std::transform(id.begin(), id.end(), id.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (id.size() != 3 || id.rfind("ic", 0) != 0 || id[2] < '1' || id[2] > '5') {
    throw ConfigError("--ic expects one of ic1..ic5, got '" + ic + "'");
  }
  const auto report = mb_comparison_study(id[2] - '0', tau, cells, t_final, u);
  std::cout << report.to_csv();
  OutputBundle bundle;
  bundle.reports.emplace_back("mb_comparison_" + id, report);
  print_written(write_outputs(bundle, out));
  return 0;
}

int traces(const std::string& scenario, const Overrides& o, std::size_t window) {
  ScenarioConfig c = load_scenario(scenario);
  o.apply(c);
  const LimitSpec limit = c.limit_spec();
  for (std::size_t a = 0; a < c.avs.size(); ++a) {
    const double u = c.avs[a].schedule.value_at(0.0);
    std::cout << "AV " << a + 1 << " (lane " << c.avs[a].lane << ", u = " << format_number(u)
              << ")\n";
    if (u > 0.0 && u < limit.aggregate().max_speed()) {
      const MbTraces t = mb_traces(limit, u);
      std::cout << "  limiter   " << format_number(t.f_alpha) << "\n"
                << "  r_check   " << format_number(t.r_check) << "\n"
                << "  r_hat     " << format_number(t.r_hat) << "\n"
                << "  rho_star  " << format_number(t.rho_star) << "\n"
                << "  r_star    " << format_number(t.r_star) << "\n";
    }
  }
  const auto traj = run(c.initial_state(), c.model(), c.t_final);
  const auto& state = traj.final_state;
  const auto total = total_density(state);
  std::cout << "simulated traces at t = " << format_number(state.t) << " (window " << window
            << " cells)\n";
  for (std::size_t a = 0; a < state.avs.size(); ++a) {
    const auto& av = state.avs[a];
    if (!av.in_domain) {
      std::cout << "  AV " << a + 1 << " left the domain\n";
      continue;
    }
    try {
      const auto lane = extract_av_traces(state, av, c.grid, window);
      const auto tot = extract_traces(total, c.grid, av.y, window);
      std::cout << "  AV " << a + 1 << " y = " << format_number(av.y)
                << "  lane left/right = " << format_number(lane.left) << " / "
                << format_number(lane.right) << "  total left/right = "
                << format_number(tot.left) << " / " << format_number(tot.right)
                << "  active = " << (av.constraint_active ? 1 : 0) << "\n";
    } catch (const TraceError& e) {
      std::cout << "  AV " << a + 1 << ": " << e.what() << "\n";
    }
  }
  return 0;
}

int convergence(const std::string& scenario, const std::string& dxs, const std::string& out,
                std::optional<double> t_final) {
  ScenarioConfig c = load_scenario(scenario);
  const auto report = convergence_study(c, parse_list(dxs), t_final.value_or(c.t_final));
  std::cout << report.to_csv();
  OutputBundle bundle;
  bundle.reports.emplace_back("convergence_study", report);
  print_written(write_outputs(bundle, out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-lane traffic with autonomous vehicles as moving bottlenecks"};
  app.require_subcommand(1);

  std::string scenario, out, taus, ic, dxs;
  Overrides overrides;
  bool plots = false;
  double tau = 0.01, t_final = 2.0, u = 1.0;
  std::size_t cells = 800, window = kTraceWindow;
  std::optional<double> conv_tfinal;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write CSV outputs");
  sim->add_option("--scenario", scenario, "builtin name or config file")->required();
  sim->add_option("--out", out, "output directory")->required();
  sim->add_flag("--emit-plot-scripts", plots, "also write a matplotlib script");
  add_overrides(sim, overrides);

  auto* relax = app.add_subcommand("relax-study", "distance to the equilibrium model per tau");
  relax->add_option("--scenario", scenario, "builtin name or config file")->required();
  relax->add_option("--taus", taus, "comma-separated relaxation times")->required();
  relax->add_option("--out", out, "output directory")->required();
  relax->add_flag("--emit-plot-scripts", plots, "also write a matplotlib script");
  relax->add_option("--dx", overrides.dx, "cell width")->check(CLI::PositiveNumber);
  relax->add_option("--tfinal", overrides.t_final, "final time")->check(CLI::NonNegativeNumber);

  auto* mb = app.add_subcommand("mb-compare", "two-lane AV run against the bottleneck model");
  mb->add_option("--ic", ic, "ic1..ic5")->required();
  mb->add_option("--out", out, "output directory")->required();
  mb->add_option("--tau", tau, "relaxation time")->check(CLI::PositiveNumber);
  mb->add_option("--n-cells", cells, "cells")->check(CLI::PositiveNumber);
  mb->add_option("--tfinal", t_final, "final time")->check(CLI::NonNegativeNumber);
  mb->add_option("--u", u, "AV desired speed")->check(CLI::NonNegativeNumber);

  auto* tr = app.add_subcommand("traces", "characteristic and simulated densities at each AV");
  tr->add_option("--scenario", scenario, "builtin name or config file")->required();
  tr->add_option("--window", window, "trace standoff in cells")->check(CLI::PositiveNumber);
  add_overrides(tr, overrides);

  auto* conv = app.add_subcommand("convergence", "self-convergence over halved dx");
  conv->add_option("--scenario", scenario, "builtin name or config file")->required();
  conv->add_option("--dxs", dxs, "comma-separated cell widths, each half the previous")
      ->required();
  conv->add_option("--out", out, "output directory")->required();
  conv->add_option("--tfinal", conv_tfinal, "final time");

  auto* show = app.add_subcommand("show", "print a scenario in config-file form");
  show->add_option("--scenario", scenario, "builtin name or config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    if (*sim) return simulate(scenario, out, overrides, plots);
    if (*relax) return relax_study(scenario, taus, out, overrides, plots);
    if (*mb) return mb_compare(ic, out, tau, cells, t_final, u);
    if (*tr) return traces(scenario, overrides, window);
    if (*conv) return convergence(scenario, dxs, out, conv_tfinal);
    if (*show) {
      std::cout << serialize_config(load_scenario(scenario));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
