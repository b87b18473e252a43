#include "mltraffic/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "mltraffic/errors.hpp"

namespace mltraffic {

namespace {

std::string exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& s, std::size_t line) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) fail(line, "malformed number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "malformed number '" + s + "'");
  }
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  const double v = parse_number(s, line);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) fail(line, "expected a count, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

IcProfile parse_profile(const std::string& value, std::size_t line) {
  const auto w = words(value);
  if (w.empty()) fail(line, "empty initial profile");
  IcProfile p;
  if (w[0] == "constant") {
    if (w.size() != 2) fail(line, "expected 'constant <c>'");
    p.offset = parse_number(w[1], line);
    return p;
  }
  if (w[0] != "sin" && w[0] != "cos") fail(line, "unknown profile '" + w[0] + "'");
  if (w.size() != 4) fail(line, "expected '" + w[0] + " <offset> <amplitude> <omega>'");
  p.kind = w[0] == "sin" ? IcProfile::Kind::kSin : IcProfile::Kind::kCos;
  p.offset = parse_number(w[1], line);
  p.amplitude = parse_number(w[2], line);
  p.omega = parse_number(w[3], line);
  return p;
}

std::string profile_text(const IcProfile& p) {
  if (p.kind == IcProfile::Kind::kConstant) return "constant " + exact(p.offset);
  return std::string(p.kind == IcProfile::Kind::kSin ? "sin " : "cos ") + exact(p.offset) + " " +
         exact(p.amplitude) + " " + exact(p.omega);
}

SpeedSchedule parse_schedule(const std::string& value, std::size_t line) {
  if (value.find(':') == std::string::npos) return SpeedSchedule(parse_number(value, line));
  std::vector<SpeedSchedule::Piece> pieces;
  for (const auto& item : split(value, ';')) {
    const auto kv = split(item, ':');
    if (kv.size() != 2) fail(line, "schedule pieces are written '<start>:<speed>'");
    pieces.push_back({parse_number(kv[0], line), parse_number(kv[1], line)});
  }
  try {
    return SpeedSchedule(std::move(pieces));
  } catch (const ConfigError& e) {
    fail(line, e.what());
  }
}

std::string schedule_text(const SpeedSchedule& s) {
  if (s.pieces().size() == 1 && s.pieces().front().start == 0.0) {
    return exact(s.pieces().front().value);
  }
  std::string out;
  for (const auto& p : s.pieces()) {
    if (!out.empty()) out += ";";
    out += exact(p.start) + ":" + exact(p.value);
  }
  return out;
}

std::vector<double> uniform_times(double t_final, std::size_t intervals) {
  std::vector<double> t;
  for (std::size_t i = 0; i <= intervals; ++i) {
    t.push_back(t_final * static_cast<double>(i) / static_cast<double>(intervals));
  }
  return t;
}

ScenarioConfig relax_scenario(std::string name, std::vector<double> speeds) {
  ScenarioConfig c;
  c.name = std::move(name);
  for (double v : speeds) c.lanes.push_back({v, 1.0});
  c.tau = 0.1;
  c.grid = {0.0, 10.0, 500, Boundary::kZeroGradient};
  c.t_final = 1.0 / 60.0;
  c.ic = {{IcProfile::Kind::kSin, 0.5, 0.5, 0.5},
          {IcProfile::Kind::kCos, 0.5, 0.5, 0.5},
          {IcProfile::Kind::kSin, 0.5, 0.5, 1.0}};
  c.outputs = {0.0, c.t_final};
  return c;
}

ScenarioConfig mb_scenario(std::string name, double lane_density) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.lanes = {{2.0, 1.0}, {2.0, 1.0}};
  c.tau = 0.01;
  c.grid = {0.0, 8.0, 800, Boundary::kZeroGradient};
  c.t_final = 2.0;
  c.ic = {{IcProfile::Kind::kConstant, lane_density, 0.0, 0.0},
          {IcProfile::Kind::kConstant, lane_density, 0.0, 0.0}};
  c.avs = {{1, 3.0, SpeedSchedule(1.0)}};
  c.outputs = uniform_times(c.t_final, 4);
  return c;
}

}  // namespace

double IcProfile::value(double x) const {
  switch (kind) {
    case Kind::kConstant: return offset;
    case Kind::kSin: return offset + amplitude * std::sin(omega * std::numbers::pi * x);
    case Kind::kCos: return offset + amplitude * std::cos(omega * std::numbers::pi * x);
  }
  return offset;
}

double IcProfile::cell_average(double a, double b) const {
  if (kind == Kind::kConstant || omega == 0.0 || !(b > a)) return value(0.5 * (a + b));
  const double k = omega * std::numbers::pi;
  const double integral = kind == Kind::kSin ? (std::cos(k * a) - std::cos(k * b)) / k
                                             : (std::sin(k * b) - std::sin(k * a)) / k;
  return offset + amplitude * integral / (b - a);
}

void ScenarioConfig::validate() const {
  if (lanes.empty()) throw ConfigError("scenario has no lanes");
  for (std::size_t j = 0; j < lanes.size(); ++j) {
    if (!(lanes[j].v_max > 0.0) || !(lanes[j].r_max > 0.0)) {
      throw ConfigError("lane " + std::to_string(j + 1) + " needs positive V and R");
    }
  }
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  grid.validate();
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw ConfigError("t_final must be finite and nonnegative");
  }
  if (ic.size() != lanes.size()) {
    throw ConfigError("[ic] defines " + std::to_string(ic.size()) + " profiles for " +
                      std::to_string(lanes.size()) + " lanes");
  }
  for (std::size_t j = 0; j < ic.size(); ++j) {
    const double lo = ic[j].offset - std::abs(ic[j].kind == IcProfile::Kind::kConstant ? 0.0 : ic[j].amplitude);
    const double hi = ic[j].offset + std::abs(ic[j].kind == IcProfile::Kind::kConstant ? 0.0 : ic[j].amplitude);
    if (lo < -kDomainTol || hi > lanes[j].r_max + kDomainTol) {
      throw ConfigError("initial profile of lane " + std::to_string(j + 1) + " leaves [0, R]");
    }
  }
  for (std::size_t a = 0; a < avs.size(); ++a) {
    const auto& av = avs[a];
    const std::string who = "AV " + std::to_string(a + 1);
    if (av.lane < 1 || av.lane > lanes.size()) {
      throw ConfigError(who + " refers to missing lane " + std::to_string(av.lane));
    }
    if (!(av.y0 >= grid.x_min && av.y0 <= grid.x_max)) {
      throw ConfigError(who + " starts outside the grid");
    }
    const double v = lanes[av.lane - 1].v_max;
    if (av.schedule.min_value() < 0.0 || av.schedule.max_value() > v) {
      throw ConfigError(who + " desired speed outside [0, " + exact(v) + "]");
    }
  }
  for (double t : outputs) {
    if (!(t >= 0.0 && t <= t_final)) throw ConfigError("output time " + exact(t) + " outside [0, t_final]");
  }
}

std::vector<LaneSpec> ScenarioConfig::lane_specs() const {
  std::vector<LaneSpec> specs;
  for (const auto& l : lanes) specs.emplace_back(l.v_max, l.r_max);
  return specs;
}

MultiLaneModel ScenarioConfig::model() const {
  validate();
  return MultiLaneModel{grid, SourceCoupling(lane_specs()), tau};
}

MultiLaneState ScenarioConfig::initial_state() const {
  validate();
  MultiLaneState s;
  s.rho.resize(lanes.size());
  for (std::size_t j = 0; j < lanes.size(); ++j) {
    s.rho[j].resize(grid.n_cells);
    for (std::size_t k = 0; k < grid.n_cells; ++k) {
      const double v = ic[j].cell_average(grid.left_interface(k), grid.left_interface(k + 1));
      s.rho[j][k] = std::clamp(v, 0.0, lanes[j].r_max);
    }
  }
  for (const auto& av : avs) {
    AvState st;
    st.lane = av.lane - 1;
    st.y = av.y0;
    st.schedule = av.schedule;
    s.avs.push_back(std::move(st));
  }
  return s;
}

LimitSpec ScenarioConfig::limit_spec() const {
  double v = 0.0;
  double r = 0.0;
  for (const auto& l : lanes) {
    v += l.v_max;
    r += l.r_max;
  }
  const auto m = static_cast<double>(lanes.size());
  return LimitSpec(lanes.size(), LaneSpec(v / m, r / m));
}

std::vector<double> ScenarioConfig::initial_total_density() const {
  const auto s = initial_state();
  std::vector<double> r(grid.n_cells, 0.0);
  for (const auto& lane : s.rho) {
    for (std::size_t k = 0; k < lane.size(); ++k) r[k] += lane[k];
  }
  return r;
}

void ScenarioConfig::set_dx(double dx) {
  if (!(dx > 0.0)) throw ConfigError("dx must be positive");
  const double cells = std::round((grid.x_max - grid.x_min) / dx);
  if (cells < 1.0) throw ConfigError("dx larger than the domain");
  grid.n_cells = static_cast<std::size_t>(cells);
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig c;
  c.lanes.clear();
  std::map<std::string, std::size_t> seen;
  std::map<std::size_t, std::pair<IcProfile, std::size_t>> profiles;
  bool have_x_min = false, have_x_max = false, have_cells = false, have_tau = false,
       have_tfinal = false;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      static const std::vector<std::string> known{"scenario", "lanes", "grid", "source",
                                                  "ic",       "avs",   "run"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        fail(line, "unknown section [" + section + "]");
      }
      if (seen.count(section)) fail(line, "duplicate section [" + section + "]");
      seen[section] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    if (section.empty()) fail(line, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    auto unknown = [&] { fail(line, "unknown key '" + key + "' in [" + section + "]"); };

    if (section == "scenario") {
      if (key != "name") unknown();
      c.name = value;
    } else if (section == "lanes") {
      if (key != "lane") unknown();
      const auto parts = split(value, ',');
      if (parts.size() != 2) fail(line, "expected 'lane = <V>, <R>'");
      c.lanes.push_back({parse_number(parts[0], line), parse_number(parts[1], line)});
    } else if (section == "grid") {
      if (key == "x_min") {
        c.grid.x_min = parse_number(value, line);
        have_x_min = true;
      } else if (key == "x_max") {
        c.grid.x_max = parse_number(value, line);
        have_x_max = true;
      } else if (key == "n_cells") {
        c.grid.n_cells = parse_count(value, line);
        have_cells = true;
      } else if (key == "boundary") {
        try {
          c.grid.boundary = boundary_from_string(value);
        } catch (const ConfigError& e) {
          fail(line, e.what());
        }
      } else {
        unknown();
      }
    } else if (section == "source") {
      if (key != "tau") unknown();
      c.tau = parse_number(value, line);
      have_tau = true;
    } else if (section == "ic") {
      if (key.rfind("lane", 0) != 0 || key.size() == 4) unknown();
      const std::size_t j = parse_count(key.substr(4), line);
      if (j == 0) fail(line, "lanes are numbered from 1");
      if (profiles.count(j)) fail(line, "duplicate profile for lane " + std::to_string(j));
      profiles[j] = {parse_profile(value, line), line};
    } else if (section == "avs") {
      if (key != "av") unknown();
      const auto parts = split(value, ',');
      if (parts.size() != 3) fail(line, "expected 'av = <lane>, <y0>, <schedule>'");
      c.avs.push_back({parse_count(parts[0], line), parse_number(parts[1], line),
                       parse_schedule(parts[2], line)});
    } else if (section == "run") {
      if (key == "t_final") {
        c.t_final = parse_number(value, line);
        have_tfinal = true;
      } else if (key == "outputs") {
        c.outputs.clear();
        if (!value.empty()) {
          for (const auto& item : split(value, ',')) c.outputs.push_back(parse_number(item, line));
        }
      } else {
        unknown();
      }
    }
  }
  for (const char* required : {"lanes", "grid", "source", "ic", "run"}) {
    if (!seen.count(required)) throw ConfigError(std::string("missing [") + required + "]");
  }
  if (c.lanes.empty()) fail(seen["lanes"], "[lanes] defines no lane");
  if (!have_x_min || !have_x_max || !have_cells) {
    fail(seen["grid"], "[grid] requires x_min, x_max and n_cells");
  }
  if (!have_tau) fail(seen["source"], "[source] requires tau");
  if (!have_tfinal) fail(seen["run"], "[run] requires t_final");
  for (const auto& [j, entry] : profiles) {
    if (j > c.lanes.size()) fail(entry.second, "profile for missing lane " + std::to_string(j));
  }
  for (std::size_t j = 1; j <= c.lanes.size(); ++j) {
    if (!profiles.count(j)) fail(seen["ic"], "[ic] has no profile for lane " + std::to_string(j));
    c.ic.push_back(profiles[j].first);
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return c;
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "[scenario]\nname = " << c.name << "\n\n[lanes]\n";
  for (const auto& l : c.lanes) out << "lane = " << exact(l.v_max) << ", " << exact(l.r_max) << "\n";
  out << "\n[grid]\nx_min = " << exact(c.grid.x_min) << "\nx_max = " << exact(c.grid.x_max)
      << "\nn_cells = " << c.grid.n_cells << "\nboundary = " << to_string(c.grid.boundary)
      << "\n\n[source]\ntau = " << exact(c.tau) << "\n\n[ic]\n";
  for (std::size_t j = 0; j < c.ic.size(); ++j) {
    out << "lane" << j + 1 << " = " << profile_text(c.ic[j]) << "\n";
  }
  if (!c.avs.empty()) {
    out << "\n[avs]\n";
    for (const auto& av : c.avs) {
      out << "av = " << av.lane << ", " << exact(av.y0) << ", " << schedule_text(av.schedule)
          << "\n";
    }
  }
  out << "\n[run]\nt_final = " << exact(c.t_final) << "\noutputs = ";
  for (std::size_t i = 0; i < c.outputs.size(); ++i) {
    out << (i ? ", " : "") << exact(c.outputs[i]);
  }
  out << "\n";
  return out.str();
}

std::vector<std::string> builtin_scenario_names() {
  return {"threelane", "relax-c1", "relax-c2", "mb-ic1", "mb-ic2", "mb-ic3", "mb-ic4", "mb-ic5"};
}

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "threelane") {
    ScenarioConfig c = relax_scenario(name, {50.0, 80.0, 100.0});
    c.tau = 0.05;
    c.t_final = 0.1;
    c.avs = {{1, 1.0, SpeedSchedule(30.0)},
             {2, 2.0, SpeedSchedule(30.0)},
             {3, 3.0, SpeedSchedule(30.0)}};
    c.outputs = uniform_times(c.t_final, 100);
    return c;
  }
  if (name == "relax-c1") return relax_scenario(name, {80.0, 80.0, 80.0});
  if (name == "relax-c2") return relax_scenario(name, {60.0, 80.0, 100.0});
  static const std::map<std::string, double> mb{{"mb-ic1", 0.05},
                                                {"mb-ic2", 0.15},
                                                {"mb-ic3", 0.3},
                                                {"mb-ic4", 0.45},
                                                {"mb-ic5", 0.75}};
  if (auto it = mb.find(name); it != mb.end()) return mb_scenario(name, it->second);
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  const auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_scenario(name_or_path);
  }
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("'" + name_or_path + "' is neither a builtin scenario nor a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace mltraffic
