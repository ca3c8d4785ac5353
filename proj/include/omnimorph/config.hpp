#pragma once

// Scenario configuration: a flat, typed key-value format with [sections]
// (TOML-compatible subset: numbers, booleans, quoted strings, arrays).
// Loading is strict — unknown sections/keys and type mismatches are errors
// with line diagnostics.

#include "omnimorph/controller.hpp"
#include "omnimorph/sim.hpp"
#include "omnimorph/trajectory.hpp"
#include "omnimorph/types.hpp"

#include <cctype>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnimorph {

struct ConfigError : std::runtime_error {
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_no(line) {}
  explicit ConfigError(const std::string& what) : std::runtime_error(what), line_no(0) {}
  int line_no;
};

struct ConfigValue {
  enum class Kind { Number, String, Bool, NumberArray, StringArray };
  Kind kind = Kind::Number;
  double num = 0.0;
  std::string str;
  bool flag = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

using ConfigSection = std::map<std::string, ConfigValue>;
using ConfigTable = std::map<std::string, ConfigSection>;

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& tok, int line) {
  const char* c = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(c, &end);
  if (end == c || *end != '\0') throw ConfigError(line, "expected a number, got '" + tok + "'");
  return v;
}

inline ConfigValue parse_value(const std::string& raw, int line) {
  ConfigValue v;
  v.line = line;
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError(line, "missing value");

  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ConfigError(line, "unterminated string");
    v.kind = ConfigValue::Kind::String;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.flag = (s == "true");
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw ConfigError(line, "unterminated array");
    std::string inner = s.substr(1, s.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    for (char ch : inner) {
      if (ch == ',') { items.push_back(trim(cur)); cur.clear(); }
      else cur += ch;
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    const bool strings = !items.empty() && items.front().size() && items.front().front() == '"';
    if (strings) {
      v.kind = ConfigValue::Kind::StringArray;
      for (const std::string& it : items) {
        if (it.size() < 2 || it.front() != '"' || it.back() != '"')
          throw ConfigError(line, "array mixes strings and non-strings");
        v.strs.push_back(it.substr(1, it.size() - 2));
      }
    } else {
      v.kind = ConfigValue::Kind::NumberArray;
      for (const std::string& it : items) v.nums.push_back(parse_number(it, line));
    }
    return v;
  }
  v.kind = ConfigValue::Kind::Number;
  v.num = parse_number(s, line);
  return v;
}

}  // namespace detail

inline ConfigTable parse_config(std::istream& is) {
  ConfigTable table;
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string s = line;
    // strip comments outside strings
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') in_str = !in_str;
      else if (s[i] == '#' && !in_str) { s = s.substr(0, i); break; }
    }
    s = detail::trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(line_no, "empty section name");
      table[section];
      continue;
    }

    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (section.empty()) throw ConfigError(line_no, "key outside any [section]");
    if (table[section].count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    table[section][key] = detail::parse_value(s.substr(eq + 1), line_no);
  }
  return table;
}

// Mission segment mini-language: ';'-separated commands
//   hold T | lineto X Y Z T | rotate AX AY AZ ANGLE_DEG T |
//   combined X Y Z AX AY AZ ANGLE_DEG T
inline Mission parse_mission_segments(const std::string& spec, int line = 0) {
  MissionBuilder b;
  std::stringstream ss(spec);
  std::string part;
  int n_segments = 0;
  while (std::getline(ss, part, ';')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    std::istringstream ps(part);
    std::string op;
    ps >> op;
    auto need = [&](int count) {
      std::vector<double> a(count);
      for (int i = 0; i < count; ++i) {
        if (!(ps >> a[i]))
          throw ConfigError(line, "segment '" + part + "': expected " + std::to_string(count) +
                                      " numbers after '" + op + "'");
      }
      std::string extra;
      if (ps >> extra) throw ConfigError(line, "segment '" + part + "': trailing '" + extra + "'");
      return a;
    };
    if (op == "hold") {
      const auto a = need(1);
      b.hold(a[0]);
    } else if (op == "lineto") {
      const auto a = need(4);
      b.line_to(Vec3(a[0], a[1], a[2]), a[3]);
    } else if (op == "rotate") {
      const auto a = need(5);
      b.rotate(Vec3(a[0], a[1], a[2]), deg2rad(a[3]), a[4]);
    } else if (op == "combined") {
      const auto a = need(8);
      b.line_and_rotate(Vec3(a[0], a[1], a[2]), Vec3(a[3], a[4], a[5]), deg2rad(a[6]), a[7]);
    } else {
      throw ConfigError(line, "unknown segment kind '" + op + "'");
    }
    ++n_segments;
  }
  if (n_segments == 0) throw ConfigError(line, "mission segment list is empty");
  return b.build();
}

struct OutputOptions {
  std::string dir = "out";
  std::vector<std::string> columns;  // empty = full schema
};

struct LoadedScenario {
  Scenario scenario;
  OutputOptions outputs;
  std::string weights_preset;  // "case-a", "case-b", or "custom"
};

namespace detail {

struct SectionReader {
  const std::string name;
  const ConfigSection* sec;
  mutable std::map<std::string, bool> used;

  bool has(const std::string& key) const { return sec && sec->count(key); }

  const ConfigValue& get(const std::string& key) const {
    used[key] = true;
    return sec->at(key);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const ConfigValue& v = get(key);
    if (v.kind != ConfigValue::Kind::Number)
      throw ConfigError(v.line, "[" + name + "] " + key + " must be a number");
    return v.num;
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const ConfigValue& v = get(key);
    if (v.kind != ConfigValue::Kind::String)
      throw ConfigError(v.line, "[" + name + "] " + key + " must be a string");
    return v.str;
  }

  std::vector<double> numbers(const std::string& key, int count) const {
    const ConfigValue& v = get(key);
    if (v.kind != ConfigValue::Kind::NumberArray || static_cast<int>(v.nums.size()) != count)
      throw ConfigError(v.line, "[" + name + "] " + key + " must be an array of " +
                                    std::to_string(count) + " numbers");
    return v.nums;
  }

  void check_all_used() const {
    if (!sec) return;
    for (const auto& [key, value] : *sec) {
      if (!used.count(key))
        throw ConfigError(value.line, "unknown key '" + key + "' in [" + name + "]");
    }
  }
};

inline Mat3 diag3(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]).asDiagonal(); }

}  // namespace detail

inline LoadedScenario load_scenario(const ConfigTable& table) {
  for (const auto& [section, contents] : table) {
    if (section != "platform" && section != "gains" && section != "weights" &&
        section != "mission" && section != "plant" && section != "run" && section != "outputs")
      throw ConfigError("unknown section [" + section + "]");
  }
  auto reader = [&](const char* name) {
    auto it = table.find(name);
    return detail::SectionReader{name, it == table.end() ? nullptr : &it->second, {}};
  };

  // Platform.
  PlatformParams params = default_params();
  {
    const auto sec = reader("platform");
    params.m = sec.number("mass", params.m);
    if (sec.has("inertia")) params.J = detail::diag3(sec.numbers("inertia", 3));
    params.L = sec.number("L", params.L);
    params.u_w_max = sec.number("u_w_max", params.u_w_max);
    // Recalibrate thrust for the configured mass unless given explicitly.
    params.c_f = params.m * params.g / (8.0 * params.u_w_max * std::cos(deg2rad(72.0)));
    params.c_f = sec.number("c_f", params.c_f);
    if (sec.has("c_tau") && sec.has("c_tau_over_c_f"))
      throw ConfigError(sec.get("c_tau").line, "[platform] give c_tau or c_tau_over_c_f, not both");
    params.c_tau = sec.number("c_tau_over_c_f", 0.009) * params.c_f;
    params.c_tau = sec.number("c_tau", params.c_tau);
    params.alpha_min = deg2rad(sec.number("alpha_min_deg", rad2deg(params.alpha_min)));
    params.alpha_max = deg2rad(sec.number("alpha_max_deg", rad2deg(params.alpha_max)));
    params.eps_alpha = deg2rad(sec.number("eps_alpha_deg", rad2deg(params.eps_alpha)));
    params.dt_ctrl = sec.number("dt_ctrl", params.dt_ctrl);
    params.I_p = sec.number("I_p", params.I_p);
    params.g = sec.number("g", params.g);
    sec.check_all_used();
    params.validate();
  }

  // Mission.
  Mission mission = full_envelope_mission();
  {
    const auto sec = reader("mission");
    const std::string name = sec.str("name", "");
    const bool has_segments = sec.has("segments");
    if (!name.empty() && has_segments)
      throw ConfigError(sec.get("segments").line, "[mission] give name or segments, not both");
    if (has_segments) {
      const ConfigValue& v = sec.get("segments");
      if (v.kind != ConfigValue::Kind::String)
        throw ConfigError(v.line, "[mission] segments must be a string");
      mission = parse_mission_segments(v.str, v.line);
    } else if (!name.empty() && name != "envelope") {
      throw ConfigError(sec.get("name").line, "[mission] unknown built-in mission '" + name + "'");
    }
    sec.check_all_used();
  }

  LoadedScenario out{Scenario(mission), {}, "case-a"};
  Scenario& sc = out.scenario;
  sc.params = params;
  sc.layout = make_layout(params.L);

  // Gains.
  {
    const auto sec = reader("gains");
    const std::string preset = sec.str("preset", "default");
    if (preset != "default")
      throw ConfigError("unknown gains preset '" + preset + "'");
    sc.gains = default_gains();
    if (sec.has("kp1")) sc.gains.Kp1 = detail::diag3(sec.numbers("kp1", 3));
    if (sec.has("kp2")) sc.gains.Kp2 = detail::diag3(sec.numbers("kp2", 3));
    if (sec.has("kw1")) sc.gains.Kw1 = detail::diag3(sec.numbers("kw1", 3));
    if (sec.has("kw2")) sc.gains.Kw2 = detail::diag3(sec.numbers("kw2", 3));
    sec.check_all_used();
  }

  // Weights.
  {
    const auto sec = reader("weights");
    const std::string preset = sec.str("preset", "case-a");
    if (preset == "case-a") sc.weights = case_a_weights();
    else if (preset == "case-b") sc.weights = case_b_weights();
    else throw ConfigError("unknown weights preset '" + preset + "' (use case-a or case-b)");
    out.weights_preset = preset;
    if (sec.has("w1")) sc.weights.W1 = Mat8::Identity() * sec.number("w1", 0.0);
    if (sec.has("w2")) {
      const auto v = sec.numbers("w2", 6);
      sc.weights.W2 = Vec6(v[0], v[1], v[2], v[3], v[4], v[5]).asDiagonal();
    }
    if (sec.has("w3")) sc.weights.W3 = Mat8::Identity() * sec.number("w3", 0.0);
    sec.check_all_used();
  }

  // Plant.
  {
    const auto sec = reader("plant");
    sc.plant.cf_scale = sec.number("cf_scale", sc.plant.cf_scale);
    sc.plant.dt_sim = sec.number("dt_sim", sc.plant.dt_sim);
    sc.plant.steps_per_ctrl = static_cast<int>(sec.number("steps_per_ctrl", sc.plant.steps_per_ctrl));
    sc.plant.divergence_pos_limit =
        sec.number("divergence_pos_limit", sc.plant.divergence_pos_limit);
    sec.check_all_used();
    sc.plant.validate(sc.params.dt_ctrl);
  }

  // Run options.
  {
    const auto sec = reader("run");
    sc.duration = sec.number("duration", sc.duration);
    sc.initial_alpha = deg2rad(sec.number("initial_alpha_deg", rad2deg(sc.initial_alpha)));
    if (sec.has("fixed_alpha_deg")) sc.fixed_alpha = deg2rad(sec.number("fixed_alpha_deg", 0.0));
    sec.check_all_used();
  }

  // Outputs.
  {
    const auto sec = reader("outputs");
    out.outputs.dir = sec.str("dir", out.outputs.dir);
    if (sec.has("columns")) {
      const ConfigValue& v = sec.get("columns");
      if (v.kind != ConfigValue::Kind::StringArray)
        throw ConfigError(v.line, "[outputs] columns must be an array of strings");
      out.outputs.columns = v.strs;
    }
    sec.check_all_used();
  }

  return out;
}

inline LoadedScenario load_scenario(std::istream& is) { return load_scenario(parse_config(is)); }

}  // namespace omnimorph
