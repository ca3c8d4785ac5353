#pragma once

// Batch command-line front-end: analysis tables, break-even and force-set
// CSVs, hover reports, closed-loop simulations with trace/plot artifacts,
// and side-by-side comparisons.
//
// Exit codes: 0 success, 2 usage/config error, 3 divergence or controller
// fault.

#include "omnimorph/actuation.hpp"
#include "omnimorph/config.hpp"
#include "omnimorph/energy.hpp"
#include "omnimorph/sim.hpp"
#include "omnimorph/trace_io.hpp"
#include "omnimorph/wrench_sets.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace omnimorph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

namespace detail {

inline std::string fmt(double x, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline std::vector<double> parse_comma_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t n = 0;
    out.push_back(std::stod(item, &n));
    if (n != item.size()) throw CLI::ValidationError("bad number '" + item + "'");
  }
  if (out.empty()) throw CLI::ValidationError("expected a non-empty comma-separated list");
  return out;
}

// "start:step:stop" inclusive sweep.
inline std::vector<double> parse_sweep(const std::string& s) {
  double a, step, b;
  char c1, c2;
  std::istringstream ss(s);
  if (!(ss >> a >> c1 >> step >> c2 >> b) || c1 != ':' || c2 != ':' || !(step > 0.0))
    throw CLI::ValidationError("expected start:step:stop with positive step, got '" + s + "'");
  std::vector<double> out;
  for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
  return out;
}

inline std::filesystem::path resolve_out_dir(const std::string& flag_dir,
                                             const std::string& config_dir) {
  if (!flag_dir.empty()) return flag_dir;
  if (const char* env = std::getenv("OMNIMORPH_OUT"); env && *env) return env;
  return config_dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << contents;
}

inline std::string plot_script() {
  return R"(set datafile separator ','
set key autotitle columnhead
set terminal svg size 900,900 dynamic
set output 'trace.svg'
set multiplot layout 3,1
set ylabel 'position [m]'
plot 'trace.csv' using 1:4 with lines title 'z', \
     'trace.csv' using 1:7 with lines title 'z ref', \
     'trace.csv' using 1:2 with lines title 'x', \
     'trace.csv' using 1:5 with lines title 'x ref'
set ylabel 'tilt [rad]'
plot 'trace.csv' using 1:16 with lines title 'alpha'
set ylabel 'power [W] / energy [J]'
plot 'trace.csv' using 1:31 with lines title 'P drag', \
     'trace.csv' using 1:32 with lines title 'E drag', \
     'trace.csv' using 1:33 with lines title 'E accel'
unset multiplot
)";
}

inline std::string summary_text(const SimSummary& s) {
  std::ostringstream os;
  os << "status                    " << to_string(s.status) << "\n"
     << "simulated time [s]        " << fmt(s.end_time) << "\n"
     << "mean position error [m]   " << fmt(s.mean_pos_err) << "\n"
     << "mean attitude error       " << fmt(s.mean_att_err) << "\n"
     << "drag energy [J]           " << fmt(s.drag_energy) << "\n"
     << "prop accel energy [J]     " << fmt(s.accel_energy) << "\n"
     << "final alpha [deg]         " << fmt(rad2deg(s.final_alpha)) << "\n";
  return os.str();
}

struct ScenarioFlags {
  std::string config_path;
  std::string preset;       // weights preset when no config file
  double cf_scale = -1.0;   // <0: keep configured value
  double fixed_alpha_deg = std::numeric_limits<double>::quiet_NaN();
  double w3 = -1.0;         // <0: keep configured value
  double duration = -1.0;   // <0: keep configured value
};

inline LoadedScenario build_scenario(const ScenarioFlags& f) {
  LoadedScenario loaded = [&] {
    if (!f.config_path.empty()) {
      std::ifstream in(f.config_path);
      if (!in) throw ConfigError("cannot open config file '" + f.config_path + "'");
      return load_scenario(in);
    }
    ConfigTable table;
    if (!f.preset.empty()) {
      ConfigValue v;
      v.kind = ConfigValue::Kind::String;
      v.str = f.preset;
      table["weights"]["preset"] = v;
    }
    return load_scenario(table);
  }();

  if (!f.preset.empty() && !f.config_path.empty()) {
    if (f.preset == "case-a") loaded.scenario.weights = case_a_weights();
    else if (f.preset == "case-b") loaded.scenario.weights = case_b_weights();
    else throw ConfigError("unknown weights preset '" + f.preset + "'");
    loaded.weights_preset = f.preset;
  }
  if (f.cf_scale >= 0.0) loaded.scenario.plant.cf_scale = f.cf_scale;
  if (!std::isnan(f.fixed_alpha_deg)) loaded.scenario.fixed_alpha = deg2rad(f.fixed_alpha_deg);
  if (f.w3 >= 0.0) loaded.scenario.weights.W3 = Mat8::Identity() * f.w3;
  if (f.duration >= 0.0) loaded.scenario.duration = f.duration;
  loaded.scenario.plant.validate(loaded.scenario.params.dt_ctrl);
  return loaded;
}

// Runs one scenario and writes trace.csv / summary.txt / plot.gp into dir.
inline SimTrace run_and_write(const LoadedScenario& loaded, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SimTrace trace = simulate(loaded.scenario);

  {
    std::ofstream f(dir / "trace.csv");
    if (!f) throw std::runtime_error("cannot write " + (dir / "trace.csv").string());
    write_trace(f, trace);
  }
  if (!loaded.outputs.columns.empty()) {
    std::ofstream f(dir / "trace_subset.csv");
    write_trace(f, trace, &loaded.outputs.columns);
  }
  write_file(dir / "summary.txt", summary_text(trace.summary));
  write_file(dir / "plot.gp", plot_script());
  return trace;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Morphing-multirotor analysis and simulation toolkit"};
  app.name("omnimorph_cli");
  app.require_subcommand(1);

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "Actuation rank and class per tilt angle");
  std::string an_alpha, an_sweep, an_out;
  analyze->add_option("--alpha", an_alpha, "comma-separated tilt angles [deg]");
  analyze->add_option("--sweep", an_sweep, "start:step:stop tilt sweep [deg]");
  analyze->add_option("--out", an_out, "write CSV here instead of stdout");

  // ---- deltam ----
  auto* deltam = app.add_subcommand("deltam", "Break-even added-mass fraction vs fixed tilt");
  std::string dm_range = "0:1:45", dm_out;
  deltam->add_option("--range", dm_range, "start:step:stop tilt range [deg]");
  deltam->add_option("--out", dm_out, "write CSV here instead of stdout");

  // ---- forceset ----
  auto* forceset = app.add_subcommand("forceset", "Directional force support and inscribed radius");
  std::string fs_alpha = "0,15,30,45,60", fs_out;
  int fs_dirs = 400;
  bool fs_no_zero_torque = false, fs_interval = false;
  forceset->add_option("--alpha", fs_alpha, "comma-separated tilt angles [deg]");
  forceset->add_option("--dirs", fs_dirs, "number of sampled directions")->check(CLI::Range(50, 100000));
  forceset->add_flag("--no-zero-torque", fs_no_zero_torque, "drop the zero-torque constraint");
  forceset->add_flag("--interval", fs_interval, "also scan for the omnidirectional tilt interval");
  forceset->add_option("--out", fs_out, "write per-direction CSV here instead of stdout");

  // ---- hover ----
  auto* hover = app.add_subcommand("hover", "Hover inputs and power at a tilt angle");
  double hv_alpha = 0.0;
  hover->add_option("--alpha", hv_alpha, "tilt angle [deg]")->required();

  // ---- simulate ----
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a closed-loop scenario");
  detail::ScenarioFlags sim_flags;
  std::string sim_out;
  simulate_cmd->add_option("--config", sim_flags.config_path, "scenario config file");
  simulate_cmd->add_option("--preset", sim_flags.preset, "weights preset: case-a or case-b");
  simulate_cmd->add_option("--cf-scale", sim_flags.cf_scale, "plant thrust degradation (0,1]");
  simulate_cmd->add_option("--fixed-alpha", sim_flags.fixed_alpha_deg, "freeze the tilt [deg]");
  simulate_cmd->add_option("--w3", sim_flags.w3, "override the input-change weight");
  simulate_cmd->add_option("--duration", sim_flags.duration, "simulated time [s]");
  simulate_cmd->add_option("--out", sim_out, "output directory");

  // ---- compare ----
  auto* compare = app.add_subcommand("compare", "Run two scenarios and print both summaries");
  detail::ScenarioFlags cmp_a, cmp_b;
  std::string cmp_out;
  int cmp_jobs = 1;
  compare->add_option("--config-a", cmp_a.config_path, "first scenario config");
  compare->add_option("--config-b", cmp_b.config_path, "second scenario config");
  compare->add_option("--preset-a", cmp_a.preset, "first weights preset");
  compare->add_option("--preset-b", cmp_b.preset, "second weights preset");
  double cmp_fixed_alpha = std::numeric_limits<double>::quiet_NaN();
  double cmp_cf_scale = -1.0, cmp_duration = -1.0;
  compare->add_option("--fixed-alpha", cmp_fixed_alpha, "freeze the tilt in both runs [deg]");
  compare->add_option("--cf-scale", cmp_cf_scale, "plant thrust degradation in both runs");
  compare->add_option("--duration", cmp_duration, "simulated time in both runs [s]");
  compare->add_option("--jobs", cmp_jobs, "run scenarios in parallel")->check(CLI::Range(1, 16));
  compare->add_option("--out", cmp_out, "output directory (per-run subdirectories)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const PlatformParams params = default_params();
  const PropellerLayout layout = make_layout(params.L);

  try {
    if (analyze->parsed()) {
      if (an_alpha.empty() && an_sweep.empty())
        throw CLI::ValidationError("analyze needs --alpha or --sweep");
      const std::vector<double> alphas = an_alpha.empty() ? detail::parse_sweep(an_sweep)
                                                          : detail::parse_comma_list(an_alpha);
      std::ostringstream csv;
      csv << "alpha_deg,rank,class\n";
      out << "alpha [deg]  rank  class\n";
      for (double deg : alphas) {
        if (deg < 0.0 || deg > 90.0)
          throw CLI::ValidationError("tilt angle must lie in [0, 90] deg");
        const ActuationClass c = classify_actuation(params, layout, deg2rad(deg), Vec8::Zero());
        out << detail::fmt(deg, "%-12g") << " " << c.rank << "     " << to_string(c.tag) << "\n";
        csv << detail::fmt(deg, "%.10g") << "," << c.rank << "," << to_string(c.tag) << "\n";
      }
      if (!an_out.empty()) detail::write_file(an_out, csv.str());
      return kExitOk;
    }

    if (deltam->parsed()) {
      std::ostringstream csv;
      csv << "alpha_f_deg,delta_m_bar\n";
      for (double deg : detail::parse_sweep(dm_range)) {
        const double v = delta_m_bar(params, layout, deg2rad(deg));
        csv << detail::fmt(deg, "%.10g") << "," << detail::fmt(v, "%.12g") << "\n";
      }
      if (!dm_out.empty()) {
        detail::write_file(dm_out, csv.str());
        out << "wrote " << dm_out << "\n";
      } else {
        out << csv.str();
      }
      return kExitOk;
    }

    if (forceset->parsed()) {
      std::ostringstream csv;
      csv << "alpha_deg,dir_x,dir_y,dir_z,support_N\n";
      const auto dirs = fibonacci_directions(fs_dirs);
      for (double deg : detail::parse_comma_list(fs_alpha)) {
        const double alpha = deg2rad(deg);
        double radius = std::numeric_limits<double>::infinity();
        for (const Vec3& d : dirs) {
          const double s = support_force(params, layout, alpha, d, !fs_no_zero_torque).value;
          radius = std::min(radius, s);
          csv << detail::fmt(deg, "%.10g") << "," << detail::fmt(d.x(), "%.10g") << ","
              << detail::fmt(d.y(), "%.10g") << "," << detail::fmt(d.z(), "%.10g") << ","
              << detail::fmt(s, "%.12g") << "\n";
        }
        out << "alpha " << detail::fmt(deg) << " deg: inscribed radius " << detail::fmt(radius)
            << " N (weight " << detail::fmt(params.m * params.g) << " N)\n";
      }
      if (fs_interval) {
        const auto iv = omni_alpha_interval(params, layout, deg2rad(1.0), fs_dirs);
        if (iv)
          out << "omnidirectional tilt interval: [" << detail::fmt(rad2deg(iv->alpha_lo)) << ", "
              << detail::fmt(rad2deg(iv->alpha_hi)) << "] deg\n";
        else
          out << "omnidirectional tilt interval: none\n";
      }
      if (!fs_out.empty()) detail::write_file(fs_out, csv.str());
      else out << csv.str();
      return kExitOk;
    }

    if (hover->parsed()) {
      if (hv_alpha < 0.0 || hv_alpha > 90.0)
        throw CLI::ValidationError("tilt angle must lie in [0, 90] deg");
      const HoverResult h = hover_input(params, layout, deg2rad(hv_alpha), params.m);
      out << "hover at alpha = " << detail::fmt(hv_alpha) << " deg\n";
      for (int i = 0; i < kNumProps; ++i) {
        const double w = std::sqrt(std::abs(h.u_w[i]));
        out << "  prop " << (i + 1) << ": u_w = " << detail::fmt(h.u_w[i], "%.8g")
            << " (rad/s)^2, speed = " << detail::fmt(w / (2.0 * kPi)) << " Hz\n";
      }
      out << "residual " << detail::fmt(h.residual, "%.3g") << " N, achievable "
          << (h.achievable ? "yes" : "no") << ", power " << detail::fmt(motor_power(params, h.u_w))
          << " W\n";
      return kExitOk;
    }

    if (simulate_cmd->parsed()) {
      const LoadedScenario loaded = detail::build_scenario(sim_flags);
      const auto dir = detail::resolve_out_dir(sim_out, loaded.outputs.dir);
      const SimTrace trace = detail::run_and_write(loaded, dir);
      out << "scenario: weights " << loaded.weights_preset << ", cf_scale "
          << detail::fmt(loaded.scenario.plant.cf_scale) << ", outputs in " << dir.string()
          << "\n"
          << detail::summary_text(trace.summary);
      return trace.summary.status == SimStatus::Completed ? kExitOk : kExitDiverged;
    }

    if (compare->parsed()) {
      if (!std::isnan(cmp_fixed_alpha)) {
        cmp_a.fixed_alpha_deg = cmp_fixed_alpha;
        cmp_b.fixed_alpha_deg = cmp_fixed_alpha;
      }
      cmp_a.cf_scale = cmp_cf_scale;
      cmp_b.cf_scale = cmp_cf_scale;
      cmp_a.duration = cmp_duration;
      cmp_b.duration = cmp_duration;
      if (cmp_a.config_path.empty() && cmp_a.preset.empty()) cmp_a.preset = "case-a";
      if (cmp_b.config_path.empty() && cmp_b.preset.empty()) cmp_b.preset = "case-b";

      const LoadedScenario la = detail::build_scenario(cmp_a);
      const LoadedScenario lb = detail::build_scenario(cmp_b);
      const auto base = detail::resolve_out_dir(cmp_out, "out-compare");

      SimTrace ta, tb;
      if (cmp_jobs > 1) {
        std::exception_ptr ea, eb;
        std::thread wa([&] {
          try { ta = detail::run_and_write(la, base / "a"); } catch (...) { ea = std::current_exception(); }
        });
        std::thread wb([&] {
          try { tb = detail::run_and_write(lb, base / "b"); } catch (...) { eb = std::current_exception(); }
        });
        wa.join();
        wb.join();
        if (ea) std::rethrow_exception(ea);
        if (eb) std::rethrow_exception(eb);
      } else {
        ta = detail::run_and_write(la, base / "a");
        tb = detail::run_and_write(lb, base / "b");
      }

      out << "== run A (weights " << la.weights_preset << ") ==\n"
          << detail::summary_text(ta.summary) << "== run B (weights " << lb.weights_preset
          << ") ==\n"
          << detail::summary_text(tb.summary);
      const bool ok = ta.summary.status == SimStatus::Completed &&
                      tb.summary.status == SimStatus::Completed;
      return ok ? kExitOk : kExitDiverged;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDiverged;
  }

  return kExitUsage;
}

}  // namespace omnimorph::cli
