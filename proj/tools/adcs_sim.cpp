// adcs-sim: scenario runner and small diagnostics around the adcs library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adcs/mission.hpp"

namespace {

using adcs::Error;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRequirement = 2;

void print_summary(const adcs::SummaryReport& s, const std::string& out_dir) {
  auto opt = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("n/a");
    std::snprintf(buf, sizeof buf, "%.1f s (%.2f h)", *v, *v / 3600.0);
    return std::string(buf);
  };
  std::printf("detumble time: %s\n", opt(s.detumble_time_s).c_str());
  for (const auto& t : s.targets) {
    std::printf("target %-16s track %7.1f s  rms %.4f deg  max %.4f deg%s\n", t.name.c_str(),
                t.track_time_s, t.rms_deg, t.max_deg, t.completed ? "" : "  (incomplete)");
  }
  std::printf("peak |h| %.2f %.2f %.2f mNms, saturation events %d, limit violations %d\n",
              s.max_wheel_momentum.x() * 1e3, s.max_wheel_momentum.y() * 1e3,
              s.max_wheel_momentum.z() * 1e3, s.saturation_events, s.limit_violations);
  if (s.determination_rms_arcsec) {
    std::printf("determination rms %.2f arcsec over %d samples\n", *s.determination_rms_arcsec,
                s.determination_samples);
  }
  std::printf("requirements: imaging_15min=%s multiple_targets=%s pointing=%s goal_1arcmin=%s "
              "determination_10arcsec=%s\n",
              s.req_imaging_15min.c_str(), s.req_multiple_targets.c_str(), s.req_pointing_1deg.c_str(),
              s.goal_pointing_1arcmin.c_str(), s.req_determination_10arcsec.c_str());
  if (!out_dir.empty()) std::printf("outputs in %s\n", out_dir.c_str());
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
  adcs::ScenarioConfig cfg = adcs::load_config(config, seed);
  if (!out.empty()) cfg.output.dir = out;
  const adcs::RunResult run = adcs::run_scenario(cfg);
  const adcs::SummaryReport s = adcs::write_outputs(run, cfg.output.dir);
  print_summary(s, cfg.output.dir);
  return s.requirements_pass() ? kExitOk : kExitRequirement;
}

int cmd_report(const std::string& dir) {
  const adcs::RunResult run = adcs::read_csv((fs::path(dir) / "timeseries.csv").string());
  const adcs::SummaryReport s = adcs::summary_report(run);
  std::ofstream(fs::path(dir) / "summary.json") << s.to_json().dump(2) << "\n";
  print_summary(s, "");
  return s.requirements_pass() ? kExitOk : kExitRequirement;
}

int cmd_tle(const std::string& file) {
  json out = json::array();
  for (const adcs::Tle& t : adcs::read_tle_file(file)) {
    const adcs::OrbitElements el = adcs::elements_from_tle(t);
    out.push_back({{"name", t.name},
                   {"catalog_number", t.catalog_number},
                   {"epoch_jd", t.epoch_jd},
                   {"inclination_deg", t.inclination_deg},
                   {"raan_deg", t.raan_deg},
                   {"eccentricity", t.eccentricity},
                   {"arg_perigee_deg", t.arg_perigee_deg},
                   {"mean_anomaly_deg", t.mean_anomaly_deg},
                   {"mean_motion_rev_day", t.mean_motion_rev_day},
                   {"bstar", t.bstar},
                   {"semi_major_axis_km", el.semi_major_axis_km},
                   {"true_anomaly_deg", el.true_anomaly_deg},
                   {"period_min", el.period_s() / 60.0},
                   {"perigee_altitude_km", el.perigee_altitude_km()},
                   {"apogee_altitude_km", el.apogee_altitude_km()}});
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_orbit(const std::string& file, double duration, double dt, const std::string& out,
              bool perturbed) {
  const adcs::Tle tle = adcs::read_tle_file(file).front();
  adcs::OrbitModel model;
  model.epoch = adcs::EpochTime{0.0, tle.epoch_jd};
  if (!perturbed) model.switches = adcs::PerturbationSwitches{false, false, false, false};
  const adcs::ProjectedAreas areas;
  const auto samples = adcs::propagate(adcs::elements_to_state(adcs::elements_from_tle(tle)), model,
                                       [&](double, const adcs::OrbitState&) { return areas; }, dt,
                                       duration);
  adcs::write_orbit_csv(samples, out);
  std::printf("%zu samples written to %s\n", samples.size(), out.c_str());
  return kExitOk;
}

int cmd_stars(const std::string& catalog_path, double fov, int min_stars, int samples,
              std::uint64_t seed, const std::vector<std::string>& targets) {
  const auto catalog = adcs::load_star_catalog(catalog_path);
  std::vector<adcs::Vec3> dirs;
  for (const auto& name : targets) {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const adcs::StarCatalogEntry& e) { return e.name == name; });
    if (it == catalog.end()) throw Error(adcs::ErrorCode::kInvalidArgument, "unknown star '" + name + "'");
    dirs.push_back(adcs::catalog_direction(*it));
  }
  const adcs::CoverageReport r = adcs::star_coverage(catalog, fov, min_stars, samples, seed, dirs);
  std::printf("catalog: %zu stars, FOV half-angle %.1f deg, need %d\n", catalog.size(), fov, min_stars);
  std::printf("P(>= %d stars), boresight uniform on sphere: %.4f\n", min_stars, r.uniform_probability);
  if (!dirs.empty()) {
    std::printf("P(>= %d stars), boresight near targets:     %.4f\n", min_stars, r.target_probability);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nanosatellite attitude determination and control simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and write timeseries.csv and summary.json");
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  run->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Output directory (overrides the scenario)");

  auto* tle = app.add_subcommand("tle", "Two-line element utilities");
  tle->require_subcommand(1);
  auto* tle_parse = tle->add_subcommand("parse", "Decode a TLE file and print its elements");
  std::string tle_file;
  tle_parse->add_option("file", tle_file, "TLE file")->required()->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Recompute the summary from an output directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "Directory holding timeseries.csv")->required();

  auto* orbit = app.add_subcommand("orbit", "Propagate a TLE and write the orbit CSV");
  std::string orbit_tle;
  std::string orbit_out = "orbit.csv";
  double orbit_duration = 5891.0;
  double orbit_dt = 1.0;
  bool two_body = false;
  orbit->add_option("--tle", orbit_tle, "TLE file")->required()->check(CLI::ExistingFile);
  orbit->add_option("--duration", orbit_duration, "Seconds to propagate")->check(CLI::PositiveNumber);
  orbit->add_option("--dt", orbit_dt, "Step in seconds")->check(CLI::PositiveNumber);
  orbit->add_option("--out", orbit_out, "Output CSV");
  orbit->add_flag("--two-body", two_body, "Disable all perturbations");

  auto* stars = app.add_subcommand("stars", "Star-tracker catalog coverage diagnostic");
  std::string catalog = adcs::default_star_catalog_path();
  double fov = 15.0;
  int min_stars = 4;
  int samples = 200000;
  std::uint64_t star_seed = 1;
  std::vector<std::string> targets;
  stars->add_option("--catalog", catalog, "Catalog CSV");
  stars->add_option("--fov", fov, "FOV half-angle in degrees");
  stars->add_option("--min-stars", min_stars, "Stars needed for a solution");
  stars->add_option("--samples", samples, "Monte-Carlo samples");
  stars->add_option("--seed", star_seed, "Sampling seed");
  stars->add_option("--target", targets, "Restrict boresights to this star's neighbourhood");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, seed, out);
    if (*tle_parse) return cmd_tle(tle_file);
    if (*report) return cmd_report(report_dir);
    if (*orbit) return cmd_orbit(orbit_tle, orbit_duration, orbit_dt, orbit_out, !two_body);
    if (*stars) return cmd_stars(catalog, fov, min_stars, samples, star_seed, targets);
  } catch (const Error& e) {
    std::fprintf(stderr, "adcs-sim: %s: %s\n", adcs::to_string(e.code()), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "adcs-sim: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
