#include "adcs/mission.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>

namespace adcs {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, "config: " + where + ": " + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

std::string join(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

double get_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(join(where, key), "expected a number");
  return v.get<double>();
}

bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(join(where, key), "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback,
                       const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(join(where, key), "expected a string");
  return v.get<std::string>();
}

bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

Vec3 get_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) fail(where, "expected an array of 3 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

Tle parse_tle_block(const json& j, const std::string& base_dir) {
  check_keys(j, {"file", "line1", "line2"}, "tle");
  if (j.contains("file")) {
    if (j.contains("line1") || j.contains("line2")) fail("tle", "give either file or line1/line2");
    return read_tle_file(resolve(get_string(j, "file", "", "tle"), base_dir)).front();
  }
  if (!j.contains("line1") || !j.contains("line2")) fail("tle", "needs file or line1 and line2");
  return parse_tle(get_string(j, "line1", "", "tle"), get_string(j, "line2", "", "tle"));
}

void parse_sensors(const json& j, SensorSuite& s) {
  const std::string w = "sensors";
  check_keys(j, {"sun_sigma_deg", "sun_fov_half_deg", "mag_sigma_deg", "tracker_sigma_arcsec",
                 "tracker_fov_half_deg", "tracker_startup_s", "min_stars", "sun_avoidance_deg",
                 "tracker_boresight"},
             w);
  s.sun_sigma_deg = get_number(j, "sun_sigma_deg", s.sun_sigma_deg, w);
  s.sun_fov_half_deg = get_number(j, "sun_fov_half_deg", s.sun_fov_half_deg, w);
  s.mag_sigma_deg = get_number(j, "mag_sigma_deg", s.mag_sigma_deg, w);
  s.tracker_sigma_arcsec = get_number(j, "tracker_sigma_arcsec", s.tracker_sigma_arcsec, w);
  s.tracker_fov_half_deg = get_number(j, "tracker_fov_half_deg", s.tracker_fov_half_deg, w);
  s.tracker_startup_s = get_number(j, "tracker_startup_s", s.tracker_startup_s, w);
  s.min_stars = static_cast<int>(get_number(j, "min_stars", s.min_stars, w));
  s.sun_avoidance_deg = get_number(j, "sun_avoidance_deg", s.sun_avoidance_deg, w);
  if (j.contains("tracker_boresight")) {
    s.tracker_boresight = get_vec3(j.at("tracker_boresight"), w + ".tracker_boresight").normalized();
  }
}

void parse_gains(const json& j, ScenarioConfig& c) {
  const std::string w = "gains";
  check_keys(j, {"k_w", "k_a", "k_det", "detumble_threshold_deg_s"}, w);
  c.gains.k_w = get_number(j, "k_w", c.gains.k_w, w);
  c.gains.k_a = get_number(j, "k_a", c.gains.k_a, w);
  if (j.contains("k_det")) c.k_det_override = get_number(j, "k_det", 0.0, w);
  c.gains.detumble_threshold =
      get_number(j, "detumble_threshold_deg_s", c.gains.detumble_threshold / kDeg, w) * kDeg;
}

void parse_limits(const json& j, ActuatorLimits& l) {
  const std::string w = "limits";
  check_keys(j, {"wheel_torque_max_Nm", "wheel_momentum_max_Nms", "wheel_rotor_inertia_kg_m2",
                 "dipole_max_Am2"},
             w);
  l.wheel_torque_max = get_number(j, "wheel_torque_max_Nm", l.wheel_torque_max, w);
  l.wheel_momentum_max = get_number(j, "wheel_momentum_max_Nms", l.wheel_momentum_max, w);
  l.wheel_rotor_inertia = get_number(j, "wheel_rotor_inertia_kg_m2", l.wheel_rotor_inertia, w);
  l.dipole_max = get_number(j, "dipole_max_Am2", l.dipole_max, w);
}

void parse_filters(const json& j, FilterConfig& f) {
  const std::string w = "filters";
  check_keys(j, {"detumble_cutoff_rad_s", "bdot_cutoff_rad_s", "pointing_cutoff_rad_s",
                 "pointing_damping"},
             w);
  f.detumble_cutoff = get_number(j, "detumble_cutoff_rad_s", f.detumble_cutoff, w);
  f.bdot_cutoff = get_number(j, "bdot_cutoff_rad_s", f.bdot_cutoff, w);
  f.pointing_cutoff = get_number(j, "pointing_cutoff_rad_s", f.pointing_cutoff, w);
  f.pointing_damping = get_number(j, "pointing_damping", f.pointing_damping, w);
}

void parse_thresholds(const json& j, PhaseThresholds& t) {
  const std::string w = "thresholds";
  check_keys(j, {"detumble_exit_rate_deg_s", "detumble_exit_hold_s", "slew_exit_error_deg",
                 "slew_exit_hold_s", "safe_hold_rate_deg_s", "safe_hold_hold_s",
                 "detumbled_rate_deg_s", "detumbled_hold_s", "desat_start_fraction",
                 "desat_stop_fraction", "desat_min_angle_deg"},
             w);
  t.detumble_exit_rate_deg_s = get_number(j, "detumble_exit_rate_deg_s", t.detumble_exit_rate_deg_s, w);
  t.detumble_exit_hold_s = get_number(j, "detumble_exit_hold_s", t.detumble_exit_hold_s, w);
  t.slew_exit_error_deg = get_number(j, "slew_exit_error_deg", t.slew_exit_error_deg, w);
  t.slew_exit_hold_s = get_number(j, "slew_exit_hold_s", t.slew_exit_hold_s, w);
  t.safe_hold_rate_deg_s = get_number(j, "safe_hold_rate_deg_s", t.safe_hold_rate_deg_s, w);
  t.safe_hold_hold_s = get_number(j, "safe_hold_hold_s", t.safe_hold_hold_s, w);
  t.detumbled_rate_deg_s = get_number(j, "detumbled_rate_deg_s", t.detumbled_rate_deg_s, w);
  t.detumbled_hold_s = get_number(j, "detumbled_hold_s", t.detumbled_hold_s, w);
  t.desat_start_fraction = get_number(j, "desat_start_fraction", t.desat_start_fraction, w);
  t.desat_stop_fraction = get_number(j, "desat_stop_fraction", t.desat_stop_fraction, w);
  t.desat_min_angle_deg = get_number(j, "desat_min_angle_deg", t.desat_min_angle_deg, w);
}

void parse_steps(const json& j, StepConfig& s) {
  const std::string w = "steps";
  check_keys(j, {"orbit_dt_s", "attitude_dt_detumble_s", "attitude_dt_pointing_s"}, w);
  s.orbit_dt_s = get_number(j, "orbit_dt_s", s.orbit_dt_s, w);
  s.attitude_dt_detumble_s = get_number(j, "attitude_dt_detumble_s", s.attitude_dt_detumble_s, w);
  s.attitude_dt_pointing_s = get_number(j, "attitude_dt_pointing_s", s.attitude_dt_pointing_s, w);
}

void parse_perturbations(const json& j, PerturbationSwitches& p) {
  const std::string w = "perturbations";
  check_keys(j, {"j2", "drag", "srp", "third_body"}, w);
  p.j2 = get_bool(j, "j2", p.j2, w);
  p.drag = get_bool(j, "drag", p.drag, w);
  p.srp = get_bool(j, "srp", p.srp, w);
  p.third_body = get_bool(j, "third_body", p.third_body, w);
}

void parse_disturbances(const json& j, DisturbanceSwitches& d) {
  const std::string w = "disturbances";
  check_keys(j, {"gravity_gradient", "aero", "srp", "magnetic"}, w);
  d.gravity_gradient = get_bool(j, "gravity_gradient", d.gravity_gradient, w);
  d.aero = get_bool(j, "aero", d.aero, w);
  d.srp = get_bool(j, "srp", d.srp, w);
  d.magnetic = get_bool(j, "magnetic", d.magnetic, w);
}

TargetSpec parse_target(const json& j, std::size_t index,
                        const std::vector<StarCatalogEntry>& catalog) {
  const std::string w = "targets[" + std::to_string(index) + "]";
  if (j.is_string()) return parse_target(json{{"name", j}}, index, catalog);
  check_keys(j, {"name", "ra_hms", "dec_dms"}, w);
  const std::string name = get_string(j, "name", "", w);
  if (j.contains("ra_hms") != j.contains("dec_dms")) fail(w, "ra_hms and dec_dms go together");
  StarCatalogEntry e;
  e.name = name;
  if (j.contains("ra_hms")) {
    try {
      e.ra_hours = parse_ra_hms(get_string(j, "ra_hms", "", w));
      e.dec_deg = parse_dec_dms(get_string(j, "dec_dms", "", w));
    } catch (const Error& err) {
      fail(w, err.what());
    }
  } else {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const StarCatalogEntry& s) { return s.name == name; });
    if (it == catalog.end()) fail(w, "'" + name + "' is not in the star catalog");
    e = *it;
  }
  return TargetSpec::pointing_at(name, catalog_direction(e));
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::kDetumble: return "detumble";
    case Mode::kSlew: return "slew";
    case Mode::kTrack: return "track";
    case Mode::kDone: return "done";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::kDetumble, Mode::kSlew, Mode::kTrack, Mode::kDone}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown mode '" + s + "'");
}

const char* to_string(SensorSource s) {
  switch (s) {
    case SensorSource::kNone: return "none";
    case SensorSource::kSunMag: return "sun_mag";
    case SensorSource::kStarTracker: return "star_tracker";
  }
  return "unknown";
}

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& where, const std::string& what) { fail(where, what); };
  auto divides = [](double step, double outer) {
    const double ratio = outer / step;
    return step > 0.0 && std::abs(ratio - std::round(ratio)) < 1e-9 && std::round(ratio) >= 1.0;
  };
  auto whole_ms = [](double s) { return std::abs(s * 1000.0 - std::round(s * 1000.0)) < 1e-6; };
  if (!(steps.orbit_dt_s > 0.0) || !whole_ms(steps.orbit_dt_s)) {
    bad("steps.orbit_dt_s", "must be a positive whole number of milliseconds");
  }
  if (!divides(steps.attitude_dt_detumble_s, steps.orbit_dt_s) || !whole_ms(steps.attitude_dt_detumble_s)) {
    bad("steps.attitude_dt_detumble_s", "must divide steps.orbit_dt_s");
  }
  if (!divides(steps.attitude_dt_pointing_s, steps.orbit_dt_s) || !whole_ms(steps.attitude_dt_pointing_s)) {
    bad("steps.attitude_dt_pointing_s", "must divide steps.orbit_dt_s");
  }
  if (targets.empty()) bad("targets", "at least one target is required");
  if (!(track_duration_s > 0.0)) bad("track_duration_s", "must be positive");
  if (!(duration_s > 0.0)) bad("duration_s", "must be positive");
  if (output.decimation < 1) bad("output.decimation", "must be >= 1");
  if (start_mode == Mode::kDone) bad("start_mode", "cannot start in 'done'");
  if (catalog.empty()) bad("catalog", "star catalog is empty");
  if (!w0.allFinite() || std::abs(q0.norm() - 1.0) > 1e-6) bad("initial_attitude", "must be a unit quaternion");
  for (int i = 0; i < 3; ++i) {
    if (std::abs(h0[i]) > limits.wheel_momentum_max) {
      bad("initial_wheel_momentum_mNms", "exceeds the wheel momentum capacity");
    }
  }
  const PhaseThresholds& t = thresholds;
  if (!(t.desat_stop_fraction > 0.0 && t.desat_stop_fraction < t.desat_start_fraction &&
        t.desat_start_fraction <= 1.0)) {
    bad("thresholds", "need 0 < desat_stop_fraction < desat_start_fraction <= 1");
  }
  try {
    spacecraft.validate();
    sensors.validate();
    limits.validate();
    ControlGains g = gains;
    g.k_det = k_det_override.value_or(0.0);
    g.validate();
    FilterParams{filters.detumble_cutoff, filters.pointing_cutoff, filters.pointing_damping,
                 steps.attitude_dt_pointing_s}
        .validate();
    FilterParams{filters.bdot_cutoff, 1.0, 1.0, steps.attitude_dt_detumble_s}.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
}

ScenarioConfig config_from_json(const json& j, const std::string& base_dir) {
  check_keys(j, {"name", "tle", "epoch_utc", "initial_attitude", "initial_rate_deg_s", "tumble",
                 "initial_wheel_momentum_mNms", "start_mode", "stop_after_detumble", "spacecraft",
                 "sensors", "gains", "limits", "filters", "targets", "track_duration_s",
                 "thresholds", "steps", "perturbations", "disturbances", "seed", "duration_s",
                 "output", "catalog", "atmosphere"},
             "");
  ScenarioConfig c;
  c.name = get_string(j, "name", c.name, "");
  if (!j.contains("tle")) fail("tle", "required");
  c.tle = parse_tle_block(j.at("tle"), base_dir);
  c.epoch_jd = c.tle.epoch_jd;
  if (j.contains("epoch_utc")) {
    try {
      c.epoch_jd = julian_date_from_iso8601(get_string(j, "epoch_utc", "", ""));
    } catch (const Error& e) {
      fail("epoch_utc", e.what());
    }
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!is_count(s)) fail("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  const bool start_on_target = j.contains("initial_attitude") && j.at("initial_attitude") == "target";
  if (j.contains("initial_attitude") && !start_on_target) {
    const json& q = j.at("initial_attitude");
    if (!q.is_array() || q.size() != 4) fail("initial_attitude", "expected [q1, q2, q3, q4] or \"target\"");
    Vec4 v;
    for (int i = 0; i < 4; ++i) {
      if (!q[i].is_number()) fail("initial_attitude", "expected numbers");
      v[i] = q[i].get<double>();
    }
    if (std::abs(v.norm() - 1.0) > 1e-6) fail("initial_attitude", "must be a unit quaternion");
    c.q0 = Quaternion(v.normalized());
  }
  if (j.contains("initial_rate_deg_s") && j.contains("tumble")) {
    fail("tumble", "give either initial_rate_deg_s or tumble");
  }
  if (j.contains("initial_rate_deg_s")) {
    c.w0 = get_vec3(j.at("initial_rate_deg_s"), "initial_rate_deg_s") * kDeg;
  }
  if (j.contains("tumble")) {
    const json& t = j.at("tumble");
    check_keys(t, {"magnitude_deg_s", "seed"}, "tumble");
    const double magnitude = get_number(t, "magnitude_deg_s", 60.0, "tumble") * kDeg;
    std::uint64_t seed = c.seed;
    if (t.contains("seed")) {
      if (!is_count(t.at("seed"))) fail("tumble.seed", "expected a non-negative integer");
      seed = t.at("seed").get<std::uint64_t>();
    }
    // Axis drawn from its own stream so the noise sequence is unaffected.
    Rng rng(seed ^ 0x7475626d626c65ULL);
    std::normal_distribution<double> n(0.0, 1.0);
    const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
    c.w0 = magnitude * axis;
  }
  if (j.contains("initial_wheel_momentum_mNms")) {
    c.h0 = get_vec3(j.at("initial_wheel_momentum_mNms"), "initial_wheel_momentum_mNms") * 1e-3;
  }
  if (j.contains("start_mode")) {
    try {
      c.start_mode = mode_from_string(get_string(j, "start_mode", "", ""));
    } catch (const Error& e) {
      fail("start_mode", e.what());
    }
  }
  c.stop_after_detumble = get_bool(j, "stop_after_detumble", c.stop_after_detumble, "");
  if (j.contains("spacecraft")) {
    const json& s = j.at("spacecraft");
    try {
      c.spacecraft = s.is_string() ? load_spacecraft(resolve(s.get<std::string>(), base_dir))
                                   : spacecraft_from_json(s);
    } catch (const Error& e) {
      fail("spacecraft", e.what());
    }
  }
  if (j.contains("sensors")) parse_sensors(j.at("sensors"), c.sensors);
  c.sensors.seed = c.seed;
  if (j.contains("gains")) parse_gains(j.at("gains"), c);
  if (j.contains("limits")) parse_limits(j.at("limits"), c.limits);
  if (j.contains("filters")) parse_filters(j.at("filters"), c.filters);
  if (j.contains("thresholds")) parse_thresholds(j.at("thresholds"), c.thresholds);
  if (j.contains("steps")) parse_steps(j.at("steps"), c.steps);
  if (j.contains("perturbations")) parse_perturbations(j.at("perturbations"), c.perturbations);
  if (j.contains("disturbances")) parse_disturbances(j.at("disturbances"), c.disturbances);
  c.track_duration_s = get_number(j, "track_duration_s", c.track_duration_s, "");
  c.duration_s = get_number(j, "duration_s", c.duration_s, "");
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir", "decimation"}, "output");
    c.output.dir = resolve(get_string(o, "dir", c.output.dir, "output"), base_dir);
    c.output.decimation = static_cast<int>(get_number(o, "decimation", c.output.decimation, "output"));
  } else {
    c.output.dir = resolve(c.output.dir, base_dir);
  }
  const std::string catalog_path =
      j.contains("catalog") ? resolve(get_string(j, "catalog", "", ""), base_dir)
                            : default_star_catalog_path();
  try {
    c.catalog = load_star_catalog(catalog_path);
    if (j.contains("atmosphere")) {
      c.atmosphere = AtmosphereTable::load_csv(resolve(get_string(j, "atmosphere", "", ""), base_dir));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(j.contains("atmosphere") && c.catalog.size() ? "atmosphere" : "catalog", e.what());
  }
  if (!j.contains("targets") || !j.at("targets").is_array()) fail("targets", "expected a list");
  std::size_t i = 0;
  for (const json& t : j.at("targets")) c.targets.push_back(parse_target(t, i++, c.catalog));
  if (start_on_target && !c.targets.empty()) c.q0 = c.targets.front().q_d;
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  if (seed && j.is_object()) j["seed"] = *seed;
  return config_from_json(j, fs::path(path).parent_path().string());
}

}  // namespace adcs
