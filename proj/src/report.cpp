#include "adcs/mission.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace adcs {

namespace {

namespace fs = std::filesystem;

constexpr const char* kColumns =
    "t,q1,q2,q3,q4,wx,wy,wz,q1_est,q2_est,q3_est,q4_est,wx_est,wy_est,wz_est,mode,target,desat,"
    "source,Lx_cmd,Ly_cmd,Lz_cmd,Lx_real,Ly_real,Lz_real,hdot_x,hdot_y,hdot_z,hx,hy,hz,mx,my,mz,"
    "pointing_error_deg,est_error_arcsec,eclipse,sun_valid,mag_valid,stars,wheel_saturated,lyapunov";

class Line {
 public:
  void num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    sep();
    out_.append(buf, r.ptr);
  }
  void vec(const Vec3& v) {
    for (int i = 0; i < 3; ++i) num(v[i]);
  }
  void integer(long v) {
    sep();
    out_ += std::to_string(v);
  }
  void text(const char* s) {
    sep();
    out_ += s;
  }
  const std::string& str() const { return out_; }

 private:
  void sep() {
    if (!first_) out_ += ',';
    first_ = false;
  }
  std::string out_;
  bool first_ = true;
};

double parse_double(const std::string& f, int line_no) {
  double v = 0.0;
  const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
  if (r.ec != std::errc() || r.ptr != f.data() + f.size()) {
    throw Error(ErrorCode::kIo, "timeseries line " + std::to_string(line_no) + ": bad number '" + f + "'");
  }
  return v;
}

SensorSource source_from_string(const std::string& s) {
  for (SensorSource src : {SensorSource::kNone, SensorSource::kSunMag, SensorSource::kStarTracker}) {
    if (s == to_string(src)) return src;
  }
  throw Error(ErrorCode::kIo, "timeseries: unknown source '" + s + "'");
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double rms(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Start of the first window of length >= hold over which pred holds.
template <typename Pred>
std::optional<double> first_sustained(const std::vector<TimeSeriesRecord>& series, double hold,
                                      Pred pred) {
  std::optional<double> start;
  for (const auto& r : series) {
    if (!pred(r)) {
      start.reset();
      continue;
    }
    if (!start) start = r.t;
    if (r.t - *start >= hold - 1e-9) return start;
  }
  return std::nullopt;
}

}  // namespace

void emit_csv(const RunResult& run, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const RunMetadata& m = run.meta;
  std::string names;
  for (std::size_t i = 0; i < m.target_names.size(); ++i) names += (i ? ";" : "") + m.target_names[i];
  out << "# " << kCsvSchema << "\n"
      << "# name=" << m.name << "\n"
      << "# seed=" << m.seed << "\n"
      << "# start_mode=" << to_string(m.start_mode) << "\n"
      << "# targets=" << names << "\n"
      << "# track_duration_s=" << fmt(m.track_duration_s) << "\n"
      << "# orbit_period_s=" << fmt(m.orbit_period_s) << "\n"
      << "# detumbled_rate_deg_s=" << fmt(m.thresholds.detumbled_rate_deg_s) << "\n"
      << "# detumbled_hold_s=" << fmt(m.thresholds.detumbled_hold_s) << "\n"
      << "# wheel_torque_max_Nm=" << fmt(m.limits.wheel_torque_max) << "\n"
      << "# wheel_momentum_max_Nms=" << fmt(m.limits.wheel_momentum_max) << "\n"
      << "# dipole_max_Am2=" << fmt(m.limits.dipole_max) << "\n"
      << "# limit_violations=" << run.limit_violations << "\n"
      << "# safe_hold_entries=" << run.safe_hold_entries << "\n"
      << kColumns << "\n";
  for (const auto& r : run.series) {
    Line l;
    l.num(r.t);
    for (int i = 0; i < 4; ++i) l.num(r.q_true[i]);
    l.vec(r.w_true);
    for (int i = 0; i < 4; ++i) l.num(r.q_est[i]);
    l.vec(r.w_est);
    l.text(to_string(r.mode));
    l.integer(r.target);
    l.integer(r.desat);
    l.text(to_string(r.source));
    l.vec(r.torque_cmd);
    l.vec(r.torque_real);
    l.vec(r.h_dot);
    l.vec(r.h);
    l.vec(r.dipole);
    l.num(r.pointing_error_deg);
    l.num(r.est_error_arcsec);
    l.integer(r.eclipse);
    l.integer(r.sun_valid);
    l.integer(r.mag_valid);
    l.integer(r.stars);
    l.integer(r.wheel_saturated);
    l.num(r.lyapunov);
    out << l.str() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "error writing " + path);
}

RunResult read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  RunResult run;
  std::map<std::string, std::string> meta;
  std::string line;
  int line_no = 0;
  bool schema_seen = false;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      if (body == kCsvSchema) schema_seen = true;
      const auto eq = body.find('=');
      if (eq != std::string::npos) meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (!header_seen) {
      if (line != kColumns) throw Error(ErrorCode::kIo, path + ": unexpected column header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 42) {
      throw Error(ErrorCode::kIo, path + ":" + std::to_string(line_no) + ": expected 42 fields");
    }
    std::size_t k = 0;
    auto d = [&]() { return parse_double(f[k++], line_no); };
    auto v3 = [&]() {
      Vec3 v;
      for (int i = 0; i < 3; ++i) v[i] = d();
      return v;
    };
    auto q4 = [&]() {
      Vec4 v;
      for (int i = 0; i < 4; ++i) v[i] = d();
      return Quaternion(v);
    };
    TimeSeriesRecord r;
    r.t = d();
    r.q_true = q4();
    r.w_true = v3();
    r.q_est = q4();
    r.w_est = v3();
    r.mode = mode_from_string(f[k++]);
    r.target = static_cast<int>(d());
    r.desat = d() != 0.0;
    r.source = source_from_string(f[k++]);
    r.torque_cmd = v3();
    r.torque_real = v3();
    r.h_dot = v3();
    r.h = v3();
    r.dipole = v3();
    r.pointing_error_deg = d();
    r.est_error_arcsec = d();
    r.eclipse = d() != 0.0;
    r.sun_valid = d() != 0.0;
    r.mag_valid = d() != 0.0;
    r.stars = static_cast<int>(d());
    r.wheel_saturated = d() != 0.0;
    r.lyapunov = d();
    run.series.push_back(r);
  }
  if (!schema_seen || !header_seen) throw Error(ErrorCode::kIo, path + ": not an adcs-sim timeseries");
  auto num = [&](const char* key, double fallback) {
    auto it = meta.find(key);
    return it == meta.end() ? fallback : parse_double(it->second, 0);
  };
  RunMetadata& m = run.meta;
  m.name = meta["name"];
  m.seed = static_cast<std::uint64_t>(num("seed", 0));
  m.start_mode = meta.count("start_mode") ? mode_from_string(meta["start_mode"]) : Mode::kDetumble;
  std::stringstream names(meta["targets"]);
  std::string name;
  while (std::getline(names, name, ';')) m.target_names.push_back(name);
  m.track_duration_s = num("track_duration_s", 900.0);
  m.orbit_period_s = num("orbit_period_s", 0.0);
  m.thresholds.detumbled_rate_deg_s = num("detumbled_rate_deg_s", m.thresholds.detumbled_rate_deg_s);
  m.thresholds.detumbled_hold_s = num("detumbled_hold_s", m.thresholds.detumbled_hold_s);
  m.limits.wheel_torque_max = num("wheel_torque_max_Nm", m.limits.wheel_torque_max);
  m.limits.wheel_momentum_max = num("wheel_momentum_max_Nms", m.limits.wheel_momentum_max);
  m.limits.dipole_max = num("dipole_max_Am2", m.limits.dipole_max);
  run.limit_violations = static_cast<int>(num("limit_violations", 0));
  run.safe_hold_entries = static_cast<int>(num("safe_hold_entries", 0));
  return run;
}

bool SummaryReport::requirements_pass() const {
  for (const std::string* r : {&req_imaging_15min, &req_multiple_targets, &req_pointing_1deg,
                               &req_determination_10arcsec}) {
    if (*r == "fail") return false;
  }
  return limit_violations == 0;
}

nlohmann::json SummaryReport::to_json() const {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto vec = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  json j;
  j["detumble_time_s"] = opt(detumble_time_s);
  j["detumble_time_true_rate_s"] = opt(detumble_time_true_s);
  j["targets"] = json::array();
  for (const auto& t : targets) {
    j["targets"].push_back({{"name", t.name},
                            {"track_time_s", t.track_time_s},
                            {"pointing_error_rms_deg", t.rms_deg},
                            {"pointing_error_max_deg", t.max_deg},
                            {"completed", t.completed}});
  }
  j["max_wheel_momentum_Nms"] = vec(max_wheel_momentum);
  j["max_wheel_torque_Nm"] = vec(max_wheel_torque);
  j["max_dipole_Am2"] = vec(max_dipole);
  j["saturation_events"] = saturation_events;
  j["limit_violations"] = limit_violations;
  j["determination_rms_arcsec"] = opt(determination_rms_arcsec);
  j["determination_samples"] = determination_samples;
  j["requirements"] = {{"imaging_15min", req_imaging_15min},
                       {"multiple_targets", req_multiple_targets},
                       {"pointing_requirement", req_pointing_1deg},
                       {"pointing_goal_1arcmin", goal_pointing_1arcmin},
                       {"determination_10arcsec", req_determination_10arcsec}};
  j["requirements_pass"] = requirements_pass();
  return j;
}

SummaryReport summary_report(const RunResult& run) {
  SummaryReport s;
  const auto& series = run.series;
  const RunMetadata& m = run.meta;
  s.limit_violations = run.limit_violations;

  if (m.start_mode == Mode::kDetumble) {
    const double limit = m.thresholds.detumbled_rate_deg_s * kDeg;
    s.detumble_time_s = first_sustained(series, m.thresholds.detumbled_hold_s,
                                        [&](const TimeSeriesRecord& r) { return r.w_est.norm() < limit; });
    s.detumble_time_true_s = first_sustained(series, m.thresholds.detumbled_hold_s,
                                             [&](const TimeSeriesRecord& r) { return r.w_true.norm() < limit; });
  }

  bool prev_sat = false;
  std::vector<double> det_err;
  bool any_pointing = false;
  for (const auto& r : series) {
    s.max_wheel_momentum = s.max_wheel_momentum.cwiseMax(r.h.cwiseAbs());
    s.max_wheel_torque = s.max_wheel_torque.cwiseMax(r.h_dot.cwiseAbs());
    s.max_dipole = s.max_dipole.cwiseMax(r.dipole.cwiseAbs());
    if (r.wheel_saturated && !prev_sat) ++s.saturation_events;
    prev_sat = r.wheel_saturated;
    if (r.mode == Mode::kTrack && r.source == SensorSource::kStarTracker) det_err.push_back(r.est_error_arcsec);
    any_pointing = any_pointing || r.mode == Mode::kSlew || r.mode == Mode::kTrack;
  }
  const double record_dt = series.size() > 1 ? series[1].t - series[0].t : 0.0;

  std::vector<double> track_start;
  std::vector<double> track_end;
  for (std::size_t i = 0; i < m.target_names.size(); ++i) {
    TargetSummary ts;
    ts.name = m.target_names[i];
    std::vector<const TimeSeriesRecord*> track;
    for (const auto& r : series) {
      if (r.mode == Mode::kTrack && r.target == static_cast<int>(i)) track.push_back(&r);
    }
    if (!track.empty()) {
      const double t0 = track.front()->t;
      const double t1 = track.back()->t + record_dt;
      ts.track_time_s = t1 - t0;
      std::vector<double> window;
      for (const auto* r : track) {
        ts.max_deg = std::max(ts.max_deg, r->pointing_error_deg);
        if (r->t >= t1 - 900.0 - 1e-9) window.push_back(r->pointing_error_deg);
      }
      ts.rms_deg = rms(window);
      ts.completed = ts.track_time_s >= m.track_duration_s - 1e-6;
      if (ts.completed) {
        track_start.push_back(t0);
        track_end.push_back(t1);
      }
    }
    s.targets.push_back(ts);
  }

  if (any_pointing && !s.targets.empty()) {
    bool all_done = true;
    bool all_within = true;
    bool all_goal = true;
    bool any_track = false;
    for (const auto& t : s.targets) {
      all_done = all_done && t.completed && t.track_time_s >= 900.0 - 1e-6;
      if (t.track_time_s > 0.0) {
        any_track = true;
        all_within = all_within && t.max_deg < 1.0 && t.rms_deg < 1.0;
        all_goal = all_goal && t.rms_deg < 1.0 / 60.0;
      }
    }
    s.req_imaging_15min = all_done ? "pass" : "fail";
    if (any_track) {
      s.req_pointing_1deg = all_within ? "pass" : "fail";
      s.goal_pointing_1arcmin = all_goal ? "pass" : "fail";
    } else {
      s.req_pointing_1deg = "fail";
      s.goal_pointing_1arcmin = "fail";
    }
    if (s.targets.size() >= 2) {
      const bool two = track_start.size() >= 2 && track_end[1] - track_start[0] <= m.orbit_period_s;
      s.req_multiple_targets = two ? "pass" : "fail";
    }
  }
  if (!det_err.empty()) {
    s.determination_rms_arcsec = rms(det_err);
    s.determination_samples = static_cast<int>(det_err.size());
    s.req_determination_10arcsec = *s.determination_rms_arcsec < 10.0 ? "pass" : "fail";
  }
  return s;
}

SummaryReport write_outputs(const RunResult& run, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  emit_csv(run, (fs::path(dir) / "timeseries.csv").string());
  const SummaryReport s = summary_report(run);
  std::ofstream out(fs::path(dir) / "summary.json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (fs::path(dir) / "summary.json").string());
  out << s.to_json().dump(2) << "\n";
  return s;
}

}  // namespace adcs
