#include "adcs/mission.hpp"

#include <cstdio>

namespace adcs {

namespace {

constexpr double kLimitSlack = 1e-9;

std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }

struct Estimator {
  Quaternion q;
  Quaternion q_predicted;
  Vec3 w = Vec3::Zero();
  bool have_rate = false;
  bool filter_primed = false;
  RateEstimator rate;
  SensorSource last_source = SensorSource::kNone;
  Lowpass1State detumble_filter;
  Lowpass2State pointing_filter;
  Lowpass1State bdot_filter;
  Vec3 b_prev = Vec3::Zero();
  bool have_b_prev = false;
  Vec3 bdot = Vec3::Zero();

  void prime(Mode mode) {
    if (mode == Mode::kDetumble) {
      detumble_filter.reset(w);
    } else {
      pointing_filter.reset(w);
    }
    filter_primed = have_rate;
  }
};

}  // namespace

SensorSource sensor_selection(double t, bool /*in_eclipse*/, TrackerStatus tracker, bool sun_valid,
                              bool mag_valid, double tracker_startup_s) {
  if (t >= tracker_startup_s && tracker == TrackerStatus::kOk) return SensorSource::kStarTracker;
  if (sun_valid && mag_valid) return SensorSource::kSunMag;
  return SensorSource::kNone;
}

Quaternion propagate_quaternion(const Quaternion& q, const Vec3& w, double dt) {
  const double rate = w.norm();
  if (rate == 0.0) return q;
  const double half = 0.5 * rate * dt;
  const Vec4 next = std::cos(half) * q.coeffs() + std::sin(half) / rate * (u_matrix(w) * q.coeffs());
  return Quaternion(next.normalized());
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const PhysicalConstants& c = kConstants;
  const AtmosphereTable& atmosphere = cfg.atmosphere ? *cfg.atmosphere : AtmosphereTable::standard();
  const SpacecraftProperties& sc = cfg.spacecraft;
  const Mat3& J = sc.inertia;

  OrbitModel orbit;
  orbit.switches = cfg.perturbations;
  orbit.mass_kg = sc.mass_kg;
  orbit.cd = sc.cd;
  orbit.cr = sc.cr;
  orbit.epoch = EpochTime{0.0, cfg.epoch_jd};
  orbit.atmosphere = &atmosphere;
  const OrbitElements elements = elements_from_tle(cfg.tle);

  RunResult result;
  result.meta.name = cfg.name;
  result.meta.seed = cfg.seed;
  result.meta.track_duration_s = cfg.track_duration_s;
  for (const auto& t : cfg.targets) result.meta.target_names.push_back(t.name);
  result.meta.thresholds = cfg.thresholds;
  result.meta.limits = cfg.limits;
  result.meta.start_mode = cfg.start_mode;
  result.meta.orbit_period_s = elements.period_s();

  const std::int64_t orbit_ms = to_ms(cfg.steps.orbit_dt_s);
  const std::int64_t detumble_ms = to_ms(cfg.steps.attitude_dt_detumble_s);
  const std::int64_t pointing_ms = to_ms(cfg.steps.attitude_dt_pointing_s);
  const std::int64_t end_ms = to_ms(cfg.duration_s);

  Rng rng(cfg.seed);
  CoupledState s{AttitudeState{cfg.q0, cfg.w0}, cfg.h0};
  WheelState wheels = WheelState::orthogonal(cfg.h0);
  Estimator est;

  auto areas_for = [&](const Quaternion& q, double t, const OrbitState& x) {
    const Mat3 A = quat_to_dcm(q);
    const Vec3 v_rel = x.v - Vec3(0.0, 0.0, c.earth_rotation_rad_s).cross(x.r);
    return ProjectedAreas{sc.projected_area(A * v_rel), sc.projected_area(A * sun_direction(orbit.epoch.at(t)))};
  };

  std::int64_t orbit_t0 = 0;
  OrbitState x0 = elements_to_state(elements);
  OrbitState x1 = step_orbit(orbit, 0.0, x0, cfg.steps.orbit_dt_s, areas_for(s.att.q, 0.0, x0));

  Mode mode = cfg.start_mode;
  std::size_t target = 0;
  bool desat = false;
  double hold = 0.0;
  double safe_hold = 0.0;
  double track_start = 0.0;
  double k_det = 0.0;
  double next_k_det_update = 0.0;
  long step_index = 0;

  const ControlGains base_gains = cfg.gains;
  const PhaseThresholds& th = cfg.thresholds;
  const ActuatorLimits& lim = cfg.limits;

  std::int64_t t_ms = 0;
  while (t_ms < end_ms && mode != Mode::kDone) {
    if (t_ms >= orbit_t0 + orbit_ms) {
      orbit_t0 += orbit_ms;
      x0 = x1;
      const double t_orbit = orbit_t0 / 1000.0;
      x1 = step_orbit(orbit, t_orbit, x0, cfg.steps.orbit_dt_s, areas_for(s.att.q, t_orbit, x0));
    }
    std::int64_t dt_ms = mode == Mode::kDetumble ? detumble_ms : pointing_ms;
    dt_ms = std::min(dt_ms, orbit_t0 + orbit_ms - t_ms);
    const double t = t_ms / 1000.0;
    const double dt = dt_ms / 1000.0;

    // Environment along the orbit, linearly interpolated inside the orbit step.
    const double frac = static_cast<double>(t_ms - orbit_t0) / static_cast<double>(orbit_ms);
    const OrbitState x{x0.r + frac * (x1.r - x0.r), x0.v + frac * (x1.v - x0.v)};
    const EpochTime now = orbit.epoch.at(t);
    const Vec3 sun_eci = sun_direction(now);
    const bool in_eclipse = eclipse(x.r, sun_eci, c.earth_radius_km);
    const Vec3 b_eci = magnetic_field(x.r, now);

    // Sensing.
    const SunMeasurement sun = sun_sensor_measure(s.att.q, sun_eci, in_eclipse, cfg.sensors, rng);
    const Vec3 b_meas = magnetometer_measure(s.att.q, b_eci, cfg.sensors, rng);
    const TrackerMeasurement tracker =
        star_tracker_measure(s.att.q, cfg.catalog, t, sun_eci, in_eclipse, cfg.sensors, rng);
    SensorSource source = sensor_selection(t, in_eclipse, tracker.status, sun.valid, true,
                                           cfg.sensors.tracker_startup_s);

    // Determination.
    std::optional<Quaternion> q_meas;
    try {
      if (source == SensorSource::kStarTracker) {
        std::vector<VectorObservation> obs;
        for (const auto& star : tracker.stars) obs.push_back({star.body, star.eci});
        q_meas = quest(obs, std::vector<double>(obs.size(), 1.0));
      } else if (source == SensorSource::kSunMag) {
        q_meas = dcm_to_quat(triad(sun.body, b_meas.normalized(), sun_eci, b_eci.normalized()));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGeometry && e.code() != ErrorCode::kAmbiguous) throw;
      q_meas.reset();
      source = SensorSource::kNone;
    }
    if (q_meas) {
      est.q = q_meas->dot(est.q_predicted) < 0.0 ? -*q_meas : *q_meas;
      if (source != est.last_source) est.rate.reset();
      if (const auto raw = est.rate.update(est.q, t)) {
        if (!est.filter_primed) {
          est.detumble_filter.reset(*raw);
          est.pointing_filter.reset(*raw);
          est.filter_primed = true;
        }
        const FilterParams fp{cfg.filters.detumble_cutoff, cfg.filters.pointing_cutoff,
                              cfg.filters.pointing_damping, dt};
        est.w = mode == Mode::kDetumble ? lowpass1_step(est.detumble_filter, *raw, fp)
                                        : lowpass2_step(est.pointing_filter, *raw, fp);
        est.have_rate = true;
      }
    } else {
      est.rate.reset();
      est.q = est.q_predicted;
    }
    est.last_source = source;

    // Control.
    Vec3 dipole_cmd = Vec3::Zero();
    Vec3 h_dot = Vec3::Zero();
    Vec3 torque_cmd = Vec3::Zero();
    bool saturated = false;
    const std::size_t active = std::min(target, cfg.targets.size() - 1);
    const TargetSpec& goal = cfg.targets[active];
    const Mat3 A_est = quat_to_dcm(est.q);

    if (mode == Mode::kDetumble) {
      const Vec3 b_unit = b_meas.normalized();
      if (est.have_b_prev) {
        const FilterParams fb{cfg.filters.bdot_cutoff, 1.0, 1.0, dt};
        est.bdot = lowpass1_step(est.bdot_filter, (b_unit - est.b_prev) / dt, fb);
      }
      est.b_prev = b_unit;
      est.have_b_prev = true;

      if (t >= next_k_det_update) {
        const Vec3 normal = x.r.cross(x.v).normalized();
        const double xi_m = geomagnetic_inclination(normal, dipole_axis_eci(now));
        k_det = cfg.k_det_override.value_or(compute_k_det(elements.period_s(), xi_m, J));
        next_k_det_update = t + elements.period_s();
      }
      ControlGains g = base_gains;
      g.k_det = k_det;
      const Vec3 w_for_law = est.have_rate ? est.w : Vec3::Constant(g.detumble_threshold);
      const bool coasting = source == SensorSource::kNone && w_for_law.norm() < g.detumble_threshold;
      if (!coasting) dipole_cmd = detumble_command(w_for_law, b_meas, est.bdot, g, lim).dipole;
    } else {
      const Mat3 A_e = attitude_error(A_est, goal.A_d);
      torque_cmd = tracking_torque(est.w, A_e, goal, J, base_gains);
      const double h_peak = s.h_wheels.cwiseAbs().maxCoeff();
      if (!desat && h_peak >= th.desat_start_fraction * lim.wheel_momentum_max * (1.0 - 1e-9)) desat = true;
      if (desat && h_peak < th.desat_stop_fraction * lim.wheel_momentum_max) desat = false;
      Vec3 bias = Vec3::Zero();
      WheelState ws = wheels;
      ws.h = s.h_wheels;
      if (desat) {
        const DesaturationCommand d = desaturation_command(ws, b_meas, lim, th.desat_min_angle_deg * kDeg,
                                                             th.desat_stop_fraction * lim.wheel_momentum_max);
        bias = d.wheel_torque;
        dipole_cmd = d.dipole;
      }
      const AllocationResult alloc = wheel_allocation(torque_cmd, est.w, ws, dt, lim, bias);
      h_dot = alloc.h_dot;
      saturated = alloc.torque_saturated || alloc.momentum_saturated;
    }

    // Environment torques on the true state, held over the step.
    const Quaternion& q = s.att.q;
    Vec3 external = Vec3::Zero();
    if (cfg.disturbances.gravity_gradient) external += torque_gravity_gradient(q, x.r, J, c);
    if (cfg.disturbances.aero) external += torque_aero(q, x, sc, atmosphere, c);
    if (cfg.disturbances.srp) external += torque_srp(q, sun_eci, in_eclipse, sc, c);
    const Vec3 m_total = dipole_cmd + (cfg.disturbances.magnetic ? sc.residual_dipole : Vec3::Zero());
    external += torque_magnetic(q, b_eci, m_total);

    for (int i = 0; i < 3; ++i) {
      if (std::abs(h_dot[i]) > lim.wheel_torque_max * (1.0 + kLimitSlack)) ++result.limit_violations;
      if (std::abs(dipole_cmd[i]) > lim.dipole_max * (1.0 + kLimitSlack)) ++result.limit_violations;
    }

    if (step_index % cfg.output.decimation == 0) {
      TimeSeriesRecord r;
      r.t = t;
      r.q_true = q;
      r.w_true = s.att.w;
      r.q_est = est.q;
      r.w_est = est.w;
      r.mode = mode;
      r.target = static_cast<int>(active);
      r.desat = desat;
      r.source = source;
      r.torque_cmd = torque_cmd;
      r.torque_real = -wheels.distribution * h_dot - s.att.w.cross(wheels.distribution * s.h_wheels);
      r.h_dot = h_dot;
      r.h = s.h_wheels;
      r.dipole = dipole_cmd;
      const Mat3 A_e_true = attitude_error(quat_to_dcm(q), goal.A_d);
      r.pointing_error_deg = pointing_error(A_e_true) / kDeg;
      r.est_error_arcsec = rotation_angle_between(est.q, q) / kArcsec;
      r.eclipse = in_eclipse;
      r.sun_valid = sun.valid;
      r.mag_valid = true;
      r.stars = tracker.visible;
      r.wheel_saturated = saturated;
      r.lyapunov = lyapunov_value(s.att.w, A_e_true, J, base_gains.k_a);
      result.series.push_back(r);
    }

    try {
      s = step_coupled(s, h_dot, external, J, wheels.distribution, dt);
    } catch (const Error& e) {
      char stamp[96];
      std::snprintf(stamp, sizeof stamp, " (mode %s, t = %.3f s)", to_string(mode), t);
      throw Error(e.code(), e.what() + std::string(stamp));
    }
    for (int i = 0; i < 3; ++i) {
      if (std::abs(s.h_wheels[i]) > lim.wheel_momentum_max * (1.0 + kLimitSlack)) ++result.limit_violations;
    }
    est.q_predicted = propagate_quaternion(est.q, est.w, dt);
    t_ms += dt_ms;
    ++step_index;
    const double t_next = t_ms / 1000.0;

    // Phase logic on the onboard estimates.
    const double rate_est = est.w.norm();
    if (mode == Mode::kDetumble) {
      const bool calm = est.have_rate && source != SensorSource::kNone &&
                        rate_est < th.detumble_exit_rate_deg_s * kDeg;
      hold = calm ? hold + dt : 0.0;
      if (hold >= th.detumble_exit_hold_s - 1e-9) {
        hold = 0.0;
        est.have_b_prev = false;
        if (cfg.stop_after_detumble) {
          mode = Mode::kDone;
        } else {
          mode = Mode::kSlew;
          est.prime(mode);
        }
      }
      continue;
    }
    if (rate_est > th.safe_hold_rate_deg_s * kDeg) {
      safe_hold += dt;
      if (safe_hold >= th.safe_hold_hold_s - 1e-9) {
        mode = Mode::kDetumble;
        ++result.safe_hold_entries;
        safe_hold = 0.0;
        hold = 0.0;
        desat = false;
        est.prime(mode);
        continue;
      }
    } else {
      safe_hold = 0.0;
    }
    if (mode == Mode::kSlew) {
      const double err = pointing_error(attitude_error(A_est, goal.A_d));
      hold = err < th.slew_exit_error_deg * kDeg ? hold + dt : 0.0;
      if (hold >= th.slew_exit_hold_s - 1e-9) {
        mode = Mode::kTrack;
        track_start = t_next;
        hold = 0.0;
      }
    } else if (mode == Mode::kTrack && t_next - track_start >= cfg.track_duration_s - 1e-9) {
      ++target;
      hold = 0.0;
      mode = target >= cfg.targets.size() ? Mode::kDone : Mode::kSlew;
    }
  }
  return result;
}

}  // namespace adcs
