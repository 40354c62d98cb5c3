#pragma once

// TLE ingestion and fixed-step propagation of the perturbed two-body problem.
// Units: km, km/s, km/s^2 for orbit states; areas in m^2 and masses in kg.

#include <functional>
#include <string>
#include <vector>

#include "adcs/environment.hpp"
#include "adcs/math_core.hpp"

namespace adcs {

struct Tle {
  std::string name;
  int catalog_number = 0;
  int epoch_year = 0;        // two-digit
  double epoch_day = 0.0;    // fractional day of year
  double epoch_jd = 0.0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double eccentricity = 0.0;
  double arg_perigee_deg = 0.0;
  double mean_anomaly_deg = 0.0;
  double mean_motion_rev_day = 0.0;
  double bstar = 0.0;
};

/// Standard TLE line checksum (digits sum, '-' counts 1, modulo 10) over columns 1-68.
int tle_checksum(const std::string& line);

/// Decodes a two-line set. Throws kTleLineNumber, kTleChecksum or kTleFormat.
Tle parse_tle(const std::string& line1, const std::string& line2);

/// Reads 2-line or 3-line (named) element sets from a file.
std::vector<Tle> read_tle_file(const std::string& path);

struct OrbitElements {
  double semi_major_axis_km = 0.0;
  double eccentricity = 0.0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double arg_perigee_deg = 0.0;
  double true_anomaly_deg = 0.0;

  double period_s(const PhysicalConstants& c = kConstants) const;
  double perigee_altitude_km(const PhysicalConstants& c = kConstants) const;
  double apogee_altitude_km(const PhysicalConstants& c = kConstants) const;
};

struct OrbitState {
  Vec3 r = Vec3::Zero();  // km, ECI
  Vec3 v = Vec3::Zero();  // km/s, ECI
};

/// Newton solve of Kepler's equation, M and E in radians. Throws
/// kKeplerNoConvergence after 50 iterations.
double solve_kepler(double mean_anomaly, double eccentricity);
double true_from_eccentric(double eccentric_anomaly, double eccentricity);

/// Mean elements treated as osculating; a from the mean motion.
OrbitElements elements_from_tle(const Tle& tle, const PhysicalConstants& c = kConstants);
OrbitState elements_to_state(const OrbitElements& el, const PhysicalConstants& c = kConstants);
OrbitElements state_to_elements(const OrbitState& x, const PhysicalConstants& c = kConstants);

double specific_energy(const OrbitState& x, const PhysicalConstants& c = kConstants);

struct PerturbationSwitches {
  bool j2 = true;
  bool drag = true;
  bool srp = true;
  bool third_body = true;
};

Vec3 accel_two_body(const Vec3& r, const PhysicalConstants& c = kConstants);
Vec3 accel_j2(const Vec3& r, const PhysicalConstants& c = kConstants);

/// Co-rotating atmosphere drag. Throws kOutOfRange when the altitude leaves the table.
Vec3 accel_drag(const OrbitState& x, double area_m2, double cd, double mass_kg,
                const AtmosphereTable& table = AtmosphereTable::standard(),
                const PhysicalConstants& c = kConstants);

/// Absorbing flat plate, directed away from the Sun; zero in eclipse.
Vec3 accel_srp(const Vec3& r, const Vec3& e_sun, double area_m2, double cr, double mass_kg,
               bool in_eclipse, const PhysicalConstants& c = kConstants);

/// Lunar tidal acceleration (direct minus indirect term).
Vec3 accel_third_body(const Vec3& r, const Vec3& r_moon,
                      const PhysicalConstants& c = kConstants);

struct ProjectedAreas {
  double drag_m2 = 0.04;
  double srp_m2 = 0.04;
};

/// Supplies attitude-dependent projected areas for a given time and orbit state.
using AreaProvider = std::function<ProjectedAreas(double t, const OrbitState&)>;

struct OrbitModel {
  PerturbationSwitches switches{};
  double mass_kg = 7.0;
  double cd = 2.6;
  double cr = 1.5;
  EpochTime epoch{};
  const AtmosphereTable* atmosphere = &AtmosphereTable::standard();
  PhysicalConstants constants{};
};

/// Total acceleration (km/s^2) at time t.
Vec3 orbit_acceleration(const OrbitModel& model, double t, const OrbitState& x,
                        const ProjectedAreas& areas);

/// One RK4 step; areas are held over the step. Errors are rethrown with the time stamp.
OrbitState step_orbit(const OrbitModel& model, double t, const OrbitState& x, double dt,
                      const ProjectedAreas& areas);

struct OrbitSample {
  double t = 0.0;
  OrbitState x;
  bool eclipse = false;
};

/// Integrates from t = 0 to t_end at fixed dt; one sample per step including t = 0.
std::vector<OrbitSample> propagate(const OrbitState& x0, const OrbitModel& model,
                                   const AreaProvider& areas, double dt, double t_end);

/// CSV with header `t,rx,ry,rz,vx,vy,vz,eclipse_flag`.
void write_orbit_csv(const std::vector<OrbitSample>& samples, const std::string& path);

}  // namespace adcs
