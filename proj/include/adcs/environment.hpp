#pragma once

// Time-dependent environment: Sun and Moon ephemerides, tilted-dipole
// geomagnetic field, piecewise-exponential atmosphere, cylindrical shadow.

#include <string>
#include <vector>

#include "adcs/math_core.hpp"

namespace adcs {

struct PhysicalConstants {
  double mu_earth_km3_s2 = 398600.4418;
  double mu_moon_km3_s2 = 4902.800066;
  double earth_radius_km = 6378.137;
  double j2 = 1.08262668e-3;
  double earth_rotation_rad_s = 7.2921159e-5;
  double solar_flux_w_m2 = 1361.0;
  double speed_of_light_m_s = 299792458.0;
  double dipole_strength_t_km3 = 3.12e-5 * 6378.137 * 6378.137 * 6378.137;  // B0 * Re^3
  double dipole_tilt_deg = 11.5;
  double dipole_longitude_deg = -72.0;  // east longitude of the northern geomagnetic pole

  double solar_pressure_n_m2() const { return solar_flux_w_m2 / speed_of_light_m_s; }
};

inline const PhysicalConstants kConstants{};

/// Simulation clock: seconds since the scenario epoch plus the epoch itself.
struct EpochTime {
  double t_s = 0.0;
  double epoch_jd_utc = 2451545.0;

  double julian_date() const { return epoch_jd_utc + t_s / 86400.0; }
  EpochTime at(double t) const { return EpochTime{t, epoch_jd_utc}; }
};

double julian_date(int year, int month, int day, int hour = 0, int minute = 0,
                   double second = 0.0);

/// Julian date of a TLE epoch field (two-digit year, fractional day of year).
double julian_date_from_tle_epoch(int two_digit_year, double day_of_year);

/// Parse "YYYY-MM-DDTHH:MM:SS[.sss][Z]".
double julian_date_from_iso8601(const std::string& text);

/// Greenwich mean sidereal angle (rad) for a UT1~UTC Julian date.
double gmst_rad(double jd);

inline constexpr double kObliquityDeg = 23.44;
inline constexpr double kMoonOrbitRadiusKm = 384400.0;
inline constexpr double kMoonPeriodDays = 27.32;
inline constexpr double kMoonInclinationToEclipticDeg = 5.145;

/// Unit Earth-to-Sun vector, circular ecliptic orbit with a 365.25-day period.
Vec3 sun_direction(const EpochTime& t);

/// Moon position (km, ECI) on a circular orbit inclined to the ecliptic.
Vec3 moon_position(const EpochTime& t);

/// Unit dipole moment direction in ECI (points toward the southern geomagnetic pole).
Vec3 dipole_axis_eci(const EpochTime& t, const PhysicalConstants& c = kConstants);

/// Tilted, Earth-fixed dipole field (T, ECI components). Throws kSubsurface
/// for |r| <= Re.
Vec3 magnetic_field(const Vec3& r_eci_km, const EpochTime& t,
                    const PhysicalConstants& c = kConstants);

struct AtmosphereRow {
  double base_altitude_km;
  double base_density_kg_m3;
  double scale_height_km;
};

class AtmosphereTable {
 public:
  /// Validates ordering and positivity; throws kInvalidArgument.
  explicit AtmosphereTable(std::vector<AtmosphereRow> rows);

  /// Textbook exponential model, 0-1000 km.
  static const AtmosphereTable& standard();

  /// CSV with header `h_km,rho_kg_m3,H_km`.
  static AtmosphereTable load_csv(const std::string& path);

  const std::vector<AtmosphereRow>& rows() const { return rows_; }
  double min_altitude_km() const { return rows_.front().base_altitude_km; }
  double max_altitude_km() const { return rows_.back().base_altitude_km; }

  /// Density (kg/m^3); throws kOutOfRange outside the table.
  double density(double altitude_km) const;

 private:
  std::vector<AtmosphereRow> rows_;
};

inline double atmosphere_density(double altitude_km,
                                 const AtmosphereTable& table = AtmosphereTable::standard()) {
  return table.density(altitude_km);
}

/// Cylindrical umbra test: r . e_sun < -sqrt(|r|^2 - Re^2).
bool eclipse(const Vec3& r_eci_km, const Vec3& e_sun, double earth_radius_km = kConstants.earth_radius_km);

}  // namespace adcs
