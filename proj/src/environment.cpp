#include "adcs/environment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adcs {

double julian_date(int year, int month, int day, int hour, int minute, double second) {
  // Meeus, Gregorian calendar.
  int y = year;
  int m = month;
  if (m <= 2) {
    y -= 1;
    m += 12;
  }
  const int a = y / 100;
  const int b = 2 - a + a / 4;
  const double day_fraction = (hour + minute / 60.0 + second / 3600.0) / 24.0;
  return std::floor(365.25 * (y + 4716)) + std::floor(30.6001 * (m + 1)) + day + b - 1524.5 +
         day_fraction;
}

double julian_date_from_tle_epoch(int two_digit_year, double day_of_year) {
  const int year = two_digit_year < 57 ? 2000 + two_digit_year : 1900 + two_digit_year;
  return julian_date(year, 1, 1) + day_of_year - 1.0;
}

double julian_date_from_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  const int n = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lf", &y, &mo, &d, &h, &mi, &s);
  if (n < 3 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
      s < 0.0 || s >= 61.0) {
    throw Error(ErrorCode::kInvalidArgument, "bad ISO-8601 timestamp: " + text);
  }
  return julian_date(y, mo, d, h, mi, s);
}

double gmst_rad(double jd) {
  const double deg = 280.46061837 + 360.98564736629 * (jd - 2451545.0);
  return std::fmod(deg, 360.0) * kDeg;
}

Vec3 sun_direction(const EpochTime& t) {
  const double days = t.julian_date() - 2451545.0;
  const double lon = (280.460 + 360.0 / 365.25 * days) * kDeg;
  const double eps = kObliquityDeg * kDeg;
  return Vec3(std::cos(lon), std::cos(eps) * std::sin(lon), std::sin(eps) * std::sin(lon));
}

Vec3 moon_position(const EpochTime& t) {
  const double days = t.julian_date() - 2451545.0;
  // Node held at its J2000 longitude; argument of latitude advances uniformly.
  const double node = 125.08 * kDeg;
  const double u = (93.272 + 360.0 / kMoonPeriodDays * days) * kDeg;
  const double inc = kMoonInclinationToEclipticDeg * kDeg;
  const Vec3 ecliptic(std::cos(node) * std::cos(u) - std::sin(node) * std::sin(u) * std::cos(inc),
                      std::sin(node) * std::cos(u) + std::cos(node) * std::sin(u) * std::cos(inc),
                      std::sin(u) * std::sin(inc));
  const double eps = kObliquityDeg * kDeg;
  const Vec3 equatorial(ecliptic.x(),
                        std::cos(eps) * ecliptic.y() - std::sin(eps) * ecliptic.z(),
                        std::sin(eps) * ecliptic.y() + std::cos(eps) * ecliptic.z());
  return kMoonOrbitRadiusKm * equatorial;
}

Vec3 dipole_axis_eci(const EpochTime& t, const PhysicalConstants& c) {
  const double colat = c.dipole_tilt_deg * kDeg;
  const double lon = c.dipole_longitude_deg * kDeg + gmst_rad(t.julian_date());
  const Vec3 north_pole(std::sin(colat) * std::cos(lon), std::sin(colat) * std::sin(lon),
                        std::cos(colat));
  return -north_pole;
}

Vec3 magnetic_field(const Vec3& r_eci_km, const EpochTime& t, const PhysicalConstants& c) {
  const double r = r_eci_km.norm();
  if (!(r > c.earth_radius_km)) {
    throw Error(ErrorCode::kSubsurface, "magnetic_field: position at or below Earth's surface");
  }
  const Vec3 m = dipole_axis_eci(t, c);
  const Vec3 rhat = r_eci_km / r;
  return c.dipole_strength_t_km3 / (r * r * r) * (3.0 * m.dot(rhat) * rhat - m);
}

AtmosphereTable::AtmosphereTable(std::vector<AtmosphereRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw Error(ErrorCode::kInvalidArgument, "atmosphere table is empty");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.base_density_kg_m3 > 0.0) || !(r.scale_height_km > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "atmosphere table: non-positive density or scale height");
    }
    if (i > 0 && !(r.base_altitude_km > rows_[i - 1].base_altitude_km &&
                   r.base_density_kg_m3 < rows_[i - 1].base_density_kg_m3)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "atmosphere table: altitudes must increase and densities decrease");
    }
  }
}

const AtmosphereTable& AtmosphereTable::standard() {
  static const AtmosphereTable table({
      {0, 1.225, 7.249},        {25, 3.899e-2, 6.349},    {30, 1.774e-2, 6.682},
      {40, 3.972e-3, 7.554},    {50, 1.057e-3, 8.382},    {60, 3.206e-4, 7.714},
      {70, 8.770e-5, 6.549},    {80, 1.905e-5, 5.799},    {90, 3.396e-6, 5.382},
      {100, 5.297e-7, 5.877},   {110, 9.661e-8, 7.263},   {120, 2.438e-8, 9.473},
      {130, 8.484e-9, 12.636},  {140, 3.845e-9, 16.149},  {150, 2.070e-9, 22.523},
      {180, 5.464e-10, 29.740}, {200, 2.789e-10, 37.105}, {250, 7.248e-11, 45.546},
      {300, 2.418e-11, 53.628}, {350, 9.518e-12, 53.298}, {400, 3.725e-12, 58.515},
      {450, 1.585e-12, 60.828}, {500, 6.967e-13, 63.822}, {600, 1.454e-13, 71.835},
      {700, 3.614e-14, 88.667}, {800, 1.170e-14, 124.64}, {900, 5.245e-15, 181.05},
      {1000, 3.019e-15, 268.00},
  });
  return table;
}

AtmosphereTable AtmosphereTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open atmosphere table: " + path);
  std::vector<AtmosphereRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("h_km", 0) == 0) continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    AtmosphereRow row{};
    if (!(fields >> row.base_altitude_km >> row.base_density_kg_m3 >> row.scale_height_km)) {
      throw Error(ErrorCode::kInvalidArgument, "atmosphere table: malformed row '" + line + "'");
    }
    rows.push_back(row);
  }
  return AtmosphereTable(std::move(rows));
}

double AtmosphereTable::density(double h) const {
  if (!(h >= min_altitude_km() && h <= max_altitude_km())) {
    throw Error(ErrorCode::kOutOfRange,
                "atmosphere: altitude " + std::to_string(h) + " km outside table");
  }
  auto it = std::upper_bound(rows_.begin(), rows_.end(), h,
                             [](double v, const AtmosphereRow& r) { return v < r.base_altitude_km; });
  const AtmosphereRow& row = *(it - 1);
  return row.base_density_kg_m3 * std::exp(-(h - row.base_altitude_km) / row.scale_height_km);
}

bool eclipse(const Vec3& r, const Vec3& e_sun, double earth_radius_km) {
  const double r2 = r.squaredNorm() - earth_radius_km * earth_radius_km;
  if (r2 <= 0.0) return true;
  return r.dot(e_sun) < -std::sqrt(r2);
}

}  // namespace adcs
