#include "adcs/orbit.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace adcs {

namespace {

using State6 = Eigen::Matrix<double, 6, 1>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_field(const std::string& line, std::size_t begin, std::size_t end,
                   const char* what) {
  std::string f = trim(line.substr(begin, end - begin));
  if (!f.empty() && f[0] == '+') f.erase(0, 1);
  if (!f.empty() && f[0] == '.') f.insert(0, "0");
  if (f.size() > 1 && f[0] == '-' && f[1] == '.') f.insert(1, "0");
  double value = 0.0;
  const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
  if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
    throw Error(ErrorCode::kTleFormat, std::string("TLE: cannot parse ") + what + " field '" +
                                           line.substr(begin, end - begin) + "'");
  }
  return value;
}

// Implied-decimal field with signed exponent, e.g. " 21796-4" -> 0.21796e-4.
double parse_exponent_field(const std::string& line, std::size_t begin, const char* what) {
  const std::string f = line.substr(begin, 8);
  const char sign = f[0];
  const std::string mantissa = trim(f.substr(1, 5));
  const std::string exponent = trim(f.substr(6, 2));
  if ((sign != ' ' && sign != '-' && sign != '+') || mantissa.empty() || exponent.empty()) {
    throw Error(ErrorCode::kTleFormat, std::string("TLE: cannot parse ") + what);
  }
  int m = 0;
  int e = 0;
  const auto r1 = std::from_chars(mantissa.data(), mantissa.data() + mantissa.size(), m);
  const char* ep = exponent.data();
  if (*ep == '+') ++ep;
  const auto r2 = std::from_chars(ep, exponent.data() + exponent.size(), e);
  if (r1.ec != std::errc() || r2.ec != std::errc() ||
      r1.ptr != mantissa.data() + mantissa.size() ||
      r2.ptr != exponent.data() + exponent.size()) {
    throw Error(ErrorCode::kTleFormat, std::string("TLE: cannot parse ") + what);
  }
  const double value = m * 1e-5 * std::pow(10.0, e);
  return sign == '-' ? -value : value;
}

std::string normalize_line(const std::string& raw) {
  std::string line = raw;
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\n')) {
    line.pop_back();
  }
  if (line.size() != 69) {
    throw Error(ErrorCode::kTleFormat,
                "TLE: line must be 69 characters, got " + std::to_string(line.size()));
  }
  return line;
}

void verify_checksum(const std::string& line, int line_number) {
  const char c = line[68];
  if (c < '0' || c > '9' || tle_checksum(line) != c - '0') {
    throw Error(ErrorCode::kTleChecksum,
                "TLE: checksum mismatch on line " + std::to_string(line_number));
  }
}

State6 pack(const OrbitState& x) {
  State6 s;
  s << x.r, x.v;
  return s;
}

OrbitState unpack(const State6& s) { return OrbitState{s.head<3>(), s.tail<3>()}; }

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

}  // namespace

int tle_checksum(const std::string& line) {
  int sum = 0;
  for (std::size_t i = 0; i < 68 && i < line.size(); ++i) {
    const char c = line[i];
    if (c >= '0' && c <= '9') sum += c - '0';
    if (c == '-') sum += 1;
  }
  return sum % 10;
}

Tle parse_tle(const std::string& raw1, const std::string& raw2) {
  if (raw1.empty() || raw1[0] != '1' || raw2.empty() || raw2[0] != '2') {
    throw Error(ErrorCode::kTleLineNumber, "TLE: expected lines numbered 1 and 2");
  }
  const std::string l1 = normalize_line(raw1);
  const std::string l2 = normalize_line(raw2);
  verify_checksum(l1, 1);
  verify_checksum(l2, 2);

  Tle t;
  t.catalog_number = static_cast<int>(parse_field(l1, 2, 7, "catalog number"));
  if (static_cast<int>(parse_field(l2, 2, 7, "catalog number")) != t.catalog_number) {
    throw Error(ErrorCode::kTleFormat, "TLE: catalog numbers of the two lines differ");
  }
  t.epoch_year = static_cast<int>(parse_field(l1, 18, 20, "epoch year"));
  t.epoch_day = parse_field(l1, 20, 32, "epoch day");
  t.epoch_jd = julian_date_from_tle_epoch(t.epoch_year, t.epoch_day);
  t.bstar = parse_exponent_field(l1, 53, "B* drag term");

  t.inclination_deg = parse_field(l2, 8, 16, "inclination");
  t.raan_deg = parse_field(l2, 17, 25, "RAAN");
  const std::string ecc = l2.substr(26, 7);
  if (ecc.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kTleFormat, "TLE: eccentricity field must be 7 digits");
  }
  t.eccentricity = parse_field("." + ecc, 0, 8, "eccentricity");
  t.arg_perigee_deg = parse_field(l2, 34, 42, "argument of perigee");
  t.mean_anomaly_deg = parse_field(l2, 43, 51, "mean anomaly");
  t.mean_motion_rev_day = parse_field(l2, 52, 63, "mean motion");

  if (!(t.eccentricity >= 0.0 && t.eccentricity < 1.0) ||
      !(t.inclination_deg >= 0.0 && t.inclination_deg <= 180.0) ||
      !(t.mean_motion_rev_day > 0.0)) {
    throw Error(ErrorCode::kTleFormat, "TLE: element out of range");
  }
  return t;
}

std::vector<Tle> read_tle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open TLE file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  std::vector<Tle> out;
  std::string pending_name;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l[0] == '1' && l.size() >= 2 && l[1] == ' ') {
      if (i + 1 >= lines.size()) {
        throw Error(ErrorCode::kTleFormat, "TLE file: line 1 without line 2");
      }
      Tle t = parse_tle(l, lines[i + 1]);
      t.name = pending_name;
      pending_name.clear();
      out.push_back(std::move(t));
      ++i;
    } else {
      pending_name = trim(l.rfind("0 ", 0) == 0 ? l.substr(2) : l);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kTleFormat, "TLE file contains no element sets: " + path);
  return out;
}

double OrbitElements::period_s(const PhysicalConstants& c) const {
  return 2.0 * kPi * std::sqrt(std::pow(semi_major_axis_km, 3) / c.mu_earth_km3_s2);
}

double OrbitElements::perigee_altitude_km(const PhysicalConstants& c) const {
  return semi_major_axis_km * (1.0 - eccentricity) - c.earth_radius_km;
}

double OrbitElements::apogee_altitude_km(const PhysicalConstants& c) const {
  return semi_major_axis_km * (1.0 + eccentricity) - c.earth_radius_km;
}

double solve_kepler(double M, double e) {
  const double m = std::remainder(M, 2.0 * kPi);
  const double turns = M - m;
  double E = e < 0.8 ? m : (m < 0.0 ? -kPi : kPi);
  for (int i = 0; i < 50; ++i) {
    const double f = E - e * std::sin(E) - m;
    const double step = f / (1.0 - e * std::cos(E));
    E -= step;
    if (std::abs(step) < 1e-14) return E + turns;
  }
  throw Error(ErrorCode::kKeplerNoConvergence, "Kepler iteration did not converge");
}

double true_from_eccentric(double E, double e) {
  return 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * E),
                          std::sqrt(1.0 - e) * std::cos(0.5 * E));
}

OrbitElements elements_from_tle(const Tle& tle, const PhysicalConstants& c) {
  const double n = tle.mean_motion_rev_day * 2.0 * kPi / 86400.0;
  OrbitElements el;
  el.semi_major_axis_km = std::cbrt(c.mu_earth_km3_s2 / (n * n));
  el.eccentricity = tle.eccentricity;
  el.inclination_deg = tle.inclination_deg;
  el.raan_deg = tle.raan_deg;
  el.arg_perigee_deg = tle.arg_perigee_deg;
  const double M = tle.mean_anomaly_deg * kDeg;
  el.true_anomaly_deg =
      wrap_deg(true_from_eccentric(solve_kepler(M, tle.eccentricity), tle.eccentricity) / kDeg);
  if (!(el.perigee_altitude_km(c) > 0.0)) {
    throw Error(ErrorCode::kSubsurface, "TLE: perigee below Earth's surface");
  }
  return el;
}

OrbitState elements_to_state(const OrbitElements& el, const PhysicalConstants& c) {
  const double a = el.semi_major_axis_km;
  const double e = el.eccentricity;
  const double p = a * (1.0 - e * e);
  const double nu = el.true_anomaly_deg * kDeg;
  const double r = p / (1.0 + e * std::cos(nu));
  const Vec3 r_pf(r * std::cos(nu), r * std::sin(nu), 0.0);
  const double k = std::sqrt(c.mu_earth_km3_s2 / p);
  const Vec3 v_pf(-k * std::sin(nu), k * (e + std::cos(nu)), 0.0);
  // Perifocal -> ECI: R3(-raan) R1(-i) R3(-argp).
  const Mat3 Q = (axis_rotation(2, el.arg_perigee_deg * kDeg) *
                  axis_rotation(0, el.inclination_deg * kDeg) *
                  axis_rotation(2, el.raan_deg * kDeg))
                     .transpose();
  return OrbitState{Q * r_pf, Q * v_pf};
}

OrbitElements state_to_elements(const OrbitState& x, const PhysicalConstants& c) {
  const double mu = c.mu_earth_km3_s2;
  const Vec3 h = x.r.cross(x.v);
  const Vec3 node = Vec3::UnitZ().cross(h);
  const Vec3 ev = ((x.v.squaredNorm() - mu / x.r.norm()) * x.r - x.r.dot(x.v) * x.v) / mu;
  OrbitElements el;
  el.semi_major_axis_km = 1.0 / (2.0 / x.r.norm() - x.v.squaredNorm() / mu);
  el.eccentricity = ev.norm();
  el.inclination_deg = std::acos(std::clamp(h.z() / h.norm(), -1.0, 1.0)) / kDeg;

  const bool equatorial = node.norm() < 1e-12 * h.norm();
  const bool circular = el.eccentricity < 1e-12;
  const Vec3 n_hat = equatorial ? Vec3::UnitX() : Vec3(node.normalized());
  el.raan_deg = equatorial ? 0.0 : wrap_deg(std::atan2(node.y(), node.x()) / kDeg);

  const Vec3 h_hat = h.normalized();
  auto angle_from = [&](const Vec3& from, const Vec3& to) {
    return std::atan2(h_hat.dot(from.cross(to)), from.dot(to));
  };
  if (circular) {
    el.arg_perigee_deg = 0.0;
    el.true_anomaly_deg = wrap_deg(angle_from(n_hat, x.r) / kDeg);
  } else {
    el.arg_perigee_deg = wrap_deg(angle_from(n_hat, ev) / kDeg);
    el.true_anomaly_deg = wrap_deg(angle_from(ev, x.r) / kDeg);
  }
  return el;
}

double specific_energy(const OrbitState& x, const PhysicalConstants& c) {
  return 0.5 * x.v.squaredNorm() - c.mu_earth_km3_s2 / x.r.norm();
}

Vec3 accel_two_body(const Vec3& r, const PhysicalConstants& c) {
  const double rn = r.norm();
  return -c.mu_earth_km3_s2 / (rn * rn * rn) * r;
}

Vec3 accel_j2(const Vec3& r, const PhysicalConstants& c) {
  const double rn = r.norm();
  const double r2 = rn * rn;
  const double z2 = r.z() * r.z() / r2;
  const double k = 1.5 * c.j2 * c.mu_earth_km3_s2 * c.earth_radius_km * c.earth_radius_km /
                   (r2 * r2 * rn);
  return k * Vec3(r.x() * (5.0 * z2 - 1.0), r.y() * (5.0 * z2 - 1.0), r.z() * (5.0 * z2 - 3.0));
}

Vec3 accel_drag(const OrbitState& x, double area_m2, double cd, double mass_kg,
                const AtmosphereTable& table, const PhysicalConstants& c) {
  const double rho = table.density(x.r.norm() - c.earth_radius_km);
  if (area_m2 == 0.0) return Vec3::Zero();
  const Vec3 omega(0.0, 0.0, c.earth_rotation_rad_s);
  const Vec3 v_rel = 1000.0 * (x.v - omega.cross(x.r));  // m/s
  const Vec3 a_m_s2 = -0.5 * rho * v_rel.norm() * v_rel * (cd * area_m2 / mass_kg);
  return a_m_s2 / 1000.0;
}

Vec3 accel_srp(const Vec3& /*r*/, const Vec3& e_sun, double area_m2, double cr, double mass_kg,
               bool in_eclipse, const PhysicalConstants& c) {
  if (in_eclipse) return Vec3::Zero();
  const double a_m_s2 = c.solar_pressure_n_m2() * cr * area_m2 / mass_kg;
  return -a_m_s2 / 1000.0 * e_sun;
}

Vec3 accel_third_body(const Vec3& r, const Vec3& r_moon, const PhysicalConstants& c) {
  const Vec3 d = r_moon - r;
  const double dn = d.norm();
  const double mn = r_moon.norm();
  return c.mu_moon_km3_s2 * (d / (dn * dn * dn) - r_moon / (mn * mn * mn));
}

Vec3 orbit_acceleration(const OrbitModel& m, double t, const OrbitState& x,
                        const ProjectedAreas& areas) {
  const PhysicalConstants& c = m.constants;
  if (!(x.r.norm() > c.earth_radius_km)) {
    throw Error(ErrorCode::kSubsurface, "orbit: trajectory reached Earth's surface");
  }
  Vec3 a = accel_two_body(x.r, c);
  if (m.switches.j2) a += accel_j2(x.r, c);
  if (m.switches.drag) a += accel_drag(x, areas.drag_m2, m.cd, m.mass_kg, *m.atmosphere, c);
  if (m.switches.srp) {
    const Vec3 e_sun = sun_direction(m.epoch.at(t));
    a += accel_srp(x.r, e_sun, areas.srp_m2, m.cr, m.mass_kg, eclipse(x.r, e_sun, c.earth_radius_km), c);
  }
  if (m.switches.third_body) a += accel_third_body(x.r, moon_position(m.epoch.at(t)), c);
  return a;
}

OrbitState step_orbit(const OrbitModel& model, double t, const OrbitState& x, double dt,
                      const ProjectedAreas& areas) {
  auto f = [&](double tt, const State6& s) -> State6 {
    const OrbitState xs = unpack(s);
    State6 d;
    d << xs.v, orbit_acceleration(model, tt, xs, areas);
    return d;
  };
  try {
    return unpack(rk4_step(f, t, pack(x), dt));
  } catch (const Error& e) {
    char stamp[64];
    std::snprintf(stamp, sizeof stamp, " (t = %.3f s)", t);
    throw Error(e.code(), e.what() + std::string(stamp));
  }
}

std::vector<OrbitSample> propagate(const OrbitState& x0, const OrbitModel& model,
                                   const AreaProvider& areas, double dt, double t_end) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "propagate: dt must be positive");
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  std::vector<OrbitSample> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  auto sample = [&](double t, const OrbitState& x) {
    const Vec3 e_sun = sun_direction(model.epoch.at(t));
    out.push_back(OrbitSample{t, x, eclipse(x.r, e_sun, model.constants.earth_radius_km)});
  };
  OrbitState x = x0;
  sample(0.0, x);
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const ProjectedAreas a = areas ? areas(t, x) : ProjectedAreas{};
    x = step_orbit(model, t, x, dt, a);
    sample((k + 1) * dt, x);
  }
  return out;
}

void write_orbit_csv(const std::vector<OrbitSample>& samples, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw Error(ErrorCode::kIo, "cannot write " + path);
  std::fprintf(f, "t,rx,ry,rz,vx,vy,vz,eclipse_flag\n");
  for (const auto& s : samples) {
    std::fprintf(f, "%.6f,%.9f,%.9f,%.9f,%.12f,%.12f,%.12f,%d\n", s.t, s.x.r.x(), s.x.r.y(),
                 s.x.r.z(), s.x.v.x(), s.x.v.y(), s.x.v.z(), s.eclipse ? 1 : 0);
  }
  std::fclose(f);
}

}  // namespace adcs
