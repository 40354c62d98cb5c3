#include "adcs/sensing.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef ADCS_DATA_DIR
#define ADCS_DATA_DIR "data"
#endif

namespace adcs {

namespace {

// Parses "a:b:c" into three non-negative fields and a sign.
bool parse_sexagesimal(const std::string& text, double& value) {
  int a = 0, b = 0;
  double c = 0.0;
  std::string s = text;
  while (!s.empty() && s.front() == ' ') s.erase(0, 1);
  double sign = 1.0;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sign = -1.0;
    s.erase(0, 1);
  }
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d:%d:%lf%c", &a, &b, &c, &tail) != 3) return false;
  if (a < 0 || b < 0 || b >= 60 || c < 0.0 || c >= 60.0) return false;
  value = sign * (a + b / 60.0 + c / 3600.0);
  return true;
}

}  // namespace

double parse_ra_hms(const std::string& text) {
  double h = 0.0;
  if (!parse_sexagesimal(text, h) || h < 0.0 || h >= 24.0) {
    throw Error(ErrorCode::kInvalidArgument, "bad right ascension '" + text + "'");
  }
  return h;
}

double parse_dec_dms(const std::string& text) {
  double d = 0.0;
  if (!parse_sexagesimal(text, d) || d < -90.0 || d > 90.0) {
    throw Error(ErrorCode::kInvalidArgument, "bad declination '" + text + "'");
  }
  return d;
}

Vec3 catalog_direction(const StarCatalogEntry& e) {
  const double ra = e.ra_hours * 15.0 * kDeg;
  const double dec = e.dec_deg * kDeg;
  return Vec3(std::cos(dec) * std::cos(ra), std::cos(dec) * std::sin(ra), std::sin(dec));
}

std::vector<StarCatalogEntry> load_star_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open star catalog: " + path);
  std::vector<StarCatalogEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("name,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kInvalidArgument,
                  path + ":" + std::to_string(line_no) + ": expected name,ra_hms,dec_dms,vmag");
    }
    StarCatalogEntry e;
    e.name = fields[0];
    e.ra_hours = parse_ra_hms(fields[1]);
    e.dec_deg = parse_dec_dms(fields[2]);
    e.vmag = std::stod(fields[3]);
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "star catalog is empty: " + path);
  return out;
}

std::string default_star_catalog_path() { return std::string(ADCS_DATA_DIR) + "/star_catalog.csv"; }

void SensorSuite::validate() const {
  if (!(sun_sigma_deg >= 0.0) || !(mag_sigma_deg >= 0.0) || !(tracker_sigma_arcsec >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sensors: accuracies must be non-negative");
  }
  for (double fov : {sun_fov_half_deg, tracker_fov_half_deg}) {
    if (!(fov > 0.0 && fov <= 90.0)) {
      throw Error(ErrorCode::kInvalidArgument, "sensors: FOV half-angle must be in (0, 90] deg");
    }
  }
  if (min_stars < 2 || !(tracker_startup_s >= 0.0) || std::abs(tracker_boresight.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "sensors: need min_stars >= 2, startup >= 0 and a unit boresight");
  }
}

Mat3 random_small_rotation(Rng& rng, double sigma_rad) {
  if (sigma_rad == 0.0) return Mat3::Identity();
  std::normal_distribution<double> n(0.0, sigma_rad / std::sqrt(2.0));
  const Vec3 phi(n(rng), n(rng), n(rng));
  const double angle = phi.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, phi / angle).toRotationMatrix();
}

SunMeasurement sun_sensor_measure(const Quaternion& q, const Vec3& sun_eci, bool in_eclipse,
                                  const SensorSuite& suite, Rng& rng) {
  if (in_eclipse) return {};
  const Vec3 s = quat_to_dcm(q) * sun_eci.normalized();
  const Mat3 noise = random_small_rotation(rng, suite.sun_sigma_deg * kDeg);
  // Largest |component| is the cosine to the closest face boresight.
  if (s.cwiseAbs().maxCoeff() < std::cos(suite.sun_fov_half_deg * kDeg)) return {};
  return SunMeasurement{(noise * s).normalized(), true};
}

Vec3 magnetometer_measure(const Quaternion& q, const Vec3& b_eci, const SensorSuite& suite,
                          Rng& rng) {
  return random_small_rotation(rng, suite.mag_sigma_deg * kDeg) * (quat_to_dcm(q) * b_eci);
}

const char* to_string(TrackerStatus s) {
  switch (s) {
    case TrackerStatus::kStarting: return "starting";
    case TrackerStatus::kOk: return "ok";
    case TrackerStatus::kInsufficientStars: return "insufficient_stars";
    case TrackerStatus::kSunBlinded: return "sun_blinded";
  }
  return "unknown";
}

TrackerMeasurement star_tracker_measure(const Quaternion& q,
                                        const std::vector<StarCatalogEntry>& catalog, double t,
                                        const Vec3& sun_eci, bool in_eclipse,
                                        const SensorSuite& suite, Rng& rng) {
  TrackerMeasurement out;
  if (t < suite.tracker_startup_s) return out;
  const Mat3 A = quat_to_dcm(q);
  const Vec3 boresight_eci = A.transpose() * suite.tracker_boresight;
  const double cos_fov = std::cos(suite.tracker_fov_half_deg * kDeg);
  for (const auto& entry : catalog) {
    const Vec3 d = catalog_direction(entry);
    if (boresight_eci.dot(d) > cos_fov) out.stars.push_back(StarObservation{A * d, d});
  }
  out.visible = static_cast<int>(out.stars.size());
  if (!in_eclipse && boresight_eci.dot(sun_eci.normalized()) > std::cos(suite.sun_avoidance_deg * kDeg)) {
    out.stars.clear();
    out.status = TrackerStatus::kSunBlinded;
    return out;
  }
  if (out.visible < suite.min_stars) {
    out.stars.clear();
    out.status = TrackerStatus::kInsufficientStars;
    return out;
  }
  const double sigma = suite.tracker_sigma_arcsec * kArcsec;
  for (auto& s : out.stars) s.body = (random_small_rotation(rng, sigma) * s.body).normalized();
  out.status = TrackerStatus::kOk;
  return out;
}

int stars_in_cone(const std::vector<Vec3>& dirs, const Vec3& boresight, double half_angle) {
  const double c = std::cos(half_angle);
  int n = 0;
  for (const Vec3& d : dirs) n += boresight.dot(d) > c ? 1 : 0;
  return n;
}

CoverageReport star_coverage(const std::vector<StarCatalogEntry>& catalog, double fov_half_deg,
                             int min_stars, int samples, std::uint64_t seed,
                             const std::vector<Vec3>& targets) {
  std::vector<Vec3> dirs;
  for (const auto& e : catalog) dirs.push_back(catalog_direction(e));
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double half = fov_half_deg * kDeg;
  CoverageReport r;
  r.samples = samples;
  int hits_uniform = 0;
  int hits_target = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 b = Vec3(n(rng), n(rng), n(rng)).normalized();
    hits_uniform += stars_in_cone(dirs, b, half) >= min_stars ? 1 : 0;
    if (targets.empty()) continue;
    // Boresight uniform within the FOV cone around a target.
    const Vec3& t = targets[static_cast<std::size_t>(i) % targets.size()];
    const double cos_theta = 1.0 - u(rng) * (1.0 - std::cos(half));
    const double phi = 2.0 * kPi * u(rng);
    const Vec3 e1 = t.unitOrthogonal();
    const Vec3 e2 = t.cross(e1);
    const double sin_theta = std::sqrt(1.0 - cos_theta * cos_theta);
    const Vec3 bt = cos_theta * t + sin_theta * (std::cos(phi) * e1 + std::sin(phi) * e2);
    hits_target += stars_in_cone(dirs, bt, half) >= min_stars ? 1 : 0;
  }
  r.uniform_probability = static_cast<double>(hits_uniform) / samples;
  r.target_probability = targets.empty() ? 0.0 : static_cast<double>(hits_target) / samples;
  return r;
}

}  // namespace adcs
