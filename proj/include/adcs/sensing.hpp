#pragma once

// Sun sensors, magnetometer and star tracker. Noise is a small random rotation
// applied to the true body-frame vector, so measured vectors keep their norm.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adcs/math_core.hpp"

namespace adcs {

struct StarCatalogEntry {
  std::string name;
  double ra_hours = 0.0;  // decimal hours
  double dec_deg = 0.0;   // decimal degrees
  double vmag = 0.0;
};

/// "hh:mm:ss.sss" -> decimal hours. Throws kInvalidArgument.
double parse_ra_hms(const std::string& text);
/// "[+-]dd:mm:ss.sss" -> decimal degrees. Throws kInvalidArgument.
double parse_dec_dms(const std::string& text);

/// [cos(dec) cos(ra), cos(dec) sin(ra), sin(dec)].
Vec3 catalog_direction(const StarCatalogEntry& entry);

/// CSV with header `name,ra_hms,dec_dms,vmag`.
std::vector<StarCatalogEntry> load_star_catalog(const std::string& path);

/// Path of the catalog shipped in data/.
std::string default_star_catalog_path();

struct SensorSuite {
  double sun_sigma_deg = 1.25;
  double sun_fov_half_deg = 53.96;
  double mag_sigma_deg = 1.0;
  double tracker_sigma_arcsec = 70.0;
  double tracker_fov_half_deg = 15.0;
  double tracker_startup_s = 3600.0;
  int min_stars = 4;
  double sun_avoidance_deg = 30.0;
  Vec3 tracker_boresight = Vec3::UnitX();  // body frame
  std::uint64_t seed = 1;

  /// Throws kInvalidArgument for non-positive sigmas or FOVs outside (0, 90].
  void validate() const;
};

using Rng = std::mt19937_64;

/// Random rotation whose rotation vector has independent N(0, (sigma/sqrt 2)^2)
/// components; a fixed unit vector then shows an RMS angular error of sigma.
/// Returns the identity for sigma == 0.
Mat3 random_small_rotation(Rng& rng, double sigma_rad);

struct SunMeasurement {
  Vec3 body = Vec3::Zero();
  bool valid = false;
};

/// Invalid in eclipse or when no face boresight (+-body axes) is within the
/// per-face FOV half-angle of the Sun.
SunMeasurement sun_sensor_measure(const Quaternion& q_true, const Vec3& sun_eci, bool in_eclipse,
                                  const SensorSuite& suite, Rng& rng);

/// Body-frame field (T) with rotational noise.
Vec3 magnetometer_measure(const Quaternion& q_true, const Vec3& b_eci, const SensorSuite& suite,
                          Rng& rng);

struct StarObservation {
  Vec3 body;
  Vec3 eci;
};

enum class TrackerStatus { kStarting, kOk, kInsufficientStars, kSunBlinded };
const char* to_string(TrackerStatus s);

struct TrackerMeasurement {
  std::vector<StarObservation> stars;
  TrackerStatus status = TrackerStatus::kStarting;
  int visible = 0;  // stars inside the FOV, reported even when too few
};

/// Stars within the FOV half-angle of the boresight, with rotational noise.
/// Empty before the startup delay, when the Sun is within the avoidance cone
/// (sunlit only), or when fewer than min_stars are visible.
TrackerMeasurement star_tracker_measure(const Quaternion& q_true,
                                        const std::vector<StarCatalogEntry>& catalog, double t,
                                        const Vec3& sun_eci, bool in_eclipse,
                                        const SensorSuite& suite, Rng& rng);

/// Number of catalog stars within `half_angle_rad` of an inertial boresight.
int stars_in_cone(const std::vector<Vec3>& star_dirs, const Vec3& boresight_eci,
                  double half_angle_rad);

struct CoverageReport {
  double uniform_probability = 0.0;  // boresight uniform on the sphere
  double target_probability = 0.0;   // boresight within the FOV of a named target
  int samples = 0;
};

/// Monte-Carlo probability of at least `min_stars` in the FOV.
CoverageReport star_coverage(const std::vector<StarCatalogEntry>& catalog, double fov_half_deg,
                             int min_stars, int samples, std::uint64_t seed,
                             const std::vector<Vec3>& targets = {});

struct SensorFrame {
  double t = 0.0;
  SunMeasurement sun;
  Vec3 mag_body = Vec3::Zero();
  bool mag_valid = false;
  TrackerMeasurement tracker;
  Vec3 sun_eci = Vec3::Zero();
  Vec3 mag_eci = Vec3::Zero();
};

}  // namespace adcs
