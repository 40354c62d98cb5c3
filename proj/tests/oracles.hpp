#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library under test.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using V3 = Eigen::Vector3d;
using V4 = Eigen::Vector4d;
using M3 = Eigen::Matrix3d;
using M4 = Eigen::Matrix4d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

inline V3 cross(const V3& a, const V3& b) {
  return V3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

/// Frame rotation by `angle` about unit `axis`: components of a fixed vector
/// in the rotated frame are A v.
inline M3 frame_rotation(const V3& axis, double angle) {
  const V3 a = axis.normalized();
  M3 ax;
  ax << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
  return std::cos(angle) * M3::Identity() + (1.0 - std::cos(angle)) * a * a.transpose() -
         std::sin(angle) * ax;
}

/// Scalar-last quaternion of the same frame rotation.
inline V4 axis_angle_quaternion(const V3& axis, double angle) {
  const V3 a = axis.normalized();
  return V4(a[0] * std::sin(angle / 2), a[1] * std::sin(angle / 2), a[2] * std::sin(angle / 2),
            std::cos(angle / 2));
}

/// Rotation angle of a rotation matrix from its trace.
inline double rotation_angle(const M3& A) {
  return std::acos(std::clamp(0.5 * (A.trace() - 1.0), -1.0, 1.0));
}

inline V3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return V3(n(rng), n(rng), n(rng)).normalized();
}

inline M3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kPi);
  return frame_rotation(random_unit(rng), u(rng));
}

/// Eccentric anomaly by bisection on E - e sin E = M, M in [0, 2pi).
inline double kepler_bisection(double M, double e) {
  double lo = M - 1.0 - e;
  double hi = M + 1.0 + e;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - e * std::sin(mid) - M > 0.0) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Wahba optimum by dense symmetric eigendecomposition of the Davenport
/// matrix (scalar-last), built directly from the loss definition.
inline V4 wahba_eigen(const std::vector<V3>& body, const std::vector<V3>& ref,
                      const std::vector<double>& w) {
  M3 B = M3::Zero();
  V3 z = V3::Zero();
  for (std::size_t i = 0; i < body.size(); ++i) {
    B += w[i] * body[i] * ref[i].transpose();
    z += w[i] * cross(body[i], ref[i]);
  }
  const double sigma = B.trace();
  M4 K = M4::Zero();
  K.topLeftCorner<3, 3>() = B + B.transpose() - sigma * M3::Identity();
  K.topRightCorner<3, 1>() = z;
  K.bottomLeftCorner<1, 3>() = z.transpose();
  K(3, 3) = sigma;
  Eigen::SelfAdjointEigenSolver<M4> es(K);
  return es.eigenvectors().col(3);
}

/// Wahba loss of an attitude matrix.
inline double wahba_loss(const M3& A, const std::vector<V3>& body, const std::vector<V3>& ref,
                         const std::vector<double>& w) {
  double l = 0.0;
  for (std::size_t i = 0; i < body.size(); ++i) l += 0.5 * w[i] * (body[i] - A * ref[i]).squaredNorm();
  return l;
}

/// DCM of a scalar-last quaternion via the explicit element formulas.
inline M3 dcm(const V4& q) {
  const double a = q[0], b = q[1], c = q[2], d = q[3];
  M3 A;
  A << a * a - b * b - c * c + d * d, 2 * (a * b + c * d), 2 * (a * c - b * d),
      2 * (a * b - c * d), -a * a + b * b - c * c + d * d, 2 * (b * c + a * d),
      2 * (a * c + b * d), 2 * (b * c - a * d), -a * a - b * b + c * c + d * d;
  return A;
}

/// Continuous second-order low-pass unit-step response (underdamped).
inline double second_order_step(double wn, double xi, double t) {
  const double wd = wn * std::sqrt(1.0 - xi * xi);
  return 1.0 - std::exp(-xi * wn * t) * (std::cos(wd * t) + xi / std::sqrt(1.0 - xi * xi) * std::sin(wd * t));
}

/// Steady-state amplitude of a discrete filter driven by a unit sinusoid.
template <typename Step>
double sinusoid_gain(Step&& step, double omega, double dt, double settle_s, double measure_s) {
  double peak = 0.0;
  const int n_settle = static_cast<int>(settle_s / dt);
  const int n_total = n_settle + static_cast<int>(measure_s / dt);
  for (int k = 0; k < n_total; ++k) {
    const double y = step(std::sin(omega * k * dt));
    if (k >= n_settle) peak = std::max(peak, std::abs(y));
  }
  return peak;
}

/// Secular RAAN rate (rad/s) from J2.
inline double raan_rate_j2(double a_km, double e, double i_rad, double mu, double re, double j2) {
  const double n = std::sqrt(mu / (a_km * a_km * a_km));
  const double p = a_km * (1.0 - e * e);
  return -1.5 * j2 * n * (re / p) * (re / p) * std::cos(i_rad);
}

/// Fraction of a circular orbit of radius r spent in a cylindrical shadow
/// when the Sun lies in the orbit plane, by dense sampling of the geometry.
inline double shadow_fraction_sampled(double r, double re, int samples) {
  int dark = 0;
  for (int k = 0; k < samples; ++k) {
    const double u = 2.0 * kPi * (k + 0.5) / samples;
    const double x = r * std::cos(u);  // along the Sun line
    const double y = r * std::sin(u);
    if (x < 0.0 && std::abs(y) < re) ++dark;
  }
  return static_cast<double>(dark) / samples;
}

}  // namespace oracle
