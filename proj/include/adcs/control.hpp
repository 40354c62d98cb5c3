#pragma once

// Detumble (bang-bang plus B-dot), Lyapunov slew/tracking law with reaction
// wheel allocation, magnetic momentum dumping, and pointing geometry.

#include <string>

#include "adcs/math_core.hpp"

namespace adcs {

struct ActuatorLimits {
  double wheel_torque_max = 2e-3;      // N m, per wheel
  double wheel_momentum_max = 30e-3;   // N m s, per wheel
  double wheel_rotor_inertia = 5.12e-5;
  double dipole_max = 0.12;            // A m^2, per axis

  void validate() const;
};

struct ControlGains {
  double k_w = 0.01;    // N m s / rad
  double k_a = 3e-4;    // N m
  double k_det = 0.0;   // N m s / rad, from compute_k_det
  double detumble_threshold = 1.0 * kDeg;  // rad/s, bang-bang above

  void validate() const;
};

struct WheelState {
  Vec3 h = Vec3::Zero();  // N m s, per wheel
  Mat3 distribution = Mat3::Identity();
  Mat3 pseudo_inverse = Mat3::Identity();

  /// Three orthogonal wheels aligned with the body axes.
  static WheelState orthogonal(const Vec3& h0 = Vec3::Zero());
  /// Recomputes the Moore-Penrose pseudo-inverse of `distribution`.
  void set_distribution(const Mat3& A);
};

struct TargetSpec {
  std::string name;
  Vec3 direction = Vec3::UnitX();  // ECI unit vector
  Quaternion q_d;
  Mat3 A_d = Mat3::Identity();
  Vec3 w_d = Vec3::Zero();
  Vec3 w_d_dot = Vec3::Zero();

  /// Builds q_d and A_d from an inertial direction.
  static TargetSpec pointing_at(std::string name, const Vec3& direction_eci);
};

/// sign with sign(0) = 0.
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }
Vec3 sgn(const Vec3& v);

/// (4 pi / T) (1 + sin xi_m) J_min with J_min the smallest principal moment.
double compute_k_det(double orbit_period_s, double xi_m_rad, const Mat3& J);

/// Inclination of the orbit plane to the geomagnetic equator, [0, pi/2].
double geomagnetic_inclination(const Vec3& orbit_normal, const Vec3& dipole_axis);

struct DetumbleCommand {
  Vec3 dipole = Vec3::Zero();
  bool bang_bang = false;
  bool zero_field = false;
};

/// Above the rate threshold m = -m_max sign(b_dot); below it
/// m = (k_det / |B|)(w x b), each axis clamped to +-m_max.
DetumbleCommand detumble_command(const Vec3& w, const Vec3& b_body, const Vec3& b_dot,
                                 const ControlGains& gains, const ActuatorLimits& limits);

/// L = -k_w w_e + w x (J w) + J (A_e w_d_dot - [w_e x] A_e w_d) - k_A vee(A_e^T - A_e),
/// w_e = w - A_e w_d.
Vec3 tracking_torque(const Vec3& w, const Mat3& A_e, const TargetSpec& target, const Mat3& J,
                     const ControlGains& gains);

/// V = 0.5 w_e^T J w_e + k_A tr(I - A_e).
double lyapunov_value(const Vec3& w_e, const Mat3& A_e, const Mat3& J, double k_a);

struct AllocationResult {
  WheelState wheels;               // momentum after dt
  Vec3 h_dot = Vec3::Zero();       // commanded wheel torque, held over dt
  Vec3 torque_realized = Vec3::Zero();
  bool torque_saturated = false;
  bool momentum_saturated = false;
};

/// h_dot = -A* [L + w x (A h)] + bias, clamped to +-M_max; the momentum after
/// dt is clamped to +-h_max by trimming h_dot. Realized body torque is
/// -A h_dot - w x (A h).
AllocationResult wheel_allocation(const Vec3& L_desired, const Vec3& w, const WheelState& wheels,
                                  double dt, const ActuatorLimits& limits,
                                  const Vec3& wheel_torque_bias = Vec3::Zero());

struct DesaturationCommand {
  Vec3 wheel_torque = Vec3::Zero();
  Vec3 dipole = Vec3::Zero();
  bool zero_field = false;
  double scale = 1.0;  // factor applied to bring the dipole within +-m_max
};

/// m = M_max (A s x b) / |B| with s = sign(h) restricted to wheels holding at
/// least `min_momentum` whose axis makes more than `min_angle` with B. The
/// dipole is scaled uniformly into +-m_max, and the wheel torque is the one
/// the resulting magnetic torque m x B balances, so only the component of
/// -M_max s normal to B is dumped.
DesaturationCommand desaturation_command(const WheelState& wheels, const Vec3& b_body,
                                         const ActuatorLimits& limits,
                                         double min_angle_rad = 45.0 * kDeg,
                                         double min_momentum = 0.0);

/// q_d = [u sin(psi/2), cos(psi/2)] with u = (i x d)/|i x d|, psi = acos(i . d).
/// d = -i returns [0, 0, 1, 0].
Quaternion target_quaternion(const Vec3& target_dir_eci);

/// A_e = A_bn A_d^T.
Mat3 attitude_error(const Mat3& A_bn, const Mat3& A_d);

/// Rotation angle of A_e in [0, pi]: acos((tr(A_e) - 1) / 2) evaluated as an
/// atan2 of the skew and trace parts.
double pointing_error(const Mat3& A_e);

}  // namespace adcs
