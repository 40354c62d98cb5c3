#include "adcs/control.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace adcs {

void ActuatorLimits::validate() const {
  if (!(wheel_torque_max > 0.0) || !(wheel_momentum_max > 0.0) || !(wheel_rotor_inertia > 0.0) ||
      !(dipole_max > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "limits: all actuator limits must be positive");
  }
}

void ControlGains::validate() const {
  if (!(k_w > 0.0) || !(k_a > 0.0) || !(k_det >= 0.0) || !(detumble_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gains: k_w and k_A must be positive");
  }
}

WheelState WheelState::orthogonal(const Vec3& h0) {
  WheelState w;
  w.h = h0;
  return w;
}

void WheelState::set_distribution(const Mat3& A) {
  distribution = A;
  pseudo_inverse = A.completeOrthogonalDecomposition().pseudoInverse();
}

TargetSpec TargetSpec::pointing_at(std::string name, const Vec3& direction_eci) {
  TargetSpec t;
  t.name = std::move(name);
  t.direction = direction_eci.normalized();
  t.q_d = target_quaternion(t.direction);
  t.A_d = quat_to_dcm(t.q_d);
  return t;
}

Vec3 sgn(const Vec3& v) { return Vec3(sgn(v.x()), sgn(v.y()), sgn(v.z())); }

double compute_k_det(double orbit_period_s, double xi_m, const Mat3& J) {
  if (!(orbit_period_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "k_det: orbit period must be positive");
  }
  const double j_min = Eigen::SelfAdjointEigenSolver<Mat3>(J, Eigen::EigenvaluesOnly).eigenvalues()[0];
  return 4.0 * kPi / orbit_period_s * (1.0 + std::sin(xi_m)) * j_min;
}

double geomagnetic_inclination(const Vec3& orbit_normal, const Vec3& dipole_axis) {
  const double c = std::abs(orbit_normal.normalized().dot(dipole_axis.normalized()));
  return std::acos(std::min(1.0, c));
}

DetumbleCommand detumble_command(const Vec3& w, const Vec3& b_body, const Vec3& b_dot,
                                 const ControlGains& gains, const ActuatorLimits& limits) {
  DetumbleCommand cmd;
  const double field = b_body.norm();
  if (!(field > 0.0)) {
    cmd.zero_field = true;
    return cmd;
  }
  if (w.norm() >= gains.detumble_threshold) {
    cmd.bang_bang = true;
    cmd.dipole = -limits.dipole_max * sgn(b_dot);
    return cmd;
  }
  const Vec3 b = b_body / field;
  cmd.dipole = (gains.k_det / field * w.cross(b))
                   .cwiseMax(-limits.dipole_max)
                   .cwiseMin(limits.dipole_max);
  return cmd;
}

Vec3 tracking_torque(const Vec3& w, const Mat3& A_e, const TargetSpec& target, const Mat3& J,
                     const ControlGains& gains) {
  const Vec3 w_e = w - A_e * target.w_d;
  return -gains.k_w * w_e + w.cross(J * w) +
         J * (A_e * target.w_d_dot - skew(w_e) * A_e * target.w_d) -
         gains.k_a * vee(A_e.transpose() - A_e);
}

double lyapunov_value(const Vec3& w_e, const Mat3& A_e, const Mat3& J, double k_a) {
  return 0.5 * w_e.dot(J * w_e) + k_a * (3.0 - A_e.trace());
}

AllocationResult wheel_allocation(const Vec3& L, const Vec3& w, const WheelState& wheels, double dt,
                                  const ActuatorLimits& limits, const Vec3& bias) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "wheel_allocation: dt must be positive");
  AllocationResult r;
  r.wheels = wheels;
  const Mat3& A = wheels.distribution;
  const Vec3 gyro = w.cross(A * wheels.h);
  Vec3 h_dot = -wheels.pseudo_inverse * (L + gyro) + bias;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(h_dot[i]) > limits.wheel_torque_max) {
      h_dot[i] = std::copysign(limits.wheel_torque_max, h_dot[i]);
      r.torque_saturated = true;
    }
    const double h_next = wheels.h[i] + h_dot[i] * dt;
    if (std::abs(h_next) > limits.wheel_momentum_max) {
      const double h_clamped = std::copysign(limits.wheel_momentum_max, h_next);
      h_dot[i] = (h_clamped - wheels.h[i]) / dt;
      r.momentum_saturated = true;
    }
  }
  r.h_dot = h_dot;
  r.wheels.h = wheels.h + h_dot * dt;
  for (int i = 0; i < 3; ++i) {
    r.wheels.h[i] = std::clamp(r.wheels.h[i], -limits.wheel_momentum_max, limits.wheel_momentum_max);
  }
  r.torque_realized = -A * h_dot - gyro;
  return r;
}

DesaturationCommand desaturation_command(const WheelState& wheels, const Vec3& b_body,
                                         const ActuatorLimits& limits, double min_angle,
                                         double min_momentum) {
  DesaturationCommand cmd;
  const double field = b_body.norm();
  if (!(field > 0.0)) {
    cmd.zero_field = true;
    return cmd;
  }
  const Vec3 b = b_body / field;
  Vec3 s = sgn(wheels.h);
  const double cos_limit = std::cos(min_angle);
  for (int i = 0; i < 3; ++i) {
    const Vec3 axis = wheels.distribution.col(i).normalized();
    if (std::abs(axis.dot(b)) >= cos_limit || std::abs(wheels.h[i]) < min_momentum) s[i] = 0.0;
  }
  cmd.dipole = limits.wheel_torque_max * (wheels.distribution * s).cross(b) / field;
  const double peak = cmd.dipole.cwiseAbs().maxCoeff();
  if (peak > limits.dipole_max) {
    cmd.scale = limits.dipole_max / peak;
    cmd.dipole *= cmd.scale;
  }
  // Wheel reaction -A T_rw cancels m x B.
  cmd.wheel_torque = wheels.pseudo_inverse * cmd.dipole.cross(b_body);
  return cmd;
}

Quaternion target_quaternion(const Vec3& target_dir) {
  const Vec3 d = target_dir.normalized();
  const Vec3 i = Vec3::UnitX();
  const Vec3 c = i.cross(d);
  const double cos_psi = std::clamp(i.dot(d), -1.0, 1.0);
  if (c.norm() < 1e-12) {
    return cos_psi > 0.0 ? Quaternion::identity() : Quaternion(0.0, 0.0, 1.0, 0.0);
  }
  const double psi = std::acos(cos_psi);
  return Quaternion(c.normalized() * std::sin(0.5 * psi), std::cos(0.5 * psi));
}

Mat3 attitude_error(const Mat3& A_bn, const Mat3& A_d) { return A_bn * A_d.transpose(); }

double pointing_error(const Mat3& A_e) {
  // atan2 form keeps small angles accurate and gives exactly 0 for symmetric A_e near I.
  const double s = 0.5 * vee(A_e - A_e.transpose()).norm();
  const double c = std::clamp(0.5 * (A_e.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c);
}

}  // namespace adcs
