#pragma once

// Quaternion and matrix algebra shared by every module.
//
// Quaternions are stored SCALAR-LAST: [q1, q2, q3, q4] with q4 the scalar
// part. The attitude matrix A(q) maps ECI components into body components.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <string>

#include "adcs/error.hpp"

namespace adcs {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat43 = Eigen::Matrix<double, 4, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDeg = kPi / 180.0;
inline constexpr double kArcsec = kDeg / 3600.0;

class Quaternion {
 public:
  Quaternion() : c_(0.0, 0.0, 0.0, 1.0) {}
  Quaternion(double q1, double q2, double q3, double q4) : c_(q1, q2, q3, q4) {}
  explicit Quaternion(const Vec4& coeffs) : c_(coeffs) {}
  Quaternion(const Vec3& vector_part, double scalar)
      : c_(vector_part.x(), vector_part.y(), vector_part.z(), scalar) {}

  static Quaternion identity() { return {}; }

  /// Rotation by `angle` (rad) about unit `axis`, as a frame rotation.
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  const Vec4& coeffs() const { return c_; }
  Vec4& coeffs() { return c_; }
  Vec3 vec() const { return c_.head<3>(); }
  double scalar() const { return c_[3]; }
  double operator[](int i) const { return c_[i]; }

  double norm() const { return c_.norm(); }
  Quaternion normalized() const { return Quaternion(c_ / c_.norm()); }
  Quaternion operator-() const { return Quaternion(-c_); }
  double dot(const Quaternion& o) const { return c_.dot(o.c_); }

 private:
  Vec4 c_;
};

/// Composition such that A(a ⊗ b) = A(a) A(b).
Quaternion compose(const Quaternion& a, const Quaternion& b);
Quaternion conjugate(const Quaternion& q);

/// Attitude matrix of q. Inputs off the unit sphere by more than 1e-6 are
/// normalized first and `renormalized` (when given) is set.
Mat3 quat_to_dcm(const Quaternion& q, bool* renormalized = nullptr);

/// Inverse of quat_to_dcm with Shepperd branch selection. The result has
/// q4 >= 0; when q4 == 0 the first nonzero vector component is positive.
/// Throws ErrorCode::kNotRotation when A is not orthonormal within 1e-6.
Quaternion dcm_to_quat(const Mat3& A);

/// Deterministic sign choice used by dcm_to_quat.
Quaternion canonical_sign(const Quaternion& q);

/// Rotation angle (rad, [0, pi]) between two attitudes, sign-agnostic.
double rotation_angle_between(const Quaternion& a, const Quaternion& b);

Mat3 skew(const Vec3& w);

/// (P)^V = [P32, P13, P21], defined for any matrix.
Vec3 vee(const Mat3& P);

/// Xi(q): q_dot = 0.5 * Xi(q) * w.
Mat43 xi_matrix(const Quaternion& q);

/// U(w): q_dot = 0.5 * U(w) * q.
Mat4 u_matrix(const Vec3& w);

/// Rotation matrix satisfying A^T A = I and det(A) = +1 within `tol`.
bool is_rotation(const Mat3& A, double tol = 1e-6);

/// Principal-axis rotation matrix, rotating the frame by `angle` about axis 0/1/2.
Mat3 axis_rotation(int axis, double angle);

struct IntegratorSpec {
  double dt = 0.1;  // s, fixed-step classical RK4
};

/// One classical RK4 step of x' = f(t, x). Throws ErrorCode::kNonFinite naming
/// the offending component when any stage derivative is not finite.
template <typename State, typename Derivative>
State rk4_step(Derivative&& f, double t, const State& x, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rk4_step: dt must be positive");
  }
  auto checked = [&](const State& d) -> const State& {
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d[i])) {
        throw Error(ErrorCode::kNonFinite,
                    "rk4_step: non-finite derivative at component " + std::to_string(i));
      }
    }
    return d;
  };
  const State k1 = checked(f(t, x));
  const State k2 = checked(f(t + 0.5 * dt, State(x + 0.5 * dt * k1)));
  const State k3 = checked(f(t + 0.5 * dt, State(x + 0.5 * dt * k2)));
  const State k4 = checked(f(t + dt, State(x + dt * k3)));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace adcs
