#include "adcs/math_core.hpp"

#include <algorithm>

namespace adcs {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotRotation: return "not_rotation";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kSubsurface: return "subsurface";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kTleChecksum: return "tle_checksum";
    case ErrorCode::kTleFormat: return "tle_format";
    case ErrorCode::kTleLineNumber: return "tle_line_number";
    case ErrorCode::kKeplerNoConvergence: return "kepler_no_convergence";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::kTooFewObservations: return "too_few_observations";
    case ErrorCode::kAmbiguous: return "ambiguous";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 e = axis.normalized();
  return Quaternion(e * std::sin(0.5 * angle), std::cos(0.5 * angle));
}

Quaternion compose(const Quaternion& a, const Quaternion& b) {
  const Vec3 av = a.vec();
  const Vec3 bv = b.vec();
  const Vec3 v = a.scalar() * bv + b.scalar() * av - av.cross(bv);
  return Quaternion(v, a.scalar() * b.scalar() - av.dot(bv));
}

Quaternion conjugate(const Quaternion& q) { return Quaternion(-q.vec(), q.scalar()); }

Mat3 quat_to_dcm(const Quaternion& q_in, bool* renormalized) {
  Quaternion q = q_in;
  const double n = q.norm();
  const bool off_sphere = std::abs(n - 1.0) > 1e-6;
  if (off_sphere) q = q.normalized();
  if (renormalized != nullptr) *renormalized = off_sphere;

  const Vec3 v = q.vec();
  const double s = q.scalar();
  return (s * s - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() -
         2.0 * s * skew(v);
}

Quaternion canonical_sign(const Quaternion& q) {
  if (q.scalar() > 0.0) return q;
  if (q.scalar() < 0.0) return -q;
  for (int i = 0; i < 3; ++i) {
    if (q[i] > 0.0) return q;
    if (q[i] < 0.0) return -q;
  }
  return q;
}

bool is_rotation(const Mat3& A, double tol) {
  if (!A.allFinite()) return false;
  const double ortho = (A.transpose() * A - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(A.determinant() - 1.0) <= tol;
}

Quaternion dcm_to_quat(const Mat3& A) {
  if (!is_rotation(A, 1e-6)) {
    throw Error(ErrorCode::kNotRotation, "dcm_to_quat: matrix is not a proper rotation");
  }
  // Shepperd: pick the largest of 4q4^2-1 = tr, 4qi^2-1 = 2Aii - tr.
  const double tr = A.trace();
  const Vec4 d(A(0, 0), A(1, 1), A(2, 2), tr);
  Eigen::Index k = 0;
  d.maxCoeff(&k);
  Vec4 q;
  if (k == 3) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q << (A(1, 2) - A(2, 1)) / s, (A(2, 0) - A(0, 2)) / s, (A(0, 1) - A(1, 0)) / s, 0.25 * s;
  } else if (k == 0) {
    const double s = 2.0 * std::sqrt(1.0 + 2.0 * A(0, 0) - tr);
    q << 0.25 * s, (A(0, 1) + A(1, 0)) / s, (A(0, 2) + A(2, 0)) / s, (A(1, 2) - A(2, 1)) / s;
  } else if (k == 1) {
    const double s = 2.0 * std::sqrt(1.0 + 2.0 * A(1, 1) - tr);
    q << (A(0, 1) + A(1, 0)) / s, 0.25 * s, (A(1, 2) + A(2, 1)) / s, (A(2, 0) - A(0, 2)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + 2.0 * A(2, 2) - tr);
    q << (A(0, 2) + A(2, 0)) / s, (A(1, 2) + A(2, 1)) / s, 0.25 * s, (A(0, 1) - A(1, 0)) / s;
  }
  return canonical_sign(Quaternion(q.normalized()));
}

double rotation_angle_between(const Quaternion& a, const Quaternion& b) {
  const Quaternion d = compose(conjugate(a.normalized()), b.normalized());
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.scalar()));
}

Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& P) { return Vec3(P(2, 1), P(0, 2), P(1, 0)); }

Mat43 xi_matrix(const Quaternion& q) {
  const double q1 = q[0], q2 = q[1], q3 = q[2], q4 = q[3];
  Mat43 X;
  X << q4, -q3, q2,
       q3, q4, -q1,
       -q2, q1, q4,
       -q1, -q2, -q3;
  return X;
}

Mat4 u_matrix(const Vec3& w) {
  const double w1 = w.x(), w2 = w.y(), w3 = w.z();
  Mat4 U;
  U << 0.0, w3, -w2, w1,
       -w3, 0.0, w1, w2,
       w2, -w1, 0.0, w3,
       -w1, -w2, -w3, 0.0;
  return U;
}

Mat3 axis_rotation(int axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 R = Mat3::Identity();
  const int i = (axis + 1) % 3;
  const int j = (axis + 2) % 3;
  R(i, i) = c;
  R(i, j) = s;
  R(j, i) = -s;
  R(j, j) = c;
  return R;
}

}  // namespace adcs
