#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "adcs/attitude_dynamics.hpp"
#include "check_error.hpp"
#include "oracles.hpp"

using namespace adcs;

namespace {

// Attitude whose body frame sees the ECI direction `from` along `to_body`.
Quaternion attitude_mapping(const Vec3& from, const Vec3& to_body) {
  const Vec3 a = from.normalized(), b = to_body.normalized();
  const Vec3 axis = oracle::cross(a, b);
  const double s = axis.norm(), c = a.dot(b);
  if (s < 1e-12) {
    if (c > 0.0) return Quaternion::identity();
    const Vec3 perp = std::abs(a.x()) < 0.9 ? oracle::cross(a, Vec3::UnitX()) : oracle::cross(a, Vec3::UnitY());
    return dcm_to_quat(oracle::frame_rotation(perp.normalized(), kPi));
  }
  // Frame rotation by -angle about axis carries a onto b as a vector map.
  return dcm_to_quat(oracle::frame_rotation(axis / s, -std::atan2(s, c)));
}

Quaternion random_attitude(std::mt19937_64& rng) { return dcm_to_quat(oracle::random_rotation(rng)); }

SpacecraftProperties centered_cube() {
  SpacecraftProperties sc = SpacecraftProperties::brite();
  for (Face& f : sc.faces) f.centroid = Vec3::Zero();
  return sc;
}

}  // namespace

TEST_CASE("BRITE defaults") {
  const SpacecraftProperties sc = SpacecraftProperties::brite();
  CHECK_NOTHROW(sc.validate());
  CHECK((sc.inertia - sc.inertia.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(sc.inertia).eigenvalues().minCoeff() > 0.0);
  CHECK(sc.inertia(0, 0) == 0.0465);
  CHECK(sc.inertia(1, 2) == -0.0021);
  CHECK(sc.mass_kg == 7.0);
  REQUIRE(sc.faces.size() == 6);
  Vec3 normal_sum = Vec3::Zero();
  for (const Face& f : sc.faces) normal_sum += f.normal;
  CHECK(normal_sum.isZero());
  CHECK(sc.projected_area(Vec3::UnitX()) == doctest::Approx(0.04));
  CHECK(sc.projected_area(Vec3(1, 1, 1)) == doctest::Approx(0.04 * std::sqrt(3.0)));
}

TEST_CASE("spacecraft JSON") {
  const SpacecraftProperties file = load_spacecraft(ADCS_SOURCE_DIR "/data/brite.json");
  const SpacecraftProperties builtin = SpacecraftProperties::brite();
  CHECK(file.inertia == builtin.inertia);
  REQUIRE(file.faces.size() == builtin.faces.size());
  for (std::size_t i = 0; i < file.faces.size(); ++i) {
    CHECK((file.faces[i].centroid - builtin.faces[i].centroid).norm() < 1e-15);
  }
  const SpacecraftProperties round = spacecraft_from_json(spacecraft_to_json(builtin));
  CHECK(round.inertia == builtin.inertia);
  CHECK(round.residual_dipole == builtin.residual_dipole);

  CHECK_ERROR_CODE(spacecraft_from_json(nlohmann::json{{"mass", 3}}), ErrorCode::kConfig);
  nlohmann::json asym = spacecraft_to_json(builtin);
  asym["inertia_kg_m2"][0][1] = 0.01;
  CHECK_ERROR_CODE(spacecraft_from_json(asym).validate(), ErrorCode::kInvalidArgument);
  nlohmann::json indefinite = spacecraft_to_json(builtin);
  indefinite["inertia_kg_m2"][2][2] = -1.0;
  CHECK_ERROR_CODE(spacecraft_from_json(indefinite).validate(), ErrorCode::kInvalidArgument);
}

TEST_CASE("gravity gradient torque") {
  const Vec3 r(7078.0, 0.0, 0.0);
  const Mat3 J_diag = Vec3(1.0, 2.0, 3.0).asDiagonal();
  for (int axis = 0; axis < 3; ++axis) {
    const Quaternion q = attitude_mapping(-r, Vec3::Unit(axis));
    CHECK(torque_gravity_gradient(q, r, J_diag).norm() < 1e-20);
  }
  std::mt19937_64 rng(30);
  for (int k = 0; k < 100; ++k) {
    CHECK(torque_gravity_gradient(random_attitude(rng), r, 0.05 * Mat3::Identity()).norm() < 1e-20);
  }

  // Nadir midway between the largest and smallest principal axes.
  const Mat3 J = SpacecraftProperties::brite().inertia;
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(J);
  const Vec3 e_min = eig.eigenvectors().col(0), e_max = eig.eigenvectors().col(2);
  const double j_spread = eig.eigenvalues()(2) - eig.eigenvalues()(0);
  const double rr = kConstants.earth_radius_km + 700.0;
  const Vec3 pos(0.0, rr, 0.0);
  const Quaternion q45 = attitude_mapping(-pos, (e_min + e_max).normalized());
  const double mu_m = kConstants.mu_earth_km3_s2 * 1e9;
  const double r_m = rr * 1e3;
  const double expected = 1.5 * mu_m / (r_m * r_m * r_m) * j_spread * std::sin(2 * 45 * kDeg);
  const Vec3 tau = torque_gravity_gradient(q45, pos, J);
  CHECK(tau.norm() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::abs(tau.normalized().dot(eig.eigenvectors().col(1))) == doctest::Approx(1.0).epsilon(1e-9));

  // Diagonal part of the tensor alone, nadir at 45 deg in body x-y.
  const Mat3 J_brite_diag = J.diagonal().asDiagonal();
  const Quaternion q_xy = attitude_mapping(-pos, Vec3(1, 1, 0).normalized());
  CHECK(torque_gravity_gradient(q_xy, pos, J_brite_diag).norm() ==
        doctest::Approx(1.5 * mu_m / (r_m * r_m * r_m) * std::abs(J(0, 0) - J(1, 1))).epsilon(1e-12));
}

TEST_CASE("aerodynamic torque") {
  const double rr = kConstants.earth_radius_km + 611.0;
  const double v = std::sqrt(kConstants.mu_earth_km3_s2 / rr);
  const OrbitState x{Vec3(rr, 0.0, 0.0), Vec3(0.0, v, 0.0)};
  std::mt19937_64 rng(31);
  const SpacecraftProperties centered = centered_cube();
  for (int k = 0; k < 50; ++k) CHECK(torque_aero(random_attitude(rng), x, centered).norm() == 0.0);

  // Flow onto +x face, that face's centroid offset along the flow.
  SpacecraftProperties single = centered;
  const Vec3 v_rel_eci = x.v - oracle::cross(Vec3(0, 0, kConstants.earth_rotation_rad_s), x.r);
  const Quaternion q_flow = attitude_mapping(v_rel_eci, Vec3::UnitX());
  single.faces[0].centroid = Vec3(0.1, 0.0, 0.0);
  CHECK(torque_aero(q_flow, x, single).norm() < 1e-20);

  // 1 cm center-of-mass offset: torque = (-d) x total drag force.
  const SpacecraftProperties sc = SpacecraftProperties::brite();
  const double rho = atmosphere_density(611.0);
  const Vec3 u_eci = v_rel_eci.normalized();
  const double speed = 1000.0 * v_rel_eci.norm();
  for (int k = 0; k < 200; ++k) {
    const Quaternion q = random_attitude(rng);
    const Vec3 u = oracle::dcm(q.coeffs()) * u_eci;
    double area = 0.0;
    for (int axis = 0; axis < 3; ++axis) area += 0.04 * std::abs(u[axis]);
    const Vec3 force = -0.5 * rho * speed * speed * sc.cd * area * u;
    const Vec3 expected = oracle::cross(-kDefaultCenterOfMassOffset, force);
    CHECK((torque_aero(q, x, sc) - expected).norm() <= 1e-12 * force.norm() * 0.01 + 1e-25);
  }
}

TEST_CASE("solar radiation torque") {
  const Vec3 sun(0.0, 0.0, 1.0);
  std::mt19937_64 rng(32);
  const SpacecraftProperties sc = SpacecraftProperties::brite();
  CHECK(torque_srp(random_attitude(rng), sun, true, sc).isZero());
  const SpacecraftProperties centered = centered_cube();
  for (int k = 0; k < 50; ++k) CHECK(torque_srp(random_attitude(rng), sun, false, centered).norm() == 0.0);

  // Single face, arbitrary offset.
  SpacecraftProperties one;
  one.inertia = sc.inertia;
  one.cr = 1.5;
  one.faces = {Face{Vec3::UnitZ(), 0.04, Vec3(0.03, -0.02, 0.05)}};
  const double P = 1361.0 / 299792458.0;
  for (int k = 0; k < 100; ++k) {
    const Quaternion q = random_attitude(rng);
    const Vec3 s_body = oracle::dcm(q.coeffs()) * sun;
    const Vec3 tau = torque_srp(q, sun, false, one);
    if (s_body.z() <= 0.0) {
      CHECK(tau.isZero());
      continue;
    }
    const Vec3 c = one.faces[0].centroid;
    const double sin_theta = oracle::cross(c.normalized(), s_body).norm();
    CHECK(tau.norm() == doctest::Approx(P * 1.5 * 0.04 * s_body.z() * c.norm() * sin_theta).epsilon(1e-12));
  }
  // Sun normal to the face: no obliquity factor.
  const Vec3 c = one.faces[0].centroid;
  const double sin_theta = oracle::cross(c.normalized(), Vec3::UnitZ()).norm();
  CHECK(torque_srp(Quaternion::identity(), sun, false, one).norm() ==
        doctest::Approx(P * 1.5 * 0.04 * c.norm() * sin_theta).epsilon(1e-12));
}

TEST_CASE("magnetic torque") {
  const Vec3 tau = torque_magnetic(Quaternion::identity(), Vec3(0, 2e-5, 0), Vec3(0.12, 0, 0));
  CHECK((tau - Vec3(0, 0, 2.4e-6)).norm() < 1e-20);
  std::mt19937_64 rng(33);
  for (int k = 0; k < 200; ++k) {
    const Quaternion q = random_attitude(rng);
    const Vec3 b = 3e-5 * oracle::random_unit(rng);
    const Vec3 b_body = oracle::dcm(q.coeffs()) * b;
    const Vec3 m = 0.1 * oracle::random_unit(rng);
    CHECK(torque_magnetic(q, b, 2.0 * b_body / b_body.norm()).norm() < 1e-18);
    CHECK(std::abs(torque_magnetic(q, b, m).dot(b_body)) < 1e-22);
    CHECK((torque_magnetic(q, b, m) - oracle::cross(m, b_body)).norm() < 1e-20);
  }
}

TEST_CASE("attitude_rhs") {
  const Mat3 J = SpacecraftProperties::brite().inertia;
  const AttitudeDerivative rest = attitude_rhs(AttitudeState{}, Vec3::Zero(), Vec3::Zero(), J);
  CHECK(rest.q_dot.isZero());
  CHECK(rest.w_dot.isZero());

  const Eigen::SelfAdjointEigenSolver<Mat3> eig(J);
  for (int axis = 0; axis < 3; ++axis) {
    const AttitudeState s{Quaternion::identity(), 0.3 * eig.eigenvectors().col(axis)};
    CHECK(attitude_rhs(s, Vec3::Zero(), Vec3::Zero(), J).w_dot.norm() < 1e-15);
  }

  // Gyroscopic term equals -w x (J w); kinematics equals 0.5 Xi(q) w.
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int k = 0; k < 100; ++k) {
    const AttitudeState s{random_attitude(rng), Vec3(n(rng), n(rng), n(rng))};
    const Vec3 L(n(rng), n(rng), n(rng)), Md = 1e-3 * Vec3(n(rng), n(rng), n(rng));
    const AttitudeDerivative d = attitude_rhs(s, L, Md, J);
    const Vec3 expected = J.inverse() * (-oracle::cross(s.w, J * s.w) + L + Md);
    CHECK((d.w_dot - expected).norm() < 1e-12 * (1.0 + expected.norm()));
    CHECK((d.q_dot - 0.5 * xi_matrix(s.q) * s.w).norm() < 1e-15);
  }
}

TEST_CASE("torque-free motion conserves energy and momentum") {
  const Mat3 J = SpacecraftProperties::brite().inertia;
  std::mt19937_64 rng(35);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int trial = 0; trial < 5; ++trial) {
    AttitudeState s{random_attitude(rng), Vec3(n(rng), n(rng), n(rng))};
    const double T0 = kinetic_energy(s, J);
    const double H0 = (J * s.w).norm();
    for (int k = 0; k < 600; ++k) s = step_attitude(s, Vec3::Zero(), Vec3::Zero(), J, 0.1);
    CHECK(kinetic_energy(s, J) == doctest::Approx(T0).epsilon(1e-9));
    CHECK((J * s.w).norm() == doctest::Approx(H0).epsilon(1e-9));
  }

  // One simulated hour at dt = 0.1 s, inertial momentum vector fixed.
  AttitudeState s{random_attitude(rng), Vec3(0.02, -0.03, 0.05)};
  const Vec3 L0 = oracle::dcm(s.q.coeffs()).transpose() * (J * s.w);
  const double T0 = kinetic_energy(s, J);
  double worst_q = 0.0;
  for (int k = 0; k < 36000; ++k) {
    s = step_attitude(s, Vec3::Zero(), Vec3::Zero(), J, 0.1);
    worst_q = std::max(worst_q, std::abs(s.q.coeffs().norm() - 1.0));
  }
  const Vec3 L1 = oracle::dcm(s.q.coeffs()).transpose() * (J * s.w);
  CHECK((L1 - L0).norm() / L0.norm() < 1e-9);
  CHECK(kinetic_energy(s, J) == doctest::Approx(T0).epsilon(1e-9));
  CHECK(worst_q < 1e-15);
}

TEST_CASE("step_attitude closed forms") {
  const Mat3 J = SpacecraftProperties::brite().inertia;
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(J);
  const Vec3 axis = eig.eigenvectors().col(1);
  AttitudeState s{Quaternion::identity(), 1.0 * kDeg * axis};
  for (int k = 0; k < 58910; ++k) s = step_attitude(s, Vec3::Zero(), Vec3::Zero(), J, 0.1);
  CHECK(s.w.norm() == doctest::Approx(kDeg).epsilon(1e-9));
  CHECK((s.w.normalized() - axis).norm() < 1e-9);

  const Mat3 J_diag = Vec3(0.0465, 0.0486, 0.0482).asDiagonal();
  const Vec3 L(0.0, 0.0, 1e-4);
  AttitudeState lin;
  for (int k = 1; k <= 1000; ++k) {
    lin = step_attitude(lin, L, Vec3::Zero(), J_diag, 0.1);
    CHECK(lin.w.z() == doctest::Approx(L.z() * 0.1 * k / 0.0482).epsilon(1e-9));
  }
  CHECK(lin.w.head<2>().isZero());
  // Uniform spin about z: rotation angle is the integral of the rate.
  const double angle = 0.5 * L.z() / 0.0482 * 100.0 * 100.0;
  CHECK(rotation_angle_between(lin.q, Quaternion::from_axis_angle(Vec3::UnitZ(), angle)) < 1e-9);

  CHECK_ERROR_CODE(step_attitude(s, Vec3(std::nan(""), 0, 0), Vec3::Zero(), J, 0.1), ErrorCode::kNonFinite);
  CHECK_ERROR_CODE(step_attitude(s, Vec3::Zero(), Vec3(0, INFINITY, 0), J, 0.1), ErrorCode::kNonFinite);
}

TEST_CASE("wheel coupling conserves total momentum") {
  const Mat3 J = SpacecraftProperties::brite().inertia;
  const Mat3 A = Mat3::Identity();
  std::mt19937_64 rng(36);
  CoupledState s{AttitudeState{random_attitude(rng), Vec3(0.01, -0.02, 0.015)}, Vec3(0.005, -0.003, 0.01)};
  const Vec3 H0 = inertial_momentum(s, J, A);
  for (int k = 0; k < 6000; ++k) {
    const Vec3 wheel_torque = 1e-4 * Vec3(std::sin(0.01 * k), std::cos(0.013 * k), -std::sin(0.007 * k));
    s = step_coupled(s, wheel_torque, Vec3::Zero(), J, A, 0.1);
  }
  CHECK((inertial_momentum(s, J, A) - H0).norm() < 1e-9 * H0.norm());

  // Wheel torque on a body at rest spins the body the other way.
  CoupledState still{AttitudeState{}, Vec3::Zero()};
  still = step_coupled(still, Vec3(0, 0, 1e-3), Vec3::Zero(), Vec3(1, 1, 1).asDiagonal(), A, 1.0);
  CHECK(still.att.w.z() == doctest::Approx(-1e-3).epsilon(1e-9));
  CHECK(still.h_wheels.z() == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("disturbance torques stay inside the sanity envelope") {
  const SpacecraftProperties sc = SpacecraftProperties::brite();
  const EpochTime t{0.0, 2459295.0};
  double worst[4] = {0, 0, 0, 0};
  for (double alt : {611.0, 732.0}) {
    const double rr = kConstants.earth_radius_km + alt;
    const double v = std::sqrt(kConstants.mu_earth_km3_s2 / rr);
    const OrbitState x{Vec3(0.0, rr * std::cos(0.3), rr * std::sin(0.3)),
                       Vec3(0.0, -v * std::sin(0.3), v * std::cos(0.3))};
    const Vec3 b = magnetic_field(x.r, t);
    const Vec3 e_sun = sun_direction(t);
    for (int roll = 0; roll < 36; ++roll) {
      for (int pitch = -9; pitch <= 9; ++pitch) {
        for (int yaw = 0; yaw < 36; ++yaw) {
          const Mat3 R = oracle::frame_rotation(Vec3::UnitX(), roll * 10 * kDeg) *
                         oracle::frame_rotation(Vec3::UnitY(), pitch * 10 * kDeg) *
                         oracle::frame_rotation(Vec3::UnitZ(), yaw * 10 * kDeg);
          const Quaternion q = dcm_to_quat(R);
          worst[0] = std::max(worst[0], torque_gravity_gradient(q, x.r, sc.inertia).norm());
          worst[1] = std::max(worst[1], torque_aero(q, x, sc).norm());
          worst[2] = std::max(worst[2], torque_srp(q, e_sun, false, sc).norm());
          worst[3] = std::max(worst[3], torque_magnetic(q, b, sc.residual_dipole).norm());
        }
      }
    }
  }
  for (double w : worst) {
    CHECK(w > 0.0);
    CHECK(w < 1e-5);
  }
}
