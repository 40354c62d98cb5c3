#include "adcs/attitude_dynamics.hpp"

#include <fstream>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

namespace adcs {

namespace {

using State7 = Eigen::Matrix<double, 7, 1>;
using State10 = Eigen::Matrix<double, 10, 1>;

Vec3 vec3_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kConfig, std::string("spacecraft: '") + key + "' must be a 3-vector");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Quaternion normalized_q(const Vec4& c) { return Quaternion(c / c.norm()); }

}  // namespace

SpacecraftProperties SpacecraftProperties::brite() {
  SpacecraftProperties sc;
  sc.inertia << 0.0465, -0.0007, 0.0004,
                -0.0007, 0.0486, -0.0021,
                0.0004, -0.0021, 0.0482;
  sc.mass_kg = 7.0;
  const double half_edge = 0.10;
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Vec3 n = Vec3::Zero();
      n[axis] = sign;
      sc.faces.push_back(Face{n, 0.04, half_edge * n - kDefaultCenterOfMassOffset});
    }
  }
  return sc;
}

void SpacecraftProperties::validate() const {
  if (!((inertia - inertia.transpose()).cwiseAbs().maxCoeff() <= 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "spacecraft: inertia tensor is not symmetric");
  }
  if (Eigen::LLT<Mat3>(inertia).info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "spacecraft: inertia tensor is not positive definite");
  }
  if (!(mass_kg > 0.0) || !(cd >= 0.0) || !(cr >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "spacecraft: mass must be positive, Cd/Cr non-negative");
  }
  for (const Face& f : faces) {
    if (std::abs(f.normal.norm() - 1.0) > 1e-9 || !(f.area_m2 >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "spacecraft: face normal not unit or negative area");
    }
  }
}

double SpacecraftProperties::projected_area(const Vec3& direction_body) const {
  const Vec3 u = direction_body.normalized();
  double area = 0.0;
  for (const Face& f : faces) area += std::max(0.0, f.normal.dot(u)) * f.area_m2;
  return area;
}

SpacecraftProperties spacecraft_from_json(const nlohmann::json& j) {
  static const char* kKeys[] = {"inertia_kg_m2", "mass_kg", "faces", "cd", "cr",
                                "residual_dipole_A_m2", "wheel_rotor_inertia_kg_m2"};
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "spacecraft: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw Error(ErrorCode::kConfig, "spacecraft: unknown key '" + key + "'");
    }
  }
  SpacecraftProperties sc = SpacecraftProperties::brite();
  if (j.contains("inertia_kg_m2")) {
    const auto& rows = j.at("inertia_kg_m2");
    if (!rows.is_array() || rows.size() != 3) {
      throw Error(ErrorCode::kConfig, "spacecraft: 'inertia_kg_m2' must be 3x3");
    }
    for (int r = 0; r < 3; ++r) sc.inertia.row(r) = vec3_from_json(rows[r], "inertia_kg_m2").transpose();
  }
  if (j.contains("mass_kg")) sc.mass_kg = j.at("mass_kg").get<double>();
  if (j.contains("cd")) sc.cd = j.at("cd").get<double>();
  if (j.contains("cr")) sc.cr = j.at("cr").get<double>();
  if (j.contains("residual_dipole_A_m2")) {
    sc.residual_dipole = vec3_from_json(j.at("residual_dipole_A_m2"), "residual_dipole_A_m2");
  }
  if (j.contains("wheel_rotor_inertia_kg_m2")) {
    sc.wheel_rotor_inertia = j.at("wheel_rotor_inertia_kg_m2").get<double>();
  }
  if (j.contains("faces")) {
    sc.faces.clear();
    for (const auto& f : j.at("faces")) {
      sc.faces.push_back(Face{vec3_from_json(f.at("normal"), "normal"), f.at("area_m2").get<double>(),
                              vec3_from_json(f.at("centroid_m"), "centroid_m")});
    }
  }
  sc.validate();
  return sc;
}

SpacecraftProperties load_spacecraft(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open spacecraft file: " + path);
  try {
    return spacecraft_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
}

nlohmann::json spacecraft_to_json(const SpacecraftProperties& sc) {
  auto v = [](const Vec3& x) { return nlohmann::json::array({x.x(), x.y(), x.z()}); };
  nlohmann::json j;
  j["inertia_kg_m2"] = {v(sc.inertia.row(0)), v(sc.inertia.row(1)), v(sc.inertia.row(2))};
  j["mass_kg"] = sc.mass_kg;
  j["cd"] = sc.cd;
  j["cr"] = sc.cr;
  j["residual_dipole_A_m2"] = v(sc.residual_dipole);
  j["wheel_rotor_inertia_kg_m2"] = sc.wheel_rotor_inertia;
  for (const Face& f : sc.faces) {
    j["faces"].push_back({{"normal", v(f.normal)}, {"area_m2", f.area_m2}, {"centroid_m", v(f.centroid)}});
  }
  return j;
}

Vec3 torque_gravity_gradient(const Quaternion& q, const Vec3& r_eci_km, const Mat3& J,
                             const PhysicalConstants& c) {
  const double r = r_eci_km.norm();
  const Vec3 nadir = quat_to_dcm(q) * (-r_eci_km / r);
  return 3.0 * c.mu_earth_km3_s2 / (r * r * r) * nadir.cross(J * nadir);
}

Vec3 torque_aero(const Quaternion& q, const OrbitState& x, const SpacecraftProperties& sc,
                 const AtmosphereTable& table, const PhysicalConstants& c) {
  const double rho = table.density(x.r.norm() - c.earth_radius_km);
  const Vec3 omega(0.0, 0.0, c.earth_rotation_rad_s);
  const Vec3 v_rel = quat_to_dcm(q) * (1000.0 * (x.v - omega.cross(x.r)));
  const double speed = v_rel.norm();
  if (speed == 0.0) return Vec3::Zero();
  const Vec3 u = v_rel / speed;
  const double dyn_pressure = 0.5 * rho * speed * speed;
  Vec3 torque = Vec3::Zero();
  for (const Face& f : sc.faces) {
    const double cos_inc = f.normal.dot(u);
    if (cos_inc <= 0.0) continue;
    const Vec3 force = -dyn_pressure * sc.cd * f.area_m2 * cos_inc * u;
    torque += f.centroid.cross(force);
  }
  return torque;
}

Vec3 torque_srp(const Quaternion& q, const Vec3& e_sun_eci, bool in_eclipse,
                const SpacecraftProperties& sc, const PhysicalConstants& c) {
  if (in_eclipse) return Vec3::Zero();
  const Vec3 s = quat_to_dcm(q) * e_sun_eci.normalized();
  const double p = c.solar_pressure_n_m2();
  Vec3 torque = Vec3::Zero();
  for (const Face& f : sc.faces) {
    const double cos_inc = f.normal.dot(s);
    if (cos_inc <= 0.0) continue;
    const Vec3 force = -p * sc.cr * f.area_m2 * cos_inc * s;
    torque += f.centroid.cross(force);
  }
  return torque;
}

Vec3 torque_magnetic(const Quaternion& q, const Vec3& b_eci_t, const Vec3& m_total_body) {
  return m_total_body.cross(quat_to_dcm(q) * b_eci_t);
}

AttitudeDerivative attitude_rhs(const AttitudeState& s, const Vec3& L, const Vec3& Md,
                                const Mat3& J) {
  const Vec3 Jw = J * s.w;
  return AttitudeDerivative{0.5 * u_matrix(s.w) * s.q.coeffs(),
                            J.inverse() * (Jw.cross(s.w) + Md + L)};
}

AttitudeState step_attitude(const AttitudeState& s, const Vec3& L, const Vec3& Md, const Mat3& J,
                            double dt) {
  if (!L.allFinite() || !Md.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "step_attitude: non-finite torque");
  }
  auto f = [&](double, const State7& x) -> State7 {
    const AttitudeDerivative d = attitude_rhs(AttitudeState{Quaternion(Vec4(x.head<4>())), x.tail<3>()}, L, Md, J);
    State7 out;
    out << d.q_dot, d.w_dot;
    return out;
  };
  State7 x;
  x << s.q.coeffs(), s.w;
  const State7 next = rk4_step(f, 0.0, x, dt);
  return AttitudeState{normalized_q(next.head<4>()), next.tail<3>()};
}

CoupledState step_coupled(const CoupledState& s, const Vec3& wheel_torque,
                          const Vec3& external_torque, const Mat3& J, const Mat3& A, double dt) {
  if (!wheel_torque.allFinite() || !external_torque.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "step_coupled: non-finite torque");
  }
  const Mat3 J_inv = J.inverse();
  auto f = [&](double, const State10& x) -> State10 {
    const Vec3 w = x.segment<3>(4);
    const Vec3 h = x.segment<3>(7);
    const Vec3 body_torque = -A * wheel_torque - w.cross(A * h);
    State10 out;
    out << 0.5 * u_matrix(w) * x.head<4>(), J_inv * ((J * w).cross(w) + body_torque + external_torque),
        wheel_torque;
    return out;
  };
  State10 x;
  x << s.att.q.coeffs(), s.att.w, s.h_wheels;
  const State10 next = rk4_step(f, 0.0, x, dt);
  return CoupledState{AttitudeState{normalized_q(next.head<4>()), next.segment<3>(4)},
                      next.segment<3>(7)};
}

double kinetic_energy(const AttitudeState& s, const Mat3& J) { return 0.5 * s.w.dot(J * s.w); }

Vec3 inertial_momentum(const CoupledState& s, const Mat3& J, const Mat3& A) {
  return quat_to_dcm(s.att.q).transpose() * (J * s.att.w + A * s.h_wheels);
}

}  // namespace adcs
