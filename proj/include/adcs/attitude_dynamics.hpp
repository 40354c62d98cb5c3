#pragma once

// Rigid-body rotational dynamics, quaternion kinematics, reaction-wheel
// coupling and the environmental disturbance torques.

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adcs/environment.hpp"
#include "adcs/math_core.hpp"
#include "adcs/orbit.hpp"

namespace adcs {

struct Face {
  Vec3 normal;    // outward unit normal, body frame
  double area_m2;
  Vec3 centroid;  // face centroid relative to the center of mass, m
};

struct SpacecraftProperties {
  Mat3 inertia;  // kg m^2
  double mass_kg = 7.0;
  std::vector<Face> faces;
  double cd = 2.6;
  double cr = 1.5;
  Vec3 residual_dipole = Vec3(0.0, 0.0, 1e-3);  // A m^2, body frame
  double wheel_rotor_inertia = 5.12e-5;         // kg m^2, recorded only

  /// 20 cm cube, 7 kg, measured inertia tensor of the generic nanosatellite bus.
  static SpacecraftProperties brite();

  /// Throws kInvalidArgument unless J is symmetric positive definite and faces are unit-normal.
  void validate() const;

  double projected_area(const Vec3& direction_body) const;
};

inline const Vec3 kDefaultCenterOfMassOffset(0.01, 0.01, 0.01);

/// Reads the spacecraft JSON schema; missing keys fall back to the BRITE defaults.
SpacecraftProperties spacecraft_from_json(const nlohmann::json& j);
SpacecraftProperties load_spacecraft(const std::string& path);
nlohmann::json spacecraft_to_json(const SpacecraftProperties& sc);

struct AttitudeState {
  Quaternion q;           // ECI -> body, scalar last
  Vec3 w = Vec3::Zero();  // rad/s, body frame
};

struct DisturbanceSwitches {
  bool gravity_gradient = true;
  bool aero = true;
  bool srp = true;
  bool magnetic = true;
};

/// (3 mu / r^3) n x (J n), n the nadir direction in body axes.
Vec3 torque_gravity_gradient(const Quaternion& q, const Vec3& r_eci_km, const Mat3& J,
                             const PhysicalConstants& c = kConstants);

/// Sum over flow-facing faces of centroid x drag force (co-rotating atmosphere).
Vec3 torque_aero(const Quaternion& q, const OrbitState& x, const SpacecraftProperties& sc,
                 const AtmosphereTable& table = AtmosphereTable::standard(),
                 const PhysicalConstants& c = kConstants);

/// Sum over sunlit faces of centroid x absorbed-radiation force; zero in eclipse.
Vec3 torque_srp(const Quaternion& q, const Vec3& e_sun_eci, bool in_eclipse,
                const SpacecraftProperties& sc, const PhysicalConstants& c = kConstants);

/// m_total x (A(q) B_eci).
Vec3 torque_magnetic(const Quaternion& q, const Vec3& b_eci_t, const Vec3& m_total_body);

struct AttitudeDerivative {
  Vec4 q_dot;
  Vec3 w_dot;
};

/// w_dot = J^-1 [(J w) x w + Md + L],  q_dot = 0.5 U(w) q.
AttitudeDerivative attitude_rhs(const AttitudeState& s, const Vec3& control_torque,
                                const Vec3& disturbance_torque, const Mat3& J);

/// One RK4 step with held torques followed by quaternion renormalization.
AttitudeState step_attitude(const AttitudeState& s, const Vec3& control_torque,
                            const Vec3& disturbance_torque, const Mat3& J, double dt);

/// Body plus wheel cluster. Wheel momentum is part of the integrated state so
/// that J w + A h is conserved by construction.
struct CoupledState {
  AttitudeState att;
  Vec3 h_wheels = Vec3::Zero();  // N m s, per wheel
};

/// Held wheel torque (h_dot) and external torque over one RK4 step; body
/// torque is -A h_dot - w x (A h).
CoupledState step_coupled(const CoupledState& s, const Vec3& wheel_torque,
                          const Vec3& external_torque, const Mat3& J,
                          const Mat3& distribution, double dt);

double kinetic_energy(const AttitudeState& s, const Mat3& J);

/// Total angular momentum in ECI axes.
Vec3 inertial_momentum(const CoupledState& s, const Mat3& J, const Mat3& distribution);

}  // namespace adcs
