#pragma once

// Static attitude determination (TRIAD, QUEST, Davenport q-method), angular
// velocity from successive attitudes, and the Tustin low-pass filters.

#include <array>
#include <optional>
#include <vector>

#include "adcs/math_core.hpp"

namespace adcs {

enum class EstimateSource { kNone, kTriad, kQuest };
const char* to_string(EstimateSource s);

struct AttitudeEstimate {
  Quaternion q;
  Mat3 A = Mat3::Identity();
  EstimateSource source = EstimateSource::kNone;
  double t = 0.0;
};

struct VectorObservation {
  Vec3 body;  // unit
  Vec3 eci;   // unit
};

/// ECI -> body matrix from two vector pairs, first pair exact. Throws
/// kDegenerateGeometry when |v1 x v2| < 1e-6 in either frame.
Mat3 triad(const Vec3& v1_body, const Vec3& v2_body, const Vec3& v1_eci, const Vec3& v2_eci);

/// Davenport K matrix in scalar-last ordering.
Mat4 davenport_k(const std::vector<VectorObservation>& obs, const std::vector<double>& weights);

struct QuestResult {
  Quaternion q;
  double lambda_max = 0.0;
  int iterations = 0;
  bool used_davenport = false;  // Newton did not converge
};

/// QUEST: Newton on the characteristic polynomial from lambda0 = sum(w),
/// tolerance 1e-12, 50 iterations, then the Davenport fallback. Sequential
/// reference rotations avoid the 180-degree singularity. Throws
/// kTooFewObservations (< 2) or kDegenerateGeometry (all parallel).
QuestResult quest_solve(const std::vector<VectorObservation>& obs,
                        const std::vector<double>& weights);
Quaternion quest(const std::vector<VectorObservation>& obs, const std::vector<double>& weights);

/// Dominant eigenvector of K by shifted power iteration with repeated
/// squaring; the runner-up eigenvalue comes from deflation. Throws
/// kAmbiguous when the eigenvalue gap is below 1e-9 (relative to sum(w)).
Quaternion davenport_q(const std::vector<VectorObservation>& obs,
                       const std::vector<double>& weights);

/// w = 2 Xi(q_curr)^T (q_curr - q_prev) / dt, with q_curr sign-aligned to q_prev.
Vec3 rate_from_quaternions(const Quaternion& q_prev, const Quaternion& q_curr, double dt);

/// w = vee(-(A_curr - A_prev)/dt * A_curr^T).
Vec3 rate_from_dcm(const Mat3& A_prev, const Mat3& A_curr, double dt);

struct FilterParams {
  double w1 = 1.0;    // rad/s, first-order cutoff
  double w2 = 5.0;    // rad/s, second-order natural frequency
  double xi = 0.7;
  double period = 0.1;  // s

  void validate() const;
};

struct Lowpass1State {
  Vec3 x_prev = Vec3::Zero();
  Vec3 y_prev = Vec3::Zero();
  void reset(const Vec3& value) { x_prev = y_prev = value; }
};

struct Lowpass2State {
  Vec3 x1 = Vec3::Zero(), x2 = Vec3::Zero();
  Vec3 y1 = Vec3::Zero(), y2 = Vec3::Zero();
  void reset(const Vec3& value) { x1 = x2 = y1 = y2 = value; }
};

/// Tustin discretization of w1 / (s + w1).
Vec3 lowpass1_step(Lowpass1State& state, const Vec3& x, const FilterParams& p);
/// Tustin discretization of w2^2 / (s^2 + 2 xi w2 s + w2^2).
Vec3 lowpass2_step(Lowpass2State& state, const Vec3& x, const FilterParams& p);

/// Difference-equation coefficients {b0,b1,b2,a0,a1,a2} of lowpass2_step.
std::array<double, 6> lowpass2_coefficients(const FilterParams& p);

/// Backward-difference rate estimator with sign continuity. Resetting drops
/// the memory so the next update produces no sample.
class RateEstimator {
 public:
  void reset() { prev_.reset(); }
  std::optional<Vec3> update(const Quaternion& q, double t);

 private:
  struct Sample {
    Quaternion q;
    double t;
  };
  std::optional<Sample> prev_;
};

}  // namespace adcs
