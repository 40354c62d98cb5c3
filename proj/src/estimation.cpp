#include "adcs/estimation.hpp"

#include <array>

namespace adcs {

namespace {

struct ProfileSums {
  Mat3 B = Mat3::Zero();
  Vec3 z = Vec3::Zero();
  double weight = 0.0;
};

ProfileSums profile(const std::vector<VectorObservation>& obs, const std::vector<double>& w) {
  if (obs.size() < 2) {
    throw Error(ErrorCode::kTooFewObservations, "attitude solve needs at least two observations");
  }
  if (w.size() != obs.size()) {
    throw Error(ErrorCode::kInvalidArgument, "observation and weight counts differ");
  }
  ProfileSums s;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(w[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "weights must be positive");
    s.B += w[i] * obs[i].body * obs[i].eci.transpose();
    s.z += w[i] * obs[i].body.cross(obs[i].eci);
    s.weight += w[i];
  }
  return s;
}

bool all_parallel(const std::vector<VectorObservation>& obs) {
  for (std::size_t i = 1; i < obs.size(); ++i) {
    if (obs[0].body.cross(obs[i].body).norm() > 1e-6) return false;
  }
  return true;
}

// Dominant eigenpair of a symmetric matrix whose spectrum lies in [-shift, shift].
std::pair<double, Vec4> dominant_eigenpair(const Mat4& K, double shift) {
  Mat4 M = K + shift * Mat4::Identity();
  for (int i = 0; i < 64; ++i) {
    M = M * M;
    const double n = M.norm();
    if (n == 0.0) break;
    M /= n;
  }
  Eigen::Index col = 0;
  M.colwise().norm().maxCoeff(&col);
  Vec4 v = M.col(col);
  if (v.norm() == 0.0) v = Vec4::UnitW();
  v.normalize();
  const Mat4 P = K + shift * Mat4::Identity();
  for (int i = 0; i < 200; ++i) {
    Vec4 next = P * v;
    const double n = next.norm();
    if (n == 0.0) break;
    next /= n;
    const double change = (next - v).norm();
    v = next;
    if (change < 1e-15) break;
  }
  return {v.dot(K * v), v};
}

double quest_polynomial(double l, double a, double b, double c, double d, double sigma,
                        double* derivative) {
  const double l2 = l * l;
  *derivative = 4.0 * l2 * l - 2.0 * (a + b) * l - c;
  return l2 * l2 - (a + b) * l2 - c * l + (a * b + c * sigma - d);
}

struct QuestCore {
  Vec4 q_unnormalized;
  double lambda;
  int iterations;
  bool converged;
};

QuestCore quest_core(const ProfileSums& p) {
  const Mat3 S = p.B + p.B.transpose();
  const double sigma = p.B.trace();
  // Trace of adj(S), written out since S may be singular.
  const double kappa_adj = S(1, 1) * S(2, 2) - S(1, 2) * S(2, 1) + S(0, 0) * S(2, 2) -
                           S(0, 2) * S(2, 0) + S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
  const double delta = S.determinant();
  const double a = sigma * sigma - kappa_adj;
  const double b = sigma * sigma + p.z.squaredNorm();
  const double c = delta + p.z.dot(S * p.z);
  const double d = p.z.dot(S * (S * p.z));

  double lambda = p.weight;
  int it = 0;
  bool converged = false;
  for (; it < 50; ++it) {
    double fp = 0.0;
    const double f = quest_polynomial(lambda, a, b, c, d, sigma, &fp);
    if (fp == 0.0) break;
    const double step = f / fp;
    lambda -= step;
    if (std::abs(step) < 1e-12 * std::max(1.0, p.weight)) {
      converged = true;
      ++it;
      break;
    }
  }
  const double alpha = lambda * lambda - sigma * sigma + kappa_adj;
  const double beta = lambda - sigma;
  const double gamma = (lambda + sigma) * alpha - delta;
  const Vec3 x = (alpha * Mat3::Identity() + beta * S + S * S) * p.z;
  return QuestCore{Vec4(x.x(), x.y(), x.z(), gamma), lambda, it, converged};
}

// Reference frame rotated by 180 deg about axis i: r -> R_i r.
Mat3 half_turn(int axis) {
  Mat3 R = -Mat3::Identity();
  R(axis, axis) = 1.0;
  return R;
}

}  // namespace

const char* to_string(EstimateSource s) {
  switch (s) {
    case EstimateSource::kNone: return "none";
    case EstimateSource::kTriad: return "triad";
    case EstimateSource::kQuest: return "quest";
  }
  return "unknown";
}

Mat3 triad(const Vec3& v1b, const Vec3& v2b, const Vec3& v1e, const Vec3& v2e) {
  const Vec3 cb = v1b.normalized().cross(v2b.normalized());
  const Vec3 ce = v1e.normalized().cross(v2e.normalized());
  if (cb.norm() < 1e-6 || ce.norm() < 1e-6) {
    throw Error(ErrorCode::kDegenerateGeometry, "triad: observation vectors are nearly parallel");
  }
  Mat3 Mb, Me;
  Mb.col(0) = v1b.normalized();
  Mb.col(1) = cb.normalized();
  Mb.col(2) = Mb.col(0).cross(Mb.col(1));
  Me.col(0) = v1e.normalized();
  Me.col(1) = ce.normalized();
  Me.col(2) = Me.col(0).cross(Me.col(1));
  return Mb * Me.transpose();
}

Mat4 davenport_k(const std::vector<VectorObservation>& obs, const std::vector<double>& weights) {
  const ProfileSums p = profile(obs, weights);
  const double sigma = p.B.trace();
  Mat4 K;
  K.topLeftCorner<3, 3>() = p.B + p.B.transpose() - sigma * Mat3::Identity();
  K.topRightCorner<3, 1>() = p.z;
  K.bottomLeftCorner<1, 3>() = p.z.transpose();
  K(3, 3) = sigma;
  return K;
}

QuestResult quest_solve(const std::vector<VectorObservation>& obs,
                        const std::vector<double>& weights) {
  const ProfileSums p = profile(obs, weights);
  if (all_parallel(obs)) {
    throw Error(ErrorCode::kDegenerateGeometry, "quest: all observation vectors are parallel");
  }
  QuestCore best = quest_core(p);
  int best_axis = -1;
  auto scalar_share = [](const QuestCore& c) {
    const double n = c.q_unnormalized.norm();
    return n > 0.0 ? std::abs(c.q_unnormalized[3]) / n : 0.0;
  };
  if (scalar_share(best) < 0.1) {
    for (int axis = 0; axis < 3; ++axis) {
      ProfileSums rotated = p;
      const Mat3 R = half_turn(axis);
      rotated.B = p.B * R.transpose();
      rotated.z.setZero();
      for (std::size_t i = 0; i < obs.size(); ++i) {
        rotated.z += weights[i] * obs[i].body.cross(R * obs[i].eci);
      }
      const QuestCore c = quest_core(rotated);
      if (scalar_share(c) > scalar_share(best)) {
        best = c;
        best_axis = axis;
      }
    }
  }
  QuestResult r;
  r.iterations = best.iterations;
  r.lambda_max = best.lambda;
  if (!best.converged || !(best.q_unnormalized.norm() > 0.0)) {
    r.q = davenport_q(obs, weights);
    r.used_davenport = true;
    return r;
  }
  Quaternion q(best.q_unnormalized.normalized());
  if (best_axis >= 0) {
    Vec4 turn = Vec4::Zero();
    turn[best_axis] = 1.0;
    q = compose(q, Quaternion(turn));
  }
  r.q = canonical_sign(q);
  return r;
}

Quaternion quest(const std::vector<VectorObservation>& obs, const std::vector<double>& weights) {
  return quest_solve(obs, weights).q;
}

Quaternion davenport_q(const std::vector<VectorObservation>& obs,
                       const std::vector<double>& weights) {
  const Mat4 K = davenport_k(obs, weights);
  double total = 0.0;
  for (double w : weights) total += w;
  const double shift = total * 1.01;
  const auto [l1, v1] = dominant_eigenpair(K, shift);
  // Move the found eigenvalue to the bottom of the spectrum.
  const Mat4 deflated = K - (l1 + shift) * v1 * v1.transpose();
  const auto [l2, v2] = dominant_eigenpair(deflated, shift);
  (void)v2;
  if (l1 - l2 < 1e-9 * total) {
    throw Error(ErrorCode::kAmbiguous, "davenport: dominant eigenvalue is not separated");
  }
  return canonical_sign(Quaternion(v1));
}

Vec3 rate_from_quaternions(const Quaternion& q_prev, const Quaternion& q_curr, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rate: dt must be positive");
  const Quaternion q = q_prev.dot(q_curr) < 0.0 ? -q_curr : q_curr;
  return 2.0 * xi_matrix(q).transpose() * (q.coeffs() - q_prev.coeffs()) / dt;
}

Vec3 rate_from_dcm(const Mat3& A_prev, const Mat3& A_curr, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rate: dt must be positive");
  return vee(-(A_curr - A_prev) / dt * A_curr.transpose());
}

void FilterParams::validate() const {
  if (!(w1 > 0.0) || !(w2 > 0.0) || !(xi > 0.0 && xi <= 2.0) || !(period > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "filter: cutoffs and period must be positive, damping in (0, 2]");
  }
}

Vec3 lowpass1_step(Lowpass1State& s, const Vec3& x, const FilterParams& p) {
  const double K = 2.0 / p.period;
  const Vec3 y = (p.w1 * (x + s.x_prev) - (p.w1 - K) * s.y_prev) / (K + p.w1);
  s.x_prev = x;
  s.y_prev = y;
  return y;
}

std::array<double, 6> lowpass2_coefficients(const FilterParams& p) {
  const double K = 2.0 / p.period;
  const double w = p.w2;
  const double w2 = w * w;
  return {w2, 2.0 * w2, w2, K * K + 2.0 * p.xi * w * K + w2, 2.0 * (w2 - K * K),
          K * K - 2.0 * p.xi * w * K + w2};
}

Vec3 lowpass2_step(Lowpass2State& s, const Vec3& x, const FilterParams& p) {
  const auto c = lowpass2_coefficients(p);
  const Vec3 y = (c[0] * x + c[1] * s.x1 + c[2] * s.x2 - c[4] * s.y1 - c[5] * s.y2) / c[3];
  s.x2 = s.x1;
  s.x1 = x;
  s.y2 = s.y1;
  s.y1 = y;
  return y;
}

std::optional<Vec3> RateEstimator::update(const Quaternion& q, double t) {
  std::optional<Vec3> rate;
  if (prev_ && t > prev_->t) rate = rate_from_quaternions(prev_->q, q, t - prev_->t);
  prev_ = Sample{q, t};
  return rate;
}

}  // namespace adcs
