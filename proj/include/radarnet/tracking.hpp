#pragma once

#include <Eigen/Dense>

#include "radarnet/geometry.hpp"

namespace radarnet::tracking {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Constant-velocity state (x, y, vx, vy) in distance and distance/step.
struct Track {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
  int steps_since_update = 0;

  Vec2 position() const { return mean.head<2>(); }
  Vec2 velocity() const { return mean.tail<2>(); }
  Mat2 position_cov() const { return cov.topLeftCorner<2, 2>(); }
};

struct KalmanConfig {
  // Variance of the per-step white acceleration (discrete white-noise
  // acceleration model).
  double process_noise_q = 0.05;
  double meas_noise_sigma = 0.5;
  double dt = 1.0;

  void validate() const;
};

Mat4 transition_matrix(double dt);
Mat4 process_noise(double q, double dt);

Track predict(const Track& track, const KalmanConfig& cfg);

// Position-only measurement update with R = sigma^2 I, Joseph form.
Track update(const Track& track, const Vec2& measurement, const KalmanConfig& cfg);

geometry::Ellipse position_ellipse(const Track& track, double scale_k);

// Broad prior around a first position fix: zero velocity, cov diag(4, 4, 2, 2).
Track initial_track(const Vec2& observed_position);

// Covariance-only versions of predict/update. The covariance recursion does
// not depend on measurement values, so radars can forecast each other's
// ellipses from shared covariances.
Mat4 predicted_cov(const Mat4& cov, const KalmanConfig& cfg);
Mat4 updated_cov(const Mat4& cov, const KalmanConfig& cfg);

}  // namespace radarnet::tracking
