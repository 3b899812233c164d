#include "radarnet/tracking.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace radarnet::tracking {
namespace {

using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

Mat24 observation_matrix() {
  Mat24 h = Mat24::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

Mat42 gain(const Mat4& cov, const KalmanConfig& cfg) {
  const Mat24 h = observation_matrix();
  const double r = cfg.meas_noise_sigma * cfg.meas_noise_sigma;
  const Mat2 innovation = h * cov * h.transpose() + r * Mat2::Identity();
  Eigen::LLT<Mat2> llt(innovation);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "singular innovation covariance:\n" << innovation;
    throw std::runtime_error(msg.str());
  }
  // K = P H^T S^-1
  return llt.solve(h * cov).transpose();
}

Mat4 joseph(const Mat4& cov, const Mat42& k, const KalmanConfig& cfg) {
  const double r = cfg.meas_noise_sigma * cfg.meas_noise_sigma;
  const Mat4 ikh = Mat4::Identity() - k * observation_matrix();
  Mat4 out = ikh * cov * ikh.transpose() + r * k * k.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

void KalmanConfig::validate() const {
  if (!(process_noise_q >= 0.0)) throw std::invalid_argument("process_noise_q must be >= 0");
  if (!(meas_noise_sigma > 0.0)) throw std::invalid_argument("meas_noise_sigma must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
}

Mat4 transition_matrix(double dt) {
  Mat4 f = Mat4::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

Mat4 process_noise(double q, double dt) {
  const double dt2 = dt * dt;
  Mat4 out = Mat4::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    out(axis, axis) = q * dt2 * dt2 / 4.0;
    out(axis, axis + 2) = q * dt2 * dt / 2.0;
    out(axis + 2, axis) = q * dt2 * dt / 2.0;
    out(axis + 2, axis + 2) = q * dt2;
  }
  return out;
}

Mat4 predicted_cov(const Mat4& cov, const KalmanConfig& cfg) {
  const Mat4 f = transition_matrix(cfg.dt);
  Mat4 out = f * cov * f.transpose() + process_noise(cfg.process_noise_q, cfg.dt);
  return 0.5 * (out + out.transpose());
}

Mat4 updated_cov(const Mat4& cov, const KalmanConfig& cfg) {
  return joseph(cov, gain(cov, cfg), cfg);
}

Track predict(const Track& track, const KalmanConfig& cfg) {
  Track out;
  out.mean = transition_matrix(cfg.dt) * track.mean;
  out.cov = predicted_cov(track.cov, cfg);
  out.steps_since_update = track.steps_since_update + 1;
  return out;
}

Track update(const Track& track, const Vec2& measurement, const KalmanConfig& cfg) {
  const Mat42 k = gain(track.cov, cfg);
  Track out;
  out.mean = track.mean + k * (measurement - track.position());
  out.cov = joseph(track.cov, k, cfg);
  out.steps_since_update = 0;
  return out;
}

geometry::Ellipse position_ellipse(const Track& track, double scale_k) {
  return geometry::ellipse_from_covariance(track.position(), track.position_cov(), scale_k);
}

Track initial_track(const Vec2& observed_position) {
  Track t;
  t.mean << observed_position.x(), observed_position.y(), 0.0, 0.0;
  t.cov = Vec4(4.0, 4.0, 2.0, 2.0).asDiagonal();
  t.steps_since_update = 0;
  return t;
}

}  // namespace radarnet::tracking
