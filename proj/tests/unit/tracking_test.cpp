#include "radarnet/tracking.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace radarnet::tracking {
namespace {

double min_eigen(const Mat4& m) {
  return Eigen::SelfAdjointEigenSolver<Mat4>(m).eigenvalues().minCoeff();
}

TEST(Predict, NoiselessPropagation) {
  Track t;
  t.mean << 0, 0, 1, 0;
  t.cov = Mat4::Identity();
  const KalmanConfig cfg{0.0, 0.5, 1.0};
  const Track p = predict(t, cfg);
  EXPECT_TRUE(p.mean.isApprox(Vec4(1, 0, 1, 0)));
  const Mat4 f = transition_matrix(1.0);
  EXPECT_TRUE(p.cov.isApprox(f * t.cov * f.transpose(), 1e-15));
  EXPECT_DOUBLE_EQ(p.cov(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(p.cov(1, 1), 2.0);
  EXPECT_EQ(p.steps_since_update, 1);
}

TEST(Predict, ProcessNoiseShape) {
  const Mat4 q = process_noise(0.05, 1.0);
  EXPECT_DOUBLE_EQ(q(0, 0), 0.05 / 4);
  EXPECT_DOUBLE_EQ(q(0, 2), 0.05 / 2);
  EXPECT_DOUBLE_EQ(q(2, 2), 0.05);
  EXPECT_DOUBLE_EQ(q(0, 1), 0.0);
  EXPECT_GE(min_eigen(q), -1e-15);
}

TEST(Update, ScalarGainHalf) {
  Track t;
  t.mean << 3, -1, 0.5, 0.2;
  t.cov = Mat4::Identity();
  t.steps_since_update = 4;
  const KalmanConfig cfg{0.05, 1.0, 1.0};
  const Track u = update(t, Vec2(3, -1), cfg);
  EXPECT_NEAR(u.cov(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(u.cov(1, 1), 0.5, 1e-15);
  EXPECT_TRUE(u.mean.isApprox(t.mean));
  EXPECT_EQ(u.steps_since_update, 0);
  EXPECT_NEAR(position_ellipse(u, 2.0).area(), 2.0 * std::numbers::pi, 1e-12);
}

TEST(Update, PerfectMeasurementLimit) {
  Track t;
  t.cov = Mat4::Identity() * 3.0;
  const KalmanConfig cfg{0.05, 1e-5, 1.0};
  const Track u = update(t, Vec2(2, 7), cfg);
  EXPECT_NEAR(u.mean(0), 2.0, 1e-8);
  EXPECT_NEAR(u.mean(1), 7.0, 1e-8);
  EXPECT_LT(u.position_cov().norm(), 1e-9);
}

TEST(PositionEllipse, GrowsUnderPrediction) {
  Track t;
  t.cov = Mat4::Identity();
  EXPECT_NEAR(position_ellipse(t, 2.0).area(), 4.0 * std::numbers::pi, 1e-12);
  const Track p = predict(t, KalmanConfig{0.0, 0.5, 1.0});
  EXPECT_GT(position_ellipse(p, 2.0).area(), 4.0 * std::numbers::pi);
}

TEST(KalmanConfig, Validation) {
  EXPECT_NO_THROW(KalmanConfig{}.validate());
  EXPECT_NO_THROW((KalmanConfig{0.0, 0.5, 1.0}.validate()));
  EXPECT_THROW((KalmanConfig{-1.0, 0.5, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((KalmanConfig{0.1, 0.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((KalmanConfig{0.1, 0.5, 0.0}.validate()), std::invalid_argument);
}

TEST(Properties, SpdAndInformationOrdering) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int traj = 0; traj < 10000; ++traj) {
    const KalmanConfig cfg{0.2 * u(rng), 0.05 + 2.0 * u(rng), 0.5 + u(rng)};
    Track t = initial_track(Vec2(g(rng), g(rng)));
    for (int k = 0; k < 8; ++k) {
      const double det_before = t.position_cov().determinant();
      if (u(rng) < 0.5) {
        t = predict(t, cfg);
        EXPECT_GE(t.position_cov().determinant(), det_before * (1 - 1e-12));
      } else {
        t = update(t, t.position() + Vec2(g(rng), g(rng)), cfg);
        EXPECT_LE(t.position_cov().determinant(), det_before * (1 + 1e-12));
        EXPECT_EQ(t.steps_since_update, 0);
      }
      ASSERT_GT(min_eigen(t.cov), 0.0) << "trajectory " << traj;
      ASSERT_TRUE(t.cov.isApprox(t.cov.transpose(), 0.0));
    }
  }
}

TEST(Properties, SteadyStateConverges) {
  const KalmanConfig cfg;
  Track t = initial_track(Vec2::Zero());
  double prev = 0.0;
  for (int k = 0; k < 400; ++k) {
    t = update(predict(t, cfg), Vec2(k + 1.0, 0.0), cfg);
    const double tr = t.position_cov().trace();
    if (k > 200) EXPECT_LT(std::abs(tr - prev), 1e-9);
    prev = tr;
  }
  // Tracked-target 2-sigma areas sit in the few-distance-squared range.
  const double area = position_ellipse(t, 2.0).area();
  EXPECT_GT(area, 1.0);
  EXPECT_LT(area, 3.0);
}

TEST(Properties, NeesConsistent) {
  // Truth follows the filter's own discrete white-acceleration model.
  const KalmanConfig cfg;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  const int runs = 1000;
  const Eigen::LLT<Mat4> prior(initial_track(Vec2::Zero()).cov);
  double nees_sum = 0.0;
  for (int r = 0; r < runs; ++r) {
    Vec4 truth = prior.matrixL() * Vec4(g(rng), g(rng), g(rng), g(rng));
    Track t = initial_track(Vec2::Zero());
    for (int k = 0; k < 30; ++k) {
      for (int axis = 0; axis < 2; ++axis) {
        const double a = std::sqrt(cfg.process_noise_q) * g(rng);
        truth(axis) += truth(axis + 2) + 0.5 * a;
        truth(axis + 2) += a;
      }
      const Vec2 z = truth.head<2>() + cfg.meas_noise_sigma * Vec2(g(rng), g(rng));
      t = update(predict(t, cfg), z, cfg);
    }
    const Vec2 err = truth.head<2>() - t.position();
    nees_sum += err.dot(t.position_cov().inverse() * err);
  }
  const double mean = nees_sum / runs;
  // Chi-square(2 * runs) / runs two-sided 95% band.
  const double half = 1.96 * std::sqrt(4.0 / runs);
  EXPECT_GT(mean, 2.0 - half);
  EXPECT_LT(mean, 2.0 + half);
}

}  // namespace
}  // namespace radarnet::tracking
