#include "radarnet/geometry.hpp"
#include "radarnet/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace radarnet::geometry {
namespace {

constexpr double kPi = std::numbers::pi;

Ellipse circle(double x, double y, double r) {
  return Ellipse{Vec2(x, y), Mat2::Identity() * r * r, 1.0};
}

using verify::monte_carlo_area;
using verify::random_ellipse;

TEST(EllipseFromCovariance, IdentityIsCircle) {
  const Ellipse e = ellipse_from_covariance(Vec2::Zero(), Mat2::Identity(), 2.0);
  EXPECT_NEAR(e.semi_axes()(0), 2.0, 1e-12);
  EXPECT_NEAR(e.semi_axes()(1), 2.0, 1e-12);
  EXPECT_NEAR(e.area(), 4.0 * kPi, 1e-12);
}

TEST(EllipseFromCovariance, DiagonalAxes) {
  Mat2 cov;
  cov << 4, 0, 0, 1;
  const Ellipse e = ellipse_from_covariance(Vec2(1, 1), cov, 1.0);
  EXPECT_NEAR(e.semi_axes()(0), 2.0, 1e-12);
  EXPECT_NEAR(e.semi_axes()(1), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.major_direction().x()), 1.0, 1e-12);
  EXPECT_NEAR(e.area(), 2.0 * kPi, 1e-12);
}

TEST(EllipseFromCovariance, RotatedAxes) {
  Mat2 cov;
  cov << 2, 1, 1, 2;
  const Ellipse e = ellipse_from_covariance(Vec2::Zero(), cov, 1.0);
  EXPECT_NEAR(e.semi_axes()(0), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(e.semi_axes()(1), 1.0, 1e-12);
  const Vec2 d = e.major_direction();
  EXPECT_NEAR(std::abs(d.x()), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(d.x() * d.y(), 0.5, 1e-12);
}

TEST(EllipseFromCovariance, RejectsIndefiniteAndAsymmetric) {
  Mat2 bad;
  bad << 1, 0, 0, -1;
  EXPECT_THROW(ellipse_from_covariance(Vec2::Zero(), bad, 2.0), std::invalid_argument);
  bad << 1, 0.5, 0.2, 1;
  EXPECT_THROW(ellipse_from_covariance(Vec2::Zero(), bad, 2.0), std::invalid_argument);
  EXPECT_THROW(ellipse_from_covariance(Vec2::Zero(), Mat2::Identity(), 0.0),
               std::invalid_argument);
}

TEST(EllipseFromCovariance, ClampsDegenerate) {
  Mat2 flat;
  flat << 1, 0, 0, 0;
  const Ellipse e = ellipse_from_covariance(Vec2::Zero(), flat, 2.0);
  EXPECT_GT(e.area(), 0.0);
  EXPECT_GE(e.cov.eigenvalues().real().minCoeff(), 0.99 * kEigenFloor);
}

TEST(Polygonize, CounterclockwiseAndInscribed) {
  const ConvexPolygon p = polygonize(circle(0, 0, 1), 64);
  ASSERT_EQ(p.vertices.size(), 64u);
  EXPECT_NEAR(p.area(), 0.5 * 64 * std::sin(2 * kPi / 64), 1e-12);
  EXPECT_GT(p.area(), 0.0);
}

TEST(IntersectionArea, SingleEllipseIsPolygonArea) {
  const Ellipse e = circle(3, -2, 1.5);
  const Ellipse es[] = {e};
  EXPECT_NEAR(intersection_area(es, 64), polygonize(e, 64).area(), 1e-12);
}

TEST(IntersectionArea, IdenticalCircles) {
  const Ellipse es[] = {circle(0, 0, 1), circle(0, 0, 1)};
  EXPECT_NEAR(intersection_area(es, 64), kPi, kPi * 0.005);
}

TEST(IntersectionArea, DisjointCircles) {
  const Ellipse es[] = {circle(0, 0, 1), circle(3, 0, 1)};
  EXPECT_EQ(intersection_area(es, 64), 0.0);
}

TEST(IntersectionArea, LensClosedForm) {
  const double lens = 2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0);
  EXPECT_NEAR(lens, 1.2284, 1e-4);
  const Ellipse es[] = {circle(0, 0, 1), circle(1, 0, 1)};
  EXPECT_NEAR(intersection_area(es, 64), lens, lens * 0.005);
}

TEST(IntersectionArea, RejectsBadArguments) {
  EXPECT_THROW(intersection_area({}, 64), std::invalid_argument);
  const Ellipse es[] = {circle(0, 0, 1)};
  EXPECT_THROW(intersection_area(es, 7), std::invalid_argument);
}

TEST(IntersectionArea, MatchesMonteCarlo) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Ellipse> es;
    const int count = 2 + trial % 2;
    for (int k = 0; k < count; ++k) es.push_back(random_ellipse(rng));
    const double mc = monte_carlo_area(es, 200000, rng);
    // Exact-ellipse reference: high vertex count removes the inscribed bias.
    const double area = intersection_area(es, 1024);
    EXPECT_LE(std::abs(area - mc), std::max(0.02 * mc, 1e-3)) << "trial " << trial;
  }
}

TEST(IntersectionArea, AgreesWithPairwiseClipping) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Ellipse> es;
    std::vector<ConvexPolygon> polys;
    for (int k = 0; k < 3; ++k) {
      es.push_back(random_ellipse(rng));
      polys.push_back(polygonize(es.back(), 64));
    }
    ConvexPolygon acc = polys[0];
    for (int k = 1; k < 3 && !acc.empty(); ++k) acc = clip(acc, polys[k]);
    const double expected = acc.empty() ? 0.0 : acc.area();
    EXPECT_NEAR(intersection_area(es, 64), expected, 1e-9) << "trial " << trial;
    EXPECT_NEAR(convex_intersection(polys).area(), expected, 1e-9);
  }
}

TEST(IntersectionArea, AddingEllipseNeverIncreasesArea) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Ellipse> es = {random_ellipse(rng), random_ellipse(rng)};
    const double before = intersection_area(es, 64);
    es.push_back(random_ellipse(rng));
    EXPECT_LE(intersection_area(es, 64), before + 1e-9);
  }
}

TEST(IntersectionArea, RefinementConverges) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<Ellipse> es = {random_ellipse(rng), random_ellipse(rng)};
    double prev = intersection_area(es, 16);
    double prev_change = std::numeric_limits<double>::infinity();
    for (int v = 32; v <= 512; v *= 2) {
      const double a = intersection_area(es, v);
      const double change = std::abs(a - prev);
      if (prev > 0.0) EXPECT_LE(change, prev_change + 1e-12) << "trial " << trial << " v " << v;
      prev_change = change;
      prev = a;
    }
  }
}

TEST(Utility, KnownValues) {
  const double zeros[] = {0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(utility(zeros), 1.0);
  const double two[] = {0.0, std::log(2.0) * 3.0};
  EXPECT_NEAR(utility(two, 3.0), 0.75, 1e-15);
  const double one[] = {1.7};
  EXPECT_NEAR(utility(one, 1.0), std::exp(-1.7), 1e-15);
}

TEST(Utility, BoundsAndMonotonicity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(5);
    for (double& x : a) x = u(rng);
    const double v = utility(a);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    a[trial % 5] += 0.5;
    EXPECT_LT(utility(a), v);
  }
}

TEST(Utility, RejectsEmptyAndNegative) {
  EXPECT_THROW(utility({}), std::invalid_argument);
  const double neg[] = {-1.0};
  EXPECT_THROW(utility(neg), std::invalid_argument);
  const double ok[] = {1.0};
  EXPECT_THROW(utility(ok, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace radarnet::geometry
