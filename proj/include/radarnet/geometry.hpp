#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace radarnet {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

namespace geometry {

inline constexpr int kDefaultVertices = 64;
inline constexpr double kEigenFloor = 1e-12;

// Confidence region {x : (x - center)^T cov^-1 (x - center) <= scale_k^2}.
struct Ellipse {
  Vec2 center = Vec2::Zero();
  Mat2 cov = Mat2::Identity();
  double scale_k = 2.0;

  // Principal semi-axis lengths (major first) and the unit direction of the
  // major axis.
  Eigen::Vector2d semi_axes() const;
  Vec2 major_direction() const;
  double area() const;
  // Affine map taking the unit circle onto the ellipse boundary.
  Mat2 shape() const;
  bool contains(const Vec2& p, double shrink = 1.0) const;
};

// Vertices in counterclockwise order.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  bool empty() const { return vertices.size() < 3; }
  double area() const;
};

// Throws std::invalid_argument for asymmetric, non-finite or indefinite
// covariances. Eigenvalues below kEigenFloor are clamped up to it.
Ellipse ellipse_from_covariance(const Vec2& center, const Mat2& pos_cov, double scale_k);

// Inscribed polygon with vertices at uniform parameter angles.
ConvexPolygon polygonize(const Ellipse& e, int vertices = kDefaultVertices);

// Sutherland-Hodgman clip of `subject` against the convex `clipper`.
ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& clipper);

// Intersection of convex CCW polygons via sorted half-planes.
ConvexPolygon convex_intersection(std::span<const ConvexPolygon> polygons);

// Area of the common intersection of the polygonized ellipses.
double intersection_area(std::span<const Ellipse> ellipses,
                         int vertices_per_ellipse = kDefaultVertices);

struct UtilityRecord {
  std::vector<double> per_target_area;
  double utility = 0.0;
};

// Mean over targets of exp(-area / area_scale).
double utility(std::span<const double> per_target_areas, double area_scale = 1.0);

UtilityRecord make_utility_record(std::vector<double> per_target_areas,
                                  double area_scale = 1.0);

}  // namespace geometry
}  // namespace radarnet
