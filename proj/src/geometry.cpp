#include "radarnet/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace radarnet::geometry {
namespace {

// (eigenvalues ascending, eigenvectors as columns), with eigenvalues floored.
std::pair<Eigen::Vector2d, Mat2> clamped_eigen(const Mat2& cov) {
  Eigen::SelfAdjointEigenSolver<Mat2> solver;
  solver.computeDirect(cov);
  Eigen::Vector2d values = solver.eigenvalues().cwiseMax(kEigenFloor);
  Mat2 vectors = solver.eigenvectors();
  if (vectors.determinant() < 0.0) vectors.col(0) = -vectors.col(0);
  return {values, vectors};
}

const std::vector<Vec2>& unit_circle(int n) {
  static const std::vector<Vec2> kDefault = [] {
    std::vector<Vec2> pts(kDefaultVertices);
    for (int i = 0; i < kDefaultVertices; ++i) {
      const double t = 2.0 * std::numbers::pi * i / kDefaultVertices;
      pts[i] = Vec2(std::cos(t), std::sin(t));
    }
    return pts;
  }();
  if (n == kDefaultVertices) return kDefault;
  thread_local std::vector<Vec2> custom;
  custom.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    custom[i] = Vec2(std::cos(t), std::sin(t));
  }
  return custom;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct Box {
  double xmin, ymin, xmax, ymax;
  bool overlaps(const Box& o) const {
    return xmin <= o.xmax && o.xmin <= xmax && ymin <= o.ymax && o.ymin <= ymax;
  }
};

Box ellipse_box(const Ellipse& e) {
  const double hx = e.scale_k * std::sqrt(std::max(e.cov(0, 0), kEigenFloor));
  const double hy = e.scale_k * std::sqrt(std::max(e.cov(1, 1), kEigenFloor));
  return {e.center.x() - hx, e.center.y() - hy, e.center.x() + hx, e.center.y() + hy};
}

Box polygon_box(const ConvexPolygon& p) {
  Box b{p.vertices[0].x(), p.vertices[0].y(), p.vertices[0].x(), p.vertices[0].y()};
  for (const Vec2& v : p.vertices) {
    b.xmin = std::min(b.xmin, v.x());
    b.xmax = std::max(b.xmax, v.x());
    b.ymin = std::min(b.ymin, v.y());
    b.ymax = std::max(b.ymax, v.y());
  }
  return b;
}

void clip_into(const std::vector<Vec2>& subject, const std::vector<Vec2>& clipper,
               std::vector<Vec2>& out, std::vector<Vec2>& scratch) {
  out = subject;
  const std::size_t nc = clipper.size();
  for (std::size_t e = 0; e < nc && out.size() >= 3; ++e) {
    const Vec2& a = clipper[e];
    const Vec2 edge = clipper[(e + 1) % nc] - a;
    scratch.clear();
    const std::size_t ns = out.size();
    for (std::size_t i = 0; i < ns; ++i) {
      const Vec2& p = out[i];
      const Vec2& q = out[(i + 1) % ns];
      const double sp = cross(edge, p - a);
      const double sq = cross(edge, q - a);
      if (sp >= 0.0) scratch.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        scratch.push_back(p + t * (q - p));
      }
    }
    out.swap(scratch);
  }
  if (out.size() < 3) out.clear();
}

struct HalfPlane {
  Vec2 point;
  Vec2 dir;  // unit; the inside is to the left
};

constexpr double kPlaneEps = 1e-10;

bool outside(const HalfPlane& h, const Vec2& x) { return cross(h.dir, x - h.point) < -kPlaneEps; }

Vec2 meet(const HalfPlane& s, const HalfPlane& t) {
  const double alpha = cross(t.point - s.point, t.dir) / cross(s.dir, t.dir);
  return s.point + alpha * s.dir;
}

bool upper_half(const Vec2& d) { return d.y() > 0.0 || (d.y() == 0.0 && d.x() > 0.0); }

bool angle_less(const HalfPlane& a, const HalfPlane& b) {
  const bool ua = upper_half(a.dir);
  const bool ub = upper_half(b.dir);
  if (ua != ub) return ua;
  return cross(a.dir, b.dir) > 0.0;
}

// Edge half-planes of a convex CCW polygon, rotated to start at the smallest
// direction angle (edges of a convex polygon are cyclically sorted).
void edge_planes(const ConvexPolygon& p, std::vector<HalfPlane>& out) {
  out.clear();
  const std::size_t n = p.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = p.vertices[(i + 1) % n] - p.vertices[i];
    const double len = d.norm();
    if (len > 0.0) out.push_back({p.vertices[i], d / len});
  }
  const auto first = std::min_element(out.begin(), out.end(), angle_less);
  std::rotate(out.begin(), first, out.end());
  if (!std::is_sorted(out.begin(), out.end(), angle_less)) {
    std::stable_sort(out.begin(), out.end(), angle_less);
  }
}

ConvexPolygon intersect_planes(const std::vector<HalfPlane>& planes) {
  // Deque as a vector with a moving head.
  std::vector<HalfPlane> dq(planes.size());
  std::size_t head = 0;
  std::size_t tail = 0;  // one past the back
  const auto size = [&] { return tail - head; };
  for (const HalfPlane& h : planes) {
    while (size() > 1 && outside(h, meet(dq[tail - 1], dq[tail - 2]))) --tail;
    while (size() > 1 && outside(h, meet(dq[head], dq[head + 1]))) ++head;
    if (size() > 0 && std::abs(cross(h.dir, dq[tail - 1].dir)) < 1e-12) {
      if (h.dir.dot(dq[tail - 1].dir) < 0.0) return {};
      if (outside(h, dq[tail - 1].point)) {
        --tail;
      } else {
        continue;
      }
    }
    dq[tail++] = h;
  }
  while (size() > 2 && outside(dq[head], meet(dq[tail - 1], dq[tail - 2]))) --tail;
  while (size() > 2 && outside(dq[tail - 1], meet(dq[head], dq[head + 1]))) ++head;
  if (size() < 3) return {};

  ConvexPolygon out;
  out.vertices.reserve(size());
  for (std::size_t i = head; i + 1 < tail; ++i) out.vertices.push_back(meet(dq[i], dq[i + 1]));
  out.vertices.push_back(meet(dq[tail - 1], dq[head]));
  if (out.area() <= 0.0) return {};
  return out;
}

}  // namespace

ConvexPolygon convex_intersection(std::span<const ConvexPolygon> polygons) {
  std::vector<HalfPlane> planes;
  std::vector<HalfPlane> edges;
  std::vector<HalfPlane> merged;
  for (const ConvexPolygon& p : polygons) {
    if (p.empty()) return {};
    edge_planes(p, edges);
    merged.resize(planes.size() + edges.size());
    std::merge(planes.begin(), planes.end(), edges.begin(), edges.end(), merged.begin(),
               angle_less);
    planes.swap(merged);
  }
  return intersect_planes(planes);
}

Eigen::Vector2d Ellipse::semi_axes() const {
  const auto [values, vectors] = clamped_eigen(cov);
  return {scale_k * std::sqrt(values(1)), scale_k * std::sqrt(values(0))};
}

Vec2 Ellipse::major_direction() const { return clamped_eigen(cov).second.col(1); }

double Ellipse::area() const {
  const auto [values, vectors] = clamped_eigen(cov);
  return std::numbers::pi * scale_k * scale_k * std::sqrt(values(0) * values(1));
}

Mat2 Ellipse::shape() const {
  const auto [values, vectors] = clamped_eigen(cov);
  return vectors * (scale_k * values.cwiseSqrt()).asDiagonal();
}

bool Ellipse::contains(const Vec2& p, double shrink) const {
  const auto [values, vectors] = clamped_eigen(cov);
  const Vec2 local = vectors.transpose() * (p - center);
  const double q = local(0) * local(0) / values(0) + local(1) * local(1) / values(1);
  return q <= shrink * shrink * scale_k * scale_k;
}

double ConvexPolygon::area() const {
  if (empty()) return 0.0;
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) twice += cross(vertices[i], vertices[(i + 1) % n]);
  return std::max(0.0, 0.5 * twice);
}

Ellipse ellipse_from_covariance(const Vec2& center, const Mat2& pos_cov, double scale_k) {
  if (!(scale_k > 0.0) || !std::isfinite(scale_k)) {
    throw std::invalid_argument("ellipse scale_k must be positive and finite");
  }
  if (!pos_cov.allFinite() || !center.allFinite()) {
    throw std::invalid_argument("ellipse covariance or center is not finite");
  }
  const double asym = std::abs(pos_cov(0, 1) - pos_cov(1, 0));
  if (asym > 1e-9 * std::max(1.0, pos_cov.cwiseAbs().maxCoeff())) {
    std::ostringstream msg;
    msg << "covariance is not symmetric (off-diagonal mismatch " << asym << ")";
    throw std::invalid_argument(msg.str());
  }
  Mat2 sym = 0.5 * (pos_cov + pos_cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat2> solver;
  solver.computeDirect(sym);
  if (solver.eigenvalues()(0) < -kEigenFloor) {
    std::ostringstream msg;
    msg << "covariance is not positive definite (min eigenvalue "
        << solver.eigenvalues()(0) << ")";
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Vector2d values = solver.eigenvalues().cwiseMax(kEigenFloor);
  Ellipse e;
  e.center = center;
  e.cov = solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
  e.scale_k = scale_k;
  return e;
}

ConvexPolygon polygonize(const Ellipse& e, int vertices) {
  if (vertices < 3) throw std::invalid_argument("polygonize needs at least 3 vertices");
  const Mat2 a = e.shape();
  const auto& circle = unit_circle(vertices);
  ConvexPolygon poly;
  poly.vertices.reserve(vertices);
  for (const Vec2& u : circle) poly.vertices.push_back(e.center + a * u);
  return poly;
}

ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& clipper) {
  ConvexPolygon out;
  if (subject.empty() || clipper.empty()) return out;
  std::vector<Vec2> scratch;
  clip_into(subject.vertices, clipper.vertices, out.vertices, scratch);
  return out;
}

double intersection_area(std::span<const Ellipse> ellipses, int vertices_per_ellipse) {
  if (ellipses.empty()) throw std::invalid_argument("intersection_area needs an ellipse");
  if (vertices_per_ellipse < 8) {
    throw std::invalid_argument("intersection_area needs at least 8 vertices per ellipse");
  }

  // Most ellipses in a tracking picture are large and swallow the smallest
  // one whole; those are dropped before the general intersection.
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < ellipses.size(); ++i) {
    if (ellipses[i].cov.determinant() < ellipses[smallest].cov.determinant()) smallest = i;
  }
  const ConvexPolygon base = polygonize(ellipses[smallest], vertices_per_ellipse);
  const Box base_box = polygon_box(base);
  // The inscribed polygon contains the ellipse shrunk by cos(pi / N).
  const double inner = std::cos(std::numbers::pi / vertices_per_ellipse);

  std::vector<HalfPlane> planes;
  edge_planes(base, planes);
  std::vector<HalfPlane> edges;
  std::vector<HalfPlane> merged;
  bool any_cut = false;
  for (std::size_t k = 0; k < ellipses.size(); ++k) {
    if (k == smallest) continue;
    const Ellipse& e = ellipses[k];
    if (!base_box.overlaps(ellipse_box(e))) return 0.0;
    const Mat2 cov_inv = e.cov.inverse();
    const double limit = inner * inner * e.scale_k * e.scale_k;
    const bool swallowed =
        std::all_of(base.vertices.begin(), base.vertices.end(), [&](const Vec2& v) {
          const Vec2 d = v - e.center;
          return d.dot(cov_inv * d) <= limit;
        });
    if (swallowed) continue;

    edge_planes(polygonize(e, vertices_per_ellipse), edges);
    any_cut = true;
    merged.resize(planes.size() + edges.size());
    std::merge(planes.begin(), planes.end(), edges.begin(), edges.end(), merged.begin(),
               angle_less);
    planes.swap(merged);
  }
  if (!any_cut) return base.area();
  return intersect_planes(planes).area();
}

double utility(std::span<const double> per_target_areas, double area_scale) {
  if (per_target_areas.empty()) throw std::invalid_argument("utility needs at least one target");
  if (!(area_scale > 0.0)) throw std::invalid_argument("area_scale must be positive");
  double sum = 0.0;
  for (double s : per_target_areas) {
    if (!(s >= 0.0)) throw std::invalid_argument("utility areas must be nonnegative");
    sum += std::exp(-s / area_scale);
  }
  return sum / static_cast<double>(per_target_areas.size());
}

UtilityRecord make_utility_record(std::vector<double> per_target_areas, double area_scale) {
  UtilityRecord r;
  r.utility = utility(per_target_areas, area_scale);
  r.per_target_area = std::move(per_target_areas);
  return r;
}

}  // namespace radarnet::geometry
