#pragma once
/**
 * @file geometry.hpp
 * @brief Planar primitives for mirror scenes: points, directions, rays,
 *        segment mirrors and clipped ellipse arcs.
 *
 * Conventions:
 *   - The entry/exit line is the horizontal axis x2 = 0; mirror material
 *     lives in the open lower half-plane.
 *   - Directions are angles measured counterclockwise from the positive
 *     horizontal axis, normalized to (-pi, pi].
 *   - Ellipses are stored in focal form (two foci and one point on the
 *     curve). A circle is the degenerate case focus1 == focus2.
 *   - An arc is the part of the ellipse seen from an apex point inside the
 *     ellipse under polar angles in [clip_lo, clip_lo + clip_span].
 *
 * Everything here is an immutable value type; all functions are pure.
 */

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mirrors {

inline constexpr double kPi = std::numbers::pi;

/// Relative geometric tolerance; multiplied by a length scale at use sites.
inline constexpr double kGeoTol = 1e-9;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x1, s * a.x2}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x1 * b.x1 + a.x2 * b.x2; }
constexpr double cross(Point a, Point b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double norm(Point a) { return std::hypot(a.x1, a.x2); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Maps any finite angle to (-pi, pi].
double normalize_angle(double angle);

/// Maps any finite angle to [0, 2 pi).
double wrap_positive(double angle);

class Direction {
 public:
  Direction() = default;
  explicit Direction(double angle) : angle_(normalize_angle(angle)) {}

  static Direction of(Point v) { return Direction(std::atan2(v.x2, v.x1)); }

  double angle() const { return angle_; }
  Point unit() const { return {std::cos(angle_), std::sin(angle_)}; }

  friend bool operator==(Direction, Direction) = default;

 private:
  double angle_ = 0.0;
};

struct Ray {
  Point origin;
  Direction direction;

  Point at(double t) const { return origin + t * direction.unit(); }
};

struct Aabb {
  Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void expand(Point p);
  void expand(const Aabb& other);
  void pad(double margin);
  Point center() const { return 0.5 * (lo + hi); }
  double diameter() const { return distance(lo, hi); }
  bool empty() const { return lo.x1 > hi.x1; }
};

class SegmentMirror {
 public:
  SegmentMirror(Point a, Point b);

  Point a() const { return a_; }
  Point b() const { return b_; }
  Direction tangent() const { return Direction::of(b_ - a_); }
  Aabb bounds() const;

  friend bool operator==(const SegmentMirror&, const SegmentMirror&) = default;

 private:
  Point a_;
  Point b_;
};

enum class HitStatus { Hit, Miss, Degenerate };

struct SegmentHit {
  HitStatus status = HitStatus::Miss;
  double t = 0.0;
  Point point;
};

struct ConicHit {
  double t = 0.0;
  Point point;
};

class EllipseArc {
 public:
  /// Throws GeometryError when the ellipse is degenerate, the apex is not
  /// strictly inside it, or the clip span is not in (0, 2 pi).
  EllipseArc(Point focus1, Point focus2, Point through, Point apex, double clip_lo,
             double clip_span);

  /// Circle arc centered at `center`, polar angles [lo, hi] seen from the center.
  static EllipseArc circle(Point center, double radius, double lo, double hi);

  Point focus1() const { return focus1_; }
  Point focus2() const { return focus2_; }
  Point through() const { return through_; }
  Point apex() const { return apex_; }
  double clip_lo() const { return clip_lo_; }
  double clip_span() const { return clip_span_; }
  double clip_hi() const { return clip_lo_ + clip_span_; }

  bool is_circle() const { return focus1_ == focus2_; }
  double semi_major() const { return a_; }
  double semi_minor() const { return b_; }
  Point center() const { return center_; }
  /// Angle of the major axis.
  double rotation() const { return rotation_; }

  /// (|p - f1| + |p - f2|) / (2a) - 1; zero on the ellipse.
  double conic_residual(Point p) const;
  /// True when the polar angle of p about the apex lies in the clip wedge.
  bool in_clip(Point p, double angular_tol = 0.0) const;

  /// Point of the ellipse on the ray from the apex at polar angle `phi`.
  Point point_at_polar(double phi) const;
  std::array<Point, 2> endpoints() const;
  /// n >= 2 points evenly spaced in polar angle about the apex, endpoints included.
  std::vector<Point> sample(int n) const;
  /// Exact axis-aligned bounds of the clipped arc.
  Aabb bounds() const;

  /// Unit tangent without on-arc validation (hot path of the tracer).
  Direction tangent_unchecked(Point p) const;

  /// Uniform scaling about `pivot` followed by a shift. Angles are preserved.
  EllipseArc transformed(double scale, Point pivot, Point shift) const;

  friend bool operator==(const EllipseArc& a, const EllipseArc& b) {
    return a.focus1_ == b.focus1_ && a.focus2_ == b.focus2_ && a.through_ == b.through_ &&
           a.apex_ == b.apex_ && a.clip_lo_ == b.clip_lo_ && a.clip_span_ == b.clip_span_;
  }

 private:
  Point focus1_;
  Point focus2_;
  Point through_;
  Point apex_;
  double clip_lo_ = 0.0;
  double clip_span_ = 0.0;
  // derived
  double a_ = 0.0;
  double b_ = 0.0;
  double rotation_ = 0.0;
  double cos_rot_ = 1.0;
  double sin_rot_ = 0.0;
  Point center_;

  friend std::optional<ConicHit> nearest_hit(const EllipseArc&, Point, Point, double);
};

/// All intersections of the ray with the clipped arc at parameter t > t_min,
/// sorted by t.
std::vector<ConicHit> ray_conic_intersect(const Ray& ray, const EllipseArc& arc, double t_min);

/// Nearest intersection parameter with t > t_min, or nullopt. Allocation-free.
std::optional<ConicHit> ray_conic_nearest(const Ray& ray, const EllipseArc& arc, double t_min);

/// Nearest hit for a ray given as origin + unit direction vector; skips the
/// trigonometry of Direction. Used by the tracer's inner loop.
std::optional<ConicHit> nearest_hit(const EllipseArc& arc, Point origin, Point unit_dir, double t_min);

/// Intersection of a ray with the segment; collinear rays report Degenerate.
SegmentHit ray_segment_intersect(const Ray& ray, const SegmentMirror& seg, double t_min);

enum class ReflectStatus { Ok, Grazing };

struct Reflection {
  ReflectStatus status = ReflectStatus::Ok;
  Direction outgoing;
};

/// Mirror the incoming direction across the tangent line.
Reflection reflect_specular(Direction incoming, Direction tangent);

/// Unit tangent of the arc at p; throws GeometryError when p is off the arc.
Direction tangent_at(const EllipseArc& arc, Point p);

}  // namespace mirrors
