#include "mirrors/geometry.hpp"

#include <algorithm>

namespace mirrors {

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double wrap_positive(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

void Aabb::expand(Point p) {
  lo.x1 = std::min(lo.x1, p.x1);
  lo.x2 = std::min(lo.x2, p.x2);
  hi.x1 = std::max(hi.x1, p.x1);
  hi.x2 = std::max(hi.x2, p.x2);
}

void Aabb::expand(const Aabb& other) {
  if (other.empty()) return;
  expand(other.lo);
  expand(other.hi);
}

void Aabb::pad(double margin) {
  lo = lo - Point{margin, margin};
  hi = hi + Point{margin, margin};
}

SegmentMirror::SegmentMirror(Point a, Point b) : a_(a), b_(b) {
  if (!(std::isfinite(a.x1) && std::isfinite(a.x2) && std::isfinite(b.x1) && std::isfinite(b.x2))) {
    throw GeometryError("segment endpoints must be finite");
  }
  if (a == b) throw GeometryError("segment endpoints coincide");
}

Aabb SegmentMirror::bounds() const {
  Aabb box;
  box.expand(a_);
  box.expand(b_);
  return box;
}

namespace {

struct LocalFrame {
  double c = 1.0;  // cos(rotation)
  double s = 0.0;  // sin(rotation)
  Point center;

  Point to_local(Point p) const {
    Point q = p - center;
    return {c * q.x1 + s * q.x2, -s * q.x1 + c * q.x2};
  }
  Point dir_to_local(Point d) const { return {c * d.x1 + s * d.x2, -s * d.x1 + c * d.x2}; }
};

// Roots of A t^2 + B t + C with the sign-matched discriminant form.
int solve_quadratic(double qa, double qb, double qc, double& t1, double& t2) {
  if (qa == 0.0) {
    if (qb == 0.0) return 0;
    t1 = t2 = -qc / qb;
    return 1;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  if (q == 0.0) {
    t1 = t2 = 0.0;
    return disc == 0.0 ? 1 : 2;
  }
  double r1 = q / qa;
  double r2 = qc / q;
  if (r1 > r2) std::swap(r1, r2);
  t1 = r1;
  t2 = r2;
  return disc == 0.0 ? 1 : 2;
}

}  // namespace

EllipseArc::EllipseArc(Point focus1, Point focus2, Point through, Point apex, double clip_lo,
                       double clip_span)
    : focus1_(focus1), focus2_(focus2), through_(through), apex_(apex),
      clip_lo_(normalize_angle(clip_lo)), clip_span_(clip_span) {
  for (Point p : {focus1, focus2, through, apex}) {
    if (!std::isfinite(p.x1) || !std::isfinite(p.x2)) throw GeometryError("arc points must be finite");
  }
  const double d1 = distance(through, focus1);
  const double d2 = distance(through, focus2);
  const double focal = distance(focus1, focus2);
  if (!(d1 + d2 > focal * (1.0 + 1e-12)) || d1 + d2 <= 0.0) {
    throw GeometryError("degenerate ellipse: through-point lies on the focal segment");
  }
  a_ = 0.5 * (d1 + d2);
  const double c = 0.5 * focal;
  b_ = std::sqrt((a_ - c) * (a_ + c));
  center_ = 0.5 * (focus1 + focus2);
  rotation_ = is_circle() ? 0.0 : std::atan2(focus2.x2 - focus1.x2, focus2.x1 - focus1.x1);
  cos_rot_ = std::cos(rotation_);
  sin_rot_ = std::sin(rotation_);
  if (!(clip_span > 0.0 && clip_span < 2.0 * kPi)) throw GeometryError("clip span must lie in (0, 2pi)");
  if (!(distance(apex, focus1) + distance(apex, focus2) < 2.0 * a_ * (1.0 - 1e-12))) {
    throw GeometryError("clip apex must lie strictly inside the ellipse");
  }
}

EllipseArc EllipseArc::circle(Point center, double radius, double lo, double hi) {
  if (!(radius > 0.0)) throw GeometryError("circle radius must be positive");
  const Point through = center + radius * Direction(lo).unit();
  return EllipseArc(center, center, through, center, lo, hi - lo);
}

double EllipseArc::conic_residual(Point p) const {
  return (distance(p, focus1_) + distance(p, focus2_)) / (2.0 * a_) - 1.0;
}

bool EllipseArc::in_clip(Point p, double angular_tol) const {
  const double phi = std::atan2(p.x2 - apex_.x2, p.x1 - apex_.x1);
  const double d = wrap_positive(phi - clip_lo_ + angular_tol);
  return d <= clip_span_ + 2.0 * angular_tol;
}

Point EllipseArc::point_at_polar(double phi) const {
  // The apex is strictly inside the ellipse: exactly one forward root.
  const Direction dir(phi);
  LocalFrame f{std::cos(rotation_), std::sin(rotation_), center_};
  const Point o = f.to_local(apex_);
  const Point d = f.dir_to_local(dir.unit());
  const double ia = 1.0 / (a_ * a_), ib = 1.0 / (b_ * b_);
  double t1 = 0, t2 = 0;
  solve_quadratic(d.x1 * d.x1 * ia + d.x2 * d.x2 * ib, 2.0 * (o.x1 * d.x1 * ia + o.x2 * d.x2 * ib),
                  o.x1 * o.x1 * ia + o.x2 * o.x2 * ib - 1.0, t1, t2);
  return apex_ + t2 * dir.unit();
}

std::array<Point, 2> EllipseArc::endpoints() const {
  return {point_at_polar(clip_lo_), point_at_polar(clip_lo_ + clip_span_)};
}

std::vector<Point> EllipseArc::sample(int n) const {
  n = std::max(n, 2);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pts.push_back(point_at_polar(clip_lo_ + clip_span_ * i / (n - 1)));
  }
  return pts;
}

Aabb EllipseArc::bounds() const {
  Aabb box;
  for (Point p : endpoints()) box.expand(p);
  const double c = std::cos(rotation_), s = std::sin(rotation_);
  const double tx = std::atan2(-b_ * s, a_ * c);
  const double ty = std::atan2(b_ * c, a_ * s);
  for (double th : {tx, tx + kPi, ty, ty + kPi}) {
    const Point local{a_ * std::cos(th), b_ * std::sin(th)};
    const Point p = center_ + Point{c * local.x1 - s * local.x2, s * local.x1 + c * local.x2};
    if (in_clip(p)) box.expand(p);
  }
  box.pad(1e-12 * a_);
  return box;
}

Direction EllipseArc::tangent_unchecked(Point p) const {
  Point normal;
  if (is_circle()) {
    normal = p - focus1_;
  } else {
    const Point u1 = p - focus1_;
    const Point u2 = p - focus2_;
    normal = (1.0 / norm(u1)) * u1 + (1.0 / norm(u2)) * u2;
  }
  return Direction(std::atan2(normal.x2, normal.x1) + 0.5 * kPi);
}

EllipseArc EllipseArc::transformed(double scale, Point pivot, Point shift) const {
  auto map = [&](Point p) { return pivot + scale * (p - pivot) + shift; };
  return EllipseArc(map(focus1_), map(focus2_), map(through_), map(apex_), clip_lo_, clip_span_);
}

namespace {

int local_roots(const EllipseArc& arc, Point origin, Point unit_dir, double& t1, double& t2) {
  const double rot = arc.rotation();
  LocalFrame f{std::cos(rot), std::sin(rot), arc.center()};
  // Work in units of the semi-major axis to keep coefficients O(1).
  const double inv_a = 1.0 / arc.semi_major();
  const double ratio = arc.semi_major() / arc.semi_minor();
  const Point o = inv_a * f.to_local(origin);
  const Point d = f.dir_to_local(unit_dir);
  const double ox = o.x1, oy = o.x2 * ratio;
  const double dx = d.x1, dy = d.x2 * ratio;
  const int n = solve_quadratic(dx * dx + dy * dy, 2.0 * (ox * dx + oy * dy), ox * ox + oy * oy - 1.0, t1, t2);
  t1 *= arc.semi_major();
  t2 *= arc.semi_major();
  return n;
}

}  // namespace

std::vector<ConicHit> ray_conic_intersect(const Ray& ray, const EllipseArc& arc, double t_min) {
  if (t_min < 0.0) throw GeometryError("t_min must be non-negative");
  std::vector<ConicHit> hits;
  double t1 = 0, t2 = 0;
  const int n = local_roots(arc, ray.origin, ray.direction.unit(), t1, t2);
  const double tol = 1e-12;
  for (int i = 0; i < n; ++i) {
    const double t = i == 0 ? t1 : t2;
    if (!(t > t_min)) continue;
    const Point p = ray.at(t);
    if (arc.in_clip(p, tol)) hits.push_back({t, p});
  }
  return hits;
}

std::optional<ConicHit> ray_conic_nearest(const Ray& ray, const EllipseArc& arc, double t_min) {
  double t1 = 0, t2 = 0;
  const int n = local_roots(arc, ray.origin, ray.direction.unit(), t1, t2);
  for (int i = 0; i < n; ++i) {
    const double t = i == 0 ? t1 : t2;
    if (!(t > t_min)) continue;
    const Point p = ray.at(t);
    if (arc.in_clip(p, 1e-12)) return ConicHit{t, p};
  }
  return std::nullopt;
}

std::optional<ConicHit> nearest_hit(const EllipseArc& arc, Point origin, Point unit_dir, double t_min) {
  LocalFrame f{arc.cos_rot_, arc.sin_rot_, arc.center_};
  const double inv_a = 1.0 / arc.a_;
  const double ratio = arc.a_ / arc.b_;
  const Point o = inv_a * f.to_local(origin);
  const Point d = f.dir_to_local(unit_dir);
  const double oy = o.x2 * ratio, dy = d.x2 * ratio;
  double t1 = 0, t2 = 0;
  const int n = solve_quadratic(d.x1 * d.x1 + dy * dy, 2.0 * (o.x1 * d.x1 + oy * dy), o.x1 * o.x1 + oy * oy - 1.0, t1, t2);
  for (int i = 0; i < n; ++i) {
    const double t = (i == 0 ? t1 : t2) * arc.a_;
    if (!(t > t_min)) continue;
    const Point p = origin + t * unit_dir;
    if (arc.in_clip(p, 1e-12)) return ConicHit{t, p};
  }
  return std::nullopt;
}

SegmentHit ray_segment_intersect(const Ray& ray, const SegmentMirror& seg, double t_min) {
  if (t_min < 0.0) throw GeometryError("t_min must be non-negative");
  const Point d = ray.direction.unit();
  const Point e = seg.b() - seg.a();
  const Point w = seg.a() - ray.origin;
  const double denom = cross(d, e);
  const double scale = norm(e);
  if (std::abs(denom) <= 1e-14 * scale) {
    if (std::abs(cross(w, d)) <= kGeoTol * std::max(1.0, scale)) {
      return {HitStatus::Degenerate, 0.0, {}};
    }
    return {};
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, d) / denom;
  if (t > t_min && u >= 0.0 && u <= 1.0) return {HitStatus::Hit, t, ray.at(t)};
  return {};
}

Reflection reflect_specular(Direction incoming, Direction tangent) {
  const double rel = incoming.angle() - tangent.angle();
  if (std::abs(std::sin(rel)) < 1e-12) return {ReflectStatus::Grazing, incoming};
  return {ReflectStatus::Ok, Direction(2.0 * tangent.angle() - incoming.angle())};
}

Direction tangent_at(const EllipseArc& arc, Point p) {
  if (std::abs(arc.conic_residual(p)) > kGeoTol) throw GeometryError("point is not on the ellipse");
  if (!arc.in_clip(p, 1e-9)) throw GeometryError("point is outside the arc clip wedge");
  return arc.tangent_unchecked(p);
}

}  // namespace mirrors
