#include "mirrors/polygon.hpp"

#include <algorithm>
#include <limits>

namespace mirrors {

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x1 < b.x1 || (a.x1 == b.x1 && a.x2 < b.x2); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Point>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

Aabb polygon_bounds(const std::vector<Point>& poly) {
  Aabb b;
  for (const Point& p : poly) b.expand(p);
  return b;
}

double point_segment_distance(Point p, Point a, Point b) {
  const Point e = b - a;
  const double len2 = dot(e, e);
  double t = len2 > 0.0 ? dot(p - a, e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * e);
}

bool point_in_convex(Point p, const std::vector<Point>& poly) {
  if (poly.size() < 3) return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (cross(poly[(i + 1) % poly.size()] - poly[i], p - poly[i]) < 0.0) return false;
  }
  return true;
}

namespace {

bool segments_cross(Point a, Point b, Point c, Point d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

double segment_convex_distance(Point a, Point b, const std::vector<Point>& poly) {
  if (point_in_convex(a, poly) || point_in_convex(b, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point c = poly[i], d = poly[(i + 1) % n];
    if (segments_cross(a, b, c, d)) return 0.0;
    best = std::min({best, point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b)});
  }
  return best;
}

bool convex_interiors_overlap(const std::vector<Point>& p, const std::vector<Point>& q, double tol) {
  auto separated_by_edges_of = [&](const std::vector<Point>& a, const std::vector<Point>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Point e = a[(i + 1) % a.size()] - a[i];
      const Point n{e.x2, -e.x1};  // outward for counterclockwise polygons
      const double len = norm(n);
      if (len == 0.0) continue;
      double max_a = -std::numeric_limits<double>::infinity();
      double min_b = std::numeric_limits<double>::infinity();
      for (const Point& v : a) max_a = std::max(max_a, dot(v, n) / len);
      for (const Point& v : b) min_b = std::min(min_b, dot(v, n) / len);
      if (min_b >= max_a - tol) return true;
    }
    return false;
  };
  if (p.size() < 3 || q.size() < 3) return false;
  return !separated_by_edges_of(p, q) && !separated_by_edges_of(q, p);
}

namespace {

std::vector<Point> from_lowest(const std::vector<Point>& p) {
  const auto low = std::min_element(p.begin(), p.end(), [](Point a, Point b) {
    return a.x2 < b.x2 || (a.x2 == b.x2 && a.x1 < b.x1);
  });
  std::vector<Point> out(low, p.end());
  out.insert(out.end(), p.begin(), low);
  return out;
}

}  // namespace

std::vector<Point> minkowski_sum(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() < 3 || b.size() < 3) {
    std::vector<Point> all;
    for (const Point& p : a)
      for (const Point& q : b) all.push_back(p + q);
    return convex_hull(std::move(all));
  }
  const auto p = from_lowest(a), q = from_lowest(b);
  const std::size_t n = p.size(), m = q.size();
  std::vector<Point> out;
  out.reserve(n + m);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    out.push_back(p[i % n] + q[j % m]);
    const double c = cross(p[(i + 1) % n] - p[i % n], q[(j + 1) % m] - q[j % m]);
    if (j == m || (i < n && c > 0.0)) {
      ++i;
    } else if (i == n || c < 0.0) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return out;
}

std::optional<std::pair<double, double>> horizontal_overlap(const std::vector<Point>& p, const std::vector<Point>& q) {
  if (p.size() < 3 || q.size() < 3) return std::nullopt;
  std::vector<Point> neg(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) neg[i] = -1.0 * p[i];  // point reflection keeps the orientation
  const auto r = minkowski_sum(q, neg);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool above = false, below = false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Point u = r[i], v = r[(i + 1) % r.size()];
    above |= u.x2 > 0.0;
    below |= u.x2 < 0.0;
    if ((u.x2 <= 0.0 && v.x2 >= 0.0) || (u.x2 >= 0.0 && v.x2 <= 0.0)) {
      if (u.x2 == v.x2) {
        lo = std::min({lo, u.x1, v.x1});
        hi = std::max({hi, u.x1, v.x1});
      } else {
        const double x = u.x1 + (0.0 - u.x2) * (v.x1 - u.x1) / (v.x2 - u.x2);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  // A sum touching the line only from one side gives touching bodies.
  if (!above || !below || !(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

}  // namespace mirrors
