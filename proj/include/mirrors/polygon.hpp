#pragma once
// Convex polygon helpers used for interference and disjointness tests.

#include <optional>
#include <utility>
#include <vector>

#include "mirrors/geometry.hpp"

namespace mirrors {

/// Convex hull in counterclockwise order without repeated or collinear points.
std::vector<Point> convex_hull(std::vector<Point> pts);

double polygon_area(const std::vector<Point>& poly);

Aabb polygon_bounds(const std::vector<Point>& poly);

double point_segment_distance(Point p, Point a, Point b);

/// True when p is inside or on the boundary of the counterclockwise convex polygon.
bool point_in_convex(Point p, const std::vector<Point>& poly);

/// Distance from the segment ab to the convex polygon; zero when they meet.
double segment_convex_distance(Point a, Point b, const std::vector<Point>& poly);

/// Separating-axis test for two convex polygons. Touching boundaries (overlap
/// no deeper than `tol` along some axis) count as disjoint.
bool convex_interiors_overlap(const std::vector<Point>& p, const std::vector<Point>& q, double tol = 0.0);

/// Minkowski sum of two counterclockwise convex polygons.
std::vector<Point> minkowski_sum(const std::vector<Point>& a, const std::vector<Point>& b);

/// Shifts t for which p + (t, 0) and q have overlapping interiors: an open
/// interval (lo, hi), or nothing when no horizontal shift makes them overlap.
std::optional<std::pair<double, double>> horizontal_overlap(const std::vector<Point>& p, const std::vector<Point>& q);

}  // namespace mirrors
