#pragma once
/**
 * @file tracer.hpp
 * @brief Billiard return map of a mirror scene.
 *
 * A ray enters the lower half-plane at (x, 0) heading in direction alpha in
 * (-pi, 0), reflects specularly off the scene's primitives, and is reported
 * when it crosses x2 = 0 again. The exit angle is recorded in the same
 * convention as the entry angle: if the ray leaves with direction beta' in
 * (0, pi) then beta = beta' - pi, so that re-launching (y, beta) retraces the
 * path backwards.
 *
 * Grazing hits, corner hits and collinear segment hits are reported as Lost:
 * they form a null set for the invariant measure.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mirrors/geometry.hpp"

namespace mirrors {

inline constexpr int kDefaultMaxBounces = 10'000;

struct PhasePoint {
  double x = 0.0;
  double alpha = -kPi / 2;

  friend bool operator==(PhasePoint, PhasePoint) = default;
};

/// Throws std::invalid_argument unless alpha lies strictly inside (-pi, 0).
PhasePoint make_phase_point(double x, double alpha);

/// Floor at x2 = -floor_depth plus vertical walls from the floor up to the axis.
struct GuardWalls {
  double floor_depth = 1.0;
  std::vector<double> wall_xs;

  friend bool operator==(const GuardWalls&, const GuardWalls&) = default;
};

class MirrorScene {
 public:
  MirrorScene() = default;
  MirrorScene(std::vector<EllipseArc> arcs, std::vector<SegmentMirror> segments,
              std::optional<GuardWalls> guard = std::nullopt);

  const std::vector<EllipseArc>& arcs() const { return arcs_; }
  const std::vector<SegmentMirror>& segments() const { return segments_; }
  const std::optional<GuardWalls>& guard() const { return guard_; }

  /// Bounding box of all finite primitives (walls included, floor excluded).
  const Aabb& bounds() const { return bounds_; }
  double diameter() const { return diameter_; }
  /// Minimum free-flight parameter after a bounce.
  double t_eps() const { return t_eps_; }

  struct Hit {
    double t = 0.0;
    Point point;
    Direction tangent;
    int primitive = -1;  // arcs first, then segments, then walls; floor = -2
    bool corner = false;
    bool degenerate = false;
  };
  /// Nearest primitive hit with t > t_min.
  std::optional<Hit> nearest(Point origin, Point unit_dir, double t_min) const;

  friend bool operator==(const MirrorScene& a, const MirrorScene& b) {
    return a.arcs_ == b.arcs_ && a.segments_ == b.segments_ && a.guard_ == b.guard_;
  }

 private:
  struct Node {
    Aabb box;
    int left = -1;   // child index, or -1 for a leaf
    int right = -1;
    int first = 0;   // leaf: range into order_
    int count = 0;
  };

  void build_index();
  int build_node(int first, int count, std::vector<Aabb>& boxes, std::vector<Point>& centers);

  std::vector<EllipseArc> arcs_;
  std::vector<SegmentMirror> segments_;
  std::optional<GuardWalls> guard_;
  std::vector<SegmentMirror> walls_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  Aabb bounds_;
  double diameter_ = 1.0;
  double t_eps_ = 1e-9;
};

enum class TraceStatus { Returned, MaxBounces, Lost };

enum class LossReason { None, Grazing, Corner, Degenerate, Escaped, WallTop };

struct TraceResult {
  TraceStatus status = TraceStatus::Lost;
  LossReason reason = LossReason::None;
  std::optional<PhasePoint> exit;
  int bounces = 0;
  std::vector<Point> path;  // entry point, reflection points, exit point

  friend bool operator==(const TraceResult&, const TraceResult&) = default;
};

TraceResult trace(const MirrorScene& scene, PhasePoint p, int max_bounces = kDefaultMaxBounces,
                  bool record_path = false);

/// The return map K; nullopt when the ray does not return.
std::optional<PhasePoint> billiard_map(const MirrorScene& scene, PhasePoint p,
                                       int max_bounces = kDefaultMaxBounces);

/// Reference implementation: one ray after another.
std::vector<TraceResult> trace_batch_serial(const MirrorScene& scene, std::span<const PhasePoint> rays,
                                            int max_bounces = kDefaultMaxBounces);

/// OpenMP fan-out over rays; results are in input order and identical to the
/// serial version.
std::vector<TraceResult> trace_batch(const MirrorScene& scene, std::span<const PhasePoint> rays,
                                     int max_bounces = kDefaultMaxBounces);

const char* to_string(TraceStatus status);

}  // namespace mirrors
