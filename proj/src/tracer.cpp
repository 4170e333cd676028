#include "mirrors/tracer.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace mirrors {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kLeafSize = 4;
constexpr int kFloor = -2;

bool slab_hit(const Aabb& box, Point origin, Point inv, double t_lo, double t_hi) {
  double t0 = (box.lo.x1 - origin.x1) * inv.x1;
  double t1 = (box.hi.x1 - origin.x1) * inv.x1;
  if (t0 > t1) std::swap(t0, t1);
  // 0 * inf on an axis-parallel ray inside the slab gives NaN; treat as unbounded.
  if (!std::isnan(t0)) t_lo = std::max(t_lo, t0);
  if (!std::isnan(t1)) t_hi = std::min(t_hi, t1);
  double s0 = (box.lo.x2 - origin.x2) * inv.x2;
  double s1 = (box.hi.x2 - origin.x2) * inv.x2;
  if (s0 > s1) std::swap(s0, s1);
  if (!std::isnan(s0)) t_lo = std::max(t_lo, s0);
  if (!std::isnan(s1)) t_hi = std::min(t_hi, s1);
  return t_lo <= t_hi;
}

struct SegmentProbe {
  HitStatus status = HitStatus::Miss;
  double t = 0.0;
};

SegmentProbe probe_segment(const SegmentMirror& seg, Point origin, Point d, double t_min) {
  const Point e = seg.b() - seg.a();
  const Point w = seg.a() - origin;
  const double denom = cross(d, e);
  const double scale = norm(e);
  if (std::abs(denom) <= 1e-14 * scale) {
    if (std::abs(cross(w, d)) <= kGeoTol * std::max(1.0, scale)) {
      // Collinear: only a problem if the overlap lies ahead of the ray.
      const double ta = dot(w, d);
      const double tb = dot(seg.b() - origin, d);
      if (std::max(ta, tb) > t_min) return {HitStatus::Degenerate, std::max(t_min, std::min(ta, tb))};
    }
    return {};
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, d) / denom;
  if (t > t_min && u >= 0.0 && u <= 1.0) return {HitStatus::Hit, t};
  return {};
}

int configured_threads() {
  if (const char* env = std::getenv("MIRRORS_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<int>(n);
  }
  return omp_get_max_threads();
}

}  // namespace

PhasePoint make_phase_point(double x, double alpha) {
  if (!std::isfinite(x) || !(alpha > -kPi && alpha < 0.0)) {
    throw std::invalid_argument("phase point needs finite x and alpha in (-pi, 0)");
  }
  return {x, alpha};
}

MirrorScene::MirrorScene(std::vector<EllipseArc> arcs, std::vector<SegmentMirror> segments,
                         std::optional<GuardWalls> guard)
    : arcs_(std::move(arcs)), segments_(std::move(segments)), guard_(std::move(guard)) {
  if (guard_) {
    if (!(guard_->floor_depth > 0.0)) throw std::invalid_argument("guard floor depth must be positive");
    std::sort(guard_->wall_xs.begin(), guard_->wall_xs.end());
    for (double x : guard_->wall_xs) walls_.emplace_back(Point{x, -guard_->floor_depth}, Point{x, 0.0});
  }
  build_index();
}

void MirrorScene::build_index() {
  const int n = static_cast<int>(arcs_.size() + segments_.size() + walls_.size());
  std::vector<Aabb> boxes;
  boxes.reserve(n);
  for (const auto& a : arcs_) boxes.push_back(a.bounds());
  for (const auto& s : segments_) boxes.push_back(s.bounds());
  for (const auto& s : walls_) boxes.push_back(s.bounds());

  bounds_ = Aabb{};
  for (const auto& b : boxes) bounds_.expand(b);
  if (guard_) bounds_.expand(Point{bounds_.empty() ? 0.0 : bounds_.lo.x1, -guard_->floor_depth});
  diameter_ = bounds_.empty() ? 1.0 : std::max(bounds_.diameter(), 1e-300);
  t_eps_ = kGeoTol * diameter_;

  for (auto& b : boxes) b.pad(t_eps_);
  std::vector<Point> centers;
  centers.reserve(n);
  for (const auto& b : boxes) centers.push_back(b.center());

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.clear();
  if (n > 0) build_node(0, n, boxes, centers);
}

int MirrorScene::build_node(int first, int count, std::vector<Aabb>& boxes, std::vector<Point>& centers) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb cbox;
  for (int i = first; i < first + count; ++i) {
    box.expand(boxes[order_[i]]);
    cbox.expand(centers[order_[i]]);
  }
  nodes_[index].box = box;
  if (count <= kLeafSize) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  const bool split_x = (cbox.hi.x1 - cbox.lo.x1) >= (cbox.hi.x2 - cbox.lo.x2);
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) {
                     return split_x ? centers[a].x1 < centers[b].x1 : centers[a].x2 < centers[b].x2;
                   });
  const int left = build_node(first, mid - first, boxes, centers);
  const int right = build_node(mid, first + count - mid, boxes, centers);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

std::optional<MirrorScene::Hit> MirrorScene::nearest(Point origin, Point d, double t_min) const {
  const int n_arcs = static_cast<int>(arcs_.size());
  const int n_segs = static_cast<int>(segments_.size());

  double best_t = kInf;
  double second_t = kInf;  // nearest hit of a different primitive
  int best = -1;
  bool degenerate = false;

  auto offer = [&](double t, int prim, bool degen) {
    if (t < best_t) {
      if (prim != best) second_t = best_t;
      best_t = t;
      best = prim;
      degenerate = degen;
    } else if (prim != best && t < second_t) {
      second_t = t;
    }
  };

  if (!nodes_.empty()) {
    const Point inv{1.0 / d.x1, 1.0 / d.x2};
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!slab_hit(node.box, origin, inv, t_min, best_t + t_eps_)) continue;
      if (node.left < 0) {
        for (int k = node.first; k < node.first + node.count; ++k) {
          const int prim = order_[k];
          if (prim < n_arcs) {
            if (auto h = nearest_hit(arcs_[prim], origin, d, t_min)) offer(h->t, prim, false);
          } else {
            const SegmentMirror& seg =
                prim < n_arcs + n_segs ? segments_[prim - n_arcs] : walls_[prim - n_arcs - n_segs];
            const SegmentProbe p = probe_segment(seg, origin, d, t_min);
            if (p.status != HitStatus::Miss) offer(p.t, prim, p.status == HitStatus::Degenerate);
          }
        }
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }

  if (guard_ && d.x2 < 0.0) {
    const double t = (-guard_->floor_depth - origin.x2) / d.x2;
    if (t > t_min) offer(t, kFloor, false);
  }

  if (best == -1) return std::nullopt;
  Hit hit;
  hit.t = best_t;
  hit.point = origin + best_t * d;
  hit.primitive = best;
  hit.degenerate = degenerate;
  hit.corner = second_t - best_t <= t_eps_;
  if (best == kFloor) {
    hit.tangent = Direction(0.0);
  } else if (best < n_arcs) {
    hit.tangent = arcs_[best].tangent_unchecked(hit.point);
  } else {
    const SegmentMirror& seg = best < n_arcs + n_segs ? segments_[best - n_arcs] : walls_[best - n_arcs - n_segs];
    hit.tangent = seg.tangent();
  }
  return hit;
}

TraceResult trace(const MirrorScene& scene, PhasePoint p, int max_bounces, bool record_path) {
  TraceResult result;
  Point pos{p.x, 0.0};
  Point d{std::cos(p.alpha), std::sin(p.alpha)};
  const double eps = scene.t_eps();
  if (record_path) result.path.push_back(pos);

  auto lost = [&](LossReason why) {
    result.status = TraceStatus::Lost;
    result.reason = why;
    return result;
  };

  for (;;) {
    const auto hit = scene.nearest(pos, d, eps);
    const double t_hit = hit ? hit->t : kInf;

    if (d.x2 > 0.0) {
      const double t_exit = -pos.x2 / d.x2;
      if (t_exit < t_hit) {
        const Point out = pos + t_exit * d;
        if (const auto& g = scene.guard()) {
          for (double wx : g->wall_xs) {
            if (std::abs(out.x1 - wx) <= eps) return lost(LossReason::WallTop);
          }
        }
        if (record_path) result.path.push_back({out.x1, 0.0});
        result.status = TraceStatus::Returned;
        result.exit = PhasePoint{out.x1, std::atan2(d.x2, d.x1) - kPi};
        return result;
      }
    }
    if (!hit) return lost(LossReason::Escaped);
    if (hit->degenerate) return lost(LossReason::Degenerate);
    if (hit->corner) return lost(LossReason::Corner);
    if (result.bounces >= max_bounces) {
      result.status = TraceStatus::MaxBounces;
      return result;
    }

    const Point tan = hit->tangent.unit();
    if (std::abs(cross(d, tan)) < 1e-12) return lost(LossReason::Grazing);
    const double c = 2.0 * dot(d, tan);
    d = c * tan - d;
    d = (1.0 / norm(d)) * d;
    pos = hit->point;
    ++result.bounces;
    if (record_path) result.path.push_back(pos);
  }
}

std::optional<PhasePoint> billiard_map(const MirrorScene& scene, PhasePoint p, int max_bounces) {
  TraceResult r = trace(scene, p, max_bounces);
  if (r.status != TraceStatus::Returned) return std::nullopt;
  return r.exit;
}

std::vector<TraceResult> trace_batch_serial(const MirrorScene& scene, std::span<const PhasePoint> rays,
                                            int max_bounces) {
  std::vector<TraceResult> out;
  out.reserve(rays.size());
  for (const auto& r : rays) out.push_back(trace(scene, r, max_bounces));
  return out;
}

std::vector<TraceResult> trace_batch(const MirrorScene& scene, std::span<const PhasePoint> rays,
                                     int max_bounces) {
  std::vector<TraceResult> out(rays.size());
  const auto n = static_cast<std::ptrdiff_t>(rays.size());
#pragma omp parallel for schedule(dynamic, 256) num_threads(configured_threads())
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = trace(scene, rays[i], max_bounces);
  return out;
}

const char* to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::Returned: return "returned";
    case TraceStatus::MaxBounces: return "max_bounces";
    case TraceStatus::Lost: return "lost";
  }
  return "unknown";
}

}  // namespace mirrors
