#include "mirrors/transposer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mirrors/polygon.hpp"

namespace mirrors {

namespace {

constexpr Point kOrigin{0.0, 0.0};
constexpr int kMaxHalvings = 60;
constexpr int kMaxDoublings = 200;
constexpr int kMaxPieces = 256;

void check_wedge(const Wedge& w, const char* name) {
  if (!(w.lo > -kPi) || !(w.hi < 0.0) || !(w.hi > w.lo)) {
    throw TransposerError(std::string(name) + " wedge must be a nonempty interval inside (-pi, 0)");
  }
}

Wedge shrink_about(const Wedge& w, double centre, double keep) {
  return {centre - keep * (centre - w.lo), centre + keep * (w.hi - centre)};
}

double distance_to_wedge(double a, const Wedge& w) {
  if (a < w.lo) return w.lo - a;
  if (a > w.hi) return a - w.hi;
  return 0.0;
}

// Sampled arc with its radial extent about the base centre.
struct Placed {
  std::vector<Point> poly;
  Aabb box;
  double r_min = 0.0;
  double r_max = 0.0;
};

Placed place(const EllipseArc& arc, int samples) {
  Placed p;
  p.poly = arc.sample(samples);
  p.r_min = std::numeric_limits<double>::infinity();
  for (const Point& q : p.poly) {
    p.box.expand(q);
    p.r_min = std::min(p.r_min, norm(q));
    p.r_max = std::max(p.r_max, norm(q));
  }
  return p;
}

struct PlacedHull {
  std::vector<Point> poly;
  Aabb box;
  double margin = 0.0;
  double r_min = 0.0;  // distance from the base centre to the hull
  double r_max = 0.0;
};

PlacedHull place_hull(const TransposerPair& pair, int samples, double margin_fraction) {
  PlacedHull h;
  h.poly = pair.hull(samples);
  h.box = polygon_bounds(h.poly);
  h.margin = margin_fraction * h.box.diameter();
  h.r_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.poly.size(); ++i) {
    h.r_min = std::min(h.r_min, point_segment_distance(kOrigin, h.poly[i], h.poly[(i + 1) % h.poly.size()]));
    h.r_max = std::max(h.r_max, norm(h.poly[i]));
  }
  if (point_in_convex(kOrigin, h.poly)) h.r_min = 0.0;
  return h;
}

bool boxes_apart(const Aabb& a, const Aabb& b, double gap) {
  return a.hi.x1 + gap < b.lo.x1 || b.hi.x1 + gap < a.lo.x1 || a.hi.x2 + gap < b.lo.x2 || b.hi.x2 + gap < a.lo.x2;
}

bool arc_clears_hull(const Placed& arc, const PlacedHull& hull) {
  if (arc.r_max + hull.margin < hull.r_min || hull.r_max + hull.margin < arc.r_min) return true;
  if (boxes_apart(arc.box, hull.box, hull.margin)) return true;
  for (std::size_t i = 0; i + 1 < arc.poly.size(); ++i) {
    if (segment_convex_distance(arc.poly[i], arc.poly[i + 1], hull.poly) <= hull.margin) return false;
  }
  return true;
}

}  // namespace

std::vector<Point> TransposerPair::hull(int samples) const {
  std::vector<Point> pts;
  for (const auto& a : arcs) {
    const auto s = a.sample(samples);
    pts.insert(pts.end(), s.begin(), s.end());
  }
  return convex_hull(std::move(pts));
}

TransposerPair build_pair(double alpha, double beta, double dalpha, double r_alpha) {
  if (!(dalpha > 0.0)) throw TransposerError("bundle width must be positive");
  if (alpha == beta) {
    return build_pair(alpha, beta, Wedge{alpha - dalpha, alpha + dalpha}, Wedge{alpha - dalpha, alpha + dalpha},
                      r_alpha);
  }
  const double dbeta = dalpha * std::sin(alpha) / std::sin(beta);
  return build_pair(alpha, beta, Wedge{alpha - dalpha / 2, alpha + dalpha / 2},
                    Wedge{beta - dbeta / 2, beta + dbeta / 2}, r_alpha);
}

TransposerPair build_pair(double alpha, double beta, Wedge alpha_wedge, Wedge beta_wedge, double r_alpha) {
  if (!(r_alpha > 0.0) || !std::isfinite(r_alpha)) throw TransposerError("r_alpha must be positive and finite");
  check_wedge(alpha_wedge, "alpha");
  check_wedge(beta_wedge, "beta");
  if (alpha < alpha_wedge.lo || alpha > alpha_wedge.hi || beta < beta_wedge.lo || beta > beta_wedge.hi) {
    throw TransposerError("bundle centre lies outside its wedge");
  }
  TransposerPair p;
  p.alpha = alpha;
  p.beta = beta;
  p.alpha_wedge = alpha_wedge;
  p.beta_wedge = beta_wedge;
  p.r_alpha = r_alpha;
  try {
    if (alpha == beta) {
      p.r_beta = r_alpha;
      p.b_alpha = p.b_beta = r_alpha * Direction(alpha).unit();
      p.c = kOrigin;
      p.arcs.push_back(EllipseArc::circle(kOrigin, r_alpha, alpha_wedge.lo, alpha_wedge.hi));
      return p;
    }
    p.r_beta = r_alpha * std::sin(beta) / std::sin(alpha);
    p.b_alpha = r_alpha * Point{std::cos(alpha), std::sin(alpha)};
    p.b_beta = p.r_beta * Point{std::cos(beta), std::sin(beta)};
    p.c = 0.5 * (p.b_alpha + p.b_beta);
    p.arcs.emplace_back(kOrigin, p.c, p.b_alpha, kOrigin, alpha_wedge.lo, alpha_wedge.width());
    p.arcs.emplace_back(kOrigin, p.c, p.b_beta, kOrigin, beta_wedge.lo, beta_wedge.width());
  } catch (const GeometryError& e) {
    throw TransposerError(std::string("pair construction failed: ") + e.what());
  }
  return p;
}

TransposerPair scaled(const TransposerPair& pair, double factor) {
  TransposerPair p = pair;
  p.r_alpha *= factor;
  p.r_beta *= factor;
  p.b_alpha = factor * p.b_alpha;
  p.b_beta = factor * p.b_beta;
  p.c = factor * p.c;
  for (auto& a : p.arcs) a = a.transformed(factor, kOrigin, kOrigin);
  return p;
}

PairReport validate_pair(const TransposerPair& pair, double rho, double trim, int n_rays) {
  if (!(rho >= 0.0) || !(trim >= 0.0 && trim < 1.0) || n_rays < 1) {
    throw TransposerError("validate_pair needs rho >= 0, trim in [0, 1) and at least one ray");
  }
  const MirrorScene scene(pair.arcs, {});
  const double keep = 1.0 - trim;
  struct Bundle {
    Wedge entry;
    Wedge exit;
  };
  std::vector<Bundle> bundles{{shrink_about(pair.alpha_wedge, pair.alpha, keep), pair.beta_wedge}};
  if (!pair.circle()) bundles.push_back({shrink_about(pair.beta_wedge, pair.beta, keep), pair.alpha_wedge});

  const int per_bundle = std::max(1, n_rays / static_cast<int>(bundles.size()));
  const int nx = rho > 0.0 ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(per_bundle)))) : 1;
  const int na = std::max(1, per_bundle / nx);
  const double half = keep * rho;
  const double x_tol = std::max(rho, 1e-9 * pair.r_alpha);

  PairReport rep;
  int good = 0;
  for (const auto& b : bundles) {
    for (int i = 0; i < nx; ++i) {
      const double x = rho > 0.0 ? -half + (i + 0.5) * (2.0 * half / nx) : 0.0;
      for (int k = 0; k < na; ++k) {
        const double a = b.entry.lo + (k + 0.5) * (b.entry.width() / na);
        const TraceResult r = trace(scene, {x, a}, 8);
        ++rep.rays;
        if (r.status != TraceStatus::Returned) continue;
        const bool inside = std::abs(r.exit->x) < x_tol;
        if (!inside) rep.exit_interval_ok = false;
        rep.max_exit_angle_error = std::max(rep.max_exit_angle_error, distance_to_wedge(r.exit->alpha, b.exit));
        if (inside && r.bounces == pair.bounces()) ++good;
      }
    }
  }
  rep.two_bounce_fraction = static_cast<double>(good) / rep.rays;
  return rep;
}

TuneResult auto_tune(const TransposerPair& pair, double eps0) {
  if (!(eps0 > 0.0)) throw TransposerError("eps0 must be positive");
  static constexpr double kTrims[] = {0.01, 0.02, 0.05, 0.1, 0.2};
  double rho = 0.25 * std::min(pair.r_alpha * pair.dalpha(), pair.r_beta * pair.dbeta());
  for (int h = 0; h <= kMaxHalvings; ++h, rho *= 0.5) {
    for (double trim : kTrims) {
      const PairReport rep = validate_pair(pair, rho, trim, 1024);
      if (rep.two_bounce_fraction >= 1.0 - eps0 / 4 && rep.max_exit_angle_error <= eps0 / 2) {
        return {rho, trim, pair.r_alpha};
      }
    }
  }
  throw TransposerError("no base half-width makes this bundle pair work");
}

TuneResult auto_tune(double alpha, double beta, double dalpha, double eps0) {
  return auto_tune(build_pair(alpha, beta, dalpha, 1.0), eps0);
}

double angular_cutoff(double eps0) {
  if (!(eps0 > 0.0)) throw TransposerError("eps0 must be positive");
  // Each cap (-c1, 0) holds 1 - cos(c1) of the strip's 2 units of sine mass.
  return std::acos(std::max(-1.0, 1.0 - eps0 / 16.0));
}

std::vector<EllipseArc> TransposerAssembly::arcs() const {
  std::vector<EllipseArc> out;
  for (const auto& p : pairs) out.insert(out.end(), p.arcs.begin(), p.arcs.end());
  return out;
}

double measure_crosstalk(const TransposerAssembly& assembly, const SimpleSymmetricFunction& ssf, int strip,
                         double rho, int n_rays) {
  const MirrorScene scene(assembly.arcs(), {});
  const double xc = 0.5 * (ssf.strips().lo(strip) + ssf.strips().hi(strip));
  const int nx = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_rays)) / 4));
  const int nu = std::max(1, n_rays / nx);
  const double u_lo = 0.5 * (1.0 - std::cos(assembly.c1));  // sine-law CDF of -pi + c1
  int total = 0;
  int bad = 0;
  for (int i = 0; i < nx; ++i) {
    const double x = -rho + (i + 0.5) * (2.0 * rho / nx);
    for (int k = 0; k < nu; ++k) {
      const double u = u_lo + (k + 0.5) * ((1.0 - 2.0 * u_lo) / nu);
      const double a = -std::acos(2.0 * u - 1.0);
      const int home = ssf.locate({xc, a});
      if (home < 0) continue;
      ++total;
      const TraceResult r = trace(scene, {x, a}, 16);
      if (r.status != TraceStatus::Returned || !(std::abs(r.exit->x) < rho) ||
          ssf.locate({xc, r.exit->alpha}) != ssf.rects()[home].partner) {
        ++bad;
      }
    }
  }
  return total ? static_cast<double>(bad) / total : 0.0;
}

TransposerAssembly assemble(const SimpleSymmetricFunction& ssf, int strip, double eps0,
                            const AssemblyOptions& options) {
  if (strip < 0 || strip >= ssf.strips().count) throw TransposerError("strip index out of range");
  TransposerAssembly out;
  out.c1 = angular_cutoff(eps0);
  const Wedge band{-kPi + out.c1, -out.c1};

  // Pairs (k, partner) with k <= partner, trimmed to the band and cut into
  // pieces of equal sine mass. The focal chain maps angles increasingly, so
  // piece i of one wedge goes with piece i of the other.
  struct Job {
    int k;
    int j;
    Wedge wk;
    Wedge wj;
    double mass;
  };
  std::vector<Job> jobs;
  const auto& rects = ssf.rects();
  auto piece = [](const Wedge& w, int i, int n) {
    const double c_lo = std::cos(w.lo), c_hi = std::cos(w.hi);
    auto at = [&](int t) { return t == 0 ? w.lo : t == n ? w.hi : -std::acos(c_lo + (c_hi - c_lo) * t / n); };
    return Wedge{at(i), at(i + 1)};
  };
  // Pieces a rectangle pair needs before every piece tunes. Tuning does not
  // depend on the scale, so this is decided at r = 1.
  auto pieces_for = [&](const Wedge& wk, const Wedge& wj, bool circle) {
    for (int n = std::max(1, options.subdivide); n <= kMaxPieces; n *= 2) {
      bool ok = true;
      for (int i = 0; ok && i < n; ++i) {
        const Wedge a = piece(wk, i, n), b = circle ? a : piece(wj, i, n);
        const double alpha = sine_midpoint(a.lo, a.hi);
        try {
          auto_tune(build_pair(alpha, circle ? alpha : sine_midpoint(b.lo, b.hi), a, b, 1.0), eps0);
        } catch (const TransposerError&) {
          ok = false;
        }
      }
      if (ok) return n;
    }
    throw TransposerError("bundle pair stays infeasible after splitting into " + std::to_string(kMaxPieces) +
                          " pieces");
  };
  for (int k = 0; k < static_cast<int>(rects.size()); ++k) {
    const auto& r = rects[k];
    if (r.strip != strip || r.partner < k) continue;
    const auto& q = rects[r.partner];
    const Wedge wk{std::max(r.a_lo, band.lo), std::min(r.a_hi, band.hi)};
    const Wedge wj{std::max(q.a_lo, band.lo), std::min(q.a_hi, band.hi)};
    if (!(wk.hi > wk.lo) || !(wj.hi > wj.lo)) {
      out.dropped.push_back(k);
      if (r.partner != k) out.dropped.push_back(r.partner);
      continue;
    }
    const int pieces = pieces_for(wk, wj, r.partner == k);
    for (int i = 0; i < pieces; ++i) {
      jobs.push_back({k, r.partner, piece(wk, i, pieces), piece(wj, i, pieces), r.sine_mass() / pieces});
    }
  }
  std::stable_sort(jobs.begin(), jobs.end(), [&](const Job& a, const Job& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.wk.lo < b.wk.lo;
  });
  std::sort(out.dropped.begin(), out.dropped.end());

  std::vector<Placed> arcs_so_far;
  std::vector<PlacedHull> hulls_so_far;
  double rho = std::numeric_limits<double>::infinity();

  for (const Job& job : jobs) {
    const double alpha = sine_midpoint(job.wk.lo, job.wk.hi);
    const bool circle = job.k == job.j;
    const double beta = circle ? alpha : sine_midpoint(job.wj.lo, job.wj.hi);
    double r = options.r_start;
    TransposerPair pair;
    for (int d = 0;; ++d) {
      if (d > kMaxDoublings) throw TransposerError("could not clear earlier mirrors by doubling r");
      pair = build_pair(alpha, beta, job.wk, circle ? job.wk : job.wj, r);
      const PlacedHull hull = place_hull(pair, options.hull_samples, options.margin);
      std::vector<Placed> mine;
      for (const auto& a : pair.arcs) mine.push_back(place(a, options.hull_samples));
      bool clear = true;
      for (const auto& a : arcs_so_far) {
        if (!arc_clears_hull(a, hull)) {
          clear = false;
          break;
        }
      }
      for (std::size_t h = 0; clear && h < hulls_so_far.size(); ++h) {
        for (const auto& a : mine) {
          if (!arc_clears_hull(a, hulls_so_far[h])) {
            clear = false;
            break;
          }
        }
      }
      if (clear) {
        arcs_so_far.insert(arcs_so_far.end(), mine.begin(), mine.end());
        hulls_so_far.push_back(hull);
        break;
      }
      r *= 2.0;
    }
    pair.rect = job.k;
    pair.partner = job.j;
    rho = std::min(rho, auto_tune(pair, eps0).rho);
    out.scale_schedule.push_back(r);
    out.pairs.push_back(std::move(pair));
  }

  if (out.pairs.empty()) {
    out.rho = 0.0;
    return out;
  }
  // Halve rho until cross-talk fits the budget or stops improving.
  double talk = measure_crosstalk(out, ssf, strip, rho, options.crosstalk_rays);
  for (int h = 0; h < kMaxHalvings && talk > eps0 / 16; ++h) {
    const double next = measure_crosstalk(out, ssf, strip, 0.5 * rho, options.crosstalk_rays);
    if (next >= talk) break;
    rho *= 0.5;
    talk = next;
  }
  out.rho = rho;
  out.crosstalk = talk;
  for (const auto& a : out.arcs()) out.bounds.expand(a.bounds());
  return out;
}

}  // namespace mirrors
