#include "mirrors/packer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "mirrors/polygon.hpp"
#include "mirrors/textio.hpp"

namespace mirrors {

namespace {

double polygon_diameter(const std::vector<Point>& poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, distance(poly[i], poly[j]));
  return d;
}

std::vector<Point> place_body(const PackTemplate& tmpl, double s, double b) {
  std::vector<Point> out(tmpl.body.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * tmpl.body[i] + Point{b, 0.0};
  return out;
}

struct XRange {
  double lo;
  double hi;
};

XRange x_range(const std::vector<Point>& poly) {
  XRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : poly) {
    r.lo = std::min(r.lo, p.x1);
    r.hi = std::max(r.hi, p.x1);
  }
  return r;
}

// Bodies sorted by left end, for finding those that reach an x-range.
class BodyIndex {
 public:
  void add(const std::vector<Point>* body) {
    const XRange r = x_range(*body);
    const auto at = std::upper_bound(items_.begin(), items_.end(), r.lo,
                                     [](double v, const Item& it) { return v < it.range.lo; });
    items_.insert(at, Item{r, body});
    widest_ = std::max(widest_, r.hi - r.lo);
  }

  template <class F>
  void for_each_reaching(XRange q, F&& f) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), q.hi,
                               [](const Item& a, double v) { return a.range.lo < v; });
    while (it != items_.begin()) {
      --it;
      if (it->range.lo < q.lo - widest_) break;
      if (it->range.hi > q.lo) f(*it->body);
    }
  }

 private:
  struct Item {
    XRange range;
    const std::vector<Point>* body;
  };
  std::vector<Item> items_;
  double widest_ = 0.0;
};

}  // namespace

PackTemplate make_template(std::vector<EllipseArc> arcs, double rho, const std::vector<Point>& extra, int samples,
                           double margin) {
  if (!(rho > 0.0)) throw PackingError("template base half-width must be positive");
  std::vector<Point> pts{{-rho, 0.0}, {rho, 0.0}};
  for (const auto& a : arcs) {
    for (const Point& p : a.sample(samples)) {
      if (!(p.x2 < 0.0)) throw PackingError("template mirrors must lie strictly below the axis");
      pts.push_back((1.0 + margin) * p);
    }
  }
  for (const Point& p : extra) {
    if (!(p.x2 <= 0.0)) throw PackingError("template body must lie below the axis");
    pts.push_back(p);
  }
  PackTemplate t;
  t.arcs = std::move(arcs);
  t.rho = rho;
  t.body = convex_hull(std::move(pts));
  if (t.body.size() < 3) throw PackingError("template body is degenerate");
  t.r0 = polygon_diameter(t.body);
  return t;
}

PackTemplate make_template(const TransposerAssembly& assembly, int samples, double margin) {
  return make_template(assembly.arcs(), assembly.rho, {}, samples, margin);
}

ScaledCell transform_cell(const PackTemplate& tmpl, double r, double b) {
  if (!(r > 0.0)) throw PackingError("cell scale must be positive");
  const double s = r / tmpl.r0;
  ScaledCell c;
  c.r = r;
  c.b = b;
  c.f_lo = b - s * tmpl.rho;
  c.f_hi = b + s * tmpl.rho;
  c.body = place_body(tmpl, s, b);
  c.mirrors.reserve(tmpl.arcs.size());
  for (const auto& a : tmpl.arcs) c.mirrors.push_back(a.transformed(s, Point{0.0, 0.0}, Point{b, 0.0}));
  return c;
}

namespace {

// Bodies are indexed by address, so they live in a deque.
using BodyStore = std::deque<std::vector<Point>>;

std::vector<double> place(const PackTemplate& tmpl, const std::vector<std::pair<double, double>>& gaps, double r,
                          XRange within, BodyIndex& index, BodyStore& placed, std::size_t limit) {
  const double s = r / tmpl.r0;
  const double half = s * tmpl.rho;
  const auto shape = place_body(tmpl, s, 0.0);
  const XRange reach = x_range(shape);
  std::vector<double> out;
  for (const auto& [g_lo, g_hi] : gaps) {
    const double slack = 1e-12 * std::max({std::abs(g_lo), std::abs(g_hi), r});
    double t = std::max(g_lo + half, within.lo - reach.lo);
    const double t_end = std::min(g_hi + slack - half, within.hi + slack - reach.hi);
    while (t <= t_end && out.size() < limit) {
      // Push t right past every body it runs into; each overlap set is an interval.
      double next = t;
      index.for_each_reaching({t + reach.lo, t + reach.hi}, [&](const std::vector<Point>& q) {
        const auto ov = horizontal_overlap(shape, q);
        if (ov && t > ov->first - slack && t < ov->second + slack) next = std::max(next, ov->second + 2.0 * slack);
      });
      if (next > t) {
        t = next;
        continue;
      }
      out.push_back(t);
      placed.push_back(place_body(tmpl, s, t));
      index.add(&placed.back());
      t += 2.0 * half;
    }
  }
  return out;
}

}  // namespace

std::vector<double> placement_search(const PackTemplate& tmpl, const std::vector<std::pair<double, double>>& gaps,
                                     double r, const std::vector<std::vector<Point>>& existing, std::size_t limit,
                                     std::pair<double, double> within) {
  if (!(r > 0.0)) throw PackingError("cell scale must be positive");
  BodyIndex index;
  for (const auto& b : existing) index.add(&b);
  BodyStore placed;
  return place(tmpl, gaps, r, {within.first, within.second}, index, placed, limit);
}

std::size_t CantorPacking::cell_count() const {
  std::size_t n = 0;
  for (const auto& g : generations) n += g.size();
  return n;
}

std::vector<EllipseArc> CantorPacking::mirrors() const {
  std::vector<EllipseArc> out;
  for (const auto& g : generations)
    for (const auto& c : g) out.insert(out.end(), c.mirrors.begin(), c.mirrors.end());
  return out;
}

std::vector<const ScaledCell*> CantorPacking::cells() const {
  std::vector<const ScaledCell*> out;
  for (const auto& g : generations)
    for (const auto& c : g) out.push_back(&c);
  return out;
}

namespace {

double total_length(const std::vector<std::pair<double, double>>& iv) {
  double s = 0.0;
  for (const auto& [lo, hi] : iv) s += hi - lo;
  return s;
}

// Gaps minus sorted footprints that each lie inside one gap.
std::vector<std::pair<double, double>> subtract(const std::vector<std::pair<double, double>>& gaps,
                                                const std::vector<double>& centres, double half) {
  std::vector<std::pair<double, double>> out;
  std::size_t k = 0;
  for (const auto& [lo, hi] : gaps) {
    double cur = lo;
    while (k < centres.size() && centres[k] - half < hi) {
      if (centres[k] - half > cur) out.emplace_back(cur, centres[k] - half);
      cur = std::max(cur, centres[k] + half);
      ++k;
    }
    if (hi > cur) out.emplace_back(cur, hi);
  }
  return out;
}

}  // namespace

CantorPacking pack(const PackTemplate& tmpl, double base_lo, double base_hi, double rho1, double eps0,
                   const PackOptions& options) {
  if (!(base_hi > base_lo)) throw PackingError("empty base interval");
  if (!(rho1 > 0.0)) throw PackingError("depth bound must be positive");
  if (!(eps0 > 0.0)) throw PackingError("eps0 must be positive");
  if (tmpl.body.size() < 3 || !(tmpl.r0 > 0.0)) throw PackingError("template has no body");

  CantorPacking out;
  out.base_lo = base_lo;
  out.base_hi = base_hi;
  std::vector<std::pair<double, double>> gaps{{base_lo, base_hi}};
  out.lambda.push_back(base_hi - base_lo);
  const double budget = eps0 / 4 * (base_hi - base_lo);

  BodyStore bodies;
  BodyIndex index;
  const XRange within{base_lo, base_hi};

  double r_ref = rho1;
  for (int g = 1; g <= options.max_gen && out.lambda.back() > budget; ++g) {
    const std::size_t room = options.max_cells - std::min(options.max_cells, out.cell_count());
    if (room == 0) {
      out.cell_cap_hit = true;
      break;
    }
    const double lambda = out.lambda.back();
    std::vector<double> best;
    double best_r = 0.0, best_cover = 0.0;
    for (int h = g == 1 ? 0 : 1; h <= options.max_halvings; ++h) {
      const double r = std::ldexp(r_ref, -h);
      BodyIndex trial = index;
      BodyStore scratch;
      const auto centres = place(tmpl, gaps, r, within, trial, scratch, room);
      const double cover = centres.size() * 2.0 * (r / tmpl.r0) * tmpl.rho;
      if (cover > best_cover) {
        best = centres;
        best_r = r;
        best_cover = cover;
      }
      if (cover >= options.q * lambda) break;
      if (centres.size() >= room) {
        out.cell_cap_hit = true;
        break;
      }
    }
    if (best_cover < options.q * lambda) {
      if (!options.best_effort) {
        throw PackingError("generation " + std::to_string(g) + " covers " + textio::format_double(best_cover / lambda) +
                           " of the leftover, below q = " + textio::format_double(options.q));
      }
      out.q_met = false;
      if (best.empty()) break;
    }
    std::vector<ScaledCell> gen;
    gen.reserve(best.size());
    for (double b : best) {
      ScaledCell c = transform_cell(tmpl, best_r, b);
      if (!options.keep_mirrors) c.mirrors.clear();
      c.generation = g;
      bodies.push_back(c.body);
      index.add(&bodies.back());
      gen.push_back(std::move(c));
    }
    gaps = subtract(gaps, best, (best_r / tmpl.r0) * tmpl.rho);
    out.generations.push_back(std::move(gen));
    out.scales.push_back(best_r);
    out.lambda.push_back(total_length(gaps));
    r_ref = best_r;
  }
  out.leftover = std::move(gaps);
  out.met_budget = out.lambda.back() <= budget;
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_cells(const CantorPacking& packing, double tol) {
  const auto cells = packing.cells();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::vector<XRange> ranges;
  for (const auto* c : cells) ranges.push_back(x_range(c->body));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      if (ranges[i].hi <= ranges[j].lo || ranges[j].hi <= ranges[i].lo) continue;
      if (convex_interiors_overlap(cells[i]->body, cells[j]->body, tol)) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace mirrors
