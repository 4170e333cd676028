#include "mirrors/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

namespace mirrors {

namespace {

StripSynthesis synthesize_strip(const SimpleSymmetricFunction& ssf, int strip, const SynthConfig& config) {
  StripSynthesis out;
  out.strip = strip;
  try {
    out.assembly = assemble(ssf, strip, config.eps0, config.assembly);
  } catch (const std::exception& e) {
    throw SynthesisError("assemble", "strip " + std::to_string(strip) + ": " + e.what());
  }
  try {
    const PackTemplate tmpl = make_template(out.assembly);
    PackOptions po;
    po.best_effort = true;
    po.max_gen = config.max_gen;
    po.max_cells = config.max_cells;
    const StripLayout& s = ssf.strips();
    out.packing = pack(tmpl, s.lo(strip), s.hi(strip), 1.0 / config.depth_n, config.eps0, po);
  } catch (const std::exception& e) {
    throw SynthesisError("pack", "strip " + std::to_string(strip) + ": " + e.what());
  }
  return out;
}

}  // namespace

Synthesis synthesize(const ReflectionKernel& kernel, const SynthConfig& config) {
  if (!(config.eps0 > 0.0 && config.eps0 < 1.0)) throw SynthesisError("config", "eps0 must lie in (0, 1)");
  if (config.depth_n < 1) throw SynthesisError("config", "depth n must be at least 1");
  if (config.level < 0) throw SynthesisError("config", "level must be nonnegative");

  const SymmetryReport sym = check_symmetry(kernel, config.level);
  if (!sym.pass) throw SynthesisError("kernel", "kernel is not symmetric at level " + std::to_string(config.level));

  Synthesis result;
  try {
    result.ssf = coarsen_near_diagonal(build_ssf(kernel, config.level), config.eps0);
  } catch (const std::exception& e) {
    throw SynthesisError("discretize", e.what());
  }

  const int n_strips = kernel.strips().count;
  result.strips.resize(n_strips);
  std::vector<std::exception_ptr> errors(n_strips);
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < n_strips; ++s) {
    try {
      result.strips[s] = synthesize_strip(result.ssf, s, config);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<EllipseArc> arcs;
  for (StripSynthesis& s : result.strips) {
    for (auto& gen : s.packing.generations) {
      for (ScaledCell& c : gen) {
        arcs.insert(arcs.end(), c.mirrors.begin(), c.mirrors.end());
        c.mirrors.clear();
        c.mirrors.shrink_to_fit();
      }
    }
  }

  std::optional<GuardWalls> guard;
  if (config.guards) {
    GuardWalls g;
    g.floor_depth = 1.0 / config.depth_n;
    for (int k = 0; k <= n_strips; ++k) g.wall_xs.push_back(kernel.strips().lo(k));
    guard = std::move(g);
  }

  Provenance prov;
  prov.kernel_hash = kernel_hash(kernel);
  prov.variant = to_string(kernel.variant());
  prov.eps0 = config.eps0;
  prov.level = config.level;
  prov.depth_n = config.depth_n;
  prov.seed = config.seed;
  prov.strips = kernel.strips();
  try {
    result.file = SceneFile{MirrorScene(std::move(arcs), {}, std::move(guard)), prov};
  } catch (const std::exception& e) {
    throw SynthesisError("scene", e.what());
  }
  return result;
}

std::vector<std::string> lint_scene(const SceneFile& file, bool expect_guards) {
  std::vector<std::string> issues;
  if (!file.provenance) {
    issues.push_back("no provenance block");
    return issues;
  }
  const Provenance& p = *file.provenance;
  if (p.depth_n < 1) {
    issues.push_back("provenance depth_n must be at least 1");
    return issues;
  }
  const double depth = 1.0 / p.depth_n;
  const StripLayout& strips = p.strips;

  auto check_box = [&](const Aabb& b, const std::string& name) {
    if (!(b.lo.x2 > -depth)) issues.push_back(name + " reaches below -1/n");
    if (!(b.hi.x2 < 0.0)) issues.push_back(name + " reaches the axis");
    const int k = strips.strip_of(b.center().x1);
    if (k < 0 || b.lo.x1 < strips.lo(k) || b.hi.x1 > strips.hi(k)) issues.push_back(name + " crosses a strip boundary");
  };
  const auto& arcs = file.scene.arcs();
  for (std::size_t i = 0; i < arcs.size(); ++i) check_box(arcs[i].bounds(), "arc " + std::to_string(i));
  const auto& segs = file.scene.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) check_box(segs[i].bounds(), "segment " + std::to_string(i));

  const auto& g = file.scene.guard();
  if (!expect_guards) return issues;
  if (!g) {
    issues.push_back("no guard floor or walls");
    return issues;
  }
  if (std::abs(g->floor_depth - depth) > 1e-12 * depth) issues.push_back("guard floor is not at depth 1/n");
  if (static_cast<int>(g->wall_xs.size()) != strips.count + 1) {
    issues.push_back("expected " + std::to_string(strips.count + 1) + " guard walls, found " +
                     std::to_string(g->wall_xs.size()));
  } else {
    for (int k = 0; k <= strips.count; ++k) {
      const double want = strips.lo(k);
      if (std::abs(g->wall_xs[k] - want) > 1e-12 * (1.0 + std::abs(want))) {
        issues.push_back("guard wall " + std::to_string(k) + " is not at a strip boundary");
      }
    }
  }
  return issues;
}

void render_svg(std::ostream& out, const MirrorScene& scene, const std::vector<std::vector<Point>>& paths) {
  Aabb box = scene.bounds();
  for (const auto& path : paths) {
    for (Point q : path) box.expand(q);
  }
  if (box.empty()) box = Aabb{{0.0, -1.0}, {1.0, 0.0}};
  if (const auto& g = scene.guard()) box.expand(Point{box.lo.x1, -g->floor_depth});
  box.expand(Point{box.lo.x1, 0.0});
  const double w0 = std::max(box.hi.x1 - box.lo.x1, 1e-12);
  const double h0 = std::max(box.hi.x2 - box.lo.x2, 1e-12);
  const double pad = 0.03 * std::max(w0, h0);
  const double x0 = box.lo.x1 - pad, y_top = box.hi.x2 + pad;
  const double scale = 1000.0 / (w0 + 2 * pad);
  const double width = 1000.0, height = std::max(1.0, (h0 + 2 * pad) * scale);

  char buf[96];
  auto pt = [&](Point q) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", (q.x1 - x0) * scale, (y_top - q.x2) * scale);
    return std::string(buf);
  };
  auto line = [&](Point a, Point b, const char* style) {
    const std::string pa = pt(a), pb = pt(b);
    out << "<polyline points=\"" << pa << ' ' << pb << "\" " << style << "/>\n";
  };

  std::snprintf(buf, sizeof buf, "width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\"", width, height, width,
                height);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" " << buf << ">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  line({x0, 0.0}, {box.hi.x1 + pad, 0.0}, "stroke=\"#888\" stroke-dasharray=\"6 4\" fill=\"none\"");

  if (const auto& g = scene.guard()) {
    line({x0, -g->floor_depth}, {box.hi.x1 + pad, -g->floor_depth}, "stroke=\"#444\" stroke-width=\"2\" fill=\"none\"");
    for (double x : g->wall_xs) line({x, -g->floor_depth}, {x, 0.0}, "stroke=\"#444\" stroke-width=\"2\" fill=\"none\"");
  }
  for (const SegmentMirror& s : scene.segments()) line(s.a(), s.b(), "stroke=\"black\" fill=\"none\"");
  for (const EllipseArc& a : scene.arcs()) {
    out << "<polyline points=\"";
    bool first = true;
    for (Point q : a.sample(33)) {
      out << (first ? "" : " ") << pt(q);
      first = false;
    }
    out << "\" stroke=\"#1f4e9a\" fill=\"none\"/>\n";
  }
  for (const auto& path : paths) {
    if (path.size() < 2) continue;
    out << "<polyline points=\"";
    for (std::size_t i = 0; i < path.size(); ++i) out << (i ? " " : "") << pt(path[i]);
    out << "\" stroke=\"#c0392b\" stroke-width=\"0.8\" fill=\"none\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace mirrors
