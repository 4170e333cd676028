#include "mirrors/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mirrors/textio.hpp"

namespace mirrors {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw SceneError("scene line " + std::to_string(line) + ": " + what);
}

double real(std::string_view tok, int line) {
  const auto v = textio::parse_double(tok);
  if (!v) fail(line, "bad number '" + std::string(tok) + "'");
  return *v;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_scene(std::ostream& out, const SceneFile& file) {
  out << "mirror-scene 1\n";
  out << "units base-length\n";
  if (file.provenance) {
    const Provenance& p = *file.provenance;
    out << "provenance kernel_hash " << hex(p.kernel_hash) << '\n';
    if (!p.variant.empty()) out << "provenance variant " << p.variant << '\n';
    out << "provenance eps0 " << format_real(p.eps0) << '\n';
    out << "provenance level " << p.level << '\n';
    out << "provenance depth_n " << p.depth_n << '\n';
    out << "provenance seed " << p.seed << '\n';
    out << "provenance strips " << format_real(p.strips.x0) << ' ' << format_real(p.strips.width) << ' '
        << p.strips.count << '\n';
  }
  for (const EllipseArc& a : file.scene.arcs()) {
    out << "arc";
    for (Point q : {a.focus1(), a.focus2(), a.through(), a.apex()}) {
      out << ' ' << format_real(q.x1) << ' ' << format_real(q.x2);
    }
    out << ' ' << format_real(a.clip_lo()) << ' ' << format_real(a.clip_span()) << '\n';
  }
  for (const SegmentMirror& s : file.scene.segments()) {
    out << "segment " << format_real(s.a().x1) << ' ' << format_real(s.a().x2) << ' ' << format_real(s.b().x1)
        << ' ' << format_real(s.b().x2) << '\n';
  }
  if (const auto& g = file.scene.guard()) {
    out << "guard " << format_real(g->floor_depth);
    for (double x : g->wall_xs) out << ' ' << format_real(x);
    out << '\n';
  }
  out << "end\n";
}

std::string scene_string(const SceneFile& file) {
  std::ostringstream os;
  write_scene(os, file);
  return os.str();
}

SceneFile parse_scene(std::istream& in) {
  textio::LineReader reader(in);
  std::vector<std::string_view> t;
  if (!reader.next(t) || t.size() != 2 || t[0] != "mirror-scene") fail(reader.number(), "expected 'mirror-scene 1'");
  if (t[1] != "1") fail(reader.number(), "unsupported version " + std::string(t[1]));

  std::vector<EllipseArc> arcs;
  std::vector<SegmentMirror> segments;
  std::optional<GuardWalls> guard;
  std::optional<Provenance> prov;
  bool ended = false;
  while (reader.next(t)) {
    const int line = reader.number();
    if (ended) fail(line, "content after 'end'");
    const std::string_view kind = t[0];
    if (kind == "end") {
      ended = true;
    } else if (kind == "units") {
      if (t.size() != 2 || t[1] != "base-length") fail(line, "units must be base-length");
    } else if (kind == "provenance") {
      if (!prov) prov.emplace();
      if (t.size() == 5 && t[1] == "strips") {
        const auto count = textio::parse_int(t[4]);
        if (!count || *count < 1) fail(line, "bad strip count");
        prov->strips = StripLayout{real(t[2], line), real(t[3], line), static_cast<int>(*count)};
        if (!(prov->strips.width > 0.0)) fail(line, "strip width must be positive");
        continue;
      }
      if (t.size() != 3) fail(line, "provenance takes a key and a value");
      const std::string value(t[2]);
      if (t[1] == "kernel_hash") {
        std::uint64_t h = 0;
        auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), h, 16);
        if (ec != std::errc{} || end != value.data() + value.size()) fail(line, "bad kernel hash");
        prov->kernel_hash = h;
      } else if (t[1] == "variant") {
        prov->variant = value;
      } else if (t[1] == "eps0") {
        prov->eps0 = real(t[2], line);
      } else if (t[1] == "level" || t[1] == "depth_n" || t[1] == "seed") {
        const auto v = textio::parse_int(t[2]);
        if (!v || *v < 0) fail(line, "bad " + std::string(t[1]));
        if (t[1] == "level") prov->level = static_cast<int>(*v);
        else if (t[1] == "depth_n") prov->depth_n = static_cast<int>(*v);
        else prov->seed = static_cast<std::uint64_t>(*v);
      } else {
        fail(line, "unknown provenance key '" + std::string(t[1]) + "'");
      }
    } else if (kind == "arc") {
      if (t.size() != 11) fail(line, "arc takes 10 numbers");
      double v[10];
      for (int i = 0; i < 10; ++i) v[i] = real(t[i + 1], line);
      try {
        arcs.emplace_back(Point{v[0], v[1]}, Point{v[2], v[3]}, Point{v[4], v[5]}, Point{v[6], v[7]}, v[8], v[9]);
      } catch (const GeometryError& e) {
        fail(line, e.what());
      }
    } else if (kind == "segment") {
      if (t.size() != 5) fail(line, "segment takes 4 numbers");
      try {
        segments.emplace_back(Point{real(t[1], line), real(t[2], line)}, Point{real(t[3], line), real(t[4], line)});
      } catch (const GeometryError& e) {
        fail(line, e.what());
      }
    } else if (kind == "guard") {
      if (guard) fail(line, "second guard record");
      if (t.size() < 2) fail(line, "guard needs a floor depth");
      GuardWalls g;
      g.floor_depth = real(t[1], line);
      if (!(g.floor_depth > 0.0)) fail(line, "guard floor depth must be positive");
      for (std::size_t i = 2; i < t.size(); ++i) g.wall_xs.push_back(real(t[i], line));
      guard = std::move(g);
    } else {
      fail(line, "unknown record '" + std::string(kind) + "'");
    }
  }
  if (!ended) fail(reader.number(), "missing 'end'");
  try {
    return SceneFile{MirrorScene(std::move(arcs), std::move(segments), std::move(guard)), prov};
  } catch (const std::exception& e) {
    throw SceneError(std::string("invalid scene: ") + e.what());
  }
}

SceneFile load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file " + path);
  try {
    return parse_scene(in);
  } catch (const SceneError& e) {
    throw SceneError(path + ": " + e.what());
  }
}

void save_scene(const std::string& path, const SceneFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SceneError("cannot write scene file " + path);
  write_scene(out, file);
  if (!out) throw SceneError("write failed for " + path);
}

}  // namespace mirrors
