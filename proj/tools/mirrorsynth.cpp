// mirrorsynth: synthesize, trace, verify and render mirror scenes.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mirrors/scene_io.hpp"
#include "mirrors/synthesis.hpp"
#include "mirrors/textio.hpp"
#include "mirrors/verify.hpp"

using namespace mirrors;

namespace {

struct Failure {
  int code;
  std::string message;
};

std::vector<PhasePoint> read_rays(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{2, "cannot open ray file " + path};
  textio::LineReader reader(in);
  std::vector<std::string_view> t;
  std::vector<PhasePoint> rays;
  while (reader.next(t)) {
    const auto where = path + ":" + std::to_string(reader.number()) + ": ";
    if (t.size() != 2) throw Failure{2, where + "expected 'x alpha'"};
    const auto x = textio::parse_double(t[0]);
    const auto a = textio::parse_double(t[1]);
    if (!x || !a) throw Failure{2, where + "bad number"};
    try {
      rays.push_back(make_phase_point(*x, *a));
    } catch (const std::invalid_argument& e) {
      throw Failure{2, where + e.what()};
    }
  }
  return rays;
}

std::vector<std::vector<Point>> read_paths(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{2, "cannot open path file " + path};
  textio::LineReader reader(in);
  std::vector<std::string_view> t;
  std::vector<std::vector<Point>> paths;
  while (reader.next(t)) {
    if (t.size() % 2 != 0) throw Failure{2, path + ":" + std::to_string(reader.number()) + ": odd coordinate count"};
    std::vector<Point> p;
    for (std::size_t i = 0; i < t.size(); i += 2) {
      const auto x = textio::parse_double(t[i]);
      const auto y = textio::parse_double(t[i + 1]);
      if (!x || !y) throw Failure{2, path + ":" + std::to_string(reader.number()) + ": bad number"};
      p.push_back({*x, *y});
    }
    paths.push_back(std::move(p));
  }
  return paths;
}

// Writes to the file, or to stdout when the path is empty or "-".
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{2, "cannot write " + path};
  write(out);
  if (!out) throw Failure{2, "write failed for " + path};
}

ReflectionKernel read_kernel(const std::string& path) {
  try {
    return load_kernel(path);
  } catch (const KernelError& e) {
    throw Failure{2, e.what()};
  }
}

SceneFile read_scene(const std::string& path) {
  try {
    return load_scene(path);
  } catch (const SceneError& e) {
    throw Failure{2, e.what()};
  }
}

struct Options {
  std::string kernel, scene, rays_in, out, paths;
  double eps0 = 0.05;
  int level = -1;
  int depth_n = 10;
  std::size_t rays = 1000000;
  std::uint64_t seed = 1;
  int max_bounces = kDefaultMaxBounces;
  bool no_guards = false;
  std::size_t max_cells = 64;
  std::string dump_rays;
};

int cmd_synthesize(const Options& o) {
  const ReflectionKernel kernel = read_kernel(o.kernel);
  SynthConfig c;
  c.eps0 = o.eps0;
  c.level = o.level < 0 ? 3 : o.level;
  c.depth_n = o.depth_n;
  c.guards = !o.no_guards;
  c.seed = o.seed;
  c.max_cells = o.max_cells;
  Synthesis s;
  try {
    s = synthesize(kernel, c);
  } catch (const SynthesisError& e) {
    throw Failure{3, "synthesis failed at stage " + e.stage() + ": " + e.what()};
  }
  for (const std::string& issue : lint_scene(s.file, c.guards)) std::cerr << "lint: " << issue << '\n';
  with_output(o.out, [&](std::ostream& os) { write_scene(os, s.file); });
  for (const StripSynthesis& st : s.strips) {
    const CantorPacking& p = st.packing;
    std::fprintf(stderr, "strip %d: %zu pairs, rho %.6g, crosstalk %.4g, %zu copies in %zu generations, leftover %.6g%s\n",
                 st.strip, st.assembly.pairs.size(), st.assembly.rho, st.assembly.crosstalk, p.cell_count(),
                 p.generations.size(), p.lambda.back() / (p.base_hi - p.base_lo),
                 p.q_met ? "" : " (coverage per generation below q)");
  }
  return 0;
}

int cmd_trace(const Options& o) {
  const SceneFile f = read_scene(o.scene);
  const std::vector<PhasePoint> rays = read_rays(o.rays_in);
  std::vector<TraceResult> results;
  if (o.paths.empty()) {
    results = trace_batch(f.scene, rays, o.max_bounces);
  } else {
    results.resize(rays.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < rays.size(); ++i) results[i] = trace(f.scene, rays[i], o.max_bounces, true);
  }
  with_output(o.out, [&](std::ostream& os) {
    for (const TraceResult& r : results) {
      os << to_string(r.status) << ' ';
      if (r.exit) os << format_real(r.exit->x) << ' ' << format_real(r.exit->alpha);
      else os << "nan nan";
      os << ' ' << r.bounces << '\n';
    }
  });
  if (!o.paths.empty()) {
    with_output(o.paths, [&](std::ostream& os) {
      for (const TraceResult& r : results) {
        for (std::size_t i = 0; i < r.path.size(); ++i) {
          os << (i ? " " : "") << format_real(r.path[i].x1) << ' ' << format_real(r.path[i].x2);
        }
        os << '\n';
      }
    });
  }
  return 0;
}

int cmd_verify(const Options& o) {
  const SceneFile f = read_scene(o.scene);
  const ReflectionKernel kernel = read_kernel(o.kernel);
  if (f.provenance && f.provenance->kernel_hash != kernel_hash(kernel)) {
    std::cerr << "warning: scene was synthesized for a different kernel (provenance hash mismatch)\n";
  }
  VerifyConfig c;
  c.window = Window{kernel.strips().x0, kernel.strips().x_end()};
  c.level = o.level >= 0 ? o.level : (f.provenance ? f.provenance->level : 3);
  c.rays = o.rays;
  c.seed = o.seed;
  c.max_bounces = o.max_bounces;
  c.eps0 = o.eps0;
  VerifyReport r;
  try {
    r = verify(f.scene, kernel, c);
  } catch (const KernelError& e) {
    throw Failure{2, std::string("incompatible kernel: ") + e.what()};
  }
  with_output(o.out, [&](std::ostream& os) { write_report(os, r); });
  if (!o.dump_rays.empty()) {
    with_output(o.dump_rays, [&](std::ostream& os) {
      for (const PhasePoint& p : sample_lambda(c.window, c.rays, c.seed)) {
        os << format_real(p.x) << ' ' << format_real(p.alpha) << '\n';
      }
    });
  }
  return r.pass() ? 0 : 1;
}

int cmd_render(const Options& o) {
  const SceneFile f = read_scene(o.scene);
  std::vector<std::vector<Point>> paths;
  if (!o.paths.empty()) paths = read_paths(o.paths);
  with_output(o.out, [&](std::ostream& os) { render_svg(os, f.scene, paths); });
  return 0;
}

void apply_thread_env() {
  const char* env = std::getenv("MIRRORS_THREADS");
  if (!env || !*env) return;
  const auto n = textio::parse_int(env);
  if (!n || *n < 1) throw Failure{2, "MIRRORS_THREADS must be a positive integer"};
  omp_set_num_threads(static_cast<int>(*n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror scenes that realize symmetric reflection kernels"};
  app.require_subcommand(1);
  Options o;

  auto* syn = app.add_subcommand("synthesize", "build a mirror scene for a kernel file");
  syn->add_option("kernel", o.kernel, "kernel file")->required()->check(CLI::ExistingFile);
  syn->add_option("--eps0", o.eps0, "error budget")->check(CLI::Range(0.0, 1.0));
  syn->add_option("--level", o.level, "cosine grid level m (default 3)")->check(CLI::NonNegativeNumber);
  syn->add_option("--depth-n", o.depth_n, "mirrors stay above depth 1/n")->check(CLI::PositiveNumber);
  syn->add_option("--seed", o.seed, "seed recorded in the scene");
  syn->add_option("--max-cells", o.max_cells, "packed copies per strip");
  syn->add_option("--out", o.out, "scene file (default stdout)");
  syn->add_flag("--no-guards", o.no_guards, "omit the guard floor and walls");

  auto* tr = app.add_subcommand("trace", "trace a ray file through a scene");
  tr->add_option("scene", o.scene, "scene file")->required()->check(CLI::ExistingFile);
  tr->add_option("rays", o.rays_in, "ray file, one 'x alpha' per line")->required()->check(CLI::ExistingFile);
  tr->add_option("--max-bounces", o.max_bounces, "bounce budget per ray")->check(CLI::PositiveNumber);
  tr->add_option("--out", o.out, "result file (default stdout)");
  tr->add_option("--paths", o.paths, "write each ray's polyline to this file");

  auto* ver = app.add_subcommand("verify", "Monte Carlo check of a scene against a kernel");
  ver->add_option("scene", o.scene, "scene file")->required()->check(CLI::ExistingFile);
  ver->add_option("kernel", o.kernel, "kernel file")->required()->check(CLI::ExistingFile);
  ver->add_option("--eps0", o.eps0, "error budget")->check(CLI::Range(0.0, 1.0));
  ver->add_option("--level", o.level, "grid level (default: the scene's)")->check(CLI::NonNegativeNumber);
  ver->add_option("--rays", o.rays, "number of rays")->check(CLI::PositiveNumber);
  ver->add_option("--seed", o.seed, "sampling seed");
  ver->add_option("--max-bounces", o.max_bounces, "bounce budget per ray")->check(CLI::PositiveNumber);
  ver->add_option("--out", o.out, "report file (default stdout)");
  ver->add_option("--dump-rays", o.dump_rays, "write the sampled rays in ray-file form");

  auto* ren = app.add_subcommand("render", "draw a scene as SVG");
  ren->add_option("scene", o.scene, "scene file")->required()->check(CLI::ExistingFile);
  ren->add_option("--paths", o.paths, "path file written by trace --paths");
  ren->add_option("--out", o.out, "SVG file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_thread_env();
    if (*syn) return cmd_synthesize(o);
    if (*tr) return cmd_trace(o);
    if (*ver) return cmd_verify(o);
    if (*ren) return cmd_render(o);
  } catch (const Failure& f) {
    std::cerr << "mirrorsynth: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "mirrorsynth: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
