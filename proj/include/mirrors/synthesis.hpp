#pragma once
/**
 * @file synthesis.hpp
 * @brief Kernel to mirror scene: discretize, assemble, pack, add guards.
 *
 * For each strip of the kernel the coarsened symmetric function is turned
 * into a transposer assembly, and copies of that assembly are packed over the
 * strip no deeper than 1/n. The guard floor sits at depth 1/n with a wall at
 * every strip boundary.
 */

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mirrors/discretizer.hpp"
#include "mirrors/packer.hpp"
#include "mirrors/scene_io.hpp"
#include "mirrors/transposer.hpp"

namespace mirrors {

class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct SynthConfig {
  double eps0 = 0.05;
  int level = 3;
  int depth_n = 10;  // mirrors stay in -1/n < x2 < 0
  bool guards = true;
  std::uint64_t seed = 1;
  int max_gen = 10;
  std::size_t max_cells = 64;  // packed copies per strip
  AssemblyOptions assembly;
};

struct StripSynthesis {
  int strip = 0;
  TransposerAssembly assembly;
  CantorPacking packing;  // cells hold no mirrors; the scene has them
};

struct Synthesis {
  SceneFile file;
  SimpleSymmetricFunction ssf;
  std::vector<StripSynthesis> strips;
};

/// Throws SynthesisError naming the failing stage (kernel, discretize,
/// assemble, pack, scene). Packing keeps its best generation when the
/// per-generation coverage q cannot be met; the packing record says so.
Synthesis synthesize(const ReflectionKernel& kernel, const SynthConfig& config);

/// Depth bound, strip confinement of every mirror and, when guards are
/// expected, floor at 1/n and a wall at each strip boundary. Needs the
/// provenance block. Returns one message per problem.
std::vector<std::string> lint_scene(const SceneFile& file, bool expect_guards = true);

/// Deterministic SVG drawing of the scene below the axis, with optional ray
/// polylines.
void render_svg(std::ostream& out, const MirrorScene& scene, const std::vector<std::vector<Point>>& paths = {});

}  // namespace mirrors
