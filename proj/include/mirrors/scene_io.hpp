#pragma once
/**
 * @file scene_io.hpp
 * @brief Text format for mirror scenes.
 *
 *   mirror-scene 1
 *   units base-length
 *   provenance <key> <value>          (optional, any number of lines)
 *   provenance strips <x0> <width> <count>
 *   arc <f1x> <f1y> <f2x> <f2y> <tx> <ty> <apex x> <apex y> <clip lo> <clip span>
 *   segment <ax> <ay> <bx> <by>
 *   guard <floor depth> <wall x> ...
 *   end
 *
 * Coordinates are in units of the entry line, with the axis at x2 = 0 and
 * mirrors below it. Every real is written with 17 significant digits so a
 * file read back gives the same doubles. '#' starts a comment.
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "mirrors/kernels.hpp"
#include "mirrors/tracer.hpp"

namespace mirrors {

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Provenance {
  std::uint64_t kernel_hash = 0;
  std::string variant;
  double eps0 = 0.0;
  int level = 0;
  int depth_n = 0;
  std::uint64_t seed = 0;
  StripLayout strips;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SceneFile {
  MirrorScene scene;
  std::optional<Provenance> provenance;

  friend bool operator==(const SceneFile&, const SceneFile&) = default;
};

/// "%.17g".
std::string format_real(double v);

void write_scene(std::ostream& out, const SceneFile& file);
std::string scene_string(const SceneFile& file);
/// Throws SceneError naming the line on malformed input or invalid primitives.
SceneFile parse_scene(std::istream& in);
SceneFile load_scene(const std::string& path);
void save_scene(const std::string& path, const SceneFile& file);

}  // namespace mirrors
