#pragma once
/**
 * @file packer.hpp
 * @brief Shallow copies of a reflector cell packed along a base interval.
 *
 * A template is a set of mirrors over the base (-rho, rho) together with its
 * body, the convex hull of the mirrors and the base. Copies are the template
 * scaled so the body has diameter r and shifted along the axis. Generations of
 * copies with decreasing r fill the holes left by earlier ones, so the
 * uncovered part of the base shrinks geometrically while every mirror stays
 * above depth r.
 */

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mirrors/geometry.hpp"
#include "mirrors/transposer.hpp"

namespace mirrors {

class PackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PackTemplate {
  std::vector<EllipseArc> arcs;
  double rho = 0.0;         // base half-width
  std::vector<Point> body;  // counterclockwise convex polygon, top edge [-rho, rho] on the axis
  double r0 = 0.0;          // body diameter
};

/// Body = hull of the base endpoints, the arc samples pushed outward from the
/// base centre by the factor (1 + margin), and any extra points. Throws
/// PackingError when rho <= 0 or a mirror point is not strictly below the axis.
PackTemplate make_template(std::vector<EllipseArc> arcs, double rho, const std::vector<Point>& extra = {},
                           int samples = 257, double margin = 0.005);
PackTemplate make_template(const TransposerAssembly& assembly, int samples = 257, double margin = 0.005);

struct ScaledCell {
  double r = 0.0;      // body diameter of this copy
  double b = 0.0;      // translation along the axis
  double f_lo = 0.0;   // footprint (f_lo, f_hi), length 2 (r / r0) rho
  double f_hi = 0.0;
  std::vector<Point> body;
  std::vector<EllipseArc> mirrors;
  int generation = 0;
};

/// Copy of the template scaled by r / r0 about the base centre and shifted by (b, 0).
ScaledCell transform_cell(const PackTemplate& tmpl, double r, double b);

/// Greedy left to right placement of copies of diameter r inside the gaps.
/// Each copy sits at the leftmost position where its body clears every
/// existing body and every copy already placed in this call; touching is
/// allowed. Bodies also stay inside `within`. Stops after `limit` copies.
std::vector<double> placement_search(const PackTemplate& tmpl, const std::vector<std::pair<double, double>>& gaps,
                                     double r, const std::vector<std::vector<Point>>& existing,
                                     std::size_t limit = static_cast<std::size_t>(-1),
                                     std::pair<double, double> within = {-std::numeric_limits<double>::infinity(),
                                                                         std::numeric_limits<double>::infinity()});

struct PackOptions {
  double q = 0.25;          // required covered fraction of the leftover per generation
  int max_gen = 12;
  int max_halvings = 40;
  std::size_t max_cells = 4096;  // copies over all generations
  bool best_effort = false;      // keep the best generation instead of failing when q is out of reach
  bool keep_mirrors = true;      // store transformed arcs in each cell
};

struct CantorPacking {
  double base_lo = 0.0;
  double base_hi = 0.0;
  std::vector<std::vector<ScaledCell>> generations;
  std::vector<double> scales;                        // r of each generation
  std::vector<double> lambda;                        // uncovered length before generation 1, after 1, after 2, ...
  std::vector<std::pair<double, double>> leftover;   // uncovered intervals after the last generation
  bool met_budget = false;   // leftover <= eps0/4 of the base
  bool q_met = true;         // every generation covered at least q of its leftover
  bool cell_cap_hit = false;

  std::size_t cell_count() const;
  std::vector<EllipseArc> mirrors() const;
  std::vector<const ScaledCell*> cells() const;
};

/// Generations of copies over (base_lo, base_hi) with r at most rho1 and
/// bodies inside the base's vertical band. Each
/// generation tries r = r_prev / 2, r_prev / 4, ... (the first starts at rho1)
/// and keeps the largest r covering at least q of the leftover. Stops when the
/// leftover is at most eps0/4 of the base or after max_gen generations.
/// Throws PackingError when no r reaches q, unless best_effort is set.
CantorPacking pack(const PackTemplate& tmpl, double base_lo, double base_hi, double rho1, double eps0,
                   const PackOptions& options = {});

/// Pairs of cells whose bodies overlap by more than tol (exact convex polygon test).
std::vector<std::pair<std::size_t, std::size_t>> overlapping_cells(const CantorPacking& packing, double tol = 0.0);

}  // namespace mirrors
