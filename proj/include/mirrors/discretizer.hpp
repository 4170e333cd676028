#pragma once
/**
 * @file discretizer.hpp
 * @brief Simple symmetric functions: piecewise-constant involutive maps on
 *        strip x angle rectangles that approximate a symmetric kernel.
 *
 * Cell n of the cosine grid is split into sub-intervals (beta[n][i],
 * beta[n][i+1]] whose sine mass is a(n, i) / width. Sub-interval i of cell n
 * is paired with sub-interval n of cell i; both carry the same mass because
 * a is symmetric. A ray in one rectangle is sent to the sine-mass midpoint of
 * its partner.
 */

#include <iosfwd>
#include <vector>

#include "mirrors/kernels.hpp"
#include "mirrors/tracer.hpp"

namespace mirrors {

struct BetaPartition {
  /// beta[n] has 2^(m+1) + 1 nondecreasing breakpoints from gamma_n to gamma_{n+1}.
  std::vector<std::vector<double>> beta;
};

/// Throws KernelError on a negative entry or a row sum that disagrees with
/// the grid cell mass by more than 1e-9 * width.
BetaPartition beta_partition(const MassMatrix& a, const CosineGrid& grid, double strip_width);

struct SsfRect {
  int strip = 0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double a_lo = 0.0;   // angle interval (a_lo, a_hi]
  double a_hi = 0.0;
  int partner = 0;
  double target = 0.0;  // exit angle, inside the partner's interval
  int cell = 0;         // grid cell holding this rectangle
  int sub = 0;          // index of the partner cell that this sub-interval feeds

  double sine_mass() const;
  bool self_paired(int index) const { return partner == index; }
};

class SimpleSymmetricFunction {
 public:
  SimpleSymmetricFunction() = default;
  SimpleSymmetricFunction(StripLayout strips, int level, std::vector<SsfRect> rects);

  const StripLayout& strips() const { return strips_; }
  int level() const { return level_; }
  const std::vector<SsfRect>& rects() const { return rects_; }
  /// Largest side length over all rectangles.
  double mesh() const;
  /// Largest distance between a target and the arithmetic midpoint of the partner interval.
  double midpoint_shift() const;

  /// Index of the rectangle containing p, or -1.
  int locate(PhasePoint p) const;

 private:
  StripLayout strips_;
  int level_ = 0;
  std::vector<SsfRect> rects_;
  std::vector<int> strip_begin_;  // rectangles of strip s are [strip_begin_[s], strip_begin_[s+1])
};

/// Sine-mass midpoint of (lo, hi]: the angle with half of the mass on each side.
double sine_midpoint(double lo, double hi);

SimpleSymmetricFunction build_ssf(const ReflectionKernel& kernel, int m);

/// Turns every pair whose two intervals together span at most eps0 / 2 into
/// two self-paired rectangles aimed at their own midpoints. The result moves
/// no point by more than eps0 / 2.
SimpleSymmetricFunction coarsen_near_diagonal(const SimpleSymmetricFunction& ssf, double eps0);

/// Span of a pair: max(a_hi(k) - a_lo(j), a_hi(j) - a_lo(k)).
double pair_span(const SsfRect& k, const SsfRect& j);

/// Throws std::out_of_range when p lies in no rectangle.
PhasePoint eval_ssf(const SimpleSymmetricFunction& ssf, PhasePoint p);

/// Every violated invariant as a human-readable line; empty when valid.
std::vector<std::string> validate_ssf(const SimpleSymmetricFunction& ssf);

/// Text table, one rectangle per line.
void dump_ssf(std::ostream& out, const SimpleSymmetricFunction& ssf);

}  // namespace mirrors
