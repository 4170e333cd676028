#pragma once
/**
 * @file verify.hpp
 * @brief Monte Carlo checks that a mirror scene realizes a reflection kernel.
 *
 * Rays are drawn from Lambda = -dx sin(alpha) dalpha restricted to a window,
 * traced through the scene, and binned by (strip, entry cell, exit cell) on a
 * cosine grid. Rays that do not return, or return outside the strip they
 * entered, are counted as lost.
 */

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mirrors/kernels.hpp"
#include "mirrors/tracer.hpp"

namespace mirrors {

/// SplitMix64 (Steele, Lea and Flood). Stream i of seed s starts from
/// state s + i * 0x9E3779B97F4A7C15, so every ray has its own reproducible
/// stream independent of the thread that draws it.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

struct Window {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

/// x uniform on the window, alpha = -acos(2u - 1); u is redrawn until alpha
/// lies strictly inside (-pi, 0).
std::vector<PhasePoint> sample_lambda(Window window, std::size_t n, std::uint64_t seed);

struct EmpiricalKernel {
  CosineGrid grid;
  StripLayout strips;
  Window window;
  std::vector<std::vector<std::uint64_t>> counts;  // per strip, row-major (entry cell, exit cell)
  std::uint64_t lost = 0;
  std::uint64_t total = 0;

  std::uint64_t count(int strip, int n, int j) const;
  std::uint64_t binned() const;
};

/// Bins traced rays that entered at `rays`. Returned rays that come back
/// inside the strip they entered are binned; everything else is lost.
EmpiricalKernel bin_results(const std::vector<PhasePoint>& rays, const std::vector<TraceResult>& results,
                            const CosineGrid& grid, const StripLayout& strips, Window window);

EmpiricalKernel empirical_kernel(const MirrorScene& scene, Window window, const CosineGrid& grid,
                                 const StripLayout& strips, std::size_t n, std::uint64_t seed,
                                 int max_bounces = kDefaultMaxBounces);

/// Half the L1 distance between the empirical law (with lost rays as an extra
/// atom the target never charges) and the target, each strip weighted by its
/// share of the window. Throws KernelError on mismatched strips or a matrix
/// kernel coarser than the grid.
double tv_to_target(const EmpiricalKernel& emp, const ReflectionKernel& kernel);

/// Sampling scale of tv_to_target at the emp's ray count: half the sum over
/// target cells of sqrt(p (1 - p) / n).
double tv_sigma(const EmpiricalKernel& emp, const ReflectionKernel& kernel);

/// max over strips and n < j of |c(n,j) - c(j,n)| / sqrt(c(n,j) + c(j,n) + 1).
double detailed_balance(const EmpiricalKernel& emp);

struct MarginalTest {
  int level = 5;
  std::vector<std::uint64_t> counts;  // exit cells of returned rays
  std::uint64_t n = 0;
  double chi2 = 0.0;
  double p_value = 1.0;
  double max_z = 0.0;  // largest |count - expected| / sd over cells
};

/// Exit-angle histogram of returned rays against the sine law on the level
/// grid (every cell has probability 2^-(level+1)).
MarginalTest exit_marginal(const std::vector<TraceResult>& results, int level = 5);

double two_bounce_fraction(const std::vector<TraceResult>& results);
double two_bounce_fraction(const MirrorScene& scene, Window window, std::size_t n, std::uint64_t seed,
                           int max_bounces = kDefaultMaxBounces);

struct ReversibilityCheck {
  std::size_t checked = 0;
  std::size_t failures = 0;  // error above 1e-6 (1 + |x|) or unequal bounce count
  double max_error = 0.0;    // max over checked rays of the phase error / (1 + |x|)
};

/// Retraces up to `limit` returned rays from their exits.
ReversibilityCheck reversibility(const MirrorScene& scene, const std::vector<PhasePoint>& rays,
                                 const std::vector<TraceResult>& results, std::size_t limit,
                                 int max_bounces = kDefaultMaxBounces);

struct VerifyConfig {
  Window window;
  int level = 3;
  std::size_t rays = 1000000;
  std::uint64_t seed = 1;
  int max_bounces = kDefaultMaxBounces;
  double eps0 = 0.05;
  int marginal_level = 5;
  std::size_t reversibility_rays = 10000;
};

struct VerifyReport {
  std::size_t rays = 0;
  std::uint64_t seed = 0;
  int level = 0;
  double eps0 = 0.0;
  double tv_distance = 0.0;
  double tv_sigma = 0.0;
  double detailed_balance_z = 0.0;
  double marginal_chi2 = 0.0;
  double marginal_chi2_p = 1.0;
  double marginal_max_z = 0.0;
  double two_bounce_fraction = 0.0;
  double reversibility_max_err = 0.0;
  std::size_t reversibility_checked = 0;
  std::size_t reversibility_failures = 0;
  double lost_fraction = 0.0;

  /// Sampling sd of a fraction whose true value is p, at this ray count.
  double sigma(double p) const;
  bool pass_tv() const;        // tv <= eps0 + 3 tv_sigma
  bool pass_balance() const;   // statistic <= 4
  bool pass_marginal() const;  // p > 0.001 and every cell within 4 sd
  bool pass_two_bounce() const;  // >= 1 - eps0 - 3 sigma(1 - eps0)
  bool pass_reversibility() const;
  bool pass_lost() const;      // <= eps0 + 3 sigma(eps0)
  /// Every check except two_bounce: self-paired cells become one-bounce
  /// circles, so that check only applies to targets without them.
  bool pass() const;
};

VerifyReport verify(const MirrorScene& scene, const ReflectionKernel& kernel, const VerifyConfig& config);

/// "key = value" lines preceded by a commented header naming the thresholds.
void write_report(std::ostream& os, const VerifyReport& report);
std::string report_string(const VerifyReport& report);

}  // namespace mirrors
