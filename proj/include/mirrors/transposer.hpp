#pragma once
/**
 * @file transposer.hpp
 * @brief Two-ellipse mirror pairs that swap a thin bundle of directions
 *        around alpha with one around beta, and their assembly over a base
 *        interval.
 *
 * Construction for a base centred at A = (0, 0): B_alpha = r_alpha (cos alpha,
 * sin alpha), B_beta = r_beta (cos beta, sin beta) with r_alpha / r_beta =
 * sin(alpha) / sin(beta), and C the midpoint of B_alpha B_beta. Both arcs are
 * pieces of ellipses with foci A and C, one through B_alpha and one through
 * B_beta, clipped to angular wedges seen from A. A ray leaving A along alpha
 * reflects at B_alpha towards C, carries on to B_beta and reflects back into
 * A, leaving with exit angle beta. When alpha == beta the pair degenerates to
 * one circle arc centred at A.
 */

#include <stdexcept>
#include <vector>

#include "mirrors/discretizer.hpp"
#include "mirrors/geometry.hpp"
#include "mirrors/tracer.hpp"

namespace mirrors {

class TransposerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Angular interval (lo, hi) seen from the base centre.
struct Wedge {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

struct TransposerPair {
  double alpha = 0.0;
  double beta = 0.0;
  Wedge alpha_wedge;
  Wedge beta_wedge;
  double r_alpha = 0.0;
  double r_beta = 0.0;
  Point b_alpha;
  Point b_beta;
  Point c;  // second focus of both arcs
  std::vector<EllipseArc> arcs;  // one circle arc, or alpha arc then beta arc
  int rect = -1;     // rectangle feeding the alpha bundle, when built from a symmetric function
  int partner = -1;  // rectangle feeding the beta bundle

  bool circle() const { return arcs.size() == 1; }
  /// Reflections a ray needs through this pair.
  int bounces() const { return circle() ? 1 : 2; }
  double dalpha() const { return alpha_wedge.width(); }
  double dbeta() const { return beta_wedge.width(); }
  /// Convex hull of the arcs sampled at `samples` points each.
  std::vector<Point> hull(int samples = 129) const;
};

/// Symmetric bundles: alpha +- dalpha/2 and beta +- dbeta/2 with
/// dbeta = dalpha sin(alpha) / sin(beta). When alpha == beta the circle arc
/// spans alpha +- dalpha. Throws TransposerError when a wedge leaves (-pi, 0)
/// or r_alpha is not positive.
TransposerPair build_pair(double alpha, double beta, double dalpha, double r_alpha);

/// Same construction with arbitrary wedges around alpha and beta.
TransposerPair build_pair(double alpha, double beta, Wedge alpha_wedge, Wedge beta_wedge, double r_alpha);

/// Uniform scaling of the whole pair about the base centre.
TransposerPair scaled(const TransposerPair& pair, double factor);

struct PairReport {
  double two_bounce_fraction = 0.0;  // rays finishing with the pair's bounce count inside the base
  double max_exit_angle_error = 0.0;
  bool exit_interval_ok = true;  // every finished ray left through (-rho, rho)
  int rays = 0;
};

/// Deterministic fan through the pair alone: base points in
/// (-(1-trim) rho, (1-trim) rho) crossed with directions in both bundles
/// shrunk by the factor (1 - trim).
PairReport validate_pair(const TransposerPair& pair, double rho, double trim, int n_rays);

struct TuneResult {
  double rho = 0.0;
  double trim = 0.0;
  double r_alpha = 1.0;
};

/// Finds rho and trim such that validate_pair reports a two-bounce fraction
/// of at least 1 - eps0/4 and exit error at most eps0/2. Throws
/// TransposerError after 60 halvings of rho.
TuneResult auto_tune(double alpha, double beta, double dalpha, double eps0);
TuneResult auto_tune(const TransposerPair& pair, double eps0);

/// Smallest angle kept away from the axis: the two caps (-pi, -pi + c1) and
/// (-c1, 0) hold Lambda-mass eps0/16 of the strip.
double angular_cutoff(double eps0);

struct AssemblyOptions {
  double r_start = 1.0;
  double margin = 0.01;       // hull safety margin, fraction of hull diameter
  int hull_samples = 129;
  int crosstalk_rays = 20000;
  int tune_rays = 1024;
  int subdivide = 1;  // least number of equal sine mass pieces per rectangle pair
};

struct TransposerAssembly {
  double rho = 0.0;
  double c1 = 0.0;
  std::vector<TransposerPair> pairs;
  std::vector<double> scale_schedule;  // r_alpha of each pair in build order
  std::vector<int> dropped;            // rectangles left unmirrored (inside the cutoff caps)
  double crosstalk = 0.0;              // measured fraction of base mass not sent to its target rectangle
  Aabb bounds;

  std::vector<EllipseArc> arcs() const;
};

/// All pairs of one strip of the symmetric function, built in order of
/// decreasing sine mass (ties: lower angle first). A rectangle pair whose
/// bundles are too wide to tune is cut into 2, 4, ... pieces of equal sine
/// mass, piece i of one wedge paired with piece i of the other. Each pair starts at
/// r_start and doubles until its hull clears every earlier arc and no earlier
/// hull reaches it. rho is the smallest tuned value over the pairs, halved
/// further until cross-talk is below eps0/16.
TransposerAssembly assemble(const SimpleSymmetricFunction& ssf, int strip, double eps0,
                            const AssemblyOptions& options = {});

/// Measured cross-talk: fraction of Lambda-mass entering (-rho, rho) within
/// the cutoff band that does not leave inside the base and inside the
/// rectangle holding its target angle.
double measure_crosstalk(const TransposerAssembly& assembly, const SimpleSymmetricFunction& ssf, int strip,
                         double rho, int n_rays);

}  // namespace mirrors
