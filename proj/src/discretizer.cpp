#include "mirrors/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mirrors/textio.hpp"

namespace mirrors {

namespace {

constexpr double kMassTol = 1e-10;

// Angle in [-pi, 0] from u = 1 + cos(beta) and v = 1 - cos(beta). The caller
// supplies both so that whichever is small is known to full relative
// precision; acos itself loses half the digits near the poles.
double angle_from_uv(double u, double v) {
  if (u <= v) return -kPi + 2.0 * std::asin(std::sqrt(std::clamp(0.5 * u, 0.0, 1.0)));
  return -2.0 * std::asin(std::sqrt(std::clamp(0.5 * v, 0.0, 1.0)));
}

}  // namespace

BetaPartition beta_partition(const MassMatrix& a, const CosineGrid& grid, double strip_width) {
  const int n_cells = grid.cells();
  if (a.dim != n_cells) throw KernelError("mass matrix does not match the grid");
  if (!(strip_width > 0.0)) throw KernelError("strip width must be positive");
  BetaPartition bp;
  bp.beta.resize(n_cells);
  for (int n = 0; n < n_cells; ++n) {
    // 1 + cos(gamma_n) and 1 - cos(gamma_{n+1}) are exact multiples of the cell mass.
    const double u0 = n * grid.cell_mass();
    const double v1 = 2.0 - (n + 1) * grid.cell_mass();
    std::vector<double> suffix(n_cells + 1, 0.0);
    for (int i = n_cells - 1; i >= 0; --i) {
      if (a(n, i) < 0.0) throw KernelError("mass matrix has a negative entry");
      suffix[i] = suffix[i + 1] + a(n, i) / strip_width;
    }
    if (std::abs(suffix[0] - grid.cell_mass()) > 1e-9) {
      throw KernelError("row " + std::to_string(n) + " sum does not match the cell mass");
    }
    auto& row = bp.beta[n];
    row.resize(n_cells + 1);
    double prefix = 0.0;
    for (int i = 0; i <= n_cells; ++i) {
      row[i] = angle_from_uv(u0 + prefix, v1 + suffix[i]);
      if (i < n_cells) prefix += a(n, i) / strip_width;
    }
    row[0] = grid.gamma[n];
    row[n_cells] = grid.gamma[n + 1];
    for (int i = 1; i <= n_cells; ++i) row[i] = std::clamp(row[i], row[i - 1], grid.gamma[n + 1]);
  }
  return bp;
}

double SsfRect::sine_mass() const { return 2.0 * std::sin(-0.5 * (a_lo + a_hi)) * std::sin(0.5 * (a_hi - a_lo)); }

double sine_midpoint(double lo, double hi) {
  auto sq = [](double x) { return x * x; };
  const double u = sq(std::cos(0.5 * lo)) + sq(std::cos(0.5 * hi));
  const double v = sq(std::sin(0.5 * lo)) + sq(std::sin(0.5 * hi));
  return std::clamp(angle_from_uv(u, v), lo, hi);
}

double pair_span(const SsfRect& k, const SsfRect& j) { return std::max(k.a_hi - j.a_lo, j.a_hi - k.a_lo); }

SimpleSymmetricFunction::SimpleSymmetricFunction(StripLayout strips, int level, std::vector<SsfRect> rects)
    : strips_(strips), level_(level), rects_(std::move(rects)) {
  strip_begin_.assign(strips_.count + 1, static_cast<int>(rects_.size()));
  for (int i = static_cast<int>(rects_.size()) - 1; i >= 0; --i) {
    const int s = rects_[i].strip;
    if (s < 0 || s >= strips_.count) throw std::invalid_argument("rectangle strip index out of range");
    strip_begin_[s] = i;
  }
  for (int s = strips_.count - 1; s >= 0; --s) strip_begin_[s] = std::min(strip_begin_[s], strip_begin_[s + 1]);
  for (std::size_t i = 1; i < rects_.size(); ++i) {
    const auto& p = rects_[i - 1];
    const auto& q = rects_[i];
    if (q.strip < p.strip || (q.strip == p.strip && q.a_lo < p.a_lo)) {
      throw std::invalid_argument("rectangles must be ordered by strip and angle");
    }
  }
}

double SimpleSymmetricFunction::mesh() const {
  double m = 0.0;
  for (const auto& r : rects_) m = std::max({m, r.x_hi - r.x_lo, r.a_hi - r.a_lo});
  return m;
}

double SimpleSymmetricFunction::midpoint_shift() const {
  double worst = 0.0;
  for (const auto& r : rects_) {
    const auto& p = rects_[r.partner];
    worst = std::max(worst, std::abs(r.target - 0.5 * (p.a_lo + p.a_hi)));
  }
  return worst;
}

int SimpleSymmetricFunction::locate(PhasePoint p) const {
  const int s = strips_.strip_of(p.x);
  if (s < 0 || !(p.alpha > -kPi) || p.alpha > 0.0) return -1;
  const auto first = rects_.begin() + strip_begin_[s];
  const auto last = rects_.begin() + strip_begin_[s + 1];
  const auto it = std::lower_bound(first, last, p.alpha, [](const SsfRect& r, double a) { return r.a_hi < a; });
  if (it == last) return -1;
  return static_cast<int>(it - rects_.begin());
}

SimpleSymmetricFunction build_ssf(const ReflectionKernel& kernel, int m) {
  const CosineGrid grid = cosine_grid(m);
  const StripLayout& strips = kernel.strips();
  const int n_cells = grid.cells();
  const double w = strips.width;
  std::vector<SsfRect> rects;

  for (int s = 0; s < strips.count; ++s) {
    MassMatrix a = kernel_mass_matrix(kernel, m, s);
    // Symmetrize the sub-1e-9 residue so paired masses agree exactly.
    for (int n = 0; n < n_cells; ++n) {
      for (int j = n + 1; j < n_cells; ++j) a(n, j) = a(j, n) = 0.5 * (a(n, j) + a(j, n));
    }
    const BetaPartition bp = beta_partition(a, grid, w);

    const std::size_t base = rects.size();
    std::vector<int> index(static_cast<std::size_t>(n_cells) * n_cells, -1);
    for (int j = 0; j < n_cells; ++j) {
      for (int n = 0; n < n_cells; ++n) {
        const double lo = bp.beta[j][n];
        const double hi = bp.beta[j][n + 1];
        if (!(a(j, n) > 0.0) || !(hi > lo)) continue;
        if (!(bp.beta[n][j + 1] > bp.beta[n][j])) continue;  // partner collapsed to a point
        SsfRect r;
        r.strip = s;
        r.x_lo = strips.lo(s);
        r.x_hi = strips.hi(s);
        r.a_lo = lo;
        r.a_hi = hi;
        r.cell = j;
        r.sub = n;
        index[static_cast<std::size_t>(j) * n_cells + n] = static_cast<int>(rects.size());
        rects.push_back(r);
      }
    }
    for (std::size_t i = base; i < rects.size(); ++i) {
      auto& r = rects[i];
      const int p = index[static_cast<std::size_t>(r.sub) * n_cells + r.cell];
      if (p < 0) throw KernelError("unpaired rectangle while building the symmetric function");
      r.partner = p;
    }
    for (std::size_t i = base; i < rects.size(); ++i) {
      auto& r = rects[i];
      r.target = sine_midpoint(rects[r.partner].a_lo, rects[r.partner].a_hi);
    }
  }
  return SimpleSymmetricFunction(strips, m, std::move(rects));
}

SimpleSymmetricFunction coarsen_near_diagonal(const SimpleSymmetricFunction& ssf, double eps0) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
  std::vector<SsfRect> rects = ssf.rects();
  for (int k = 0; k < static_cast<int>(rects.size()); ++k) {
    const int j = rects[k].partner;
    if (j <= k) continue;
    if (pair_span(rects[k], rects[j]) <= 0.5 * eps0) {
      rects[k].partner = k;
      rects[j].partner = j;
      rects[k].target = sine_midpoint(rects[k].a_lo, rects[k].a_hi);
      rects[j].target = sine_midpoint(rects[j].a_lo, rects[j].a_hi);
    }
  }
  return SimpleSymmetricFunction(ssf.strips(), ssf.level(), std::move(rects));
}

PhasePoint eval_ssf(const SimpleSymmetricFunction& ssf, PhasePoint p) {
  const int k = ssf.locate(p);
  if (k < 0) throw std::out_of_range("phase point lies outside the symmetric function's domain");
  return {p.x, ssf.rects()[k].target};
}

std::vector<std::string> validate_ssf(const SimpleSymmetricFunction& ssf) {
  std::vector<std::string> problems;
  const auto& rects = ssf.rects();
  const auto& strips = ssf.strips();
  auto bad = [&](int i, const std::string& what) { problems.push_back("rect " + std::to_string(i) + ": " + what); };

  for (int s = 0; s < strips.count; ++s) {
    double edge = -kPi;
    bool any = false;
    for (int i = 0; i < static_cast<int>(rects.size()); ++i) {
      const auto& r = rects[i];
      if (r.strip != s) continue;
      any = true;
      if (r.x_lo != strips.lo(s) || r.x_hi != strips.hi(s)) bad(i, "x-interval differs from its strip");
      if (!(r.a_hi > r.a_lo)) bad(i, "empty angle interval");
      if (std::abs(r.a_lo - edge) > 1e-12) bad(i, "gap or overlap before this rectangle");
      edge = r.a_hi;
    }
    if (!any || std::abs(edge) > 1e-12) problems.push_back("strip " + std::to_string(s) + " is not covered up to 0");
  }
  for (int i = 0; i < static_cast<int>(rects.size()); ++i) {
    const auto& r = rects[i];
    if (r.partner < 0 || r.partner >= static_cast<int>(rects.size())) {
      bad(i, "partner out of range");
      continue;
    }
    const auto& p = rects[r.partner];
    if (p.partner != i) bad(i, "pairing is not an involution");
    if (p.strip != r.strip) bad(i, "partner lies in another strip");
    if (std::abs(p.sine_mass() - r.sine_mass()) > kMassTol) bad(i, "partner has different sine mass");
    if (!(r.target > p.a_lo && r.target <= p.a_hi)) bad(i, "target outside the partner interval");
  }
  return problems;
}

void dump_ssf(std::ostream& out, const SimpleSymmetricFunction& ssf) {
  using textio::format_double;
  out << "# level " << ssf.level() << " rects " << ssf.rects().size() << " mesh " << format_double(ssf.mesh())
      << " midpoint_shift " << format_double(ssf.midpoint_shift()) << '\n';
  out << "# index strip x_lo x_hi a_lo a_hi partner target\n";
  for (std::size_t i = 0; i < ssf.rects().size(); ++i) {
    const auto& r = ssf.rects()[i];
    out << i << ' ' << r.strip << ' ' << format_double(r.x_lo) << ' ' << format_double(r.x_hi) << ' '
        << format_double(r.a_lo) << ' ' << format_double(r.a_hi) << ' ' << r.partner << ' '
        << format_double(r.target) << '\n';
  }
}

}  // namespace mirrors
