#include "mirrors/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "mirrors/textio.hpp"

namespace mirrors {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) { return SplitMix64(seed + index * kGolden); }

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<PhasePoint> sample_lambda(Window window, std::size_t n, std::uint64_t seed) {
  std::vector<PhasePoint> out(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 g = SplitMix64::stream(seed, i);
    const double x = window.lo + g.uniform() * window.length();
    double a = 0.0;
    do {
      a = -std::acos(2.0 * g.uniform() - 1.0);
    } while (!(a > -kPi && a < 0.0));
    out[i] = PhasePoint{x, a};
  }
  return out;
}

std::uint64_t EmpiricalKernel::count(int strip, int n, int j) const {
  return counts.at(strip).at(static_cast<std::size_t>(n) * grid.cells() + j);
}

std::uint64_t EmpiricalKernel::binned() const {
  std::uint64_t s = 0;
  for (const auto& c : counts)
    for (auto v : c) s += v;
  return s;
}

EmpiricalKernel bin_results(const std::vector<PhasePoint>& rays, const std::vector<TraceResult>& results,
                            const CosineGrid& grid, const StripLayout& strips, Window window) {
  EmpiricalKernel emp;
  emp.grid = grid;
  emp.strips = strips;
  emp.window = window;
  const std::size_t cells = grid.cells();
  emp.counts.assign(strips.count, std::vector<std::uint64_t>(cells * cells, 0));
  emp.total = rays.size();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const TraceResult& r = results[i];
    const int s = strips.strip_of(rays[i].x);
    if (r.status != TraceStatus::Returned || s < 0 || strips.strip_of(r.exit->x) != s) {
      ++emp.lost;
      continue;
    }
    ++emp.counts[s][grid.cell_of(rays[i].alpha) * cells + grid.cell_of(r.exit->alpha)];
  }
  return emp;
}

EmpiricalKernel empirical_kernel(const MirrorScene& scene, Window window, const CosineGrid& grid,
                                 const StripLayout& strips, std::size_t n, std::uint64_t seed, int max_bounces) {
  const auto rays = sample_lambda(window, n, seed);
  const auto results = trace_batch(scene, rays, max_bounces);
  return bin_results(rays, results, grid, strips, window);
}

namespace {

// Target probabilities per strip and cell pair, summing to one over the window.
std::vector<std::vector<double>> target_law(const EmpiricalKernel& emp, const ReflectionKernel& kernel) {
  if (!(kernel.strips() == emp.strips)) throw KernelError("empirical kernel and target use different strips");
  std::vector<std::vector<double>> law(emp.strips.count);
  const double wlen = emp.window.length();
  for (int s = 0; s < emp.strips.count; ++s) {
    const double overlap =
        std::max(0.0, std::min(emp.window.hi, emp.strips.hi(s)) - std::max(emp.window.lo, emp.strips.lo(s)));
    const MassMatrix a = kernel_mass_matrix(kernel, emp.grid.m, s);
    const double total = a.total();
    law[s].resize(a.v.size());
    for (std::size_t k = 0; k < a.v.size(); ++k) law[s][k] = overlap / wlen * a.v[k] / total;
  }
  return law;
}

}  // namespace

double tv_to_target(const EmpiricalKernel& emp, const ReflectionKernel& kernel) {
  if (emp.total == 0) throw KernelError("empty empirical kernel");
  const auto law = target_law(emp, kernel);
  const double n = static_cast<double>(emp.total);
  double l1 = static_cast<double>(emp.lost) / n;
  for (int s = 0; s < emp.strips.count; ++s) {
    for (std::size_t k = 0; k < law[s].size(); ++k) l1 += std::abs(emp.counts[s][k] / n - law[s][k]);
  }
  return 0.5 * l1;
}

double tv_sigma(const EmpiricalKernel& emp, const ReflectionKernel& kernel) {
  if (emp.total == 0) throw KernelError("empty empirical kernel");
  const auto law = target_law(emp, kernel);
  double s = 0.0;
  for (const auto& row : law)
    for (double p : row) s += std::sqrt(p * (1.0 - p) / static_cast<double>(emp.total));
  return 0.5 * s;
}

double detailed_balance(const EmpiricalKernel& emp) {
  const int cells = emp.grid.cells();
  double worst = 0.0;
  for (const auto& c : emp.counts) {
    for (int n = 0; n < cells; ++n) {
      for (int j = n + 1; j < cells; ++j) {
        const double a = static_cast<double>(c[static_cast<std::size_t>(n) * cells + j]);
        const double b = static_cast<double>(c[static_cast<std::size_t>(j) * cells + n]);
        worst = std::max(worst, std::abs(a - b) / std::sqrt(a + b + 1.0));
      }
    }
  }
  return worst;
}

MarginalTest exit_marginal(const std::vector<TraceResult>& results, int level) {
  const CosineGrid grid = cosine_grid(level);
  MarginalTest t;
  t.level = level;
  t.counts.assign(grid.cells(), 0);
  for (const auto& r : results) {
    if (r.status != TraceStatus::Returned) continue;
    ++t.counts[grid.cell_of(r.exit->alpha)];
    ++t.n;
  }
  if (t.n == 0) {
    t.p_value = 0.0;
    return t;
  }
  const double p = 1.0 / grid.cells();
  const double expected = p * static_cast<double>(t.n);
  const double sd = std::sqrt(expected * (1.0 - p));
  for (auto c : t.counts) {
    const double d = static_cast<double>(c) - expected;
    t.chi2 += d * d / expected;
    t.max_z = std::max(t.max_z, std::abs(d) / sd);
  }
  t.p_value = boost::math::gamma_q(0.5 * (grid.cells() - 1), 0.5 * t.chi2);
  return t;
}

double two_bounce_fraction(const std::vector<TraceResult>& results) {
  if (results.empty()) return 0.0;
  const auto k = std::count_if(results.begin(), results.end(), [](const TraceResult& r) {
    return r.status == TraceStatus::Returned && r.bounces == 2;
  });
  return static_cast<double>(k) / static_cast<double>(results.size());
}

double two_bounce_fraction(const MirrorScene& scene, Window window, std::size_t n, std::uint64_t seed,
                           int max_bounces) {
  const auto rays = sample_lambda(window, n, seed);
  return two_bounce_fraction(trace_batch(scene, rays, max_bounces));
}

ReversibilityCheck reversibility(const MirrorScene& scene, const std::vector<PhasePoint>& rays,
                                 const std::vector<TraceResult>& results, std::size_t limit, int max_bounces) {
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < results.size() && picked.size() < limit; ++i) {
    if (results[i].status == TraceStatus::Returned) picked.push_back(i);
  }
  std::vector<PhasePoint> exits(picked.size());
  for (std::size_t k = 0; k < picked.size(); ++k) exits[k] = *results[picked[k]].exit;
  const auto back = trace_batch(scene, exits, max_bounces);
  ReversibilityCheck c;
  c.checked = picked.size();
  for (std::size_t k = 0; k < picked.size(); ++k) {
    const PhasePoint& p = rays[picked[k]];
    const TraceResult& b = back[k];
    if (b.status != TraceStatus::Returned || b.bounces != results[picked[k]].bounces) {
      ++c.failures;
      continue;
    }
    const double err = std::max(std::abs(b.exit->x - p.x), std::abs(b.exit->alpha - p.alpha)) / (1.0 + std::abs(p.x));
    c.max_error = std::max(c.max_error, err);
    if (err > 1e-6) ++c.failures;
  }
  return c;
}

double VerifyReport::sigma(double p) const {
  return rays ? std::sqrt(p * (1.0 - p) / static_cast<double>(rays)) : 0.0;
}
bool VerifyReport::pass_tv() const { return tv_distance <= eps0 + 3.0 * tv_sigma; }
bool VerifyReport::pass_balance() const { return detailed_balance_z <= 4.0; }
bool VerifyReport::pass_marginal() const { return marginal_chi2_p > 0.001 && marginal_max_z <= 4.0; }
bool VerifyReport::pass_two_bounce() const {
  return two_bounce_fraction >= 1.0 - eps0 - 3.0 * sigma(1.0 - eps0);
}
bool VerifyReport::pass_reversibility() const { return reversibility_failures == 0; }
bool VerifyReport::pass_lost() const { return lost_fraction <= eps0 + 3.0 * sigma(eps0); }
bool VerifyReport::pass() const {
  return pass_tv() && pass_balance() && pass_marginal() && pass_reversibility() && pass_lost();
}

VerifyReport verify(const MirrorScene& scene, const ReflectionKernel& kernel, const VerifyConfig& config) {
  if (config.rays == 0) throw KernelError("verify needs at least one ray");
  const auto rays = sample_lambda(config.window, config.rays, config.seed);
  const auto results = trace_batch(scene, rays, config.max_bounces);
  const EmpiricalKernel emp = bin_results(rays, results, cosine_grid(config.level), kernel.strips(), config.window);

  VerifyReport r;
  r.rays = config.rays;
  r.seed = config.seed;
  r.level = config.level;
  r.eps0 = config.eps0;
  r.tv_distance = tv_to_target(emp, kernel);
  r.tv_sigma = tv_sigma(emp, kernel);
  r.detailed_balance_z = detailed_balance(emp);
  const MarginalTest m = exit_marginal(results, config.marginal_level);
  r.marginal_chi2 = m.chi2;
  r.marginal_chi2_p = m.p_value;
  r.marginal_max_z = m.max_z;
  r.two_bounce_fraction = two_bounce_fraction(results);
  const ReversibilityCheck rev = reversibility(scene, rays, results, config.reversibility_rays, config.max_bounces);
  r.reversibility_max_err = rev.max_error;
  r.reversibility_checked = rev.checked;
  r.reversibility_failures = rev.failures;
  r.lost_fraction = static_cast<double>(emp.lost) / static_cast<double>(emp.total);
  return r;
}

void write_report(std::ostream& os, const VerifyReport& r) {
  using textio::format_double;
  auto yes = [](bool b) { return b ? "true" : "false"; };
  os << "# mirror verification report\n"
     << "# thresholds: tv <= eps0 + 3 tv_sigma; balance <= 4; marginal p > 0.001 and max |z| <= 4;\n"
     << "#   two_bounce >= 1 - eps0 - 3 sd; lost <= eps0 + 3 sd; reversibility error <= 1e-6 (1 + |x|)\n"
     << "# sd of a fraction p is sqrt(p (1 - p) / rays); these cut-offs give < 1% false failures\n"
     << "rays = " << r.rays << '\n'
     << "seed = " << r.seed << '\n'
     << "level = " << r.level << '\n'
     << "eps0 = " << format_double(r.eps0) << '\n'
     << "tv_distance = " << format_double(r.tv_distance) << '\n'
     << "tv_sigma = " << format_double(r.tv_sigma) << '\n'
     << "detailed_balance_z = " << format_double(r.detailed_balance_z) << '\n'
     << "marginal_chi2 = " << format_double(r.marginal_chi2) << '\n'
     << "marginal_chi2_p = " << format_double(r.marginal_chi2_p) << '\n'
     << "marginal_max_z = " << format_double(r.marginal_max_z) << '\n'
     << "two_bounce_fraction = " << format_double(r.two_bounce_fraction) << '\n'
     << "reversibility_max_err = " << format_double(r.reversibility_max_err) << '\n'
     << "reversibility_checked = " << r.reversibility_checked << '\n'
     << "reversibility_failures = " << r.reversibility_failures << '\n'
     << "lost_fraction = " << format_double(r.lost_fraction) << '\n'
     << "pass_tv = " << yes(r.pass_tv()) << '\n'
     << "pass_balance = " << yes(r.pass_balance()) << '\n'
     << "pass_marginal = " << yes(r.pass_marginal()) << '\n'
     << "pass_two_bounce = " << yes(r.pass_two_bounce()) << '\n'
     << "pass_reversibility = " << yes(r.pass_reversibility()) << '\n'
     << "pass_lost = " << yes(r.pass_lost()) << '\n'
     << "pass = " << yes(r.pass()) << '\n';
}

std::string report_string(const VerifyReport& report) {
  std::ostringstream os;
  write_report(os, report);
  return os.str();
}

}  // namespace mirrors
