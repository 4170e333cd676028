#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mirrors/discretizer.hpp"

using namespace mirrors;

namespace {

constexpr double pi = std::numbers::pi;

// Joint law of the symmetric function on a finer grid: each rectangle spreads
// its sine mass over the fine cells it overlaps and sends it all to the fine
// cell of its target.
MassMatrix joint_on_grid(const SimpleSymmetricFunction& ssf, int strip, const CosineGrid& fine) {
  MassMatrix out(fine.cells());
  const double w = ssf.strips().width;
  for (const auto& r : ssf.rects()) {
    if (r.strip != strip) continue;
    const int to = fine.cell_of(r.target);
    for (int c = 0; c < fine.cells(); ++c) {
      const double lo = std::max(r.a_lo, fine.gamma[c]);
      const double hi = std::min(r.a_hi, fine.gamma[c + 1]);
      if (hi > lo) out(c, to) += w * (std::cos(hi) - std::cos(lo));
    }
  }
  return out;
}

double tv(const MassMatrix& a, const MassMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += std::abs(a.v[i] - b.v[i]);
  return 0.5 * s / std::max(a.total(), 1e-300);
}

}  // namespace

TEST_CASE("beta partition examples at level 0") {
  const auto g = cosine_grid(0);
  const auto kn = beta_partition(kernel_mass_matrix(ReflectionKernel::knudsen_cosine(), 0), g, 1.0);
  CHECK(kn.beta[0][0] == -pi);
  CHECK(kn.beta[0][1] == doctest::Approx(-2 * pi / 3).epsilon(1e-13));
  CHECK(kn.beta[0][2] == doctest::Approx(-pi / 2).epsilon(1e-13));

  const auto re = beta_partition(kernel_mass_matrix(ReflectionKernel::retro(), 0), g, 1.0);
  CHECK(re.beta[0][0] == -pi);
  CHECK(re.beta[0][1] == doctest::Approx(-pi / 2).epsilon(1e-13));
  CHECK(re.beta[0][2] == doctest::Approx(-pi / 2).epsilon(1e-13));
}

TEST_CASE("beta partition telescopes to the next grid angle") {
  for (const auto& k : {ReflectionKernel::knudsen_cosine({0, 0.3, 1}), ReflectionKernel::retro({0, 0.3, 1}),
                        ReflectionKernel::specular_flat({0, 0.3, 1})}) {
    for (int m = 0; m <= 6; ++m) {
      const auto g = cosine_grid(m);
      const auto bp = beta_partition(kernel_mass_matrix(k, m), g, 0.3);
      for (int n = 0; n < g.cells(); ++n) {
        CHECK(bp.beta[n].front() == g.gamma[n]);
        CHECK(std::abs(bp.beta[n].back() - g.gamma[n + 1]) <= 1e-10);
        for (std::size_t i = 1; i < bp.beta[n].size(); ++i) CHECK(bp.beta[n][i] >= bp.beta[n][i - 1]);
      }
    }
  }
}

TEST_CASE("beta partition rejects bad matrices") {
  const auto g = cosine_grid(0);
  MassMatrix neg(2);
  neg.v = {1.1, -0.1, -0.1, 1.1};
  CHECK_THROWS_AS(beta_partition(neg, g, 1.0), KernelError);
  MassMatrix heavy(2);
  heavy.v = {0.6, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(beta_partition(heavy, g, 1.0), KernelError);
  CHECK_THROWS_AS(beta_partition(MassMatrix(4), g, 1.0), KernelError);
}

TEST_CASE("retro function pairs every cell with itself") {
  const auto ssf = build_ssf(ReflectionKernel::retro(), 1);
  const auto g = cosine_grid(1);
  REQUIRE(ssf.rects().size() == 4);
  for (int i = 0; i < 4; ++i) {
    const auto& r = ssf.rects()[i];
    CHECK(r.partner == i);
    CHECK(r.a_lo == doctest::Approx(g.gamma[i]));
    CHECK(r.a_hi == doctest::Approx(g.gamma[i + 1]));
    CHECK(r.target == doctest::Approx(sine_midpoint(g.gamma[i], g.gamma[i + 1])));
  }
  CHECK(validate_ssf(ssf).empty());
}

TEST_CASE("specular function pairs mirror-image cells") {
  const auto ssf = build_ssf(ReflectionKernel::specular_flat(), 1);
  REQUIRE(ssf.rects().size() == 4);
  for (int i = 0; i < 4; ++i) {
    const auto& r = ssf.rects()[i];
    CHECK(r.partner == 3 - i);
    const auto& p = ssf.rects()[r.partner];
    CHECK(r.target == doctest::Approx(-pi - sine_midpoint(r.a_lo, r.a_hi)).epsilon(1e-12));
    CHECK(r.target > p.a_lo);
    CHECK(r.target <= p.a_hi);
  }
  CHECK(validate_ssf(ssf).empty());
}

TEST_CASE("cosine-law function at level 2 has 64 rectangles") {
  const auto ssf = build_ssf(ReflectionKernel::knudsen_cosine(), 2);
  CHECK(ssf.rects().size() == 64);
  double mass = 0.0;
  for (std::size_t i = 0; i < ssf.rects().size(); ++i) {
    const auto& r = ssf.rects()[i];
    mass += r.sine_mass();
    CHECK(ssf.rects()[r.partner].partner == static_cast<int>(i));
  }
  CHECK(mass == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(validate_ssf(ssf).empty());
}

TEST_CASE("paired sine masses agree for every kernel and level") {
  const StripLayout strips{-1.0, 0.5, 3};
  for (const auto& k : {ReflectionKernel::knudsen_cosine(strips), ReflectionKernel::retro(strips),
                        ReflectionKernel::specular_flat(strips)}) {
    for (int m = 0; m <= 6; ++m) {
      const auto ssf = build_ssf(k, m);
      const auto problems = validate_ssf(ssf);
      CHECK_MESSAGE(problems.empty(), (problems.empty() ? "" : problems.front()));
      for (const auto& r : ssf.rects()) CHECK(std::abs(r.sine_mass() - ssf.rects()[r.partner].sine_mass()) <= 1e-10);
      CHECK(ssf.mesh() <= std::max(strips.width, 2 * pi / 3) + 1e-15);
    }
  }
}

TEST_CASE("mesh is bounded by the strip width and the widest grid cell") {
  for (int m = 0; m <= 6; ++m) {
    const auto g = cosine_grid(m);
    double widest = 0.0;
    for (int k = 0; k < g.cells(); ++k) widest = std::max(widest, g.gamma[k + 1] - g.gamma[k]);
    const auto ssf = build_ssf(ReflectionKernel::knudsen_cosine({0, 0.05, 1}), m);
    CHECK(ssf.mesh() <= std::max(0.05, widest) + 1e-15);
  }
}

TEST_CASE("sine midpoint splits the mass in half") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-pi, 0.0);
  for (int i = 0; i < 1000; ++i) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    const double mid = sine_midpoint(lo, hi);
    CHECK(mid >= lo);
    CHECK(mid <= hi);
    CHECK(std::abs((std::cos(mid) - std::cos(lo)) - (std::cos(hi) - std::cos(mid))) < 1e-12);
  }
}

TEST_CASE("pair span examples") {
  SsfRect a, b;
  a.a_lo = -1.00, a.a_hi = -0.99;
  b.a_lo = -0.995, b.a_hi = -0.985;
  CHECK(pair_span(a, b) == doctest::Approx(0.015));
  CHECK(pair_span(a, b) <= 0.05);
  a.a_lo = -1.5, a.a_hi = -1.4;
  b.a_lo = -1.0, b.a_hi = -0.9;
  CHECK(pair_span(a, b) == doctest::Approx(0.6));
}

TEST_CASE("coarsening merges only narrow pairs and stays within eps0 / 2") {
  // Level-3 cells are at least 0.125 rad wide near -pi/2, so a small eps0 merges nothing.
  CHECK(validate_ssf(coarsen_near_diagonal(build_ssf(ReflectionKernel::knudsen_cosine(), 3), 0.1)).empty());
  const double eps0 = 0.6;
  const auto ssf = build_ssf(ReflectionKernel::knudsen_cosine(), 3);
  const auto coarse = coarsen_near_diagonal(ssf, eps0);
  CHECK(validate_ssf(coarse).empty());
  int merged = 0;
  for (int i = 0; i < static_cast<int>(coarse.rects().size()); ++i) {
    const auto& r = coarse.rects()[i];
    const auto& before = ssf.rects()[i];
    if (r.partner == i) {
      if (before.partner != i) {
        ++merged;
        CHECK(pair_span(before, ssf.rects()[before.partner]) <= eps0 / 2);
      }
    } else {
      CHECK(r.partner == before.partner);
      CHECK(pair_span(r, coarse.rects()[r.partner]) > eps0 / 2);
    }
  }
  CHECK(merged > 0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(1e-9, 1.0), ua(-pi + 1e-9, -1e-9);
  for (int i = 0; i < 100000; ++i) {
    const PhasePoint p{ux(rng), ua(rng)};
    CHECK(std::abs(eval_ssf(coarse, p).alpha - eval_ssf(ssf, p).alpha) <= eps0 / 2 + 1e-15);
  }
  CHECK_THROWS_AS(coarsen_near_diagonal(ssf, 0.0), std::invalid_argument);
}

TEST_CASE("eval examples") {
  const auto retro = build_ssf(ReflectionKernel::retro(), 1);
  const auto g = cosine_grid(1);
  const auto r = eval_ssf(retro, {0.5, -1.0});
  const int cell = g.cell_of(-1.0);
  CHECK(r.x == 0.5);
  CHECK(r.alpha == doctest::Approx(sine_midpoint(g.gamma[cell], g.gamma[cell + 1])));

  const auto spec = build_ssf(ReflectionKernel::specular_flat(), 3);
  const auto g3 = cosine_grid(3);
  // -pi/3 and -2pi/3 are both grid angles at level 3; which side of the edge
  // they round to decides the cell, so check the closed cell.
  const auto s = eval_ssf(spec, {0.5, -pi / 3});
  const int c = g3.cell_of(s.alpha);
  CHECK(g3.gamma[c] <= -2 * pi / 3 + 1e-12);
  CHECK(g3.gamma[c + 1] >= -2 * pi / 3 - 1e-12);

  CHECK_THROWS_AS(eval_ssf(retro, {1.5, -1.0}), std::out_of_range);
  CHECK_THROWS_AS(eval_ssf(retro, {0.0, -1.0}), std::out_of_range);
}

TEST_CASE("rectangle boundaries belong to the lower rectangle") {
  const auto ssf = build_ssf(ReflectionKernel::knudsen_cosine(), 2);
  for (int i = 0; i + 1 < static_cast<int>(ssf.rects().size()); ++i) {
    const double edge = ssf.rects()[i].a_hi;
    CHECK(ssf.locate({0.5, edge}) == i);
    CHECK(ssf.locate({0.5, std::nextafter(edge, 0.0)}) == i + 1);
  }
  CHECK(ssf.locate({1.0, 0.0}) == static_cast<int>(ssf.rects().size()) - 1);
}

TEST_CASE("applying the function twice lands back in the starting rectangle") {
  for (const auto& k : {ReflectionKernel::knudsen_cosine({0, 1, 2}), ReflectionKernel::specular_flat({0, 1, 2})}) {
    for (const auto& ssf : {build_ssf(k, 3), coarsen_near_diagonal(build_ssf(k, 3), 0.1)}) {
      std::mt19937_64 rng(17);
      std::uniform_real_distribution<double> ux(1e-9, 2.0), ua(-pi + 1e-9, -1e-9);
      for (int i = 0; i < 100000; ++i) {
        const PhasePoint p{ux(rng), ua(rng)};
        const int home = ssf.locate(p);
        REQUIRE(home >= 0);
        const PhasePoint q = eval_ssf(ssf, eval_ssf(ssf, p));
        CHECK(ssf.locate(q) == home);
      }
    }
  }
}

TEST_CASE("the function reproduces the level-m matrix and converges on a fixed fine grid") {
  const auto fine = cosine_grid(6);
  const auto target_fine = kernel_mass_matrix(ReflectionKernel::knudsen_cosine(), 6);
  double previous = 1.0;
  for (int m = 0; m <= 5; ++m) {
    const auto ssf = build_ssf(ReflectionKernel::knudsen_cosine(), m);
    // Exact at its own level.
    CHECK(tv(joint_on_grid(ssf, 0, cosine_grid(m)), kernel_mass_matrix(ReflectionKernel::knudsen_cosine(), m)) <
          1e-10);
    const double d = tv(joint_on_grid(ssf, 0, fine), target_fine);
    CHECK(d < previous);
    previous = d;
  }
}

TEST_CASE("dump lists every rectangle") {
  const auto ssf = build_ssf(ReflectionKernel::knudsen_cosine(), 1);
  std::ostringstream os;
  dump_ssf(os, ssf);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 + static_cast<int>(ssf.rects().size()));
  CHECK(text.rfind("# level 1", 0) == 0);
}
