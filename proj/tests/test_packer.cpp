#include <doctest.h>

#include <cmath>
#include <random>

#include "mirrors/packer.hpp"
#include "mirrors/polygon.hpp"

using namespace mirrors;

namespace {

// Inverted triangle: footprint [-0.5, 0.5] and apex at depth 0.4.
PackTemplate triangle() { return make_template({}, 0.5, {{0.0, -0.4}}); }

// Body 200 footprints wide: copies waste almost all of the base.
PackTemplate wide_and_flat() { return make_template({}, 0.005, {{-1.0, -0.5}, {1.0, -0.5}}); }

PackTemplate one_pair(double rho) {
  const TransposerPair p = build_pair(-1.2, -2.0, 0.05, 1.0);
  return make_template(p.arcs, rho);
}

}  // namespace

TEST_CASE("template body") {
  const PackTemplate t = triangle();
  CHECK(t.body.size() == 3);
  CHECK(t.r0 == doctest::Approx(1.0));
  CHECK(polygon_area(t.body) == doctest::Approx(0.2));

  const PackTemplate p = one_pair(0.01);
  for (const auto& arc : p.arcs) {
    for (const Point& s : arc.sample(33)) CHECK(point_in_convex(s, p.body));
  }
  for (const Point& v : p.body) CHECK(v.x2 <= 0.0);

  CHECK_THROWS_AS(make_template({}, 0.0, {{0.0, -1.0}}), PackingError);
  CHECK_THROWS_AS(make_template({}, 1.0, {{0.0, 0.5}}), PackingError);
  CHECK_THROWS_AS(make_template({}, 1.0), PackingError);
}

TEST_CASE("transform_cell") {
  const PackTemplate t = one_pair(0.01);
  const ScaledCell same = transform_cell(t, t.r0, 0.0);
  CHECK(same.mirrors == t.arcs);
  CHECK(same.body == t.body);
  CHECK(same.f_lo == -0.01);
  CHECK(same.f_hi == 0.01);

  const ScaledCell c = transform_cell(t, 0.3, 7.0);
  CHECK(c.f_hi - c.f_lo == doctest::Approx(2.0 * (0.3 / t.r0) * 0.01).epsilon(1e-14));
  CHECK(c.b == 7.0);
  double depth = 0.0;
  for (const Point& v : c.body) depth = std::max(depth, -v.x2);
  CHECK(depth <= 0.3);
  CHECK_THROWS_AS(transform_cell(t, 0.0, 0.0), PackingError);
}

TEST_CASE("a copy traces like the template") {
  const double rho = 0.004;
  const PackTemplate t = one_pair(rho);
  const double r = 0.0137, b = -2.5;
  const double s = r / t.r0;
  const ScaledCell c = transform_cell(t, r, b);
  const MirrorScene big(t.arcs, {}), small(c.mirrors, {});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ux(-rho, rho), ua(-1.225, -1.175);
  int returned = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = ux(rng), a = ua(rng);
    const TraceResult u = trace(big, {x, a}, 8);
    const TraceResult v = trace(small, {b + s * x, a}, 8);
    REQUIRE(u.status == v.status);
    REQUIRE(u.bounces == v.bounces);
    if (u.status != TraceStatus::Returned) continue;
    ++returned;
    CHECK(std::abs(v.exit->alpha - u.exit->alpha) <= 1e-9 * std::abs(u.exit->alpha));
    CHECK(std::abs((v.exit->x - b) / s - u.exit->x) <= 1e-9 * (1.0 + t.r0));
  }
  CHECK(returned > 900);
}

TEST_CASE("placement in an empty gap abuts footprints") {
  const PackTemplate t = triangle();
  const auto b = placement_search(t, {{0.0, 10.0}}, 1.0, {});
  REQUIRE(b.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(b[i] == doctest::Approx(i + 0.5));

  // Footprint 0.4 in a unit base.
  CHECK(placement_search(t, {{0.0, 1.0}}, 0.4, {}).size() >= 2);
  CHECK(placement_search(t, {{0.0, 10.0}}, 1.0, {}, 3).size() == 3);
}

TEST_CASE("overhanging bodies push copies out") {
  const PackTemplate t = wide_and_flat();
  // Existing copies on both sides of the gap [0, 1], bodies reaching far over it.
  const ScaledCell left = transform_cell(t, t.r0, -0.005);
  const ScaledCell right = transform_cell(t, t.r0, 1.005);
  const std::vector<std::vector<Point>> existing{left.body, right.body};
  const double r = 0.02 * t.r0;
  const double footprint = 2.0 * 0.02 * 0.005;
  const auto b = placement_search(t, {{0.0, 1.0}}, r, existing);
  CHECK(b.size() < static_cast<std::size_t>(1.0 / footprint));
  for (double x : b) {
    const ScaledCell c = transform_cell(t, r, x);
    CHECK_FALSE(convex_interiors_overlap(c.body, left.body));
    CHECK_FALSE(convex_interiors_overlap(c.body, right.body));
  }
}

TEST_CASE("small copies approach the count of an empty gap") {
  // Bodies twice as wide as their footprints, flanking the gap [0, 10].
  const PackTemplate t = make_template({}, 0.5, {{-1.0, -0.2}, {1.0, -0.2}});
  const ScaledCell left = transform_cell(t, t.r0, -0.5);
  const ScaledCell right = transform_cell(t, t.r0, 10.5);
  const std::vector<std::vector<Point>> existing{left.body, right.body};
  double prev = 0.0;
  for (double f : {0.5, 0.1, 0.02, 0.004}) {
    const double r = f * t.r0;
    const double ratio = static_cast<double>(placement_search(t, {{0.0, 10.0}}, r, existing).size()) /
                         placement_search(t, {{0.0, 10.0}}, r, {}).size();
    CAPTURE(f);
    CHECK(ratio < 1.0);
    CHECK(ratio >= prev);
    prev = ratio;
  }
  CHECK(prev >= 0.99);
}

TEST_CASE("pack fills a base with a shallow template") {
  const PackTemplate t = triangle();
  const double rho1 = 0.3, eps0 = 0.05;
  const CantorPacking p = pack(t, 0.0, 1.0, rho1, eps0);
  REQUIRE(p.generations.size() >= 1);
  CHECK(p.met_budget);
  CHECK(p.q_met);
  CHECK(p.lambda.front() == 1.0);
  CHECK(p.lambda[1] <= 0.75);
  for (std::size_t i = 1; i < p.lambda.size(); ++i) {
    CHECK(p.lambda[i] < p.lambda[i - 1]);
    CHECK(p.lambda[i] <= 0.75 * p.lambda[i - 1]);
  }
  CHECK(p.lambda.back() <= eps0 / 4);
  for (std::size_t g = 1; g < p.scales.size(); ++g) CHECK(p.scales[g] < p.scales[g - 1]);
  double covered = 0.0;
  for (const auto* c : p.cells()) {
    CHECK(c->f_lo >= 0.0);
    CHECK(c->f_hi <= 1.0 + 1e-12);
    CHECK(c->r <= rho1);
    for (const Point& v : c->body) CHECK(v.x2 > -rho1);
    covered += c->f_hi - c->f_lo;
  }
  CHECK(covered + p.lambda.back() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(overlapping_cells(p).empty());
}

TEST_CASE("pack with mirrors keeps them shallow and disjoint") {
  const PackTemplate t = one_pair(0.02);
  PackOptions o;
  o.best_effort = true;
  o.max_gen = 3;
  o.max_cells = 300;
  const CantorPacking p = pack(t, -1.0, 1.0, 0.1, 0.05, o);
  REQUIRE(p.cell_count() > 0);
  CHECK(p.cell_count() <= 300);
  for (const auto& arc : p.mirrors()) {
    const Aabb b = arc.bounds();
    CHECK(b.lo.x2 > -0.1);
    CHECK(b.hi.x2 < 0.0);
    CHECK(b.lo.x1 >= -1.0);
    CHECK(b.hi.x1 <= 1.0);
  }
  CHECK(overlapping_cells(p).empty());
}

TEST_CASE("a template much wider than its footprint cannot reach q") {
  const PackTemplate t = wide_and_flat();
  PackOptions o;
  o.max_gen = 2;
  o.max_cells = 2000;
  CHECK_THROWS_AS(pack(t, 0.0, 1.0, 0.1, 0.05, o), PackingError);
  o.best_effort = true;
  const CantorPacking p = pack(t, 0.0, 1.0, 0.1, 0.05, o);
  CHECK_FALSE(p.q_met);
  CHECK_FALSE(p.met_budget);
  CHECK(p.lambda.back() < 1.0);
  CHECK(p.cell_count() <= 2000);
  CHECK(overlapping_cells(p).empty());
}

TEST_CASE("pack argument checks") {
  const PackTemplate t = triangle();
  CHECK_THROWS_AS(pack(t, 1.0, 1.0, 0.1, 0.05), PackingError);
  CHECK_THROWS_AS(pack(t, 0.0, 1.0, 0.0, 0.05), PackingError);
  CHECK_THROWS_AS(pack(t, 0.0, 1.0, 0.1, 0.0), PackingError);
}

TEST_CASE("minkowski sum and shift overlap") {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto s = minkowski_sum(sq, sq);
  CHECK(polygon_area(s) == doctest::Approx(4.0));
  const std::vector<Point> tri{{0, 0}, {1, 0}, {0, 1}};
  CHECK(polygon_area(minkowski_sum(sq, tri)) == doctest::Approx(3.5));

  const std::vector<Point> p{{-0.5, -1}, {0.5, -1}, {0.5, 0}, {-0.5, 0}};
  std::vector<Point> q = p;
  for (auto& v : q) v.x1 += 3.0;
  const auto ov = horizontal_overlap(p, q);
  REQUIRE(ov);
  CHECK(ov->first == doctest::Approx(2.0));
  CHECK(ov->second == doctest::Approx(4.0));
  std::vector<Point> below = p;
  for (auto& v : below) v.x2 -= 1.0;
  CHECK_FALSE(horizontal_overlap(p, below));
}
