#include <cmath>

#include "doctest.h"

#include "sigmalab/boundary_characters.hpp"
#include "sigmalab/error.hpp"

using namespace sigmalab;

namespace {

double wrap(double t, double T) {
  double r = std::fmod(t, T);
  return r < 0 ? r + T : r;
}

double periodic_gap(double a, double b, double T) {
  const double d = std::abs(wrap(a - b, T));
  return std::min(d, T - d);
}

// Stadium: two unit half-circles joined by segments of length 2, by arclength.
DomainSpec stadium(int n) {
  const double L = 4.0 + 2.0 * kPi;
  ParametricCurve c;
  c.period = L;
  auto piece = [L](double s, int order) -> Vec2 {
    s = wrap(s, L);
    if (s < 2.0) {  // bottom segment, left to right
      if (order == 0) return Vec2(-1.0 + s, -1.0);
      if (order == 1) return Vec2(1.0, 0.0);
      return Vec2::Zero();
    }
    s -= 2.0;
    if (s < kPi) {  // right half-circle around (1,0)
      const double a = -kPi / 2 + s;
      if (order == 0) return Vec2(1.0 + std::cos(a), std::sin(a));
      if (order == 1) return Vec2(-std::sin(a), std::cos(a));
      return Vec2(-std::cos(a), -std::sin(a));
    }
    s -= kPi;
    if (s < 2.0) {
      if (order == 0) return Vec2(1.0 - s, 1.0);
      if (order == 1) return Vec2(-1.0, 0.0);
      return Vec2::Zero();
    }
    s -= 2.0;
    const double a = kPi / 2 + s;
    if (order == 0) return Vec2(-1.0 + std::cos(a), std::sin(a));
    if (order == 1) return Vec2(-std::sin(a), std::cos(a));
    return Vec2(-std::cos(a), -std::sin(a));
  };
  c.position = [piece](double s) { return piece(s, 0); };
  c.velocity = [piece](double s) { return piece(s, 1); };
  c.acceleration = [piece](double s) { return piece(s, 2); };
  return make_parametric_domain(c, n);
}

}  // namespace

TEST_CASE("sine datum is unimodal with point plateaus") {
  const int n = 720;
  const auto d = sample_datum(2 * kPi, n, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
  const UnimodalResult r = certify_unimodal(d);
  REQUIRE(r.ok());
  const auto& c = *r.character;
  CHECK(c.m == doctest::Approx(-1.0));
  CHECK(c.M == doctest::Approx(1.0));
  const double spacing = 2 * kPi / n;
  CHECK(periodic_gap(c.t1, 1.5 * kPi, 2 * kPi) <= 2 * spacing);
  CHECK(periodic_gap(c.t3, 0.5 * kPi, 2 * kPi) <= 2 * spacing);
  CHECK(c.t2 - c.t1 <= 2 * spacing);
  CHECK(c.t4 - c.t3 <= 2 * spacing);
  CHECK(c.t1 <= c.t2);
  CHECK(c.t2 < c.t3);
  CHECK(c.t3 <= c.t4);
  CHECK(c.t4 < c.t1 + c.T);
}

TEST_CASE("sine fitted slope matches a dense brute-force envelope") {
  // Largest c with cos t ≥ c·min(t + π/2, π/2 − t) on the rising arc, by
  // dense sampling of the ratio.
  double oracle = 1e300;
  for (int i = 1; i < 200000; ++i) {
    const double t = -kPi / 2 + kPi * i / 200000.0;
    oracle = std::min(oracle, std::cos(t) / std::min(t + kPi / 2, kPi / 2 - t));
  }
  CHECK(oracle == doctest::Approx(2 / kPi).epsilon(1e-6));
  const auto d = sample_datum(2 * kPi, 1024, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
  const UnimodalResult r = certify_unimodal(d);
  REQUIRE(r.ok());
  CHECK(r.character->omega_slope >= 0.99 * (2 / kPi));
  CHECK(r.character->omega_slope <= 1.01 * oracle);
}

TEST_CASE("two maxima are not unimodal") {
  const auto d = sample_datum(2 * kPi, 512, [](double t) { return std::sin(2 * t); });
  const UnimodalResult r = certify_unimodal(d);
  REQUIRE_FALSE(r.ok());
  CHECK(r.failure->kind == CharacterFailureKind::NotUnimodal);
}

TEST_CASE("constant data has zero range") {
  const auto d = sample_datum(1.0, 128, [](double) { return 3.0; });
  const UnimodalResult r = certify_unimodal(d);
  REQUIRE_FALSE(r.ok());
  CHECK(r.failure->kind == CharacterFailureKind::ZeroRange);
}

TEST_CASE("too few samples is an argument error") {
  const auto d = sample_datum(1.0, 32, [](double t) { return std::sin(2 * kPi * t); });
  CHECK_THROWS_AS(certify_unimodal(d), Error);
}

TEST_CASE("trapezoid plateaus become the extremal arcs") {
  // Period 8: rise on [0,2], top on [2,3], fall on [3,5], bottom on [5,8].
  auto f = [](double t) {
    if (t < 2) return t / 2;
    if (t < 3) return 1.0;
    if (t < 5) return 1.0 - (t - 3) / 2;
    return 0.0;
  };
  const int n = 800;
  const auto d = sample_datum(8.0, n, f);
  const UnimodalResult r = certify_unimodal(d, 1e-9);
  REQUIRE(r.ok());
  const ExtremalArcs arcs = extremal_arcs(d, *r.character);
  const double spacing = 8.0 / n;
  CHECK(std::abs(arcs.gamma_max.length - 1.0) <= 2 * spacing);
  CHECK(std::abs(arcs.gamma_min.length - 3.0) <= 2 * spacing);
  CHECK(arcs.gamma_max.start >= 0.0);
  CHECK(arcs.gamma_max.start < 8.0);
  // Disjoint arcs.
  const double min_end = arcs.gamma_min.start + arcs.gamma_min.length;
  CHECK(periodic_gap(arcs.gamma_max.start, wrap(min_end, 8.0), 8.0) > 0.0);
  CHECK(arcs.gamma_max.start > wrap(min_end, 8.0));
  CHECK(arcs.gamma_max.start + arcs.gamma_max.length < arcs.gamma_min.start + 8.0);
}

TEST_CASE("sine extremal arcs are degenerate points") {
  const int n = 1000;
  const auto d = sample_datum(2 * kPi, n, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
  const auto r = certify_unimodal(d);
  REQUIRE(r.ok());
  const ExtremalArcs a = extremal_arcs(d, *r.character);
  CHECK(a.gamma_min.length <= 2 * 2 * kPi / n);
  CHECK(a.gamma_max.length <= 2 * 2 * kPi / n);
}

TEST_CASE("affine maps preserve the unimodal classification") {
  const auto base = [](double t) { return std::sin(t) + 0.3 * std::sin(2 * t); };
  const auto bimodal = [](double t) { return std::sin(3 * t); };
  for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{0.1, -4.0}, std::pair{7.5, 0.0}}) {
    const auto d0 = sample_datum(2 * kPi, 600, base);
    const auto d1 = sample_datum(2 * kPi, 600, [&](double t) { return a * base(t) + b; });
    const auto r0 = certify_unimodal(d0), r1 = certify_unimodal(d1);
    REQUIRE(r0.ok() == r1.ok());
    REQUIRE(r0.ok());
    CHECK(r1.character->m == doctest::Approx(a * r0.character->m + b));
    CHECK(r1.character->M == doctest::Approx(a * r0.character->M + b));
    CHECK_FALSE(certify_unimodal(sample_datum(2 * kPi, 600, [&](double t) { return a * bimodal(t) + b; })).ok());
  }
}

TEST_CASE("circle is quantitatively convex with range 2") {
  const DomainSpec d = make_disk_domain(1024);
  const ConvexResult r = certify_convex(map_from_curve(d.boundary), 64);
  REQUIRE(r.ok());
  CHECK(r.character->D >= 2.0 - 1e-6);
  CHECK(r.character->D <= 2.0 + 1e-12);
  CHECK(r.character->directions_tested == 64);
  CHECK(r.per_direction.size() == 64);
  const CurvatureCharacter pred = curvature_character(d.boundary);
  CHECK(pred.kappa_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pred.kappa_max == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pred.predicted.D == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pred.predicted.omega_slope == doctest::Approx(2 / kPi).epsilon(1e-9));
  CHECK(pred.predicted.T == doctest::Approx(2 * kPi));
  CHECK(r.character->D >= pred.predicted.D);
}

TEST_CASE("every certified direction is unimodal on its own") {
  const DomainSpec d = make_ellipse_domain(1.5, 1.0, 512);
  const auto map = map_from_curve(d.boundary);
  const ConvexResult r = certify_convex(map, 40);
  REQUIRE(r.ok());
  for (int k = 0; k < 40; ++k) {
    const double a = 2 * kPi * k / 40;
    CHECK(certify_unimodal(project(map, Vec2(std::cos(a), std::sin(a)))).ok());
    CHECK(r.per_direction[k].M - r.per_direction[k].m >= r.character->D);
  }
}

TEST_CASE("ellipse curvature character") {
  const DomainSpec d = make_ellipse_domain(2.0, 1.0, 2048);
  const CurvatureCharacter pred = curvature_character(d.boundary);
  // Extremal curvatures b/a² = 1/4 and a/b² = 2.
  CHECK(pred.kappa_min == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(pred.kappa_max == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(pred.predicted.D == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(pred.predicted.omega_slope == doctest::Approx(0.5 / kPi).epsilon(1e-6));
  const ConvexResult r = certify_convex(map_from_curve(d.boundary), 64);
  REQUIRE(r.ok());
  CHECK(r.character->D >= 0.5);
}

TEST_CASE("predicted D bounds the measured D from below") {
  std::vector<DomainSpec> curves = {make_ellipse_domain(1.2, 0.7, 1024), make_ellipse_domain(3.0, 1.0, 2048),
                                    make_star_domain(fourier_radius(1.0, {{2, 0.05, 0.02}}), 1024),
                                    make_star_domain(fourier_radius(2.0, {{3, 0.04, 0.0}}), 1024)};
  for (const auto& d : curves) {
    const CurvatureCharacter pred = curvature_character(d.boundary);
    const ConvexResult r = certify_convex(map_from_curve(d.boundary), 64);
    REQUIRE(r.ok());
    CHECK(r.character->D >= pred.predicted.D - 1e-9);
  }
}

TEST_CASE("rotation leaves the convexity range invariant") {
  const DomainSpec d = make_ellipse_domain(2.0, 1.0, 1024);
  const auto map = map_from_curve(d.boundary);
  const double D0 = certify_convex(map, 64).character->D;
  // Rotating by one grid step permutes the directions exactly.
  const Mat2 R = rotation(2 * kPi / 64 * 5);
  VectorBoundaryDatum rotated = map;
  for (std::size_t i = 0; i < map.size(); ++i) {
    rotated.values[i] = R * map.values[i];
    rotated.derivatives[i] = R * map.derivatives[i];
  }
  CHECK(certify_convex(rotated, 64).character->D == doctest::Approx(D0).epsilon(1e-9));
}

TEST_CASE("a figure eight fails convexity") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 512; ++i) {
    const double t = 2 * kPi * i / 512;
    pts.emplace_back(std::sin(t), std::sin(t) * std::cos(t));
  }
  VectorBoundaryDatum m;
  m.period = 2 * kPi;
  for (int i = 0; i < 512; ++i) {
    const double t = 2 * kPi * i / 512;
    m.t.push_back(t);
    m.values.push_back(pts[i]);
    m.derivatives.emplace_back(std::cos(t), std::cos(2 * t));
  }
  const ConvexResult r = certify_convex(m, 32);
  REQUIRE_FALSE(r.ok());
  CHECK(r.failure->direction_angle.has_value());
}

TEST_CASE("flat pieces make a curve not strictly convex") {
  const DomainSpec d = stadium(1200);
  CHECK_THROWS_AS(curvature_character(d.boundary), Error);
  try {
    curvature_character(d.boundary);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotStrictlyConvex);
  }
  // Still convex, just not strictly.
  CHECK(certify_convex(map_from_curve(d.boundary), 32).ok());
}

TEST_CASE("certify_convex needs enough directions") {
  CHECK_THROWS_AS(certify_convex(map_from_curve(make_disk_domain(128).boundary), 16), Error);
}

TEST_CASE("clockwise point lists are reoriented") {
  std::vector<Vec2> ccw, cw;
  for (int i = 0; i < 512; ++i) {
    const double s = 2 * kPi * i / 512;
    ccw.emplace_back(std::cos(s), std::sin(s));
    cw.emplace_back(std::cos(-s), std::sin(-s));
  }
  const auto a = curvature_character(curve_from_points(ccw), 1e-6);
  const auto b = curvature_character(curve_from_points(cw), 1e-6);
  CHECK(b.kappa_min > 0.99);
  CHECK(b.kappa_min == doctest::Approx(a.kappa_min).epsilon(1e-9));
  CHECK(b.kappa_max == doctest::Approx(a.kappa_max).epsilon(1e-9));
  std::vector<Vec2> pts;
  for (const auto& smp : curve_from_points(cw).samples) pts.push_back(smp.point);
  CHECK(polygon_area(pts) > 0.0);
  CHECK(pts.front() == cw.front());
}
