#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "doctest.h"

#include "sigmalab/error.hpp"
#include "sigmalab/jacobian_lab.hpp"
#include "sigmalab/oracles.hpp"

using namespace sigmalab;

namespace {

std::shared_ptr<const Mesh> disk_mesh(double h) {
  return std::make_shared<const Mesh>(triangulate(make_disk_domain(256), h));
}

JacobianReport linear_map(const Mat2& A, double h = 0.1) {
  const auto mesh = disk_mesh(h);
  return jacobian_field(solve_mapping(
      mesh, family_isotropic(1.0), [&](const Vec2& x) { return (A.row(0) * x)(0); },
      [&](const Vec2& x) { return (A.row(1) * x)(0); }));
}

}  // namespace

TEST_CASE("identity map has unit Jacobian") {
  const auto r = linear_map(Mat2::Identity());
  CHECK(r.global_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.global_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.sign_changes == 0);
  CHECK(r.quotient_min() == doctest::Approx(1.0).epsilon(1e-12));
  for (double f : r.fraction_min) CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diagonal stretch: directional bound and quotient") {
  Mat2 A = Mat2::Zero();
  A(0, 0) = 2.0;
  A(1, 1) = 0.5;
  const auto r = linear_map(A);
  CHECK(r.global_min == doctest::Approx(1.0).epsilon(1e-12));
  const auto d = directional_gradient_bound(r, 64);
  CHECK(d.min == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(d.angles.size() == 64);
  CHECK(d.per_direction.size() == 64);
  CHECK(r.quotient_min() == doctest::Approx(2.125).epsilon(1e-10));
  for (double e : r.eigen_min) CHECK(e == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("orientation-reversing map counts every element as a sign change") {
  Mat2 A;
  A << 1.0, 0.0, 0.0, -1.0;
  const auto r = linear_map(A);
  CHECK(r.sign_changes == r.det.size());
  CHECK(r.global_max == doctest::Approx(-1.0));
  for (double q : r.quotient) CHECK(std::isnan(q));
}

TEST_CASE("power density of a shear") {
  Mat2 A;
  A << 1.0, 0.0, 1.0, 1.0;
  const auto r = linear_map(A);
  const auto H = power_density(r, family_isotropic(1.0));
  Mat2 expected;
  expected << 1.0, 1.0, 1.0, 2.0;
  for (const auto& h : H) CHECK((h - expected).norm() <= 1e-10);
}

TEST_CASE("power density equals DU sigma^T DU^T for an anisotropic field") {
  SmoothRandomOptions o;
  o.seed = 2;
  o.skew = 0.5;
  const auto field = family_smooth_random(o);
  const auto mesh = disk_mesh(0.1);
  const auto r = jacobian_field(solve_mapping(mesh, field, [](const Vec2& x) { return x.x(); },
                                              [](const Vec2& x) { return x.y(); }));
  const auto H = power_density(r, field);
  for (std::size_t t = 0; t < H.size(); ++t) {
    const Mat2 s = field.eval(mesh->centroid(t));
    CHECK((H[t] - r.du[t] * s.transpose() * r.du[t].transpose()).norm() <= 1e-12);
    // det² = det(DUᵀDU)
    CHECK(r.det[t] * r.det[t] == doctest::Approx((r.du[t].transpose() * r.du[t]).determinant()).epsilon(1e-9));
  }
}

TEST_CASE("interior minimum is monotone in the distance") {
  SmoothRandomOptions o;
  o.seed = 4;
  const auto field = family_smooth_random(o);
  const auto r = jacobian_field(solve_mapping(disk_mesh(0.05), field, [](const Vec2& x) { return x.x(); },
                                              [](const Vec2& x) { return x.y(); }));
  double prev = -std::numeric_limits<double>::infinity();
  for (double d : {0.0, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double m = r.interior_min(d);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(r.interior_min(0.0) == doctest::Approx(r.global_min));
  CHECK(std::isinf(r.interior_min(10.0)));
  CHECK(r.fraction_min[0] <= r.fraction_min[1]);
  CHECK(r.fraction_min[1] <= r.fraction_min[2]);
}

TEST_CASE("mismatched meshes are rejected") {
  const auto a = assemble_and_solve(disk_mesh(0.1), family_isotropic(1.0), [](const Vec2& x) { return x.x(); });
  const auto b = assemble_and_solve(disk_mesh(0.2), family_isotropic(1.0), [](const Vec2& x) { return x.y(); });
  try {
    jacobian_field(a, b);
    FAIL("expected MeshMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MeshMismatch);
  }
}

TEST_CASE("degeneration rate of the Meyers map") {
  for (double alpha : {0.5, 2.0, 3.0}) {
    const auto field = family_meyers(alpha);
    const auto r = jacobian_field(solve_mapping(
        disk_mesh(0.0135), field, [&](const Vec2& x) { return meyers_eval(alpha, x).U(0); },
        [&](const Vec2& x) { return meyers_eval(alpha, x).U(1); }));
    const auto fit = fit_degeneration_rate(r, Vec2::Zero(), 0.2, 0.8);
    CHECK(fit.exponent == doctest::Approx(2 * (alpha - 1)).epsilon(0.15 / std::abs(2 * (alpha - 1))));
    CHECK(fit.r_squared > 0.99);
    CHECK(fit.bins_used >= 5);
    CHECK(r.sign_changes == 0);
  }
}

TEST_CASE("too few populated bins") {
  const auto r = linear_map(Mat2::Identity(), 0.2);
  try {
    fit_degeneration_rate(r, Vec2::Zero(), 0.5, 0.52, 12);
    FAIL("expected InsufficientBins");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientBins);
  }
}

TEST_CASE("gradient bounds near the extremal arcs") {
  const DomainSpec disk = make_disk_domain(256);
  const auto datum = datum_on_curve(disk.boundary, [](const Vec2& x) { return x.x(); },
                                    [](const Vec2&) { return Vec2(1, 0); });
  const auto uni = certify_unimodal(datum);
  REQUIRE(uni.ok());
  const auto arcs = extremal_arcs(datum, *uni.character);
  const auto sol = assemble_and_solve(disk_mesh(0.05), family_isotropic(1.0), [](const Vec2& x) { return x.x(); });
  const auto g = verify_gradient_bounds(sol, arcs, 0.2, 0.1);
  CHECK(g.all_positive);
  CHECK(g.near_extremal_count > 0);
  CHECK(g.boundary_layer_count > 0);
  CHECK(g.near_extremal_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(g.global_min == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Jacobian CSV has one row per element") {
  const auto r = linear_map(Mat2::Identity(), 0.3);
  std::ostringstream out;
  write_jacobian_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("tri,", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == r.det.size());
}
