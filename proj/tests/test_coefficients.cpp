#include <cmath>
#include <random>

#include "doctest.h"

#include "sigmalab/coefficients.hpp"
#include "sigmalab/error.hpp"

using namespace sigmalab;

namespace {

std::vector<Vec2> random_points(int n, std::uint64_t seed, double radius = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec2> p;
  while (static_cast<int>(p.size()) < n) {
    Vec2 x(u(rng), u(rng));
    if (x.norm() > 1e-3) p.push_back(x);
  }
  return p;
}

Mat2 diag(double a, double b) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("identity field is 1-elliptic") {
  const auto f = family_isotropic(1.0);
  const auto r = verify_ellipticity(f, random_points(50, 1));
  CHECK(r.passes);
  CHECK(r.worst_ratio_forward == doctest::Approx(1.0));
  CHECK(r.worst_ratio_inverse == doctest::Approx(1.0));
}

TEST_CASE("diag(2, 1/2) has K = 2") {
  const auto f = family_constant(diag(2.0, 0.5));
  CHECK(f.K() == doctest::Approx(2.0));
  const auto r = verify_ellipticity(f, random_points(10, 2));
  CHECK(r.passes);
  CHECK(r.worst_ratio_forward == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ellipticity_constant(diag(2.0, 0.5)) == doctest::Approx(2.0));
}

TEST_CASE("nonsymmetric constant: K also covers the dilatation bound") {
  Mat2 s;
  s << 2.0, 0.3, -0.4, 0.8;
  const auto f = family_constant(s);
  CHECK_FALSE(f.symmetric());
  const BeltramiPair p = complex_dilatations(s);
  const double k = std::abs(p.mu) + std::abs(p.nu);
  CHECK(f.K() == doctest::Approx((1 + k) / (1 - k)).epsilon(1e-12));
  CHECK_NOTHROW(beltrami_dilatations(s, f.K()));
  CHECK(verify_ellipticity(f, random_points(20, 11)).passes);
}

TEST_CASE("a field declared with too small K fails the check") {
  const CoefficientField f(CoefficientField::Eval2([](const Vec2&) { return diag(3.0, 1.0); }), 2.0, true, "tight");
  const auto r = verify_ellipticity(f, random_points(5, 3));
  CHECK_FALSE(r.passes);
  CHECK(r.violating_point.has_value());
}

TEST_CASE("singular matrices are reported") {
  const CoefficientField f(CoefficientField::Eval2([](const Vec2&) { return diag(1.0, 0.0); }), 10.0, true, "singular");
  try {
    verify_ellipticity(f, random_points(3, 4));
    FAIL("expected SingularMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMatrix);
  }
}

TEST_CASE("Meyers field") {
  for (double alpha : {0.25, 0.5, 1.0, 2.0, 3.0}) {
    const auto f = family_meyers(alpha);
    CHECK(f.K() == doctest::Approx(std::max(alpha, 1 / alpha)));
    CHECK(f.symmetric());
    CHECK_FALSE(f.holder().has_value());
    CHECK(family_meyers(1 / alpha).K() == doctest::Approx(f.K()));
    const auto pts = random_points(200, 5);
    CHECK(verify_ellipticity(f, pts).passes);
    for (const auto& x : pts) {
      Eigen::SelfAdjointEigenSolver<Mat2> es(f.eval(x));
      CHECK(es.eigenvalues()(0) == doctest::Approx(std::min(alpha, 1 / alpha)).epsilon(1e-12));
      CHECK(es.eigenvalues()(1) == doctest::Approx(std::max(alpha, 1 / alpha)).epsilon(1e-12));
      // σ(Rx) = R σ(x) Rᵀ
      const Mat2 R = rotation(0.7);
      CHECK((f.eval(R * x) - R * f.eval(x) * R.transpose()).norm() <= 1e-12);
    }
    CHECK((f.eval(Vec2::Zero()) - diag(1 / alpha, alpha)).norm() <= 1e-15);
  }
  const auto id = family_meyers(1.0);
  for (const auto& x : random_points(20, 6)) CHECK((id.eval(x) - Mat2::Identity()).norm() <= 1e-15);
}

TEST_CASE("complex dilatations from the closed-form expressions") {
  const BeltramiPair zero = beltrami_dilatations(Mat2::Identity(), 1.0);
  CHECK(std::abs(zero.mu) == 0.0);
  CHECK(std::abs(zero.nu) == 0.0);
  const BeltramiPair two = beltrami_dilatations(diag(2, 2), 2.0);
  CHECK(std::abs(two.mu) <= 1e-15);
  CHECK(two.nu.real() == doctest::Approx(-1.0 / 3.0));
  CHECK(two.nu.imag() == doctest::Approx(0.0));
  CHECK(std::abs(two.mu) + std::abs(two.nu) == doctest::Approx(1.0 / 3.0));
  for (double alpha : {0.5, 2.0, 3.0}) {
    const auto f = family_meyers(alpha);
    const BeltramiPair p = beltrami_dilatations(f.eval(Vec2(1, 0)), f.K());
    CHECK(p.mu.real() == doctest::Approx((alpha - 1) / (alpha + 1)));
    CHECK(std::abs(p.mu.imag()) <= 1e-15);
    CHECK(std::abs(p.nu) <= 1e-15);
  }
}

TEST_CASE("imaginary parts follow the off-diagonal entries") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 100; ++i) {
    Mat2 s;
    s << 1.0 + u(rng), u(rng), u(rng), 1.0 + u(rng);
    const double den = 1.0 + s.trace() + s.determinant();
    const BeltramiPair p = complex_dilatations(s);
    CHECK(p.mu.imag() == doctest::Approx(-(s(0, 1) + s(1, 0)) / den).epsilon(1e-12));
    CHECK(p.nu.imag() == doctest::Approx((s(0, 1) - s(1, 0)) / den).epsilon(1e-12));
    const Mat2 sym = 0.5 * (s + s.transpose());
    CHECK(std::abs(complex_dilatations(sym).nu.imag()) <= 1e-15);
  }
}

TEST_CASE("Jin-Kazdan coefficient") {
  const auto piece = family_jin_kazdan(0.5, false);
  CHECK(piece.dim() == 3);
  CHECK((piece.eval3(Vec3(0.2, -0.3, -0.5)) - Mat3::Identity()).norm() == 0.0);
  const Mat3 above = piece.eval3(Vec3(0.0, 0.0, 0.7));
  CHECK(above(0, 1) == doctest::Approx(0.5));
  CHECK(above(1, 0) == doctest::Approx(0.5));
  CHECK(above(2, 2) == doctest::Approx(4.0 / 3.0));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> block(above.topLeftCorner<2, 2>());
  CHECK(block.eigenvalues()(0) == doctest::Approx(0.5));
  CHECK(block.eigenvalues()(1) == doctest::Approx(1.5));
  CHECK(piece.K() == doctest::Approx(2.0));

  const auto smooth = family_jin_kazdan(0.5, true);
  CHECK((smooth.eval3(Vec3(0, 0, -1)) - Mat3::Identity()).norm() == 0.0);
  const double a = smooth.eval3(Vec3(0, 0, 0.5))(0, 1);
  CHECK(a == doctest::Approx(0.5 * std::exp(-2.0)));
  std::vector<Vec3> pts;
  for (int i = -20; i <= 20; ++i) pts.emplace_back(0.1, 0.2, 0.1 * i);
  CHECK(verify_ellipticity(smooth, pts).passes);
  CHECK(verify_ellipticity(piece, pts).passes);

  for (double bad : {0.0, 1.0, -0.2, 1.5}) {
    try {
      family_jin_kazdan(bad, true);
      FAIL("expected A0OutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::A0OutOfRange);
    }
  }
}

TEST_CASE("smooth random fields are deterministic and elliptic") {
  const auto pts = random_points(1000, 9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SmoothRandomOptions o;
    o.seed = seed;
    o.K_target = 2.0;
    o.skew = seed % 2 ? 0.5 : 0.0;
    const auto f = family_smooth_random(o);
    const auto g = family_smooth_random(o);
    for (int i = 0; i < 20; ++i) CHECK((f.eval(pts[i]) - g.eval(pts[i])).norm() == 0.0);
    CHECK(f.symmetric() == (o.skew == 0.0));
    CHECK(f.K() == doctest::Approx(2.0));
    CHECK(verify_ellipticity(f, pts).passes);
    for (const auto& x : pts) {
      const BeltramiPair p = complex_dilatations(f.eval(x));
      CHECK(std::abs(p.mu) + std::abs(p.nu) <= 1.0 / 3.0 + 1e-12);
    }
    REQUIRE(f.holder().has_value());
    CHECK(verify_holder(f, -1.0, 1.0, 10000, seed).passes);
  }
}

TEST_CASE("different seeds give different fields") {
  SmoothRandomOptions a, b;
  a.seed = 1;
  b.seed = 2;
  const Vec2 x(0.3, -0.2);
  CHECK((family_smooth_random(a).eval(x) - family_smooth_random(b).eval(x)).norm() > 1e-6);
}

TEST_CASE("every family satisfies the Beltrami bound") {
  const auto pts = random_points(1000, 10);
  std::vector<CoefficientField> fields = {family_isotropic(1.0), family_isotropic(3.0),
                                          family_constant(diag(2.0, 0.5)), family_meyers(0.5), family_meyers(2.0),
                                          family_meyers(3.0)};
  for (const auto& f : fields) {
    const double bound = (f.K() - 1) / (f.K() + 1);
    for (const auto& x : pts) {
      const BeltramiPair p = beltrami_dilatations(f.eval(x), f.K());
      CHECK(std::abs(p.mu) + std::abs(p.nu) <= bound + 1e-12);
    }
  }
}
