#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "sigmalab/error.hpp"
#include "sigmalab/oracles.hpp"

using namespace sigmalab;

namespace {

template <class F>
Eigen::MatrixXd fd_jacobian(F&& U, const Vec3& x, double h) {
  Eigen::MatrixXd J(3, 3);
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e(j) = h;
    J.col(j) = (U(x + e) - U(x - e)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("Meyers map values and determinant") {
  const auto e = meyers_eval(2.0, Vec2(3.0, 4.0));
  CHECK(e.U(0) == doctest::Approx(15.0));
  CHECK(e.U(1) == doctest::Approx(20.0));
  CHECK(e.det == doctest::Approx(2.0 * 25.0));
  CHECK(e.DU.determinant() == doctest::Approx(e.det));
  const auto half = meyers_eval(0.5, Vec2(0.0, 0.25));
  CHECK(half.det == doctest::Approx(0.5 / 0.25));
  CHECK(meyers_eval(2.0, Vec2::Zero()).DU.norm() == 0.0);
  CHECK((meyers_eval(1.0, Vec2::Zero()).DU - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  try {
    meyers_eval(0.5, Vec2::Zero());
    FAIL("expected OriginDerivative");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::OriginDerivative);
  }
}

TEST_CASE("Meyers map solves the divergence equation") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double alpha : {0.5, 2.0, 3.0}) {
    for (int i = 0; i < 50; ++i) {
      Vec2 x(u(rng), u(rng));
      if (x.norm() < 0.1) continue;
      CHECK(meyers_residual(alpha, x) <= 1e-5);
      const auto e = meyers_eval(alpha, x);
      CHECK(e.det == doctest::Approx(alpha * std::pow(x.norm(), 2 * (alpha - 1))).epsilon(1e-12));
    }
  }
}

TEST_CASE("Wood's map: harmonic, degenerate on a plane") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const auto e = wood_eval(x);
    CHECK(e.det == doctest::Approx(3 * x(0) * x(0)).epsilon(1e-12));
    CHECK(wood_laplacian_residual(x) <= 1e-8);
    CHECK(wood_eval(Vec3(0.0, x(1), x(2))).det == 0.0);
    const auto J = fd_jacobian([](const Vec3& y) { return Eigen::VectorXd(wood_eval(y).U); }, x, 1e-5);
    CHECK((J - e.DU).norm() <= 1e-8);
  }
  CHECK(wood_eval(Vec3(1, 0, 0)).det == doctest::Approx(3.0));
}

TEST_CASE("vanishing amplitude gives a vanishing profile") {
  JinKazdanAmplitude zero;
  zero.a0 = 0.0;
  zero.a = [](double) { return 0.0; };
  zero.da = [](double) { return 0.0; };
  const auto p = jin_kazdan_smooth(zero, 1.0, 2000);
  for (double v : p.grid_phi()) CHECK(v == 0.0);
  CHECK(p.phi(0.7) == 0.0);
}

TEST_CASE("piecewise profile") {
  const auto p = jin_kazdan_piecewise(0.5);
  CHECK(p.phi(-0.3) == 0.0);
  CHECK(p.phi(1.0) == doctest::Approx(0.375));
  CHECK(p.phi_prime(1.0) == doctest::Approx(0.75));
  const auto e = jin_kazdan_eval(p, Vec3(0.2, 0.3, 1.0));
  CHECK(e.det == doctest::Approx(0.75));
  CHECK(jin_kazdan_eval(p, Vec3(0.2, 0.3, -1.0)).det == 0.0);
  // φ and the flux are continuous across the interface, φ′ starts at zero.
  CHECK(p.phi(1e-9) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.phi_prime(1e-9) <= 1e-8);
  CHECK(p.flux(1e-9) <= 1e-8);
}

TEST_CASE("smooth profile integrates the ODE") {
  const auto amp = jin_kazdan_amplitude(0.5, true);
  const auto p = jin_kazdan_smooth(amp, 1.0, 4000);
  CHECK(p.phi(-0.5) == 0.0);
  double prev = 0.0;
  for (double x3 = 0.1; x3 <= 1.0; x3 += 0.1) {
    CHECK(p.phi_prime(x3) > 0.0);
    CHECK(p.phi(x3) > prev);
    prev = p.phi(x3);
    // (bφ′)′ = 2a: the flux increment matches the amplitude integral by Simpson.
    const double a = x3 - 0.05, b = x3;
    const double integral = (b - a) / 6 * (amp.a(a) + 4 * amp.a(0.5 * (a + b)) + amp.a(b)) * 2;
    CHECK(p.flux(b) - p.flux(a) == doctest::Approx(integral).epsilon(1e-5));
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec3 x(u(rng), u(rng), u(rng));
    if (std::abs(x(2)) < 0.05) continue;
    CHECK(jin_kazdan_residual(p, x) <= 1e-6);
    const auto e = jin_kazdan_eval(p, x);
    CHECK(e.det == doctest::Approx(p.phi_prime(x(2))));
    if (x(2) > 0.05 && x(2) < 0.95) {
      const auto J = fd_jacobian([&](const Vec3& y) { return Eigen::VectorXd(jin_kazdan_eval(p, y).U); }, x, 1e-4);
      CHECK((J - e.DU).norm() <= 1e-5);
    }
  }
  try {
    jin_kazdan_smooth(amp, 1.0, 10);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("unique continuation fails across the interface") {
  for (bool smooth : {true, false}) {
    const auto p = smooth ? jin_kazdan_smooth(jin_kazdan_amplitude(0.5, true), 1.0, 4000) : jin_kazdan_piecewise(0.5);
    const auto r = unique_continuation_demo(p);
    CHECK(r.rows.size() == 22 * 22 * 22);
    CHECK(r.max_abs_det_below == 0.0);
    CHECK(r.min_det_above > 0.0);
    CHECK(r.split_at_interface);
    CHECK(r.trace_bound_holds);
    // |DU|² = 2 + x₁² + x₂² + φ′², so the infimum is 2.
    CHECK(r.min_trace >= 2.0);
    CHECK(r.min_trace < 2.01);
    // At (0,0,−1) only the identity block of DU survives.
    CHECK(jin_kazdan_eval(p, Vec3(0.0, 0.0, -1.0)).DU.squaredNorm() == doctest::Approx(2.0));
    std::ostringstream out;
    write_continuation_csv(out, r);
    CHECK(out.str().size() > 1000);
  }
}
