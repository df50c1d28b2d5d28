#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "sigmalab/composite_bounds.hpp"
#include "sigmalab/error.hpp"

using namespace sigmalab;

namespace {

PhaseLayout two_cell() {
  PhaseLayout l;
  l.nx = 2;
  l.ny = 1;
  l.phase_of_cell = {0, 1};
  l.sigmas = {1.0, 2.0};
  return l;
}

PhaseLayout witness() {
  PhaseLayout l;
  l.nx = l.ny = 10;
  l.sigmas = {1.0, 2.0, 5.0};
  for (int c = 0; c < 100; ++c) l.phase_of_cell.push_back(c < 2 ? 0 : c < 40 ? 1 : 2);
  return l;
}

Mat2 diag(double a, double b) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("Wiener bound examples") {
  CHECK(wiener_bound(single_phase_layout(1.0), Mat2::Identity()) == doctest::Approx(2.0));
  // (½/1 + ½/2)⁻¹ = 4/3 per unit of |A|².
  CHECK(wiener_bound(two_cell(), Mat2::Identity()) == doctest::Approx(8.0 / 3.0));
  CHECK(wiener_bound(two_cell(), diag(1.0, 0.0)) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("a homogeneous cell makes every bound coincide") {
  Mat2 A;
  A << 1.0, 0.3, -0.2, 0.7;
  const auto layout = single_phase_layout(2.5, 3);
  const auto chain = bound_chain_report(layout, A, 4);
  const double exact = 2.5 * A.squaredNorm();
  CHECK(chain.F0 == doctest::Approx(exact).epsilon(1e-10));
  CHECK(chain.F1 == doctest::Approx(exact).epsilon(1e-8));
  CHECK(chain.F2 == doctest::Approx(exact).epsilon(1e-8));
  CHECK(chain.F_upper == doctest::Approx(exact).epsilon(1e-10));
  CHECK(chain.ordered);
}

TEST_CASE("translation bound of the two-cell laminate against a grid search") {
  const auto layout = two_cell();
  const Mat2 A = Mat2::Identity();
  const auto f1 = translation_bound(layout, A);
  CHECK(f1.certified);
  CHECK(f1.mean_residual <= 1e-9);
  CHECK(f1.det_residual <= 1e-9);
  // B₁ = [[a,b],[c,d]], B₂ = 2A − B₁; the mean-det constraint reads (a−1)(d−1) = bc.
  double best = 1e300;
  for (double a = -1.0; a <= 3.0 + 1e-9; a += 0.05) {
    if (std::abs(a - 1.0) < 1e-9) continue;
    for (double b = -2.0; b <= 2.0 + 1e-9; b += 0.05) {
      for (double c = -2.0; c <= 2.0 + 1e-9; c += 0.05) {
        const double d = 1.0 + b * c / (a - 1.0);
        Mat2 B1;
        B1 << a, b, c, d;
        const Mat2 B2 = 2.0 * A - B1;
        best = std::min(best, 0.5 * (1.0 * B1.squaredNorm() + 2.0 * B2.squaredNorm()));
      }
    }
  }
  // B₁ = A + X with X of rank one: ½(6 − 2 tr X + 3|X|²) is least at tr X = ⅓.
  CHECK(f1.value == doctest::Approx(17.0 / 6.0).epsilon(1e-6));
  CHECK(f1.value >= wiener_bound(layout, A));
  CHECK(best >= f1.value - 1e-9);
  CHECK(best <= 1.02 * f1.value);
}

TEST_CASE("improved bound is undefined for orientation-reversing A") {
  const auto r = improved_bound(two_cell(), diag(1.0, -1.0));
  CHECK(r.infeasible);
  const auto chain = bound_chain_report(two_cell(), diag(1.0, -1.0), 4);
  CHECK_FALSE(chain.f2_defined);
  CHECK(chain.ordered);
}

TEST_CASE("cell energy decreases under nested refinement") {
  const auto layout = random_layout(3, {1.0, 4.0}, 7);
  const Mat2 A = diag(1.0, 0.5);
  double prev = 1e300;
  for (int r : {1, 2, 4, 8}) {
    const double e = cell_energy_upper(layout, A, r).value;
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("bounds scale quadratically in A") {
  const auto layout = random_layout(4, {1.0, 2.0}, 3);
  Mat2 A;
  A << 1.0, 0.2, 0.1, 0.8;
  const auto a = bound_chain_report(layout, A, 4);
  const auto b = bound_chain_report(layout, 3.0 * A, 4);
  CHECK(b.F0 == doctest::Approx(9.0 * a.F0).epsilon(1e-10));
  CHECK(b.F1 == doctest::Approx(9.0 * a.F1).epsilon(1e-7));
  CHECK(b.F2 == doctest::Approx(9.0 * a.F2).epsilon(1e-6));
  CHECK(b.F_upper == doctest::Approx(9.0 * a.F_upper).epsilon(1e-10));
}

TEST_CASE("lower bounds only see the phase fractions") {
  auto layout = random_layout(4, {1.0, 2.0, 5.0}, 11);
  const Mat2 A = diag(1.0, 0.5);
  const double f0 = wiener_bound(layout, A);
  const double f1 = translation_bound(layout, A).value;
  const double f2 = improved_bound(layout, A).value;
  std::mt19937_64 rng(5);
  std::shuffle(layout.phase_of_cell.begin(), layout.phase_of_cell.end(), rng);
  CHECK(wiener_bound(layout, A) == doctest::Approx(f0).epsilon(1e-12));
  CHECK(translation_bound(layout, A).value == doctest::Approx(f1).epsilon(1e-8));
  CHECK(improved_bound(layout, A).value == doctest::Approx(f2).epsilon(1e-6));
}

TEST_CASE("the bound chain is ordered on random layouts") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto layout = random_layout(4, seed % 2 ? std::vector<double>{1.0, 2.0} : std::vector<double>{1.0, 2.0, 5.0},
                                      seed);
    for (const auto& counts = layout.counts(); int c : counts) CHECK(c >= 1);
    const auto chain = bound_chain_report(layout, Mat2::Identity(), 4, 0.0, false);
    CHECK(chain.ordered);
    CHECK(chain.F0 <= chain.F1 + 1e-9);
    CHECK(chain.F1 <= chain.F2 + 1e-8);
    CHECK(chain.F2 <= chain.F_upper + chain.tolerance);
  }
}

TEST_CASE("random layouts are deterministic") {
  const auto a = random_layout(5, {1.0, 3.0}, 42);
  const auto b = random_layout(5, {1.0, 3.0}, 42);
  CHECK(a.phase_of_cell == b.phase_of_cell);
}

TEST_CASE("the improved bound can be strictly larger than the translation bound") {
  const auto layout = witness();
  const Mat2 A = diag(1.0, 0.5);
  const auto f1 = translation_bound(layout, A);
  const auto f2 = improved_bound(layout, A);
  CHECK(f2.certified);
  CHECK(f2.value - f1.value >= 1e-3);
  CHECK(f2.min_det >= -1e-9);
  CHECK(f2.mean_residual <= 1e-7);
  REQUIRE(f2.dual_bound.has_value());
  CHECK(*f2.dual_bound <= f2.value + 1e-9);
  const auto chain = bound_chain_report(layout, A, 4);
  CHECK(chain.ordered);
}

TEST_CASE("layout validation") {
  PhaseLayout bad = two_cell();
  bad.phase_of_cell = {0, 0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = two_cell();
  bad.sigmas = {1.0, -2.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = two_cell();
  bad.phase_of_cell = {0, 2};
  CHECK_THROWS_AS(bad.validate(), Error);
}
