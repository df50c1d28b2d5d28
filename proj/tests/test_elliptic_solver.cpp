#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"

#include "sigmalab/elliptic_solver.hpp"
#include "sigmalab/error.hpp"
#include "sigmalab/oracles.hpp"

using namespace sigmalab;

namespace {

std::shared_ptr<const Mesh> disk_mesh(double h) {
  return std::make_shared<const Mesh>(triangulate(make_disk_domain(256), h));
}

double x1(const Vec2& x) { return x.x(); }
double x2(const Vec2& x) { return x.y(); }
double saddle(const Vec2& x) { return x.x() * x.x() - x.y() * x.y(); }

}  // namespace

TEST_CASE("P1 reproduces linear harmonic data exactly") {
  const auto mesh = disk_mesh(0.1);
  const auto sol = assemble_and_solve(mesh, family_isotropic(1.0), x1);
  CHECK(l2_error(sol, x1) <= 1e-12);
  for (const auto& g : sol.element_gradients) CHECK((g - Vec2(1, 0)).norm() <= 1e-10);
  CHECK(sol.boundary_values.size() == mesh->boundary_nodes.size());
}

TEST_CASE("constant anisotropic coefficient still reproduces linear data") {
  Mat2 s;
  s << 2.0, 0.3, -0.1, 0.5;
  const auto field = family_constant(s);
  const auto mesh = disk_mesh(0.1);
  const auto sol = assemble_and_solve(mesh, field, [](const Vec2& x) { return 0.4 * x.x() - 1.3 * x.y() + 2.0; });
  CHECK(l2_error(sol, [](const Vec2& x) { return 0.4 * x.x() - 1.3 * x.y() + 2.0; }) <= 1e-11);
}

TEST_CASE("second-order L2 convergence for a harmonic quadratic") {
  const double e1 = l2_error(assemble_and_solve(disk_mesh(0.1), family_isotropic(1.0), saddle), saddle);
  const double e2 = l2_error(assemble_and_solve(disk_mesh(0.05), family_isotropic(1.0), saddle), saddle);
  const double e3 = l2_error(assemble_and_solve(disk_mesh(0.025), family_isotropic(1.0), saddle), saddle);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("discrete maximum principle on an acute-ish mesh") {
  const auto mesh = disk_mesh(0.05);
  const auto sol = assemble_and_solve(mesh, family_isotropic(1.0),
                                      [](const Vec2& x) { return std::sin(3 * x.x()) + x.y() * x.y(); });
  double bmin = 1e300, bmax = -1e300;
  for (double v : sol.boundary_values) {
    bmin = std::min(bmin, v);
    bmax = std::max(bmax, v);
  }
  CHECK(sol.nodal_values.minCoeff() >= bmin - 1e-9);
  CHECK(sol.nodal_values.maxCoeff() <= bmax + 1e-9);
}

TEST_CASE("solutions are linear in the data and satisfy the Galerkin equations") {
  SmoothRandomOptions o;
  o.seed = 3;
  o.skew = 0.5;
  const auto field = family_smooth_random(o);
  const auto mesh = disk_mesh(0.06);
  const DirichletSolver solver(mesh, field);
  const auto a = solver.solve(x1);
  const auto b = solver.solve(saddle);
  const auto c = solver.solve([](const Vec2& x) { return 2.0 * x.x() - 3.0 * saddle(x); });
  CHECK((c.nodal_values - (2.0 * a.nodal_values - 3.0 * b.nodal_values)).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(solver.galerkin_residual(a.nodal_values) <= 1e-10);
  CHECK(solver.galerkin_residual(c.nodal_values) <= 1e-10);
  CHECK(a.residual_norm <= 1e-10);
  // A nonsymmetric σ assembles a nonsymmetric matrix.
  const Eigen::SparseMatrix<double> K = solver.stiffness();
  CHECK(Eigen::MatrixXd(K - Eigen::SparseMatrix<double>(K.transpose())).norm() > 1e-6);
}

TEST_CASE("parametric boundary data matches point data") {
  const DomainSpec disk = make_disk_domain(256);
  const auto mesh = disk_mesh(0.1);
  const DirichletSolver solver(mesh, family_isotropic(1.0));
  const auto datum = datum_on_curve(disk.boundary, x2, [](const Vec2&) { return Vec2(0, 1); });
  const auto a = solver.solve(datum);
  const auto b = solver.solve(x2);
  CHECK((a.nodal_values - b.nodal_values).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(interpolate_periodic(datum, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("stream function of x1 under sigma = I is x2") {
  const auto field = family_isotropic(1.0);
  const auto mesh = disk_mesh(0.05);
  const auto sol = assemble_and_solve(mesh, field, x1);
  const StreamFunction s = stream_function(sol, field);
  CHECK(s.loop_residual <= 1e-12);
  CHECK(s.cycles > 0);
  const Vec2 base = mesh->nodes[mesh->boundary_nodes.front().node];
  for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
    CHECK(s.nodal_values(i) == doctest::Approx(mesh->nodes[i].y() - base.y()).epsilon(1e-10));
  }
  const auto fo = check_first_order_system(sol, s, field);
  CHECK(fo.elements_used > 0);
  CHECK(fo.max_residual <= 1e-10);
}

TEST_CASE("loop residual of the stream function decreases under refinement") {
  SmoothRandomOptions o;
  o.seed = 5;
  o.skew = 0.5;
  const auto field = family_smooth_random(o);
  double prev = 1e300;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto sol = assemble_and_solve(disk_mesh(h), field, x1);
    const double r = stream_function(sol, field).loop_residual;
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("first-order system holds for the Meyers map away from the origin") {
  const double alpha = 2.0;
  const auto field = family_meyers(alpha);
  const auto mesh = disk_mesh(0.0135);
  const auto sol = assemble_and_solve(mesh, field, [&](const Vec2& x) { return meyers_eval(alpha, x).U(0); });
  const auto s = stream_function(sol, field);
  const auto fo = check_first_order_system(sol, s, field, {Vec2::Zero()}, [](const Vec2& x) {
    const double r = x.norm();
    return r >= 0.3 && r <= 0.8;
  });
  CHECK(fo.elements_used > 100);
  CHECK(fo.max_residual <= 0.05);
}

TEST_CASE("CSV output formats") {
  const auto mesh = disk_mesh(0.3);
  const auto sol = assemble_and_solve(mesh, family_isotropic(1.0), x1);
  std::ostringstream a, b;
  write_solution_csv(a, sol);
  write_gradient_csv(b, sol);
  std::istringstream ia(a.str()), ib(b.str());
  std::string line;
  std::getline(ia, line);
  CHECK(line == "node,x,y,u");
  std::size_t rows = 0;
  while (std::getline(ia, line)) ++rows;
  CHECK(rows == mesh->num_nodes());
  std::getline(ib, line);
  CHECK(line == "tri,cx,cy,gx,gy");
  rows = 0;
  while (std::getline(ib, line)) ++rows;
  CHECK(rows == mesh->num_triangles());
}

TEST_CASE("l2_norm integrates polynomials on the discrete disk") {
  const auto mesh = disk_mesh(0.05);
  // ∫ 1 over the inscribed polygon, slightly below π.
  const double one = l2_norm(*mesh, [](const Vec2&) { return 1.0; });
  CHECK(one * one == doctest::Approx(kPi).epsilon(2e-3));
  CHECK(one * one < kPi);
}
