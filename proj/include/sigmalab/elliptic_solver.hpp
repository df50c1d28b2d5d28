#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "sigmalab/boundary_characters.hpp"
#include "sigmalab/coefficients.hpp"
#include "sigmalab/geometry.hpp"

namespace sigmalab {

using BoundaryFunction = std::function<double(const Vec2&)>;

/// Piecewise-linear solution of div(σ∇u) = 0 with strong Dirichlet data.
struct DiscreteSolution {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd nodal_values;
  std::vector<Vec2> element_gradients;
  std::vector<double> boundary_values;  ///< aligned with mesh->boundary_nodes
  double residual_norm = 0.0;
};

/// Exact gradients of the P1 interpolant of `values` on every triangle.
std::vector<Vec2> p1_gradients(const Mesh& mesh, const Eigen::VectorXd& values);

/// Assembles the P1 stiffness matrix once (σ at element centroids, no
/// symmetrization) and factors its interior block; every solve reuses the
/// factorization.
class DirichletSolver {
 public:
  DirichletSolver(std::shared_ptr<const Mesh> mesh, const CoefficientField& field);

  DiscreteSolution solve(const BoundaryFunction& datum) const;
  /// Data given on the boundary parameter; periodic cubic Hermite interpolation.
  DiscreteSolution solve(const ScalarBoundaryDatum& datum) const;
  DiscreteSolution solve_values(const std::vector<double>& boundary_values) const;

  const std::shared_ptr<const Mesh>& mesh() const { return mesh_; }
  const std::vector<Mat2>& element_sigma() const { return element_sigma_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// |K u|_interior / |K_IB u_B| for an arbitrary nodal vector.
  double galerkin_residual(const Eigen::VectorXd& nodal) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<Mat2> element_sigma_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SparseMatrix<double> interior_;
  Eigen::SparseMatrix<double> coupling_;
  std::vector<int> interior_index_;
  std::vector<int> interior_nodes_;
  std::vector<int> boundary_of_node_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

DiscreteSolution assemble_and_solve(std::shared_ptr<const Mesh> mesh, const CoefficientField& field,
                                    const BoundaryFunction& datum);

std::pair<DiscreteSolution, DiscreteSolution> solve_mapping(std::shared_ptr<const Mesh> mesh,
                                                            const CoefficientField& field,
                                                            const BoundaryFunction& phi1,
                                                            const BoundaryFunction& phi2);

double interpolate_periodic(const ScalarBoundaryDatum& datum, double t);

struct StreamFunction {
  Eigen::VectorXd nodal_values;         ///< least-squares fit of all edge increments
  Eigen::VectorXd tree_values;          ///< plain spanning-tree integration
  std::vector<Vec2> element_gradients;  ///< of the P1 interpolant of nodal_values
  std::vector<Vec2> element_flux;       ///< Jσ(c_T)∇u_h on each triangle
  double loop_residual = 0.0;           ///< max circulation over fundamental cycles
  std::size_t cycles = 0;
};

/// Integrates Jσ∇u_h along a breadth-first spanning tree of mesh edges from
/// the first boundary node, using the average of the adjacent element fluxes.
/// Errors accumulated along tree branches meet at the non-tree edges, so the
/// nodal values are then reconciled by a least-squares fit of every edge
/// increment; both vanish at the first boundary node.
StreamFunction stream_function(const DiscreteSolution& solution, const CoefficientField& field);

struct FirstOrderReport {
  double max_residual = 0.0;
  std::size_t elements_used = 0;
};

/// Residual of f_z̄ − μ f_z − ν conj(f_z), relative to |f_z|, for f = u_h + i ũ_h.
/// Elements within 2h of the boundary or of a listed singular point are
/// skipped, as are elements rejected by `region`.
FirstOrderReport check_first_order_system(const DiscreteSolution& solution, const StreamFunction& stream,
                                          const CoefficientField& field,
                                          const std::vector<Vec2>& singular_points = {},
                                          const std::function<bool(const Vec2&)>& region = {});

/// L2(Ω_h) norm of u_h − exact, by a degree-5 rule on each triangle.
double l2_error(const DiscreteSolution& solution, const std::function<double(const Vec2&)>& exact);
double l2_norm(const Mesh& mesh, const std::function<double(const Vec2&)>& f);

/// CSV "node,x,y,u".
void write_solution_csv(std::ostream& out, const DiscreteSolution& solution);
/// CSV "tri,cx,cy,gx,gy".
void write_gradient_csv(std::ostream& out, const DiscreteSolution& solution);

}  // namespace sigmalab
