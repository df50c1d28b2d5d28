#include "sigmalab/elliptic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <cstdio>
#include <map>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "sigmalab/error.hpp"

namespace sigmalab {

namespace {

// Gradients of the three barycentric basis functions on a triangle.
std::array<Vec2, 3> basis_gradients(const Mesh& mesh, std::size_t tri, double& area) {
  const auto& t = mesh.triangles[tri];
  const Vec2& p0 = mesh.nodes[t[0]];
  const Vec2& p1 = mesh.nodes[t[1]];
  const Vec2& p2 = mesh.nodes[t[2]];
  const double twice = cross(p1 - p0, p2 - p0);
  area = 0.5 * twice;
  return {Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / twice, Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / twice,
          Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / twice};
}

struct QuadPoint {
  double l0, l1, l2, w;
};

const std::array<QuadPoint, 7>& degree5_rule() {
  static const std::array<QuadPoint, 7> rule = [] {
    const double s = std::sqrt(15.0);
    const double a = (6.0 - s) / 21.0, b = (9.0 + 2.0 * s) / 21.0;
    const double c = (6.0 + s) / 21.0, d = (9.0 - 2.0 * s) / 21.0;
    const double wa = (155.0 - s) / 1200.0, wc = (155.0 + s) / 1200.0;
    return std::array<QuadPoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40.0},
                                     {a, a, b, wa},
                                     {a, b, a, wa},
                                     {b, a, a, wa},
                                     {c, c, d, wc},
                                     {c, d, c, wc},
                                     {d, c, c, wc}}};
  }();
  return rule;
}

}  // namespace

std::vector<Vec2> p1_gradients(const Mesh& mesh, const Eigen::VectorXd& values) {
  std::vector<Vec2> grads(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    double area;
    const auto g = basis_gradients(mesh, t, area);
    const auto& tri = mesh.triangles[t];
    grads[t] = values(tri[0]) * g[0] + values(tri[1]) * g[1] + values(tri[2]) * g[2];
  }
  return grads;
}

DirichletSolver::DirichletSolver(std::shared_ptr<const Mesh> mesh, const CoefficientField& field)
    : mesh_(std::move(mesh)) {
  if (!mesh_) throw Error(ErrorCode::InvalidArgument, "null mesh");
  if (field.dim() != 2) throw Error(ErrorCode::InvalidArgument, "solver needs a 2x2 coefficient field");
  const Mesh& m = *mesh_;
  const int n = static_cast<int>(m.num_nodes());
  if (m.boundary_nodes.empty()) throw Error(ErrorCode::InvalidArgument, "mesh has no boundary nodes");

  boundary_of_node_.assign(n, -1);
  for (std::size_t b = 0; b < m.boundary_nodes.size(); ++b) boundary_of_node_[m.boundary_nodes[b].node] = static_cast<int>(b);
  interior_index_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (boundary_of_node_[i] < 0) {
      interior_index_[i] = static_cast<int>(interior_nodes_.size());
      interior_nodes_.push_back(i);
    }
  }

  // Fixed element order keeps the accumulation deterministic.
  element_sigma_.resize(m.num_triangles());
  std::vector<Eigen::Triplet<double>> full, inner, couple;
  full.reserve(9 * m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    double area;
    const auto g = basis_gradients(m, t, area);
    const Mat2 sigma = field.eval(m.centroid(t));
    element_sigma_[t] = sigma;
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        // Row i tests with ∇φ_i against the flux σ∇φ_j.
        const double k = area * (sigma * g[j]).dot(g[i]);
        full.emplace_back(tri[i], tri[j], k);
        const int ii = interior_index_[tri[i]];
        if (ii < 0) continue;
        const int jj = interior_index_[tri[j]];
        if (jj >= 0) {
          inner.emplace_back(ii, jj, k);
        } else {
          couple.emplace_back(ii, boundary_of_node_[tri[j]], k);
        }
      }
    }
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(full.begin(), full.end());
  const int ni = static_cast<int>(interior_nodes_.size());
  interior_.resize(ni, ni);
  interior_.setFromTriplets(inner.begin(), inner.end());
  coupling_.resize(ni, static_cast<int>(m.boundary_nodes.size()));
  coupling_.setFromTriplets(couple.begin(), couple.end());
  if (ni > 0) {
    lu_.compute(interior_);
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularSystem, "sparse LU factorization failed");
    }
  }
}

DiscreteSolution DirichletSolver::solve_values(const std::vector<double>& boundary_values) const {
  const Mesh& m = *mesh_;
  if (boundary_values.size() != m.boundary_nodes.size()) {
    throw Error(ErrorCode::InvalidArgument, "boundary value count mismatch");
  }
  DiscreteSolution sol;
  sol.mesh = mesh_;
  sol.boundary_values = boundary_values;
  sol.nodal_values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_nodes()));
  Eigen::VectorXd ub(static_cast<Eigen::Index>(boundary_values.size()));
  for (std::size_t b = 0; b < boundary_values.size(); ++b) {
    ub(static_cast<Eigen::Index>(b)) = boundary_values[b];
    sol.nodal_values(m.boundary_nodes[b].node) = boundary_values[b];
  }
  if (!interior_nodes_.empty()) {
    const Eigen::VectorXd rhs = -(coupling_ * ub);
    Eigen::VectorXd x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "sparse LU solve failed");
    const double scale = std::max(rhs.norm(), 1e-300);
    Eigen::VectorXd r = rhs - interior_ * x;
    double rel = rhs.norm() > 0.0 ? r.norm() / scale : r.norm();
    for (int refine = 0; refine < 3 && rel > 1e-13; ++refine) {
      x += lu_.solve(r);
      r = rhs - interior_ * x;
      rel = rhs.norm() > 0.0 ? r.norm() / scale : r.norm();
    }
    if (!(rel <= 1e-10)) {
      throw Error(ErrorCode::SolveFailure, "relative residual " + std::to_string(rel) + " above 1e-10");
    }
    sol.residual_norm = rel;
    for (std::size_t k = 0; k < interior_nodes_.size(); ++k) {
      sol.nodal_values(interior_nodes_[k]) = x(static_cast<Eigen::Index>(k));
    }
  }
  sol.element_gradients = p1_gradients(m, sol.nodal_values);
  return sol;
}

DiscreteSolution DirichletSolver::solve(const BoundaryFunction& datum) const {
  std::vector<double> values;
  values.reserve(mesh_->boundary_nodes.size());
  for (const auto& b : mesh_->boundary_nodes) values.push_back(datum(mesh_->nodes[b.node]));
  return solve_values(values);
}

DiscreteSolution DirichletSolver::solve(const ScalarBoundaryDatum& datum) const {
  std::vector<double> values;
  values.reserve(mesh_->boundary_nodes.size());
  for (const auto& b : mesh_->boundary_nodes) values.push_back(interpolate_periodic(datum, b.t));
  return solve_values(values);
}

double DirichletSolver::galerkin_residual(const Eigen::VectorXd& nodal) const {
  const Eigen::VectorXd full = stiffness_ * nodal;
  Eigen::VectorXd ub(static_cast<Eigen::Index>(mesh_->boundary_nodes.size()));
  for (std::size_t b = 0; b < mesh_->boundary_nodes.size(); ++b) {
    ub(static_cast<Eigen::Index>(b)) = nodal(mesh_->boundary_nodes[b].node);
  }
  const double scale = (coupling_ * ub).norm();
  double r2 = 0.0;
  for (int node : interior_nodes_) r2 += full(node) * full(node);
  return scale > 0.0 ? std::sqrt(r2) / scale : std::sqrt(r2);
}

DiscreteSolution assemble_and_solve(std::shared_ptr<const Mesh> mesh, const CoefficientField& field,
                                    const BoundaryFunction& datum) {
  return DirichletSolver(std::move(mesh), field).solve(datum);
}

std::pair<DiscreteSolution, DiscreteSolution> solve_mapping(std::shared_ptr<const Mesh> mesh,
                                                            const CoefficientField& field,
                                                            const BoundaryFunction& phi1,
                                                            const BoundaryFunction& phi2) {
  const DirichletSolver solver(std::move(mesh), field);
  return {solver.solve(phi1), solver.solve(phi2)};
}

double interpolate_periodic(const ScalarBoundaryDatum& d, double t) {
  const std::size_t n = d.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty datum");
  double tw = std::fmod(t, d.period);
  if (tw < 0.0) tw += d.period;
  auto it = std::upper_bound(d.t.begin(), d.t.end(), tw);
  std::size_t i = it == d.t.begin() ? n - 1 : static_cast<std::size_t>(it - d.t.begin()) - 1;
  const std::size_t j = (i + 1) % n;
  double t0 = d.t[i], t1 = d.t[j];
  if (t1 <= t0) t1 += d.period;
  if (tw < t0) tw += d.period;
  const double h = t1 - t0;
  const double s = (tw - t0) / h;
  const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
  return h00 * d.values[i] + h10 * h * d.derivatives[i] + h01 * d.values[j] + h11 * h * d.derivatives[j];
}

StreamFunction stream_function(const DiscreteSolution& solution, const CoefficientField& field) {
  const Mesh& m = *solution.mesh;
  const int n = static_cast<int>(m.num_nodes());
  const Mat2 J = rotation_j();
  StreamFunction out;
  out.element_flux.resize(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    out.element_flux[t] = J * (field.eval(m.centroid(t)) * solution.element_gradients[t]);
  }

  // Edge → average flux of its one or two triangles.
  std::map<std::pair<int, int>, std::pair<Vec2, int>> edges;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      auto& slot = edges[{a, b}];
      if (slot.second == 0) slot.first = Vec2::Zero();
      slot.first += out.element_flux[t];
      ++slot.second;
    }
  }
  std::vector<std::vector<std::pair<int, Vec2>>> adjacency(n);
  for (const auto& [key, value] : edges) {
    const Vec2 q = value.first / value.second;
    adjacency[key.first].emplace_back(key.second, q);
    adjacency[key.second].emplace_back(key.first, q);
  }
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  std::vector<int> parent(n, -2);
  out.nodal_values = Eigen::VectorXd::Zero(n);
  const int root = m.boundary_nodes.front().node;
  parent[root] = -1;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    for (const auto& [b, q] : adjacency[a]) {
      if (parent[b] != -2) continue;
      parent[b] = a;
      out.nodal_values(b) = out.nodal_values(a) + q.dot(m.nodes[b] - m.nodes[a]);
      queue.push_back(b);
    }
  }
  for (const auto& [key, value] : edges) {
    const auto [a, b] = key;
    if (parent[a] == b || parent[b] == a) continue;
    const Vec2 q = value.first / value.second;
    const double mismatch = out.nodal_values(b) - out.nodal_values(a) - q.dot(m.nodes[b] - m.nodes[a]);
    out.loop_residual = std::max(out.loop_residual, std::abs(mismatch));
    ++out.cycles;
  }
  out.tree_values = out.nodal_values;

  // Least-squares reconciliation of all edge increments, weighted by 1/|e|²
  // and pinned at the root; the tree values stay available for inspection.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& [key, value] : edges) {
    const auto [a, b] = key;
    const Vec2 d = m.nodes[b] - m.nodes[a];
    const double w = 1.0 / d.squaredNorm();
    const double inc = (value.first / value.second).dot(d);
    trip.emplace_back(a, a, w);
    trip.emplace_back(b, b, w);
    trip.emplace_back(a, b, -w);
    trip.emplace_back(b, a, -w);
    rhs(a) -= w * inc;
    rhs(b) += w * inc;
  }
  trip.emplace_back(root, root, 1.0);
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd fitted = ldlt.solve(rhs);
    fitted.array() -= fitted(root);
    out.nodal_values = fitted;
  }
  out.element_gradients = p1_gradients(m, out.nodal_values);
  return out;
}

FirstOrderReport check_first_order_system(const DiscreteSolution& solution, const StreamFunction& stream,
                                          const CoefficientField& field,
                                          const std::vector<Vec2>& singular_points,
                                          const std::function<bool(const Vec2&)>& region) {
  const Mesh& m = *solution.mesh;
  const BoundaryDistance distance(m);
  const double margin = 2.0 * m.h;
  const Complex I(0.0, 1.0);
  FirstOrderReport report;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Vec2 c = m.centroid(t);
    if (region && !region(c)) continue;
    if (distance(c) <= margin) continue;
    bool near_singular = false;
    for (const auto& p : singular_points) near_singular |= (c - p).norm() <= margin;
    if (near_singular) continue;
    const Vec2 gu = solution.element_gradients[t];
    const Vec2 gv = stream.element_gradients[t];
    const Complex fx(gu.x(), gv.x()), fy(gu.y(), gv.y());
    const Complex fz = 0.5 * (fx - I * fy);
    const Complex fzbar = 0.5 * (fx + I * fy);
    const BeltramiPair p = complex_dilatations(field.eval(c));
    const double res = std::abs(fzbar - p.mu * fz - p.nu * std::conj(fz)) / std::abs(fz);
    report.max_residual = std::max(report.max_residual, res);
    ++report.elements_used;
  }
  return report;
}

double l2_error(const DiscreteSolution& solution, const std::function<double(const Vec2&)>& exact) {
  const Mesh& m = *solution.mesh;
  double sum = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double area = m.signed_area(t);
    for (const auto& q : degree5_rule()) {
      const Vec2 x = q.l0 * m.nodes[tri[0]] + q.l1 * m.nodes[tri[1]] + q.l2 * m.nodes[tri[2]];
      const double uh = q.l0 * solution.nodal_values(tri[0]) + q.l1 * solution.nodal_values(tri[1]) +
                        q.l2 * solution.nodal_values(tri[2]);
      const double e = uh - exact(x);
      sum += q.w * area * e * e;
    }
  }
  return std::sqrt(sum);
}

double l2_norm(const Mesh& m, const std::function<double(const Vec2&)>& f) {
  double sum = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double area = m.signed_area(t);
    for (const auto& q : degree5_rule()) {
      const Vec2 x = q.l0 * m.nodes[tri[0]] + q.l1 * m.nodes[tri[1]] + q.l2 * m.nodes[tri[2]];
      const double v = f(x);
      sum += q.w * area * v * v;
    }
  }
  return std::sqrt(sum);
}

void write_solution_csv(std::ostream& out, const DiscreteSolution& solution) {
  const Mesh& m = *solution.mesh;
  char buf[128];
  out << "node,x,y,u\n";
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, m.nodes[i].x(), m.nodes[i].y(),
                  solution.nodal_values(static_cast<Eigen::Index>(i)));
    out << buf;
  }
}

void write_gradient_csv(std::ostream& out, const DiscreteSolution& solution) {
  const Mesh& m = *solution.mesh;
  char buf[160];
  out << "tri,cx,cy,gx,gy\n";
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Vec2 c = m.centroid(t);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", t, c.x(), c.y(), solution.element_gradients[t].x(),
                  solution.element_gradients[t].y());
    out << buf;
  }
}

}  // namespace sigmalab
