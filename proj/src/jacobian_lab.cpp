#include "sigmalab/jacobian_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sigmalab/error.hpp"

namespace sigmalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_mesh(const DiscreteSolution& a, const DiscreteSolution& b) {
  if (!a.mesh || !b.mesh) return false;
  if (a.mesh == b.mesh) return true;
  return a.mesh->nodes == b.mesh->nodes && a.mesh->triangles == b.mesh->triangles;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Point on the mesh boundary polygon at boundary parameter t.
class BoundaryLocator {
 public:
  explicit BoundaryLocator(const Mesh& mesh) : period_(mesh.boundary_length) {
    for (const auto& b : mesh.boundary_nodes) {
      t_.push_back(b.t);
      p_.push_back(mesh.nodes[b.node]);
    }
  }

  Vec2 operator()(double t) const {
    const std::size_t n = t_.size();
    double tw = std::fmod(t, period_);
    if (tw < 0.0) tw += period_;
    auto it = std::upper_bound(t_.begin(), t_.end(), tw);
    const std::size_t i = it == t_.begin() ? n - 1 : static_cast<std::size_t>(it - t_.begin()) - 1;
    const std::size_t j = (i + 1) % n;
    double t0 = t_[i], t1 = t_[j];
    if (t1 <= t0) t1 += period_;
    if (tw < t0) tw += period_;
    const double s = t1 > t0 ? (tw - t0) / (t1 - t0) : 0.0;
    return (1.0 - s) * p_[i] + s * p_[j];
  }

 private:
  double period_;
  std::vector<double> t_;
  std::vector<Vec2> p_;
};

}  // namespace

double JacobianReport::interior_min(double delta) const {
  double m = kInf;
  for (std::size_t t = 0; t < det.size(); ++t) {
    if (boundary_dist[t] >= delta) m = std::min(m, det[t]);
  }
  return m;
}

double JacobianReport::quotient_min() const {
  double m = kInf;
  for (double q : quotient) {
    if (!std::isnan(q)) m = std::min(m, q);
  }
  return m;
}

JacobianReport jacobian_field(const DiscreteSolution& u1, const DiscreteSolution& u2) {
  if (!same_mesh(u1, u2)) throw Error(ErrorCode::MeshMismatch, "solutions live on different meshes");
  const Mesh& m = *u1.mesh;
  JacobianReport r;
  r.mesh = u1.mesh;
  const std::size_t nt = m.num_triangles();
  r.du.resize(nt);
  r.det.resize(nt);
  r.eigen_min.resize(nt);
  r.quotient.resize(nt);
  r.boundary_dist.resize(nt);
  r.global_min = kInf;
  r.global_max = -kInf;
  const BoundaryDistance distance(m);
  for (std::size_t t = 0; t < nt; ++t) {
    Mat2 du;
    du.row(0) = u1.element_gradients[t].transpose();
    du.row(1) = u2.element_gradients[t].transpose();
    r.du[t] = du;
    const double d = du(0, 0) * du(1, 1) - du(0, 1) * du(1, 0);
    r.det[t] = d;
    const Mat2 g = du.transpose() * du;
    const double tr = g.trace();
    const double gdet = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - gdet));
    const double lmax = 0.5 * tr + disc;
    // Smaller root via the product, which stays accurate when λ_min ≪ λ_max.
    r.eigen_min[t] = lmax > 0.0 ? std::max(0.0, gdet) / lmax : 0.0;
    r.quotient[t] = d > 0.0 ? tr / (2.0 * d) : std::numeric_limits<double>::quiet_NaN();
    if (d <= 0.0) ++r.sign_changes;
    r.global_min = std::min(r.global_min, d);
    r.global_max = std::max(r.global_max, d);
    r.boundary_dist[t] = distance(m.centroid(t));
  }
  const auto poly = m.boundary_polygon();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    for (std::size_t j = i + 1; j < poly.size(); ++j) {
      r.mesh_diameter = std::max(r.mesh_diameter, (poly[i] - poly[j]).norm());
    }
  }
  const double fractions[3] = {0.0, 0.05, 0.1};
  for (int k = 0; k < 3; ++k) r.fraction_min[k] = r.interior_min(fractions[k] * r.mesh_diameter);
  return r;
}

JacobianReport jacobian_field(const std::pair<DiscreteSolution, DiscreteSolution>& U) {
  return jacobian_field(U.first, U.second);
}

DirectionalBound directional_gradient_bound(const JacobianReport& report, int n_directions) {
  if (n_directions < 16) throw Error(ErrorCode::InvalidArgument, "need at least 16 directions");
  DirectionalBound b;
  b.min = kInf;
  for (int k = 0; k < n_directions; ++k) {
    const double angle = 2.0 * kPi * k / n_directions;
    const Vec2 xi(std::cos(angle), std::sin(angle));
    double m = kInf;
    for (const auto& du : report.du) m = std::min(m, (du * xi).norm());
    b.angles.push_back(angle);
    b.per_direction.push_back(m);
    b.min = std::min(b.min, m);
  }
  return b;
}

std::vector<Mat2> power_density(const JacobianReport& report, const CoefficientField& field) {
  if (field.dim() != 2) throw Error(ErrorCode::InvalidArgument, "power density needs a 2x2 field");
  const Mesh& m = *report.mesh;
  std::vector<Mat2> H(report.du.size());
  for (std::size_t t = 0; t < H.size(); ++t) {
    const Mat2 sigma = field.eval(m.centroid(t));
    H[t] = report.du[t] * sigma.transpose() * report.du[t].transpose();
  }
  return H;
}

GradientBoundReport verify_gradient_bounds(const DiscreteSolution& u, const ExtremalArcs& arcs, double delta,
                                           double r) {
  const Mesh& m = *u.mesh;
  const BoundaryLocator locate(m);
  const BoundaryDistance distance(m);
  std::vector<Vec2> arc_points;
  const double step = 0.25 * m.h;
  for (const ArcInterval& arc : {arcs.gamma_min, arcs.gamma_max}) {
    const int pieces = std::max(1, static_cast<int>(std::ceil(arc.length / step)));
    for (int k = 0; k <= pieces; ++k) arc_points.push_back(locate(arc.start + arc.length * k / pieces));
  }
  GradientBoundReport g;
  g.delta = delta;
  g.r = r;
  g.near_extremal_min = g.boundary_layer_min = g.global_min = kInf;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Vec2 c = m.centroid(t);
    const double grad = u.element_gradients[t].norm();
    g.global_min = std::min(g.global_min, grad);
    if (distance(c) <= r) {
      g.boundary_layer_min = std::min(g.boundary_layer_min, grad);
      ++g.boundary_layer_count;
    }
    double d = kInf;
    for (const auto& p : arc_points) d = std::min(d, (c - p).norm());
    if (d <= delta) {
      g.near_extremal_min = std::min(g.near_extremal_min, grad);
      ++g.near_extremal_count;
    }
  }
  g.all_positive = g.global_min > 0.0 && g.near_extremal_count > 0 && g.boundary_layer_count > 0;
  return g;
}

PowerLawFit fit_degeneration_rate(const JacobianReport& report, const Vec2& center, double r_min, double r_max,
                                  int bins) {
  if (!(r_min > 0.0 && r_max > r_min) || bins < 5) {
    throw Error(ErrorCode::InvalidArgument, "radial window must satisfy 0 < r_min < r_max, bins >= 5");
  }
  const Mesh& m = *report.mesh;
  std::vector<std::vector<double>> bin_r(bins), bin_det(bins);
  const double log_lo = std::log(r_min), log_span = std::log(r_max) - log_lo;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const double rr = (m.centroid(t) - center).norm();
    if (rr < r_min || rr > r_max) continue;
    const int b = std::min(bins - 1, static_cast<int>((std::log(rr) - log_lo) / log_span * bins));
    bin_r[b].push_back(rr);
    bin_det[b].push_back(report.det[t]);
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < bins; ++b) {
    if (bin_r[b].size() < 10) continue;
    const double md = median(bin_det[b]);
    if (!(md > 0.0)) continue;
    xs.push_back(std::log(median(bin_r[b])));
    ys.push_back(std::log(md));
  }
  if (xs.size() < 5) {
    throw Error(ErrorCode::InsufficientBins,
                "only " + std::to_string(xs.size()) + " radial bins hold 10 or more elements");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.bins_used = static_cast<int>(xs.size());
  return fit;
}

void write_jacobian_csv(std::ostream& out, const JacobianReport& report) {
  const Mesh& m = *report.mesh;
  char buf[160];
  out << "tri,cx,cy,det,quotient\n";
  for (std::size_t t = 0; t < report.det.size(); ++t) {
    const Vec2 c = m.centroid(t);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", t, c.x(), c.y(), report.det[t],
                  report.quotient[t]);
    out << buf;
  }
}

}  // namespace sigmalab
