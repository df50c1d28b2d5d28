#include "sigmalab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "sigmalab/error.hpp"

namespace sigmalab {

namespace {

constexpr int kSimpsonSubintervals = 8;

double wrap_parameter(double t, double period) {
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

// Cumulative arclength of a parametric curve on a uniform parameter grid,
// composite Simpson with kSimpsonSubintervals points per grid interval.
class ArclengthTable {
 public:
  ArclengthTable(ParametricCurve curve, int intervals)
      : curve_(std::move(curve)), intervals_(intervals) {
    step_ = curve_.period / intervals_;
    cumulative_.resize(intervals_ + 1, 0.0);
    for (int j = 0; j < intervals_; ++j) {
      cumulative_[j + 1] = cumulative_[j] + simpson(j * step_, (j + 1) * step_);
    }
  }

  double total() const { return cumulative_.back(); }

  double speed(double s) const { return curve_.velocity(s).norm(); }

  double simpson(double a, double b) const {
    const double hq = (b - a) / kSimpsonSubintervals;
    double sum = speed(a) + speed(b);
    for (int q = 1; q < kSimpsonSubintervals; ++q) {
      sum += (q % 2 == 1 ? 4.0 : 2.0) * speed(a + q * hq);
    }
    return sum * hq / 3.0;
  }

  // Parameter s with arclength(s) = t, t ∈ [0, total).
  double invert(double t) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
    int j = static_cast<int>(it - cumulative_.begin()) - 1;
    j = std::clamp(j, 0, intervals_ - 1);
    const double base = cumulative_[j];
    const double width = cumulative_[j + 1] - base;
    const double s0 = j * step_;
    double s = s0 + step_ * (width > 0.0 ? (t - base) / width : 0.0);
    for (int iter = 0; iter < 60; ++iter) {
      const double residual = base + simpson(s0, s) - t;
      const double v = speed(s);
      if (v <= 0.0) throw Error(ErrorCode::InvalidArgument, "curve has zero speed");
      const double ds = residual / v;
      s -= ds;
      if (std::abs(ds) <= 1e-15 * curve_.period) break;
    }
    return s;
  }

  BoundarySample evaluate(double t) const {
    const double total_length = total();
    const double tw = wrap_parameter(t, total_length);
    const double s = invert(tw);
    const Vec2 p = curve_.position(s);
    const Vec2 v = curve_.velocity(s);
    const Vec2 a = curve_.acceleration(s);
    const double speed2 = v.squaredNorm();
    BoundarySample out;
    out.t = tw;
    out.point = p;
    out.tangent = v / std::sqrt(speed2);
    out.second = a / speed2 - v * (v.dot(a) / (speed2 * speed2));
    return out;
  }

 private:
  ParametricCurve curve_;
  int intervals_;
  double step_ = 0.0;
  std::vector<double> cumulative_;
};

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

void check_curve_invariants(const BoundaryCurve& curve) {
  for (const auto& s : curve.samples) {
    if (std::abs(s.tangent.norm() - 1.0) > 1e-8) {
      throw Error(ErrorCode::InvariantViolation, "boundary tangent is not unit length");
    }
  }
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    if (!(curve.samples[i].t > curve.samples[i - 1].t)) {
      throw Error(ErrorCode::InvariantViolation, "boundary parameters not increasing");
    }
  }
}

std::vector<Vec2> sample_points(const BoundaryCurve& curve) {
  std::vector<Vec2> pts;
  pts.reserve(curve.samples.size());
  for (const auto& s : curve.samples) pts.push_back(s.point);
  return pts;
}

}  // namespace

RadiusFunction fourier_radius(double r0, std::vector<FourierTerm> terms) {
  auto shared = std::make_shared<const std::vector<FourierTerm>>(std::move(terms));
  RadiusFunction f;
  f.rho = [r0, shared](double th) {
    double r = r0;
    for (const auto& term : *shared) r += term.a * std::cos(term.k * th) + term.b * std::sin(term.k * th);
    return r;
  };
  f.drho = [shared](double th) {
    double r = 0.0;
    for (const auto& term : *shared) {
      r += term.k * (-term.a * std::sin(term.k * th) + term.b * std::cos(term.k * th));
    }
    return r;
  };
  f.d2rho = [shared](double th) {
    double r = 0.0;
    for (const auto& term : *shared) {
      const double k2 = double(term.k) * term.k;
      r -= k2 * (term.a * std::cos(term.k * th) + term.b * std::sin(term.k * th));
    }
    return r;
  };
  return f;
}

DomainSpec make_disk_domain(int n_boundary) {
  if (n_boundary < 16) throw Error(ErrorCode::InvalidArgument, "make_disk_domain needs n ≥ 16");
  DomainSpec domain;
  BoundaryCurve& curve = domain.boundary;
  curve.total_length = 2.0 * kPi;
  curve.closed = true;
  curve.evaluate = [](double t) {
    const double tw = wrap_parameter(t, 2.0 * kPi);
    BoundarySample s;
    s.t = tw;
    s.point = Vec2(std::cos(tw), std::sin(tw));
    s.tangent = Vec2(-std::sin(tw), std::cos(tw));
    s.second = -s.point;
    return s;
  };
  curve.samples.reserve(n_boundary);
  for (int i = 0; i < n_boundary; ++i) {
    curve.samples.push_back(curve.evaluate(2.0 * kPi * i / n_boundary));
  }
  return domain;
}

DomainSpec make_parametric_domain(const ParametricCurve& parametric, int n_boundary) {
  if (n_boundary < 16) throw Error(ErrorCode::InvalidArgument, "need at least 16 boundary samples");
  auto table = std::make_shared<const ArclengthTable>(parametric, n_boundary);
  DomainSpec domain;
  BoundaryCurve& curve = domain.boundary;
  curve.total_length = table->total();
  curve.closed = true;
  curve.evaluate = [table](double t) { return table->evaluate(t); };
  curve.samples.reserve(n_boundary);
  for (int i = 0; i < n_boundary; ++i) {
    curve.samples.push_back(curve.evaluate(curve.total_length * i / n_boundary));
    curve.samples.back().t = curve.total_length * i / n_boundary;
  }
  check_curve_invariants(curve);
  if (!polygon_is_simple(sample_points(curve))) {
    throw Error(ErrorCode::InvariantViolation, "boundary polygon self-intersects");
  }
  return domain;
}

DomainSpec make_star_domain(const RadiusFunction& radius, int n_boundary) {
  const int probes = std::max(4096, 8 * n_boundary);
  for (int i = 0; i < probes; ++i) {
    const double th = 2.0 * kPi * i / probes;
    if (!(radius.rho(th) > 0.0)) {
      throw Error(ErrorCode::NonPositiveRadius, "radius function is not strictly positive");
    }
  }
  ParametricCurve c;
  c.period = 2.0 * kPi;
  c.position = [radius](double th) {
    return Vec2(radius.rho(th) * std::cos(th), radius.rho(th) * std::sin(th));
  };
  c.velocity = [radius](double th) {
    const double r = radius.rho(th), dr = radius.drho(th);
    return Vec2(dr * std::cos(th) - r * std::sin(th), dr * std::sin(th) + r * std::cos(th));
  };
  c.acceleration = [radius](double th) {
    const double r = radius.rho(th), dr = radius.drho(th), d2r = radius.d2rho(th);
    return Vec2((d2r - r) * std::cos(th) - 2.0 * dr * std::sin(th),
                (d2r - r) * std::sin(th) + 2.0 * dr * std::cos(th));
  };
  return make_parametric_domain(c, n_boundary);
}

DomainSpec make_ellipse_domain(double semi_x, double semi_y, int n_boundary) {
  if (!(semi_x > 0.0 && semi_y > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
  }
  ParametricCurve c;
  c.period = 2.0 * kPi;
  c.position = [=](double s) { return Vec2(semi_x * std::cos(s), semi_y * std::sin(s)); };
  c.velocity = [=](double s) { return Vec2(-semi_x * std::sin(s), semi_y * std::cos(s)); };
  c.acceleration = [=](double s) { return Vec2(-semi_x * std::cos(s), -semi_y * std::sin(s)); };
  return make_parametric_domain(c, n_boundary);
}

BoundaryCurve curve_from_points(const std::vector<Vec2>& given) {
  const int n = static_cast<int>(given.size());
  if (n < 16) throw Error(ErrorCode::InvalidArgument, "need at least 16 curve points");
  std::vector<Vec2> points = given;
  if (polygon_area(points) < 0.0) std::reverse(points.begin() + 1, points.end());
  BoundaryCurve curve;
  curve.closed = true;
  curve.samples.resize(n);
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    curve.samples[i].t = t;
    curve.samples[i].point = points[i];
    t += (points[(i + 1) % n] - points[i]).norm();
  }
  curve.total_length = t;
  const double step = t / n;
  auto at = [&](int i) -> const Vec2& { return points[((i % n) + n) % n]; };
  for (int i = 0; i < n; ++i) {
    const Vec2 d1 = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * step);
    const Vec2 d2 =
        (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) /
        (12.0 * step * step);
    curve.samples[i].tangent = d1.normalized();
    curve.samples[i].second = d2;
  }
  return curve;
}

bool polygon_is_simple(const std::vector<Vec2>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_intersect(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

double polygon_area(const std::vector<Vec2>& polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return 0.5 * twice;
}

double curve_diameter(const BoundaryCurve& curve) {
  double d = 0.0;
  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    for (std::size_t j = i + 1; j < curve.samples.size(); ++j) {
      d = std::max(d, (curve.samples[i].point - curve.samples[j].point).norm());
    }
  }
  return d;
}

C1AlphaReport check_c1alpha(const DomainSpec& domain) {
  if (!domain.regularity) {
    throw Error(ErrorCode::InvalidArgument, "check_c1alpha needs regularity data");
  }
  const Regularity reg = *domain.regularity;
  if (!(reg.rho0 > 0.0 && reg.M0 > 0.0 && reg.alpha > 0.0 && reg.alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "regularity data out of range");
  }
  const auto& samples = domain.boundary.samples;
  const int n = static_cast<int>(samples.size());
  C1AlphaReport report;
  report.min_window = std::numeric_limits<std::size_t>::max();
  const double budget = reg.M0 * reg.rho0;

  struct Local {
    double x1, x2, slope;
  };
  std::vector<Local> window;
  std::vector<char> in_window(n);

  for (int i = 0; i < n; ++i) {
    const Vec2 p = samples[i].point;
    const Vec2 tau = samples[i].tangent;
    const Vec2 nrm = rotation_j() * tau;  // inward for counterclockwise curves
    window.clear();
    std::fill(in_window.begin(), in_window.end(), 0);
    window.push_back({0.0, 0.0, 0.0});
    in_window[i] = 1;
    bool graph_ok = true;

    for (int dir : {1, -1}) {
      double last_x1 = 0.0;
      for (int k = 1; k < n; ++k) {
        const int q = ((i + dir * k) % n + n) % n;
        if (in_window[q]) {  // walked all the way around
          graph_ok = false;
          break;
        }
        const Vec2 d = samples[q].point - p;
        const double x1 = d.dot(tau);
        if (std::abs(x1) > reg.rho0) break;
        const double along = samples[q].tangent.dot(tau);
        if (dir * (x1 - last_x1) <= 0.0 || along <= 0.0) {
          graph_ok = false;
          break;
        }
        last_x1 = x1;
        window.push_back({x1, d.dot(nrm), samples[q].tangent.dot(nrm) / along});
        in_window[q] = 1;
      }
      if (!graph_ok) break;
    }
    if (graph_ok) {
      // Other boundary pieces may not re-enter the ρ0-ball.
      for (int q = 0; q < n; ++q) {
        if (!in_window[q] && (samples[q].point - p).norm() < reg.rho0) {
          graph_ok = false;
          break;
        }
      }
    }
    if (!graph_ok) {
      report.graph_failure = true;
      report.passes = false;
      report.worst_ratio = std::numeric_limits<double>::infinity();
      report.worst_index = static_cast<std::size_t>(i);
      return report;
    }
    if (window.size() < 8) {
      throw Error(ErrorCode::InsufficientSamples,
                  "fewer than 8 samples inside the rho0 window at sample " + std::to_string(i));
    }
    report.min_window = std::min(report.min_window, window.size());

    double sup_psi = 0.0, sup_slope = 0.0, seminorm = 0.0;
    for (std::size_t a = 0; a < window.size(); ++a) {
      sup_psi = std::max(sup_psi, std::abs(window[a].x2));
      sup_slope = std::max(sup_slope, std::abs(window[a].slope));
      for (std::size_t b = a + 1; b < window.size(); ++b) {
        const double dx = std::abs(window[a].x1 - window[b].x1);
        seminorm = std::max(seminorm,
                            std::abs(window[a].slope - window[b].slope) / std::pow(dx, reg.alpha));
      }
    }
    const double norm =
        sup_psi + reg.rho0 * sup_slope + std::pow(reg.rho0, 1.0 + reg.alpha) * seminorm;
    const double ratio = norm / budget;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_index = static_cast<std::size_t>(i);
    }
  }
  report.passes = report.worst_ratio <= 1.0;
  return report;
}

double Mesh::signed_area(std::size_t tri) const {
  const auto& t = triangles[tri];
  return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
}

Vec2 Mesh::centroid(std::size_t tri) const {
  const auto& t = triangles[tri];
  return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
}

double Mesh::diameter(std::size_t tri) const {
  const auto& t = triangles[tri];
  return std::max({(nodes[t[0]] - nodes[t[1]]).norm(), (nodes[t[1]] - nodes[t[2]]).norm(),
                   (nodes[t[2]] - nodes[t[0]]).norm()});
}

std::vector<Vec2> Mesh::boundary_polygon() const {
  std::vector<BoundaryNode> sorted = boundary_nodes;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const BoundaryNode& a, const BoundaryNode& b) { return a.t < b.t; });
  std::vector<Vec2> poly;
  poly.reserve(sorted.size());
  for (const auto& b : sorted) poly.push_back(nodes[b.node]);
  return poly;
}

namespace {

double triangle_min_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  auto angle = [](double opp, double s1, double s2) {
    const double cosv = std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0);
    return std::acos(cosv);
  };
  const double m = std::min({angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)});
  return m * 180.0 / kPi;
}

// Connect an inner ring to an outer ring (both counterclockwise, both closed),
// always taking the shorter of the two candidate diagonals.
void stitch_rings(const std::vector<Vec2>& nodes, int inner_base, int n_inner, int outer_base,
                  int n_outer, std::vector<std::array<int, 3>>& triangles) {
  int i = 0, j = 0;
  auto in = [&](int k) { return inner_base + (k % n_inner); };
  auto out = [&](int k) { return outer_base + (k % n_outer); };
  while (i < n_inner || j < n_outer) {
    bool advance_outer;
    if (i == n_inner) {
      advance_outer = true;
    } else if (j == n_outer) {
      advance_outer = false;
    } else {
      const double diag_outer = (nodes[in(i)] - nodes[out(j + 1)]).squaredNorm();
      const double diag_inner = (nodes[in(i + 1)] - nodes[out(j)]).squaredNorm();
      advance_outer = diag_outer <= diag_inner;
    }
    if (advance_outer) {
      triangles.push_back({in(i), out(j), out(j + 1)});
      ++j;
    } else {
      triangles.push_back({in(i), out(j), in(i + 1)});
      ++i;
    }
  }
}

Mesh build_ring_mesh(const BoundaryCurve& curve, int rings) {
  Mesh mesh;
  mesh.boundary_length = curve.total_length;
  mesh.nodes.push_back(Vec2::Zero());
  std::vector<int> base(rings + 1), count(rings + 1);
  base[0] = 0;
  count[0] = 1;
  for (int k = 1; k <= rings; ++k) {
    const int nk = 6 * k;
    const double lambda = double(k) / rings;
    base[k] = static_cast<int>(mesh.nodes.size());
    count[k] = nk;
    for (int j = 0; j < nk; ++j) {
      const double t = curve.total_length * j / nk;
      const BoundarySample s = curve.evaluate(t);
      if (k == rings) {
        mesh.nodes.push_back(s.point);
        mesh.boundary_nodes.push_back({static_cast<int>(mesh.nodes.size()) - 1, t});
      } else {
        mesh.nodes.push_back(lambda * s.point);
      }
    }
  }
  for (int j = 0; j < count[1]; ++j) {
    mesh.triangles.push_back({0, base[1] + j, base[1] + (j + 1) % count[1]});
  }
  for (int k = 2; k <= rings; ++k) {
    stitch_rings(mesh.nodes, base[k - 1], count[k - 1], base[k], count[k], mesh.triangles);
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) mesh.h = std::max(mesh.h, mesh.diameter(t));
  return mesh;
}

}  // namespace

Mesh triangulate(const DomainSpec& domain, double target_h) {
  const BoundaryCurve& curve = domain.boundary;
  if (!curve.evaluate) {
    throw Error(ErrorCode::InvalidArgument, "triangulate needs an exact curve evaluator");
  }
  const double diam = curve_diameter(curve);
  if (!(target_h > 0.0 && target_h < diam / 4.0)) {
    throw Error(ErrorCode::InvalidArgument, "target_h must lie in (0, diameter/4)");
  }
  double rho_max = 0.0;
  for (const auto& s : curve.samples) {
    if (!(cross(s.point, s.tangent) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "domain is not star-shaped about the origin");
    }
    rho_max = std::max(rho_max, s.point.norm());
  }
  int rings = std::max(2, static_cast<int>(std::ceil(rho_max / target_h)));
  for (int attempt = 0; attempt < 24; ++attempt) {
    Mesh mesh = build_ring_mesh(curve, rings);
    if (mesh.h > 1.5 * target_h) {
      rings = static_cast<int>(std::ceil(rings * std::max(1.05, mesh.h / (1.45 * target_h))));
      continue;
    }
    double min_angle = 180.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      min_angle = std::min(min_angle, triangle_min_angle_deg(mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                                                             mesh.nodes[tri[2]]));
    }
    if (min_angle < 20.0) {
      throw Error(ErrorCode::MeshQualityFailure,
                  "minimum angle " + std::to_string(min_angle) + " deg below 20 deg");
    }
    return mesh;
  }
  throw Error(ErrorCode::MeshQualityFailure, "element diameter target unreachable");
}

Mesh triangulate_unit_square(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "square mesh needs n ≥ 1");
  Mesh mesh;
  mesh.boundary_length = 4.0;
  const int side = n + 1;
  auto id = [side](int i, int j) { return j * side + i; };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) mesh.nodes.emplace_back(double(i) / n, double(j) / n);
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  // Counterclockwise perimeter parameter starting at the origin.
  for (int i = 0; i < n; ++i) mesh.boundary_nodes.push_back({id(i, 0), double(i) / n});
  for (int j = 0; j < n; ++j) mesh.boundary_nodes.push_back({id(n, j), 1.0 + double(j) / n});
  for (int i = n; i > 0; --i) mesh.boundary_nodes.push_back({id(i, n), 2.0 + double(n - i) / n});
  for (int j = n; j > 0; --j) mesh.boundary_nodes.push_back({id(0, j), 3.0 + double(n - j) / n});
  mesh.h = std::sqrt(2.0) / n;
  return mesh;
}

MeshCheck validate_mesh(const Mesh& mesh, const BoundaryCurve* curve) {
  MeshCheck check;
  std::map<std::pair<int, int>, int> edge_count;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    check.area += area;
    if (!(area > 0.0)) {
      check.positively_oriented = false;
      check.message = "triangle " + std::to_string(t) + " not positively oriented";
    }
    check.min_angle_deg = std::min(check.min_angle_deg,
                                   triangle_min_angle_deg(mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                                                          mesh.nodes[tri[2]]));
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  std::vector<char> on_boundary_edge(mesh.nodes.size(), 0);
  for (const auto& [edge, count] : edge_count) {
    if (count > 2) {
      check.conforming = false;
      check.message = "edge shared by more than two triangles";
    } else if (count == 1) {
      on_boundary_edge[edge.first] = 1;
      on_boundary_edge[edge.second] = 1;
    }
  }
  std::vector<char> listed(mesh.nodes.size(), 0);
  for (const auto& b : mesh.boundary_nodes) {
    if (b.node < 0 || b.node >= static_cast<int>(mesh.nodes.size())) {
      check.boundary_consistent = false;
      check.message = "boundary node index out of range";
      continue;
    }
    listed[b.node] = 1;
    if (curve && curve->evaluate) {
      check.max_boundary_offset =
          std::max(check.max_boundary_offset, (mesh.nodes[b.node] - curve->evaluate(b.t).point).norm());
    }
  }
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (listed[i] != on_boundary_edge[i]) {
      check.boundary_consistent = false;
      check.message = "boundary node list disagrees with mesh boundary edges";
    }
  }
  if (curve && check.max_boundary_offset > 1e-8 * curve->total_length) {
    check.boundary_consistent = false;
    check.message = "boundary node off the curve";
  }
  return check;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

BoundaryDistance::BoundaryDistance(const Mesh& mesh) : polygon_(mesh.boundary_polygon()) {}

double BoundaryDistance::operator()(const Vec2& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon_.size(); ++i) {
    d = std::min(d, point_segment_distance(p, polygon_[i], polygon_[(i + 1) % polygon_.size()]));
  }
  return d;
}

}  // namespace sigmalab
