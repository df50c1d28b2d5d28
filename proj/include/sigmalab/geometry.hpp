#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sigmalab/types.hpp"

namespace sigmalab {

/// One sample of an arclength-parametrized closed curve.
struct BoundarySample {
  double t = 0.0;  ///< arclength parameter in [0, T)
  Vec2 point = Vec2::Zero();
  Vec2 tangent = Vec2::UnitX();  ///< unit tangent, d/dt of the point
  Vec2 second = Vec2::Zero();    ///< d²/dt² of the point (curvature vector)
};

/// Exact evaluation of the curve at any arclength parameter (wraps modulo T).
using CurveEvaluator = std::function<BoundarySample(double t)>;

struct BoundaryCurve {
  std::vector<BoundarySample> samples;
  double total_length = 0.0;
  bool closed = true;
  CurveEvaluator evaluate;  ///< empty for curves read from point lists

  std::size_t size() const { return samples.size(); }
};

struct Regularity {
  double rho0 = 0.0;
  double M0 = 0.0;
  double alpha = 1.0;
};

struct DomainSpec {
  BoundaryCurve boundary;
  std::optional<Regularity> regularity;
};

/// A closed curve given in an arbitrary parameter s ∈ [0, period).
struct ParametricCurve {
  std::function<Vec2(double)> position;
  std::function<Vec2(double)> velocity;
  std::function<Vec2(double)> acceleration;
  double period = 2.0 * kPi;
};

/// Polar radius ρ(θ) with its first two derivatives.
struct RadiusFunction {
  std::function<double(double)> rho;
  std::function<double(double)> drho;
  std::function<double(double)> d2rho;
};

struct FourierTerm {
  int k = 1;
  double a = 0.0;  ///< cosine coefficient
  double b = 0.0;  ///< sine coefficient
};

/// ρ(θ) = r0 + Σ a_k cos kθ + b_k sin kθ.
RadiusFunction fourier_radius(double r0, std::vector<FourierTerm> terms);

DomainSpec make_disk_domain(int n_boundary);
DomainSpec make_star_domain(const RadiusFunction& radius, int n_boundary);
DomainSpec make_ellipse_domain(double semi_x, double semi_y, int n_boundary);
DomainSpec make_parametric_domain(const ParametricCurve& curve, int n_boundary);

/// Closed curve through the given points; arclength from chords, tangents and
/// curvature vectors by periodic fourth-order differences. Clockwise input is
/// reversed (keeping the first point) so the curve runs counterclockwise.
BoundaryCurve curve_from_points(const std::vector<Vec2>& points);

bool polygon_is_simple(const std::vector<Vec2>& polygon);
double polygon_area(const std::vector<Vec2>& polygon);
double curve_diameter(const BoundaryCurve& curve);

struct C1AlphaReport {
  bool passes = false;
  bool graph_failure = false;  ///< some window was not a graph over the tangent line
  double worst_ratio = 0.0;    ///< max over samples of norm / (M0 ρ0)
  std::size_t worst_index = 0;
  std::size_t min_window = 0;
};

/// Sampled check of the C^{1,α} local-graph bound at every boundary sample.
/// Throws InsufficientSamples if a window holds fewer than 8 samples.
C1AlphaReport check_c1alpha(const DomainSpec& domain);

struct BoundaryNode {
  int node = 0;
  double t = 0.0;
};

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryNode> boundary_nodes;
  double h = 0.0;
  double boundary_length = 0.0;  ///< period of the boundary parameter

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  double signed_area(std::size_t tri) const;
  Vec2 centroid(std::size_t tri) const;
  double diameter(std::size_t tri) const;
  /// Boundary nodes as a polygon in parameter order.
  std::vector<Vec2> boundary_polygon() const;
};

/// Structured radial-ring triangulation of a domain star-shaped about the
/// origin. Deterministic in its inputs.
Mesh triangulate(const DomainSpec& domain, double target_h);

/// Uniform right-triangle mesh of [0,1]² with n intervals per side.
Mesh triangulate_unit_square(int n);

struct MeshCheck {
  bool positively_oriented = true;
  bool conforming = true;
  bool boundary_consistent = true;
  double max_boundary_offset = 0.0;  ///< vs curve when one is given
  double min_angle_deg = 180.0;
  double area = 0.0;
  std::string message;

  bool ok() const { return positively_oriented && conforming && boundary_consistent; }
};

MeshCheck validate_mesh(const Mesh& mesh, const BoundaryCurve* curve = nullptr);

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

/// Distance from p to the closed boundary polygon of the mesh.
class BoundaryDistance {
 public:
  explicit BoundaryDistance(const Mesh& mesh);
  double operator()(const Vec2& p) const;

 private:
  std::vector<Vec2> polygon_;
};

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace sigmalab
