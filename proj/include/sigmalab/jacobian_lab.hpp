#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "sigmalab/boundary_characters.hpp"
#include "sigmalab/elliptic_solver.hpp"

namespace sigmalab {

struct PowerLawFit {
  double exponent = 0.0;
  double r_squared = 0.0;
  int bins_used = 0;
};

/// Per-element Jacobian data of a computed map U_h = (u₁, u₂). Rows of DU are
/// the element gradients ∇u₁, ∇u₂.
struct JacobianReport {
  std::shared_ptr<const Mesh> mesh;
  std::vector<Mat2> du;
  std::vector<double> det;
  std::vector<double> eigen_min;      ///< smallest eigenvalue of DUᵀDU
  std::vector<double> quotient;       ///< Trace(DUᵀDU)/(2 det); NaN where det ≤ 0
  std::vector<double> boundary_dist;  ///< centroid distance to ∂Ω_h
  double global_min = 0.0;
  double global_max = 0.0;
  std::size_t sign_changes = 0;  ///< elements with det ≤ 0
  double mesh_diameter = 0.0;
  std::array<double, 3> fraction_min{};  ///< interior_min at δ = {0, 0.05, 0.1}·diameter
  std::optional<PowerLawFit> powerlaw_fit;

  /// Min det over elements whose centroid lies at distance ≥ δ from ∂Ω_h;
  /// +inf when no element qualifies.
  double interior_min(double delta) const;
  double quotient_min() const;
};

/// Throws MeshMismatch unless both solutions live on the same mesh.
JacobianReport jacobian_field(const DiscreteSolution& u1, const DiscreteSolution& u2);
JacobianReport jacobian_field(const std::pair<DiscreteSolution, DiscreteSolution>& U);

struct DirectionalBound {
  double min = 0.0;
  std::vector<double> angles;
  std::vector<double> per_direction;
};

/// min over directions ξ_k = (cos 2πk/n, sin 2πk/n) and elements of |DU ξ|.
DirectionalBound directional_gradient_bound(const JacobianReport& report, int n_directions);

/// H_ij = σ∇u_i·∇u_j per element, σ at the centroid; equals DU σᵀ DUᵀ.
std::vector<Mat2> power_density(const JacobianReport& report, const CoefficientField& field);

struct GradientBoundReport {
  double delta = 0.0;
  double r = 0.0;
  double near_extremal_min = 0.0;  ///< dist(x, Γ_min ∪ Γ_max) ≤ δ
  double boundary_layer_min = 0.0;  ///< dist(x, ∂Ω) ≤ r
  double global_min = 0.0;
  std::size_t near_extremal_count = 0;
  std::size_t boundary_layer_count = 0;
  bool all_positive = false;
};

/// Region minima of |∇u_h| measured on element centroids. Arcs are located on
/// the mesh boundary through the recorded boundary-node parameters.
GradientBoundReport verify_gradient_bounds(const DiscreteSolution& u, const ExtremalArcs& arcs, double delta,
                                           double r);

/// Slope of log(median det per log-uniform radial bin) against log r over
/// [r_min, r_max]. Bins with fewer than 10 elements are dropped; fewer than
/// 5 remaining bins throws InsufficientBins.
PowerLawFit fit_degeneration_rate(const JacobianReport& report, const Vec2& center, double r_min, double r_max,
                                  int bins = 12);

void write_jacobian_csv(std::ostream& out, const JacobianReport& report);

}  // namespace sigmalab
