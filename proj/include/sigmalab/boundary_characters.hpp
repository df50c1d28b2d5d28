#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigmalab/geometry.hpp"

namespace sigmalab {

struct HolderData {
  double alpha = 1.0;
  double E = 0.0;
};

/// Scalar data sampled on a T-periodic parameter grid.
struct ScalarBoundaryDatum {
  double period = 0.0;
  std::vector<double> t;
  std::vector<double> values;
  std::vector<double> derivatives;
  std::optional<HolderData> holder;

  std::size_t size() const { return t.size(); }
};

/// Vector-valued boundary map Φ sampled on a T-periodic grid.
struct VectorBoundaryDatum {
  double period = 0.0;
  std::vector<double> t;
  std::vector<Vec2> values;
  std::vector<Vec2> derivatives;

  std::size_t size() const { return t.size(); }
};

/// Uniform grid on [0, period) with analytic derivative.
ScalarBoundaryDatum sample_datum(double period, int n, const std::function<double(double)>& f,
                                 const std::function<double(double)>& df);

/// Uniform grid with fourth-order centered periodic differences for φ′.
ScalarBoundaryDatum sample_datum(double period, int n, const std::function<double(double)>& f);

/// g restricted to the curve samples; the derivative is ∇g·τ when a gradient
/// is supplied and a periodic difference of the samples otherwise.
ScalarBoundaryDatum datum_on_curve(const BoundaryCurve& curve, const std::function<double(const Vec2&)>& g,
                                   const std::function<Vec2(const Vec2&)>& gradient = {});

/// The curve's own parametrization as a boundary map.
VectorBoundaryDatum map_from_curve(const BoundaryCurve& curve);

ScalarBoundaryDatum project(const VectorBoundaryDatum& map, const Vec2& direction);

struct UnimodalCharacter {
  double T = 0.0;
  double m = 0.0;
  double M = 0.0;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;  ///< t1 ≤ t2 < t3 ≤ t4 < t1 + T
  double omega_slope = 0.0;                        ///< ω(t) = omega_slope · t
};

struct ConvexityCharacter {
  double T = 0.0;
  double D = 0.0;
  double omega_slope = 0.0;
  int directions_tested = 0;
};

enum class CharacterFailureKind { NotUnimodal, PlateauOverlap, ZeroRange, DerivativeBound };

std::string_view to_string(CharacterFailureKind kind);

struct CharacterFailure {
  CharacterFailureKind kind = CharacterFailureKind::NotUnimodal;
  std::string message;
  std::optional<double> direction_angle;  ///< set by certify_convex
};

struct UnimodalResult {
  std::optional<UnimodalCharacter> character;
  std::optional<CharacterFailure> failure;

  bool ok() const { return character.has_value(); }
};

struct ConvexResult {
  std::optional<ConvexityCharacter> character;
  std::optional<CharacterFailure> failure;
  std::vector<UnimodalCharacter> per_direction;

  bool ok() const { return character.has_value(); }
};

/// Plateau tolerance `tol` is absolute; a non-positive value selects
/// 1e-6·(M − m). Requires at least 64 samples.
UnimodalResult certify_unimodal(const ScalarBoundaryDatum& datum, double tol = -1.0);

/// Certifies every projection Φ·ξ on a uniform grid of n_directions ≥ 32
/// unit vectors ξ_k = (cos 2πk/n, sin 2πk/n).
ConvexResult certify_convex(const VectorBoundaryDatum& map, int n_directions, double tol = -1.0);

struct CurvatureCharacter {
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  ConvexityCharacter predicted;
};

/// Character {T, 1/K, 2κ/π} from the signed curvature bounds κ ≤ Φ″·JΦ′ ≤ K
/// of an arclength-parametrized, counterclockwise curve.
CurvatureCharacter curvature_character(const BoundaryCurve& curve, double tol = 1e-12);

struct ArcInterval {
  double start = 0.0;   ///< in [0, T)
  double length = 0.0;  ///< zero for a degenerate (point) arc; may wrap past T
};

struct ExtremalArcs {
  double T = 0.0;
  ArcInterval gamma_min;
  ArcInterval gamma_max;
};

ExtremalArcs extremal_arcs(const ScalarBoundaryDatum& datum, const UnimodalCharacter& character);

}  // namespace sigmalab
