#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sigmalab/boundary_characters.hpp"
#include "sigmalab/coefficients.hpp"
#include "sigmalab/composite_bounds.hpp"
#include "sigmalab/elliptic_solver.hpp"
#include "sigmalab/geometry.hpp"
#include "sigmalab/jacobian_lab.hpp"

namespace sigmalab {

using Json = nlohmann::json;

/// Parses a JSON document, reporting syntax errors as ConfigError with the
/// line and column of the failure.
Json parse_json_text(const std::string& text, const std::string& origin);
Json read_json_file(const std::string& path);

/// Σ c·x₁^i·x₂^j.
struct Polynomial2 {
  struct Term {
    double c = 0.0;
    int i = 0;
    int j = 0;
  };
  std::vector<Term> terms;

  double operator()(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
};

/// Dirichlet data for one scalar solve; `exact` is the closed-form interior
/// extension when one is known.
struct ScalarDatum {
  std::string description;
  BoundaryFunction g;
  std::function<Vec2(const Vec2&)> gradient;
  std::function<double(const Vec2&)> exact;
};

/// Boundary map Φ = (φ₁, φ₂).
struct MapDatum {
  std::string description;
  ScalarDatum phi1;
  ScalarDatum phi2;
};

// Descriptor readers; every failure is a ConfigError naming the field.
DomainSpec domain_from_json(const Json& j);
CoefficientField coefficient_from_json(const Json& j);
ScalarDatum scalar_datum_from_json(const Json& j);
MapDatum map_datum_from_json(const Json& j);
PhaseLayout layout_from_json(const Json& j);

/// Whether the closed-form extension of a scalar or map datum actually solves
/// div(σ∇u) = 0 for the described coefficient: affine data for constant σ,
/// harmonic polynomials for isotropic constant σ, |x|^{α−1}x for the Meyers
/// coefficient with the same α.
bool extension_solves(const Json& datum, const Json& coefficient);
Mat2 matrix_from_json(const Json& j, const std::string& field);
Polynomial2 polynomial_from_json(const Json& j, const std::string& field);

Json to_json(const UnimodalCharacter& c);
Json to_json(const ConvexityCharacter& c);
Json to_json(const CharacterFailure& f);
Json to_json(const Mat2& m);
Json to_json(const BoundResult& r);
Json to_json(const PowerLawFit& f);
Json to_json(const PhaseLayout& layout);

/// Convexity certificate of a domain boundary together with the curvature
/// prediction when the curve is strictly convex.
Json character_report(const DomainSpec& domain, int n_directions);

}  // namespace sigmalab
