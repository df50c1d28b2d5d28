#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigmalab/boundary_characters.hpp"
#include "sigmalab/types.hpp"

namespace sigmalab {

/// Position-dependent conductivity matrix. Two-dimensional fields evaluate
/// through eval(), the three-dimensional Jin–Kazdan family through eval3().
class CoefficientField {
 public:
  using Eval2 = std::function<Mat2(const Vec2&)>;
  using Eval3 = std::function<Mat3(const Vec3&)>;

  CoefficientField(Eval2 eval, double K, bool symmetric, std::string description,
                   std::optional<HolderData> holder = std::nullopt);
  CoefficientField(Eval3 eval, double K, bool symmetric, std::string description,
                   std::optional<HolderData> holder = std::nullopt);

  int dim() const { return dim_; }
  double K() const { return K_; }
  bool symmetric() const { return symmetric_; }
  const std::string& description() const { return description_; }
  const std::optional<HolderData>& holder() const { return holder_; }

  Mat2 eval(const Vec2& x) const;
  Mat3 eval3(const Vec3& x) const;
  Mat2 operator()(const Vec2& x) const { return eval(x); }

 private:
  int dim_;
  Eval2 eval2_;
  Eval3 eval3_;
  double K_;
  bool symmetric_;
  std::string description_;
  std::optional<HolderData> holder_;
};

struct EllipticityReport {
  double worst_ratio_forward = 0.0;  ///< min over points, directions of σξ·ξ
  double worst_ratio_inverse = 0.0;  ///< min of σ⁻¹ξ·ξ
  bool passes = false;
  std::optional<std::size_t> violating_point;
  std::optional<double> violating_angle;
};

/// Both quadratic forms against K⁻¹, through the smallest eigenvalues of the
/// symmetric parts of σ and σ⁻¹ at each point.
/// Throws SingularMatrix when det σ ≤ 1e-14 at a sample.
EllipticityReport verify_ellipticity(const CoefficientField& field, const std::vector<Vec2>& points);
EllipticityReport verify_ellipticity(const CoefficientField& field, const std::vector<Vec3>& points);

struct HolderReport {
  double worst_excess = 0.0;  ///< max of |Δσ_ij| − E|Δx|^α over sampled pairs
  bool passes = false;
};

/// Statistical Hölder check over `pairs` random point pairs in the box [lo, hi]².
HolderReport verify_holder(const CoefficientField& field, double lo, double hi, int pairs,
                           std::uint64_t seed);

struct BeltramiPair {
  Complex mu;
  Complex nu;
};

/// Complex dilatations (μ, ν) of σ, no ellipticity check.
BeltramiPair complex_dilatations(const Mat2& sigma);

/// As complex_dilatations, asserting |μ|+|ν| ≤ (K−1)/(K+1) + 1e-12.
BeltramiPair beltrami_dilatations(const Mat2& sigma, double K);

/// Smallest K for which a constant σ satisfies both ellipticity bounds and
/// |μ|+|ν| ≤ (K−1)/(K+1). The last one is stronger only for nonsymmetric σ.
double ellipticity_constant(const Mat2& sigma);

CoefficientField family_constant(const Mat2& sigma);
CoefficientField family_isotropic(double value);

/// σ(x) = α⁻¹ x̂x̂ᵀ + α x̂⊥x̂⊥ᵀ; at the origin the x₁-axis limit diag(α⁻¹, α).
CoefficientField family_meyers(double alpha);

/// Profile a(x₃) of the Jin–Kazdan coefficient: zero for x₃ ≤ 0.
struct JinKazdanAmplitude {
  double a0 = 0.5;
  bool smooth = true;
  std::function<double(double)> a;   ///< a(x₃)
  std::function<double(double)> da;  ///< a′(x₃)
};

/// Default smooth profile a0·exp(−1/x₃) for x₃ > 0, or the step a0·1_{x₃>0}.
JinKazdanAmplitude jin_kazdan_amplitude(double a0, bool smooth);

CoefficientField family_jin_kazdan(const JinKazdanAmplitude& amplitude);
CoefficientField family_jin_kazdan(double a0, bool smooth);

struct SmoothRandomOptions {
  std::uint64_t seed = 0;
  double K_target = 2.0;
  double holder_alpha = 1.0;
  double skew = 0.0;  ///< fraction of the admissible skew amplitude, in [0,1]
  int modes = 3;
};

/// σ = R(θ) diag(λ₁, λ₂) R(θ)ᵀ + s J with low-order trigonometric λ, θ, s.
CoefficientField family_smooth_random(const SmoothRandomOptions& options);

}  // namespace sigmalab
