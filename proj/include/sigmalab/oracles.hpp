#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "sigmalab/coefficients.hpp"
#include "sigmalab/types.hpp"

namespace sigmalab {

/// Closed-form mapping value and Jacobian at one point (2D or 3D).
struct OracleEvaluation {
  Eigen::VectorXd U;
  Eigen::MatrixXd DU;  ///< rows are ∇u_i
  double det = 0.0;
  std::optional<double> residual;
};

/// U(x) = |x|^{α−1}x with det DU = α|x|^{2(α−1)}. At the origin U = 0; DU is
/// 0 for α > 1, the identity for α = 1, and OriginDerivative for α < 1.
OracleEvaluation meyers_eval(double alpha, const Vec2& x);

/// max_i |div(σ∇u_i)| by central differences of the analytic flux, step 1e−5·|x|.
double meyers_residual(double alpha, const Vec2& x);

/// Wood's harmonic map (x₁³−3x₁x₃²+x₂x₃, x₂−3x₁x₃, x₃), det DU = 3x₁².
OracleEvaluation wood_eval(const Vec3& x);

/// max_i |Δu_i| of Wood's map by second differences with step h.
double wood_laplacian_residual(const Vec3& x, double h = 1e-3);

/// φ with (bφ′)′ = 2a, b = 1/(1−a²), φ ≡ 0 for x₃ ≤ 0.
class JinKazdanProfile {
 public:
  double a0() const { return amplitude_.a0; }
  bool smooth() const { return amplitude_.smooth; }
  const JinKazdanAmplitude& amplitude() const { return amplitude_; }
  double x3_max() const { return x3_max_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& grid_phi() const { return phi_; }
  const std::vector<double>& grid_flux() const { return flux_; }

  double phi(double x3) const;
  double phi_prime(double x3) const;
  /// b(x₃)φ′(x₃), the x₃ component of σ∇u₃ up to the in-plane terms.
  double flux(double x3) const;

 private:
  friend JinKazdanProfile jin_kazdan_smooth(const JinKazdanAmplitude&, double, int);
  friend JinKazdanProfile jin_kazdan_piecewise(double);
  std::size_t interval(double x3) const;

  JinKazdanAmplitude amplitude_;
  double x3_max_ = 0.0;
  std::vector<double> grid_, phi_, flux_;
};

/// Classical RK4 for (φ, w = bφ′) from φ(0) = w(0) = 0 on n_grid steps of
/// [0, x3_max]. Throws ODEStep on non-finite values, InvariantViolation if
/// φ′ fails to be positive on a grid node with x₃ > 0 where a > 0.
JinKazdanProfile jin_kazdan_smooth(const JinKazdanAmplitude& amplitude, double x3_max, int n_grid);

/// Closed form φ = a₀(1−a₀²)x₃² for x₃ > 0.
JinKazdanProfile jin_kazdan_piecewise(double a0);

/// U(x) = (x₁, x₂, −x₁x₂ + φ(x₃)), det DU = φ′(x₃).
OracleEvaluation jin_kazdan_eval(const JinKazdanProfile& profile, const Vec3& x);

/// max_i |div(σ∇u_i)| for the Jin–Kazdan pair by central differences, step h.
double jin_kazdan_residual(const JinKazdanProfile& profile, const Vec3& x, double h = 1e-5);

struct ContinuationRow {
  Vec3 x;
  double det = 0.0;
  double trace = 0.0;  ///< Trace(DUᵀDU) = |DU|²
};

struct UniqueContinuationReport {
  std::vector<ContinuationRow> rows;
  double max_abs_det_below = 0.0;  ///< over x₃ ≤ 0
  double min_det_above = 0.0;      ///< over x₃ > 0
  double min_trace = 0.0;
  bool split_at_interface = false;  ///< det = 0 exactly below and > 0 above
  bool trace_bound_holds = false;   ///< trace ≥ 2 + x₁² + x₂² at every row
};

/// Samples an n×n×n grid of [−1,1]² × [−x3_extent, x3_extent] (n even, so
/// no sample lies on the interface).
UniqueContinuationReport unique_continuation_demo(const JinKazdanProfile& profile, int n = 22,
                                                  double x3_extent = 1.0);

void write_continuation_csv(std::ostream& out, const UniqueContinuationReport& report);

}  // namespace sigmalab
