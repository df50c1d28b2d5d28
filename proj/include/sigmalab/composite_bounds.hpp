#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigmalab/types.hpp"

namespace sigmalab {

/// Isotropic phases on an nx × ny grid of equal cells tiling [0,1]².
/// Cell (i, j) covers [i/nx, (i+1)/nx] × [j/ny, (j+1)/ny] and has index j·nx + i.
struct PhaseLayout {
  int nx = 1;
  int ny = 1;
  std::vector<int> phase_of_cell;  ///< 0-based phase index per cell
  std::vector<double> sigmas;      ///< σ_p > 0, used as σ_p·I

  int num_cells() const { return nx * ny; }
  int num_phases() const { return static_cast<int>(sigmas.size()); }
  double cell_sigma(int cell) const { return sigmas[phase_of_cell[cell]]; }
  std::vector<double> fractions() const;
  std::vector<int> counts() const;
  /// Throws InvalidArgument on empty phases, bad indices or σ ≤ 0.
  void validate() const;
};

PhaseLayout single_phase_layout(double sigma, int n = 1);
/// Deterministic random assignment in which every phase owns at least one cell.
PhaseLayout random_layout(int n, const std::vector<double>& sigmas, std::uint64_t seed);

struct BoundResult {
  double value = 0.0;
  std::vector<Mat2> minimizer;  ///< per cell for F₁/F₂, per element for F_upper
  double mean_residual = 0.0;   ///< max |mean B − A|
  double det_residual = 0.0;    ///< |mean det B − det A|
  double min_det = 0.0;         ///< smallest per-cell (or per-element) det B
  double multiplier = 0.0;      ///< t of the mean-det constraint
  std::vector<double> phase_multipliers;  ///< λ_p ≥ 0 of det B ≥ 0 (F₂)
  std::optional<double> dual_bound;       ///< best certified lower bound
  int iterations = 0;
  bool certified = true;
  bool non_convex_regime = false;  ///< supremum over t reached the admissible boundary
  bool infeasible = false;
  std::string message;
};

/// Trace[Aᵀ · HM · A] with HM = (Σ p_i/σ_i)⁻¹.
double wiener_bound(const PhaseLayout& layout, const Mat2& A);

/// Discrete energy (1/|Ω|)Σ_T |T| σ_T |DU_h|² of the σ-harmonic map with data
/// A·x on a uniform mesh with `resolution` intervals per cell side.
BoundResult cell_energy_upper(const PhaseLayout& layout, const Mat2& A, int resolution);

/// F₁: min Σ_c w_c σ_c |B_c|² over per-cell constant B with mean A and mean
/// det A, through its concave dual in the multiplier t. A supremum reached at
/// the edge of the admissible t-range sets non_convex_regime; the primal is
/// then completed along null directions of the reduced quadratic form.
BoundResult translation_bound(const PhaseLayout& layout, const Mat2& A);

/// F₂: F₁ with the extra constraints det B_c ≥ 0, through per-phase multipliers
/// λ_p ≥ 0 and an enumeration of active phase sets. det A < 0 is reported as
/// infeasible. A result whose primal value does not meet the dual bound is
/// flagged as not certified.
BoundResult improved_bound(const PhaseLayout& layout, const Mat2& A);

struct BoundChain {
  double F0 = 0.0;
  double F1 = 0.0;
  double F2 = 0.0;
  double F_upper = 0.0;
  double tolerance = 0.0;
  bool f2_defined = true;  ///< false when det A < 0
  bool ordered = false;
  BoundResult f1, f2, upper;
};

/// Computes all four quantities and checks F₀ ≤ F₁ ≤ F₂ ≤ F_upper + tol with
/// tol = 1e−6 + allowance·F_upper. Throws OrderingViolation when
/// `throw_on_violation` is set and the chain breaks.
BoundChain bound_chain_report(const PhaseLayout& layout, const Mat2& A, int resolution = 8,
                              double allowance = 0.0, bool throw_on_violation = true);

}  // namespace sigmalab
