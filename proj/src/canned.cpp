#include "sigmalab/experiments.hpp"

namespace sigmalab {

namespace {

Json meyers(const char* name, double alpha, double exponent_tol, bool accuracy) {
  const double expected = 2.0 * (alpha - 1.0);
  Json params{{"fit", {{"center", {0.0, 0.0}}, {"r_min", 0.2}, {"r_max", 0.8}}},
              {"det_reference", {{"alpha", alpha}, {"r_min", 0.2}, {"r_max", 0.8}}},
              {"first_order", {{"annulus", {0.3, 0.8}}, {"singular_points", {{0.0, 0.0}}}}}};
  Json checks = Json::array({
      {{"metric", "exponent"}, {"min", expected - exponent_tol}, {"max", expected + exponent_tol}},
      {{"metric", "det_relative_error"}, {"max", 0.05}},
      {{"metric", "first_order_residual"}, {"max", 0.05}},
  });
  if (alpha == 1.0) {
    // σ = I and linear data: P1 reproduces the map up to round-off.
    checks.push_back({{"metric", "l2_relative"}, {"max", 1e-12}});
  } else if (accuracy) {
    checks.push_back({{"metric", "l2_relative"}, {"max", 0.05}});
    checks.push_back({{"metric", "l2_decreasing"}, {"min", 1}});
  }
  return Json{{"name", name},
              {"kind", "jacobian"},
              {"domain", {{"type", "disk"}, {"n_boundary", 256}}},
              {"coefficient", {{"family", "meyers"}, {"alpha", alpha}}},
              {"datum", {{"type", "meyers"}, {"alpha", alpha}}},
              {"mesh_sizes", {0.054, 0.027, 0.0135}},
              {"params", params},
              {"checks", checks}};
}

std::vector<CannedExperiment> build() {
  std::vector<CannedExperiment> c;

  c.push_back({"identity", "sigma = I, identity boundary map on the unit disk: det DU = 1, exact stream function",
               Json::parse(R"({
    "name": "identity", "kind": "jacobian",
    "domain": {"type": "disk", "n_boundary": 256},
    "coefficient": {"family": "identity"},
    "datum": {"type": "identity"},
    "mesh_sizes": [0.1, 0.05],
    "params": {"first_order": true},
    "checks": [
      {"metric": "det_min", "min": 0.999999999}, {"metric": "det_max", "max": 1.000000001},
      {"metric": "sign_changes_total", "max": 0},
      {"metric": "l2_relative", "max": 1e-12},
      {"metric": "loop_residual@1", "max": 1e-12},
      {"metric": "first_order_residual", "max": 1e-10}
    ]})")});

  c.push_back({"meyers-alpha05", "Meyers coefficient, alpha = 0.5: det DU blows up like |x|^-1",
               meyers("meyers-alpha05", 0.5, 0.15, false)});
  c.push_back({"meyers-alpha1", "Meyers coefficient, alpha = 1 (sigma = I): det DU = 1",
               meyers("meyers-alpha1", 1.0, 0.05, true)});
  c.push_back({"meyers-alpha2", "Meyers coefficient, alpha = 2: det DU = 2|x|^2 degenerates at the origin",
               meyers("meyers-alpha2", 2.0, 0.15, true)});
  c.push_back({"meyers-alpha3", "Meyers coefficient, alpha = 3: det DU = 3|x|^4",
               meyers("meyers-alpha3", 3.0, 0.15, true)});

  c.push_back({"smooth-random-sweep",
               "10 seeded smooth coefficients with K = 2, identity boundary map: positivity and stability of det DU",
               Json::parse(R"({
    "name": "smooth-random-sweep", "kind": "jacobian",
    "domain": {"type": "disk", "n_boundary": 256},
    "coefficient": {"family": "smooth_random", "K": 2.0, "holder_alpha": 1.0, "skew": 0.5, "modes": 3},
    "datum": {"type": "identity"},
    "mesh_sizes": [0.1, 0.05, 0.025],
    "params": {"seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9], "interior_delta": 0.1},
    "checks": [
      {"metric": "sign_changes_total", "max": 0},
      {"metric": "interior_min_variation_max", "max": 0.25},
      {"metric": "beltrami_excess_max", "max": 1e-12},
      {"metric": "loop_residual_ratio_min", "min": 1.5}
    ]})")});

  c.push_back({"ellipse-character", "convexity character of the ellipse (2,1) and the unit circle",
               Json::parse(R"({
    "name": "ellipse-character", "kind": "character",
    "params": {"directions": 64, "domains": [
      {"type": "ellipse", "a": 2.0, "b": 1.0, "n_boundary": 1024},
      {"type": "disk", "n_boundary": 1024}]},
    "checks": [
      {"metric": "certified@0", "min": 1},
      {"metric": "D_predicted@0", "min": 0.499999, "max": 0.500001},
      {"metric": "D_margin@0", "min": 0},
      {"metric": "certified@1", "min": 1},
      {"metric": "D_predicted@1", "min": 0.999999, "max": 1.000001},
      {"metric": "D_measured@1", "min": 1.999999, "max": 2.000001}
    ]})")});

  c.push_back({"wood-demo", "Wood's harmonic polynomial map: det DU = 3 x1^2 vanishes on a plane",
               Json::parse(R"({
    "name": "wood-demo", "kind": "oracle", "seed": 7,
    "params": {"oracle": "wood", "samples": 100},
    "checks": [
      {"metric": "det_plane_abs_max", "max": 0},
      {"metric": "laplacian_residual_max", "max": 1e-8},
      {"metric": "det_at_e1_error", "max": 1e-10}
    ]})")});

  c.push_back({"jin-kazdan-smooth", "smooth Jin-Kazdan coefficient: det DU vanishes on x3 < 0 only",
               Json::parse(R"({
    "name": "jin-kazdan-smooth", "kind": "oracle", "seed": 11,
    "params": {"oracle": "jin_kazdan", "a0": 0.5, "smooth": true, "x3_max": 1.0, "n_grid": 4000, "samples": 200},
    "checks": [
      {"metric": "det_abs_max_below", "max": 0},
      {"metric": "phi_prime_nonpositive", "max": 0},
      {"metric": "residual_max", "max": 1e-6},
      {"metric": "continuation_split", "min": 1},
      {"metric": "trace_bound_holds", "min": 1},
      {"metric": "trace_min", "min": 2}
    ]})")});

  c.push_back({"jin-kazdan-piecewise", "two-phase Jin-Kazdan variant: det DU = 2 a0 (1 - a0^2) x3 above the interface",
               Json::parse(R"({
    "name": "jin-kazdan-piecewise", "kind": "oracle", "seed": 13,
    "params": {"oracle": "jin_kazdan", "a0": 0.5, "smooth": false, "x3_max": 1.0, "samples": 200},
    "checks": [
      {"metric": "det_abs_max_below", "max": 0},
      {"metric": "det_formula_error_max", "max": 1e-12},
      {"metric": "residual_max", "max": 1e-6},
      {"metric": "continuation_split", "min": 1},
      {"metric": "trace_bound_holds", "min": 1},
      {"metric": "trace_min", "min": 2}
    ]})")});

  c.push_back({"bounds-1phase", "homogeneous cells: Wiener, translation, improved and cell energies coincide",
               Json::parse(R"({
    "name": "bounds-1phase", "kind": "bounds",
    "params": {"resolution": 4, "layouts": [
      {"nx": 1, "ny": 1, "sigmas": [1.0], "phases": [0]},
      {"nx": 3, "ny": 3, "sigmas": [2.5], "phases": [0, 0, 0, 0, 0, 0, 0, 0, 0],
       "A": [[1.0, 0.3], [-0.2, 0.7]]},
      {"nx": 2, "ny": 2, "sigmas": [0.4], "phases": [0, 0, 0, 0], "A": [[2.0, 0.0], [0.0, 0.5]]}]},
    "checks": [
      {"metric": "spread_max", "max": 1e-8},
      {"metric": "chain_violations", "max": 0}
    ]})")});

  c.push_back({"bounds-2phase", "bound chain on 10 random two-phase layouts and the two-cell laminate",
               Json::parse(R"({
    "name": "bounds-2phase", "kind": "bounds", "seed": 100,
    "params": {"resolution": 8,
      "random": {"count": 10, "n": 4, "sigmas": [1.0, 2.0]},
      "layouts": [{"nx": 2, "ny": 1, "sigmas": [1.0, 2.0], "phases": [0, 1]}]},
    "checks": [
      {"metric": "chain_violations", "max": 0},
      {"metric": "f2_margin_min", "min": -1e-8},
      {"metric": "f1_certified_all", "min": 1}
    ]})")});

  c.push_back({"bounds-3phase",
               "bound chain on 10 random three-phase layouts plus a layout where the improved bound is strictly larger",
               Json::parse(R"({
    "name": "bounds-3phase", "kind": "bounds", "seed": 200,
    "params": {"resolution": 4,
      "random": {"count": 10, "n": 4, "sigmas": [1.0, 2.0, 5.0]},
      "layouts": [{"nx": 10, "ny": 10, "sigmas": [1.0, 2.0, 5.0], "counts": [2, 38, 60],
                   "A": [[1.0, 0.0], [0.0, 0.5]]}]},
    "checks": [
      {"metric": "chain_violations", "max": 0},
      {"metric": "f2_margin_min", "min": -1e-8},
      {"metric": "F2_minus_F1@0", "min": 1e-3},
      {"metric": "f2_certified@0", "min": 1}
    ]})")});

  c.push_back({"convergence-manufactured", "sigma = I, harmonic data x1^2 - x2^2: second-order L2 convergence",
               Json::parse(R"({
    "name": "convergence-manufactured", "kind": "convergence",
    "domain": {"type": "disk", "n_boundary": 256},
    "coefficient": {"family": "identity"},
    "datum": {"type": "polynomial", "terms": [[1, 2, 0], [-1, 0, 2]]},
    "mesh_sizes": [0.2, 0.1, 0.05, 0.025],
    "checks": [
      {"metric": "order", "min": 1.7, "max": 2.3},
      {"metric": "l2_decreasing", "min": 1}
    ]})")});
  return c;
}

}  // namespace

const std::vector<CannedExperiment>& canned_catalog() {
  static const std::vector<CannedExperiment> catalog = build();
  return catalog;
}

std::optional<Json> canned_config(const std::string& name) {
  for (const auto& c : canned_catalog()) {
    if (c.name == name) return c.config;
  }
  return std::nullopt;
}

}  // namespace sigmalab
