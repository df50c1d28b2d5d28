#include "sigmalab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "sigmalab/error.hpp"
#include "sigmalab/jacobian_lab.hpp"
#include "sigmalab/oracles.hpp"

namespace sigmalab {

namespace fs = std::filesystem;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Solve: return "solve";
    case ExperimentKind::Character: return "character";
    case ExperimentKind::Jacobian: return "jacobian";
    case ExperimentKind::Oracle: return "oracle";
    case ExperimentKind::Bounds: return "bounds";
    case ExperimentKind::Convergence: return "convergence";
  }
  return "unknown";
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

double param_number(const Json& p, const std::string& key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) config_error("params." + key, "expected a number");
  return p.at(key).get<double>();
}

int param_int(const Json& p, const std::string& key, int fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number_integer()) config_error("params." + key, "expected an integer");
  return p.at(key).get<int>();
}

bool param_bool(const Json& p, const std::string& key, bool fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_boolean()) config_error("params." + key, "expected true or false");
  return p.at(key).get<bool>();
}

std::string at(const std::string& metric, std::size_t k) { return metric + "@" + std::to_string(k); }

template <class F>
void parallel_for(int n, int threads, F&& body) {
  if (n <= 0) return;
  const int workers = std::clamp(threads, 1, n);
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string stringify(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

struct Context {
  const ExperimentConfig& config;
  int threads;
  ExperimentResult& result;

  void metric(const std::string& name, double value) { result.metrics[name] = value; }
  void artifact(const std::string& name, std::string content) {
    result.artifacts.emplace_back(name, std::move(content));
  }
};

std::shared_ptr<const Mesh> mesh_for(const DomainSpec& domain, double h) {
  return std::make_shared<const Mesh>(triangulate(domain, h));
}

Json level_header(const Mesh& mesh, double target) {
  return Json{{"target_h", target}, {"h", mesh.h}, {"nodes", mesh.num_nodes()}, {"triangles", mesh.num_triangles()}};
}

std::vector<Vec2> sample_disk_points(std::uint64_t seed, int n, double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Vec2 p(u(rng), u(rng));
    if (p.norm() <= 1.0) pts.push_back(radius * p);
  }
  return pts;
}

/// max over sample points of |μ| + |ν| − (K−1)/(K+1).
double beltrami_excess(const CoefficientField& field, const std::vector<Vec2>& points) {
  const double bound = (field.K() - 1.0) / (field.K() + 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const BeltramiPair d = complex_dilatations(field.eval(p));
    worst = std::max(worst, std::abs(d.mu) + std::abs(d.nu) - bound);
  }
  return worst;
}

double slope_loglog(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double min_ratio(const std::vector<double>& v) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) r = std::min(r, v[i - 1] / v[i]);
  return r;
}

double decreasing_flag(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return 0.0;
  }
  return 1.0;
}

struct FirstOrderOptions {
  bool enabled = false;
  std::vector<Vec2> singular_points;
  std::optional<std::pair<double, double>> annulus;
};

FirstOrderOptions first_order_options(const Json& p) {
  FirstOrderOptions o;
  if (!p.contains("first_order")) return o;
  const Json& f = p.at("first_order");
  if (f.is_boolean()) {
    o.enabled = f.get<bool>();
    return o;
  }
  if (!f.is_object()) config_error("params.first_order", "expected true/false or an object");
  o.enabled = true;
  if (f.contains("annulus")) {
    const Json& a = f.at("annulus");
    if (!a.is_array() || a.size() != 2) config_error("params.first_order.annulus", "expected [r_min, r_max]");
    o.annulus = std::make_pair(a[0].get<double>(), a[1].get<double>());
  }
  if (f.contains("singular_points")) {
    for (const auto& s : f.at("singular_points")) o.singular_points.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  }
  return o;
}

FirstOrderReport first_order(const DiscreteSolution& u, const StreamFunction& s, const CoefficientField& field,
                             const FirstOrderOptions& o) {
  std::function<bool(const Vec2&)> region;
  if (o.annulus) {
    const auto [lo, hi] = *o.annulus;
    region = [lo, hi](const Vec2& x) {
      const double r = x.norm();
      return r >= lo && r <= hi;
    };
  }
  return check_first_order_system(u, s, field, o.singular_points, region);
}

/// Deviation of the discrete stream function from a known conjugate ψ, after
/// matching the additive constant at the stream function's root node.
double conjugate_error(const DiscreteSolution& u, const StreamFunction& s, const Polynomial2& psi) {
  const Mesh& mesh = *u.mesh;
  const int root = mesh.boundary_nodes.front().node;
  const double shift = psi(mesh.nodes[root]) - s.nodal_values(root);
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    worst = std::max(worst, std::abs(s.nodal_values(i) + shift - psi(mesh.nodes[i])));
  }
  return worst;
}

// ---------------------------------------------------------------- solve

void run_solve(Context& ctx) {
  const auto& cfg = ctx.config;
  const DomainSpec domain = domain_from_json(cfg.domain);
  const CoefficientField field = coefficient_from_json(cfg.coefficient);
  ScalarDatum datum = scalar_datum_from_json(cfg.datum);
  if (!extension_solves(cfg.datum, cfg.coefficient)) datum.exact = nullptr;
  const FirstOrderOptions fo = first_order_options(cfg.params);
  const bool stream = param_bool(cfg.params, "stream", true);
  std::optional<Polynomial2> conjugate;
  if (cfg.params.contains("conjugate")) conjugate = polynomial_from_json(cfg.params.at("conjugate"), "params.conjugate");

  Json levels = Json::array();
  std::vector<double> l2, loops;
  for (std::size_t k = 0; k < cfg.mesh_sizes.size(); ++k) {
    auto mesh = mesh_for(domain, cfg.mesh_sizes[k]);
    const DiscreteSolution u = assemble_and_solve(mesh, field, datum.g);
    Json lv = level_header(*mesh, cfg.mesh_sizes[k]);
    lv["galerkin_residual"] = u.residual_norm;
    if (datum.exact) {
      const double e = l2_error(u, datum.exact);
      const double rel = e / l2_norm(*mesh, datum.exact);
      lv["l2_error"] = e;
      lv["l2_relative"] = rel;
      ctx.metric(at("l2_error", k), e);
      ctx.metric(at("l2_relative", k), rel);
      l2.push_back(e);
    }
    if (stream) {
      const StreamFunction s = stream_function(u, field);
      lv["loop_residual"] = s.loop_residual;
      lv["cycles"] = s.cycles;
      ctx.metric(at("loop_residual", k), s.loop_residual);
      loops.push_back(s.loop_residual);
      if (fo.enabled) {
        const FirstOrderReport r = first_order(u, s, field, fo);
        lv["first_order_residual"] = r.max_residual;
        lv["first_order_elements"] = r.elements_used;
        ctx.metric(at("first_order_residual", k), r.max_residual);
      }
      if (conjugate) {
        const double ce = conjugate_error(u, s, *conjugate);
        lv["conjugate_error"] = ce;
        ctx.metric(at("conjugate_error", k), ce);
      }
    }
    if (k + 1 == cfg.mesh_sizes.size()) {
      ctx.artifact("mesh.txt", stringify([&](std::ostream& o) { write_mesh(o, *mesh); }));
      ctx.artifact("solution.csv", stringify([&](std::ostream& o) { write_solution_csv(o, u); }));
      ctx.artifact("gradient.csv", stringify([&](std::ostream& o) { write_gradient_csv(o, u); }));
    }
    levels.push_back(std::move(lv));
  }
  if (l2.size() > 1) ctx.metric("l2_decreasing", decreasing_flag(l2));
  if (loops.size() > 1) ctx.metric("loop_residual_ratio_min", min_ratio(loops));
  ctx.result.report["levels"] = std::move(levels);
}

// ------------------------------------------------------------- jacobian

struct DetReference {
  double alpha = 1.0;
  double r_min = 0.0;
  double r_max = 1.0;
};

struct JacobianLevel {
  Json summary;
  double interior_min = 0.0;
  double loop_residual = 0.0;
  std::size_t sign_changes = 0;
  std::optional<double> exponent;
  std::optional<double> l2_relative;
  std::optional<double> first_order;
  std::optional<double> det_error;
  std::string jacobian_csv, mesh_txt;
};

JacobianLevel jacobian_level(const DomainSpec& domain, const CoefficientField& field, const MapDatum& datum,
                             double target_h, const Json& params, bool keep_fields) {
  JacobianLevel out;
  auto mesh = mesh_for(domain, target_h);
  const auto U = solve_mapping(mesh, field, datum.phi1.g, datum.phi2.g);
  JacobianReport rep = jacobian_field(U);
  const double delta = param_number(params, "interior_delta", 0.1);
  Json s = level_header(*mesh, target_h);
  s["det_min"] = rep.global_min;
  s["det_max"] = rep.global_max;
  s["sign_changes"] = rep.sign_changes;
  s["interior_min"] = rep.interior_min(delta);
  s["fraction_min"] = rep.fraction_min;
  s["quotient_min"] = rep.quotient_min();
  s["directional_min"] = directional_gradient_bound(rep, 32).min;
  out.interior_min = rep.interior_min(delta);
  out.sign_changes = rep.sign_changes;
  if (datum.phi1.exact && datum.phi2.exact) {
    const double e = std::hypot(l2_error(U.first, datum.phi1.exact), l2_error(U.second, datum.phi2.exact));
    const double n = std::hypot(l2_norm(*mesh, datum.phi1.exact), l2_norm(*mesh, datum.phi2.exact));
    out.l2_relative = e / n;
    s["l2_relative"] = *out.l2_relative;
  }
  if (params.contains("fit")) {
    const Json& f = params.at("fit");
    Vec2 center = Vec2::Zero();
    if (f.contains("center")) center << f.at("center").at(0).get<double>(), f.at("center").at(1).get<double>();
    const PowerLawFit fit = fit_degeneration_rate(rep, center, param_number(f, "r_min", 0.2),
                                                  param_number(f, "r_max", 0.8), param_int(f, "bins", 12));
    rep.powerlaw_fit = fit;
    out.exponent = fit.exponent;
    s["powerlaw_fit"] = to_json(fit);
  }
  if (params.contains("det_reference")) {
    const Json& d = params.at("det_reference");
    DetReference ref{param_number(d, "alpha", 1.0), param_number(d, "r_min", 0.2), param_number(d, "r_max", 0.8)};
    double worst = 0.0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const double r = mesh->centroid(t).norm();
      if (r < ref.r_min || r > ref.r_max) continue;
      const double exact = ref.alpha * std::pow(r, 2.0 * (ref.alpha - 1.0));
      worst = std::max(worst, std::abs(rep.det[t] - exact) / exact);
    }
    out.det_error = worst;
    s["det_relative_error_max"] = worst;
  }
  if (param_bool(params, "stream", true)) {
    const StreamFunction st = stream_function(U.first, field);
    out.loop_residual = st.loop_residual;
    s["loop_residual"] = st.loop_residual;
    const FirstOrderOptions fo = first_order_options(params);
    if (fo.enabled) {
      const FirstOrderReport r = first_order(U.first, st, field, fo);
      out.first_order = r.max_residual;
      s["first_order_residual"] = r.max_residual;
    }
  }
  if (keep_fields) {
    out.jacobian_csv = stringify([&](std::ostream& o) { write_jacobian_csv(o, rep); });
    out.mesh_txt = stringify([&](std::ostream& o) { write_mesh(o, *mesh); });
  }
  out.summary = std::move(s);
  return out;
}

void run_jacobian(Context& ctx) {
  const auto& cfg = ctx.config;
  const DomainSpec domain = domain_from_json(cfg.domain);
  MapDatum datum = map_datum_from_json(cfg.datum);
  if (!extension_solves(cfg.datum, cfg.coefficient)) datum.phi1.exact = datum.phi2.exact = nullptr;
  const auto& hs = cfg.mesh_sizes;

  // A "seeds" list sweeps the coefficient seed; otherwise a single instance.
  std::vector<Json> coefficients;
  if (cfg.params.contains("seeds")) {
    const Json& seeds = cfg.params.at("seeds");
    if (!seeds.is_array() || seeds.empty()) config_error("params.seeds", "expected a non-empty list");
    for (const auto& s : seeds) {
      if (!s.is_number_integer()) config_error("params.seeds", "expected integers");
      Json c = cfg.coefficient;
      c["seed"] = s.get<std::int64_t>() + static_cast<std::int64_t>(cfg.seed);
      coefficients.push_back(std::move(c));
    }
  } else {
    coefficients.push_back(cfg.coefficient);
  }
  for (const auto& c : coefficients) coefficient_from_json(c);  // validate before any work

  const int n_inst = static_cast<int>(coefficients.size());
  const int n_lv = static_cast<int>(hs.size());
  std::vector<JacobianLevel> levels(static_cast<std::size_t>(n_inst * n_lv));
  std::vector<double> excess(n_inst);
  const auto points = sample_disk_points(cfg.seed, 1000, 1.0);
  parallel_for(n_inst * n_lv, ctx.threads, [&](int job) {
    const int i = job / n_lv, k = job % n_lv;
    const CoefficientField field = coefficient_from_json(coefficients[i]);
    if (k == 0) excess[i] = beltrami_excess(field, points);
    levels[job] = jacobian_level(domain, field, datum, hs[k], cfg.params, i == 0 && k == n_lv - 1);
  });

  Json instances = Json::array();
  double excess_max = -std::numeric_limits<double>::infinity();
  double variation_max = 0.0, ratio_min = std::numeric_limits<double>::infinity();
  std::size_t sign_total = 0;
  for (int i = 0; i < n_inst; ++i) {
    Json inst{{"coefficient", coefficients[i]}, {"beltrami_excess", excess[i]}};
    Json lv = Json::array();
    std::vector<double> loops, l2;
    for (int k = 0; k < n_lv; ++k) {
      const JacobianLevel& L = levels[i * n_lv + k];
      lv.push_back(L.summary);
      sign_total += L.sign_changes;
      loops.push_back(L.loop_residual);
      if (L.l2_relative) l2.push_back(*L.l2_relative);
      if (n_inst == 1) {
        ctx.metric(at("det_min", k), L.summary["det_min"].get<double>());
        ctx.metric(at("det_max", k), L.summary["det_max"].get<double>());
        ctx.metric(at("interior_min", k), L.interior_min);
        ctx.metric(at("sign_changes", k), static_cast<double>(L.sign_changes));
        ctx.metric(at("loop_residual", k), L.loop_residual);
        if (L.exponent) ctx.metric(at("exponent", k), *L.exponent);
        if (L.l2_relative) ctx.metric(at("l2_relative", k), *L.l2_relative);
        if (L.first_order) ctx.metric(at("first_order_residual", k), *L.first_order);
        if (L.det_error) ctx.metric(at("det_relative_error", k), *L.det_error);
      }
    }
    if (n_lv > 1) {
      const double a = levels[i * n_lv + n_lv - 2].interior_min, b = levels[i * n_lv + n_lv - 1].interior_min;
      const double variation = std::abs(b - a) / std::abs(a);
      inst["interior_min_variation"] = variation;
      variation_max = std::max(variation_max, variation);
      if (param_bool(cfg.params, "stream", true)) {
        const double r = min_ratio(loops);
        inst["loop_residual_ratio_min"] = r;
        ratio_min = std::min(ratio_min, r);
      }
      if (l2.size() == static_cast<std::size_t>(n_lv) && n_inst == 1) ctx.metric("l2_decreasing", decreasing_flag(l2));
    }
    excess_max = std::max(excess_max, excess[i]);
    inst["levels"] = std::move(lv);
    instances.push_back(std::move(inst));
  }
  const JacobianLevel& finest = levels[n_lv - 1];
  if (finest.exponent) ctx.metric("exponent", *finest.exponent);
  if (finest.l2_relative) ctx.metric("l2_relative", *finest.l2_relative);
  if (finest.det_error) ctx.metric("det_relative_error", *finest.det_error);
  if (finest.first_order) ctx.metric("first_order_residual", *finest.first_order);
  ctx.metric("det_min", finest.summary["det_min"].get<double>());
  ctx.metric("det_max", finest.summary["det_max"].get<double>());
  ctx.metric("sign_changes_total", static_cast<double>(sign_total));
  ctx.metric("beltrami_excess_max", excess_max);
  if (n_lv > 1) {
    ctx.metric("interior_min_variation_max", variation_max);
    if (param_bool(cfg.params, "stream", true)) ctx.metric("loop_residual_ratio_min", ratio_min);
  }
  ctx.result.report["instances"] = std::move(instances);
  ctx.artifact("mesh.txt", finest.mesh_txt);
  ctx.artifact("jacobian.csv", finest.jacobian_csv);
}

// ------------------------------------------------------------ character

void run_character(Context& ctx) {
  const auto& cfg = ctx.config;
  std::vector<Json> domains;
  if (cfg.params.contains("domains")) {
    for (const auto& d : cfg.params.at("domains")) domains.push_back(d);
  } else {
    domains.push_back(cfg.domain);
  }
  const int n_dir = param_int(cfg.params, "directions", 64);
  Json list = Json::array();
  for (std::size_t k = 0; k < domains.size(); ++k) {
    const DomainSpec domain = domain_from_json(domains[k]);
    Json rep = character_report(domain, n_dir);
    rep["domain"] = domains[k];
    ctx.metric(at("certified", k), rep["certified"].get<bool>() ? 1.0 : 0.0);
    if (!rep["measured"].is_null()) {
      ctx.metric(at("D_measured", k), rep["measured"]["D"].get<double>());
      ctx.metric(at("omega_measured", k), rep["measured"]["omega_slope"].get<double>());
    }
    if (!rep["predicted"].is_null()) {
      ctx.metric(at("D_predicted", k), rep["predicted"]["D"].get<double>());
      ctx.metric(at("omega_predicted", k), rep["predicted"]["omega_slope"].get<double>());
      if (!rep["measured"].is_null()) {
        ctx.metric(at("D_margin", k), rep["measured"]["D"].get<double>() - rep["predicted"]["D"].get<double>());
      }
    }
    list.push_back(std::move(rep));
  }
  ctx.result.report["domains"] = std::move(list);
}

// --------------------------------------------------------------- oracle

void run_wood(Context& ctx) {
  std::mt19937_64 rng(ctx.config.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = param_int(ctx.config.params, "samples", 100);
  double plane = 0.0, lap = 0.0;
  std::ostringstream csv;
  csv << "x1,x2,x3,det\n";
  csv.precision(17);
  for (int i = 0; i < n; ++i) {
    const Vec3 x(0.0, u(rng), u(rng));
    const double d = wood_eval(x).det;
    plane = std::max(plane, std::abs(d));
    csv << x(0) << ',' << x(1) << ',' << x(2) << ',' << d << '\n';
  }
  for (int i = 0; i < n; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    lap = std::max(lap, wood_laplacian_residual(x));
  }
  const double d100 = wood_eval(Vec3(1, 0, 0)).det;
  ctx.metric("det_plane_abs_max", plane);
  ctx.metric("laplacian_residual_max", lap);
  ctx.metric("det_at_e1", d100);
  ctx.metric("det_at_e1_error", std::abs(d100 - 3.0));
  ctx.result.report["wood"] = Json{{"samples", n}, {"det_plane_abs_max", plane}, {"laplacian_residual_max", lap},
                                   {"det_at_e1", d100}};
  ctx.artifact("plane_samples.csv", csv.str());
}

void run_jin_kazdan(Context& ctx) {
  const Json& p = ctx.config.params;
  const double a0 = param_number(p, "a0", 0.5);
  const bool smooth = param_bool(p, "smooth", true);
  const double x3_max = param_number(p, "x3_max", 1.0);
  JinKazdanProfile profile = smooth ? jin_kazdan_smooth(jin_kazdan_amplitude(a0, true), x3_max,
                                                        param_int(p, "n_grid", 4000))
                                    : jin_kazdan_piecewise(a0);
  std::mt19937_64 rng(ctx.config.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), up(0.0, 1.0);
  const int n = param_int(p, "samples", 200);
  const double gap = param_number(p, "interface_gap", 0.05);
  double formula = 0.0, below = 0.0, residual = 0.0;
  double phi_prime_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Vec3 x(u(rng), u(rng), x3_max * u(rng));
    const OracleEvaluation ev = jin_kazdan_eval(profile, x);
    if (x(2) <= 0.0) {
      below = std::max(below, std::abs(ev.det));
    } else if (!smooth) {
      formula = std::max(formula, std::abs(ev.det - 2.0 * a0 * (1.0 - a0 * a0) * x(2)));
    }
    if (std::abs(x(2)) >= gap) residual = std::max(residual, jin_kazdan_residual(profile, x));
  }
  // φ′ on x₃ > 0 wherever the source is numerically nonzero.
  int nonpositive = 0;
  for (double x3 : profile.grid()) {
    if (x3 <= 0.0 || profile.amplitude().a(x3) <= 0.0) continue;
    const double d = profile.phi_prime(x3);
    phi_prime_min = std::min(phi_prime_min, d);
    if (!(d > 0.0)) ++nonpositive;
  }
  const UniqueContinuationReport uc = unique_continuation_demo(profile, param_int(p, "grid", 22), x3_max);
  ctx.metric("det_abs_max_below", below);
  if (!smooth) ctx.metric("det_formula_error_max", formula);
  ctx.metric("residual_max", residual);
  ctx.metric("phi_prime_nonpositive", nonpositive);
  ctx.metric("continuation_split", uc.split_at_interface ? 1.0 : 0.0);
  ctx.metric("continuation_det_abs_max_below", uc.max_abs_det_below);
  ctx.metric("continuation_det_min_above", uc.min_det_above);
  ctx.metric("trace_min", uc.min_trace);
  ctx.metric("trace_bound_holds", uc.trace_bound_holds ? 1.0 : 0.0);
  ctx.result.report["jin_kazdan"] = Json{{"a0", a0},
                                         {"smooth", smooth},
                                         {"grid_nodes", profile.grid().size()},
                                         {"phi_prime_min_above", phi_prime_min},
                                         {"phi_at_x3_max", profile.phi(x3_max)},
                                         {"samples", n},
                                         {"continuation_rows", uc.rows.size()}};
  ctx.artifact("continuation.csv", stringify([&](std::ostream& o) { write_continuation_csv(o, uc); }));
}

void run_meyers_oracle(Context& ctx) {
  const double alpha = param_number(ctx.config.params, "alpha", 2.0);
  std::mt19937_64 rng(ctx.config.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double residual = 0.0, formula = 0.0;
  for (int i = 0; i < param_int(ctx.config.params, "samples", 100); ++i) {
    Vec2 x(u(rng), u(rng));
    if (x.norm() < 0.05) continue;
    residual = std::max(residual, meyers_residual(alpha, x));
    const double exact = alpha * std::pow(x.norm(), 2.0 * (alpha - 1.0));
    formula = std::max(formula, std::abs(meyers_eval(alpha, x).det - exact) / exact);
  }
  ctx.metric("residual_max", residual);
  ctx.metric("det_formula_error_max", formula);
  ctx.result.report["meyers"] = Json{{"alpha", alpha}, {"residual_max", residual}, {"det_formula_error_max", formula}};
}

void run_oracle(Context& ctx) {
  const Json& p = ctx.config.params;
  if (!p.contains("oracle") || !p.at("oracle").is_string()) config_error("params.oracle", "expected a string");
  const std::string which = p.at("oracle").get<std::string>();
  if (which == "wood") return run_wood(ctx);
  if (which == "jin_kazdan") return run_jin_kazdan(ctx);
  if (which == "meyers") return run_meyers_oracle(ctx);
  config_error("params.oracle", "unknown oracle '" + which + "'");
}

// --------------------------------------------------------------- bounds

struct BoundsInstance {
  PhaseLayout layout;
  Mat2 A;
  Json source;
};

void run_bounds(Context& ctx) {
  const auto& cfg = ctx.config;
  const Json& p = cfg.params;
  const Mat2 A_default = p.contains("A") ? matrix_from_json(p.at("A"), "params.A") : Mat2::Identity().eval();
  const int resolution = param_int(p, "resolution", 8);
  const double allowance = param_number(p, "allowance", 0.0);
  std::vector<BoundsInstance> inst;
  if (p.contains("layouts")) {
    for (const auto& l : p.at("layouts")) {
      const Mat2 A = l.contains("A") ? matrix_from_json(l.at("A"), "layout.A") : A_default;
      inst.push_back({layout_from_json(l), A, l});
    }
  }
  if (p.contains("random")) {
    const Json& r = p.at("random");
    const int count = param_int(r, "count", 10), n = param_int(r, "n", 4);
    Json sig = r.value("sigmas", Json::array({1.0, 2.0}));
    for (int k = 0; k < count; ++k) {
      Json l{{"sigmas", sig}, {"random", {{"n", n}, {"seed", static_cast<std::int64_t>(cfg.seed) + k}}}};
      inst.push_back({layout_from_json(l), A_default, l});
    }
  }
  if (inst.empty()) config_error("params", "bounds experiments need 'layouts' or 'random'");

  std::vector<BoundChain> chains(inst.size());
  parallel_for(static_cast<int>(inst.size()), ctx.threads, [&](int k) {
    chains[k] = bound_chain_report(inst[k].layout, inst[k].A, resolution, allowance, false);
  });

  Json list = Json::array();
  double violations = 0.0, spread = 0.0;
  double margin_min = std::numeric_limits<double>::infinity(), margin_max = -margin_min;
  bool f1_cert = true, f2_cert = true;
  std::ostringstream csv;
  csv.precision(17);
  csv << "instance,F0,F1,F2,F_upper,ordered\n";
  for (std::size_t k = 0; k < inst.size(); ++k) {
    const BoundChain& c = chains[k];
    Json j{{"layout", to_json(inst[k].layout)},
           {"A", to_json(inst[k].A)},
           {"F0", c.F0},
           {"F1", c.F1},
           {"F2", c.f2_defined ? Json(c.F2) : Json(nullptr)},
           {"F_upper", c.F_upper},
           {"tolerance", c.tolerance},
           {"ordered", c.ordered},
           {"f1", to_json(c.f1)},
           {"f2", to_json(c.f2)},
           {"upper", to_json(c.upper)}};
    if (!c.ordered) violations += 1.0;
    ctx.metric(at("F0", k), c.F0);
    ctx.metric(at("F1", k), c.F1);
    ctx.metric(at("F_upper", k), c.F_upper);
    ctx.metric(at("ordered", k), c.ordered ? 1.0 : 0.0);
    f1_cert = f1_cert && c.f1.certified;
    const double scale = std::max({1.0, std::abs(c.F0), std::abs(c.F_upper)});
    double hi = std::max({c.F0, c.F1, c.F_upper}), lo = std::min({c.F0, c.F1, c.F_upper});
    if (c.f2_defined) {
      hi = std::max(hi, c.F2);
      lo = std::min(lo, c.F2);
      ctx.metric(at("F2", k), c.F2);
      ctx.metric(at("F2_minus_F1", k), c.F2 - c.F1);
      ctx.metric(at("f2_certified", k), c.f2.certified ? 1.0 : 0.0);
      margin_min = std::min(margin_min, c.F2 - c.F1);
      margin_max = std::max(margin_max, c.F2 - c.F1);
      f2_cert = f2_cert && c.f2.certified;
    }
    spread = std::max(spread, (hi - lo) / scale);
    csv << k << ',' << c.F0 << ',' << c.F1 << ',';
    if (c.f2_defined) csv << c.F2;
    csv << ',' << c.F_upper << ',' << (c.ordered ? 1 : 0) << '\n';
    list.push_back(std::move(j));
  }
  ctx.metric("chain_violations", violations);
  ctx.metric("spread_max", spread);
  ctx.metric("f1_certified_all", f1_cert ? 1.0 : 0.0);
  ctx.metric("f2_certified_all", f2_cert ? 1.0 : 0.0);
  if (std::isfinite(margin_min)) {
    ctx.metric("f2_margin_min", margin_min);
    ctx.metric("f2_margin_max", margin_max);
  }
  ctx.result.report["instances"] = std::move(list);
  ctx.result.report["resolution"] = resolution;
  ctx.artifact("bounds.csv", csv.str());
}

// ---------------------------------------------------------- convergence

void run_convergence(Context& ctx) {
  const auto& cfg = ctx.config;
  const DomainSpec domain = domain_from_json(cfg.domain);
  const CoefficientField field = coefficient_from_json(cfg.coefficient);
  const ScalarDatum datum = scalar_datum_from_json(cfg.datum);
  const int n = static_cast<int>(cfg.mesh_sizes.size());
  std::vector<double> h(n), e(n), rel(n);
  std::vector<Json> lv(n);
  std::vector<std::string> last_solution;
  parallel_for(n, ctx.threads, [&](int k) {
    auto mesh = mesh_for(domain, cfg.mesh_sizes[k]);
    const DiscreteSolution u = assemble_and_solve(mesh, field, datum.g);
    h[k] = mesh->h;
    e[k] = l2_error(u, datum.exact);
    rel[k] = e[k] / l2_norm(*mesh, datum.exact);
    lv[k] = level_header(*mesh, cfg.mesh_sizes[k]);
    lv[k]["l2_error"] = e[k];
    lv[k]["l2_relative"] = rel[k];
  });
  Json levels = Json::array();
  for (int k = 0; k < n; ++k) {
    ctx.metric(at("l2_error", k), e[k]);
    if (k > 0) {
      const double local = std::log(e[k - 1] / e[k]) / std::log(h[k - 1] / h[k]);
      lv[k]["local_order"] = local;
      ctx.metric(at("local_order", k), local);
    }
    levels.push_back(lv[k]);
  }
  const double order = slope_loglog(h, e);
  ctx.metric("order", order);
  ctx.metric("l2_decreasing", decreasing_flag(e));
  ctx.result.report["levels"] = std::move(levels);
  ctx.result.report["order"] = order;
  std::ostringstream csv;
  csv.precision(17);
  csv << "level,h,l2_error\n";
  for (int k = 0; k < n; ++k) csv << k << ',' << h[k] << ',' << e[k] << '\n';
  ctx.artifact("convergence.csv", csv.str());
}

ExperimentKind kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Solve, ExperimentKind::Character, ExperimentKind::Jacobian, ExperimentKind::Oracle,
                 ExperimentKind::Bounds, ExperimentKind::Convergence}) {
    if (to_string(k) == s) return k;
  }
  config_error("kind", "unknown kind '" + s + "'");
}

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) config_error("<root>", "expected a JSON object");
  ExperimentConfig c;
  if (j.contains("canned")) {
    // A canned base with field overrides on top.
    if (!j.at("canned").is_string()) config_error("canned", "expected a name");
    auto base = canned_config(j.at("canned").get<std::string>());
    if (!base) config_error("canned", "unknown canned experiment '" + j.at("canned").get<std::string>() + "'");
    Json merged = *base;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "canned") merged[it.key()] = it.value();
    }
    return from_json(merged);
  }
  static const std::vector<std::string> known = {"name", "kind", "domain", "coefficient", "datum", "mesh_sizes",
                                                 "output", "seed", "params", "checks", "description"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) config_error(it.key(), "unknown field");
  }
  if (!j.contains("kind") || !j.at("kind").is_string()) config_error("kind", "missing or not a string");
  c.kind = kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("name") && !j.at("name").is_string()) config_error("name", "expected a string");
  c.name = j.value("name", std::string(to_string(c.kind)));
  c.domain = j.value("domain", Json());
  c.coefficient = j.value("coefficient", Json());
  c.datum = j.value("datum", Json());
  c.params = j.value("params", Json::object());
  if (!c.params.is_object()) config_error("params", "expected an object");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<std::int64_t>() >= 0)) {
      config_error("seed", "expected a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) config_error("output", "expected a path");
    c.output_dir = j.at("output").get<std::string>();
  } else {
    c.output_dir = "runs/" + c.name;
  }
  if (j.contains("mesh_sizes")) {
    const Json& m = j.at("mesh_sizes");
    if (!m.is_array()) config_error("mesh_sizes", "expected a list");
    for (const auto& v : m) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) config_error("mesh_sizes", "expected positive numbers");
      c.mesh_sizes.push_back(v.get<double>());
    }
  }
  if (j.contains("checks")) {
    const Json& ch = j.at("checks");
    if (!ch.is_array()) config_error("checks", "expected a list");
    for (std::size_t k = 0; k < ch.size(); ++k) {
      const std::string f = "checks[" + std::to_string(k) + "]";
      const Json& e = ch[k];
      if (!e.is_object() || !e.contains("metric") || !e.at("metric").is_string()) config_error(f, "needs a metric name");
      CheckSpec s;
      s.metric = e.at("metric").get<std::string>();
      if (e.contains("min")) {
        if (!e.at("min").is_number()) config_error(f + ".min", "expected a number");
        s.min = e.at("min").get<double>();
      }
      if (e.contains("max")) {
        if (!e.at("max").is_number()) config_error(f + ".max", "expected a number");
        s.max = e.at("max").get<double>();
      }
      if (!s.min && !s.max) config_error(f, "needs min or max");
      c.checks.push_back(s);
    }
  }

  // Kind-specific requirements, checked before any computation.
  const bool needs_mesh = c.kind == ExperimentKind::Solve || c.kind == ExperimentKind::Jacobian ||
                          c.kind == ExperimentKind::Convergence;
  if (needs_mesh) {
    if (c.mesh_sizes.empty()) config_error("mesh_sizes", "required for kind " + std::string(to_string(c.kind)));
    for (std::size_t k = 1; k < c.mesh_sizes.size(); ++k) {
      if (!(c.mesh_sizes[k] < c.mesh_sizes[k - 1])) config_error("mesh_sizes", "must be strictly decreasing");
    }
    if (c.kind == ExperimentKind::Convergence && c.mesh_sizes.size() < 2) {
      config_error("mesh_sizes", "convergence needs at least two levels");
    }
    domain_from_json(c.domain);
    coefficient_from_json(c.coefficient);
    if (c.kind == ExperimentKind::Jacobian) {
      map_datum_from_json(c.datum);
    } else {
      scalar_datum_from_json(c.datum);
    }
    if (c.kind == ExperimentKind::Convergence && !extension_solves(c.datum, c.coefficient)) {
      config_error("datum", "convergence needs a datum whose closed-form extension solves the equation for this coefficient");
    }
  }
  if (c.kind == ExperimentKind::Character && !c.params.contains("domains")) domain_from_json(c.domain);
  if (c.kind == ExperimentKind::Oracle && !(c.params.contains("oracle") && c.params.at("oracle").is_string())) {
    config_error("params.oracle", "required for kind oracle");
  }
  return c;
}

Json ExperimentConfig::to_json() const {
  Json j{{"name", name}, {"kind", std::string(to_string(kind))}, {"seed", seed}, {"params", params}};
  if (!domain.is_null()) j["domain"] = domain;
  if (!coefficient.is_null()) j["coefficient"] = coefficient;
  if (!datum.is_null()) j["datum"] = datum;
  if (!mesh_sizes.empty()) j["mesh_sizes"] = mesh_sizes;
  Json ch = Json::array();
  for (const auto& c : checks) {
    Json e{{"metric", c.metric}};
    if (c.min) e["min"] = *c.min;
    if (c.max) e["max"] = *c.max;
    ch.push_back(e);
  }
  j["checks"] = ch;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  ExperimentResult result;
  Context ctx{config, std::max(1, threads), result};
  switch (config.kind) {
    case ExperimentKind::Solve: run_solve(ctx); break;
    case ExperimentKind::Character: run_character(ctx); break;
    case ExperimentKind::Jacobian: run_jacobian(ctx); break;
    case ExperimentKind::Oracle: run_oracle(ctx); break;
    case ExperimentKind::Bounds: run_bounds(ctx); break;
    case ExperimentKind::Convergence: run_convergence(ctx); break;
  }
  for (const auto& spec : config.checks) {
    auto it = result.metrics.find(spec.metric);
    if (it == result.metrics.end()) config_error("checks", "metric '" + spec.metric + "' is not produced by this run");
    CheckOutcome o{spec, it->second, std::isfinite(it->second)};
    if (spec.min && !(it->second >= *spec.min)) o.passed = false;
    if (spec.max && !(it->second <= *spec.max)) o.passed = false;
    result.checks.push_back(o);
  }
  Json checks = Json::array();
  for (const auto& c : result.checks) {
    Json e{{"metric", c.spec.metric}, {"value", c.value}, {"passed", c.passed}};
    if (c.spec.min) e["min"] = *c.spec.min;
    if (c.spec.max) e["max"] = *c.spec.max;
    checks.push_back(e);
  }
  Json report;
  report["experiment"] = config.name;
  report["kind"] = std::string(to_string(config.kind));
  report["config"] = config.to_json();
  report["metrics"] = Json(result.metrics);
  report["checks"] = std::move(checks);
  report["passed"] = result.passed();
  for (auto it = result.report.begin(); it != result.report.end(); ++it) report["results"][it.key()] = it.value();
  result.report = std::move(report);
  return result;
}

int lab_threads() {
  if (const char* env = std::getenv("LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

RunOutcome run_and_persist(const ExperimentConfig& config, const std::string& output_dir, int threads,
                           std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.result = run_experiment(config, threads);
  const fs::path dir = output_dir.empty() ? fs::path(config.output_dir) : fs::path(output_dir);
  for (const auto& [name, content] : out.result.artifacts) write_atomic((dir / name).string(), content);
  out.report_path = (dir / "report.json").string();
  write_atomic(out.report_path, out.result.report.dump(2) + "\n");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json meta{{"experiment", config.name},
            {"finished_utc", stamp},
            {"elapsed_seconds", elapsed},
            {"threads", threads},
            {"artifacts", Json::array()}};
  for (const auto& a : out.result.artifacts) meta["artifacts"].push_back(a.first);
  write_atomic((dir / "metadata.json").string(), meta.dump(2) + "\n");
  for (const auto& c : out.result.checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.spec.metric << " = " << c.value;
    if (c.spec.min) log << "  min " << *c.spec.min;
    if (c.spec.max) log << "  max " << *c.spec.max;
    log << '\n';
  }
  out.exit_code = out.result.passed() ? 0 : 2;
  return out;
}

}  // namespace sigmalab
