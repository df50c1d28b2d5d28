#include "sigmalab/descriptors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "sigmalab/error.hpp"

namespace sigmalab {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(where + "." + key, "missing");
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) config_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(field, "not finite");
  return v;
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return number(j.at(key), where + "." + key);
}

int integer_or(const Json& j, const std::string& key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) config_error(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string type_of(const Json& j, const std::string& where, const char* key = "type") {
  const Json& t = require(j, key, where);
  if (!t.is_string()) config_error(where + "." + key, "expected a string");
  return t.get<std::string>();
}

double power(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

ScalarDatum from_polynomial(Polynomial2 p, std::string description) {
  ScalarDatum d;
  d.description = std::move(description);
  d.g = [p](const Vec2& x) { return p(x); };
  d.gradient = [p](const Vec2& x) { return p.gradient(x); };
  d.exact = d.g;
  return d;
}

Polynomial2 linear(double a, double b, double c) {
  Polynomial2 p;
  if (a != 0.0) p.terms.push_back({a, 1, 0});
  if (b != 0.0) p.terms.push_back({b, 0, 1});
  if (c != 0.0) p.terms.push_back({c, 0, 0});
  return p;
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ConfigError,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

double Polynomial2::operator()(const Vec2& x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.c * power(x.x(), t.i) * power(x.y(), t.j);
  return s;
}

Vec2 Polynomial2::gradient(const Vec2& x) const {
  Vec2 g = Vec2::Zero();
  for (const auto& t : terms) {
    if (t.i > 0) g.x() += t.c * t.i * power(x.x(), t.i - 1) * power(x.y(), t.j);
    if (t.j > 0) g.y() += t.c * t.j * power(x.x(), t.i) * power(x.y(), t.j - 1);
  }
  return g;
}

Mat2 matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) config_error(field, "expected a 2x2 array");
  Mat2 m;
  for (int r = 0; r < 2; ++r) {
    if (!j[r].is_array() || j[r].size() != 2) config_error(field, "expected a 2x2 array");
    for (int c = 0; c < 2; ++c) m(r, c) = number(j[r][c], field);
  }
  return m;
}

Polynomial2 polynomial_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) config_error(field, "expected a list of [c, i, j] terms");
  Polynomial2 p;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const Json& t = j[k];
    const std::string f = field + "[" + std::to_string(k) + "]";
    if (!t.is_array() || t.size() != 3 || !t[1].is_number_integer() || !t[2].is_number_integer()) {
      config_error(f, "expected [coefficient, power of x1, power of x2]");
    }
    const int i = t[1].get<int>(), jj = t[2].get<int>();
    if (i < 0 || jj < 0) config_error(f, "negative power");
    p.terms.push_back({number(t[0], f), i, jj});
  }
  return p;
}

DomainSpec domain_from_json(const Json& j) {
  const std::string where = "domain";
  const std::string type = type_of(j, where);
  const int n = integer_or(j, "n_boundary", 256, where);
  if (n < 16) config_error(where + ".n_boundary", "must be at least 16");
  DomainSpec d;
  try {
    if (type == "disk") {
      d = make_disk_domain(n);
    } else if (type == "ellipse") {
      d = make_ellipse_domain(number(require(j, "a", where), where + ".a"),
                              number(require(j, "b", where), where + ".b"), n);
    } else if (type == "star") {
      std::vector<FourierTerm> terms;
      if (j.contains("terms")) {
        const Json& ts = j.at("terms");
        if (!ts.is_array()) config_error(where + ".terms", "expected a list");
        for (std::size_t k = 0; k < ts.size(); ++k) {
          const std::string f = where + ".terms[" + std::to_string(k) + "]";
          FourierTerm t;
          t.k = integer_or(ts[k], "k", 1, f);
          t.a = number_or(ts[k], "a", 0.0, f);
          t.b = number_or(ts[k], "b", 0.0, f);
          terms.push_back(t);
        }
      }
      d = make_star_domain(fourier_radius(number_or(j, "r0", 1.0, where), terms), n);
    } else if (type == "points") {
      const Json& pts = require(j, "points", where);
      if (!pts.is_array() || pts.size() < 16) config_error(where + ".points", "expected at least 16 points");
      std::vector<Vec2> p;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::string f = where + ".points[" + std::to_string(k) + "]";
        if (!pts[k].is_array() || pts[k].size() != 2) config_error(f, "expected [x, y]");
        p.emplace_back(number(pts[k][0], f), number(pts[k][1], f));
      }
      d.boundary = curve_from_points(p);
    } else {
      config_error(where + ".type", "unknown domain type '" + type + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(where, e.what());
  }
  if (j.contains("regularity")) {
    const Json& r = j.at("regularity");
    const std::string f = where + ".regularity";
    d.regularity = Regularity{number(require(r, "rho0", f), f + ".rho0"), number(require(r, "M0", f), f + ".M0"),
                              number_or(r, "alpha", 1.0, f)};
  }
  return d;
}

CoefficientField coefficient_from_json(const Json& j) {
  const std::string where = "coefficient";
  const std::string family = type_of(j, where, "family");
  try {
    if (family == "identity") return family_isotropic(1.0);
    if (family == "isotropic") return family_isotropic(number(require(j, "value", where), where + ".value"));
    if (family == "constant") return family_constant(matrix_from_json(require(j, "matrix", where), where + ".matrix"));
    if (family == "meyers") return family_meyers(number(require(j, "alpha", where), where + ".alpha"));
    if (family == "jin_kazdan") {
      const bool smooth = j.value("smooth", true);
      return family_jin_kazdan(number_or(j, "a0", 0.5, where), smooth);
    }
    if (family == "smooth_random") {
      SmoothRandomOptions o;
      o.seed = static_cast<std::uint64_t>(integer_or(j, "seed", 0, where));
      o.K_target = number_or(j, "K", 2.0, where);
      o.holder_alpha = number_or(j, "holder_alpha", 1.0, where);
      o.skew = number_or(j, "skew", 0.0, where);
      o.modes = integer_or(j, "modes", 3, where);
      return family_smooth_random(o);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(where, e.what());
  }
  config_error(where + ".family", "unknown coefficient family '" + family + "'");
}

ScalarDatum scalar_datum_from_json(const Json& j) {
  const std::string where = "datum";
  const std::string type = type_of(j, where);
  if (type == "x1") return from_polynomial(linear(1, 0, 0), "x1");
  if (type == "x2") return from_polynomial(linear(0, 1, 0), "x2");
  if (type == "polynomial") {
    return from_polynomial(polynomial_from_json(require(j, "terms", where), where + ".terms"), "polynomial");
  }
  config_error(where + ".type", "unknown scalar datum type '" + type + "'");
}

MapDatum map_datum_from_json(const Json& j) {
  const std::string where = "datum";
  const std::string type = type_of(j, where);
  MapDatum m;
  m.description = type;
  if (type == "identity") {
    m.phi1 = from_polynomial(linear(1, 0, 0), "x1");
    m.phi2 = from_polynomial(linear(0, 1, 0), "x2");
  } else if (type == "affine") {
    const Mat2 A = matrix_from_json(require(j, "A", where), where + ".A");
    Vec2 b = Vec2::Zero();
    if (j.contains("b")) {
      const Json& bj = j.at("b");
      if (!bj.is_array() || bj.size() != 2) config_error(where + ".b", "expected [b1, b2]");
      b << number(bj[0], where + ".b"), number(bj[1], where + ".b");
    }
    m.phi1 = from_polynomial(linear(A(0, 0), A(0, 1), b(0)), "affine");
    m.phi2 = from_polynomial(linear(A(1, 0), A(1, 1), b(1)), "affine");
  } else if (type == "polynomial") {
    m.phi1 = from_polynomial(polynomial_from_json(require(j, "u1", where), where + ".u1"), "polynomial");
    m.phi2 = from_polynomial(polynomial_from_json(require(j, "u2", where), where + ".u2"), "polynomial");
  } else if (type == "meyers") {
    // |x|^{α−1}x, the exact σ-harmonic map of the Meyers coefficient.
    const double alpha = number(require(j, "alpha", where), where + ".alpha");
    if (!(alpha > 0.0)) config_error(where + ".alpha", "must be positive");
    for (int i = 0; i < 2; ++i) {
      ScalarDatum& d = i == 0 ? m.phi1 : m.phi2;
      d.description = "meyers";
      d.g = [alpha, i](const Vec2& x) {
        const double r = x.norm();
        return r == 0.0 ? 0.0 : std::pow(r, alpha - 1.0) * x(i);
      };
      d.exact = d.g;
      d.gradient = [alpha, i](const Vec2& x) {
        const double r = x.norm();
        if (r == 0.0) return Vec2::Zero().eval();
        const double s = std::pow(r, alpha - 1.0);
        Vec2 g = (alpha - 1.0) * s * x(i) * x / (r * r);
        g(i) += s;
        return g;
      };
    }
  } else {
    config_error(where + ".type", "unknown map datum type '" + type + "'");
  }
  return m;
}

namespace {

bool affine_terms(const Polynomial2& p) {
  for (const auto& t : p.terms) {
    if (t.i + t.j > 1) return false;
  }
  return true;
}

bool harmonic_terms(const Polynomial2& p) {
  std::map<std::pair<int, int>, double> lap;
  double scale = 0.0;
  for (const auto& t : p.terms) {
    scale = std::max(scale, std::abs(t.c));
    if (t.i >= 2) lap[{t.i - 2, t.j}] += t.c * t.i * (t.i - 1);
    if (t.j >= 2) lap[{t.i, t.j - 2}] += t.c * t.j * (t.j - 1);
  }
  for (const auto& [k, v] : lap) {
    if (std::abs(v) > 1e-12 * std::max(scale, 1.0)) return false;
  }
  return true;
}

std::vector<Polynomial2> datum_polynomials(const Json& datum) {
  const std::string type = datum.value("type", std::string());
  if (type == "x1" || type == "x2" || type == "identity") return {linear(1, 0, 0)};
  if (type == "affine") return {linear(1, 0, 0)};
  if (type == "polynomial") {
    std::vector<Polynomial2> out;
    for (const char* key : {"terms", "u1", "u2"}) {
      if (datum.contains(key)) out.push_back(polynomial_from_json(datum.at(key), std::string("datum.") + key));
    }
    return out;
  }
  return {};
}

}  // namespace

bool extension_solves(const Json& datum, const Json& coefficient) {
  if (!datum.is_object() || !coefficient.is_object()) return false;
  const std::string family = coefficient.value("family", std::string());
  const std::string type = datum.value("type", std::string());
  if (type == "meyers") {
    if (family == "meyers") return coefficient.value("alpha", 0.0) == datum.value("alpha", -1.0);
    return datum.value("alpha", 0.0) == 1.0 && (family == "identity" || family == "isotropic");
  }
  const auto polys = datum_polynomials(datum);
  if (polys.empty()) return false;
  const bool isotropic = family == "identity" || family == "isotropic" ||
                         (family == "meyers" && coefficient.value("alpha", 0.0) == 1.0);
  const bool constant = isotropic || family == "constant";
  for (const auto& p : polys) {
    if (affine_terms(p) ? !constant : !(isotropic && harmonic_terms(p))) return false;
  }
  return true;
}

PhaseLayout layout_from_json(const Json& j) {
  const std::string where = "layout";
  std::vector<double> sigmas;
  {
    const Json& s = require(j, "sigmas", where);
    if (!s.is_array() || s.empty()) config_error(where + ".sigmas", "expected a non-empty list");
    for (const auto& v : s) sigmas.push_back(number(v, where + ".sigmas"));
  }
  PhaseLayout layout;
  auto grid = [&](PhaseLayout& l) {
    if (j.contains("grid_n")) {
      l.nx = l.ny = integer_or(j, "grid_n", 1, where);
    } else {
      l.nx = integer_or(j, "nx", 1, where);
      l.ny = integer_or(j, "ny", 1, where);
    }
  };
  try {
    if (j.contains("random")) {
      const Json& r = j.at("random");
      layout = random_layout(integer_or(r, "n", 4, where + ".random"), sigmas,
                             static_cast<std::uint64_t>(integer_or(r, "seed", 0, where + ".random")));
    } else if (j.contains("counts")) {
      // Phases filled in cell-index order with the given cell counts.
      grid(layout);
      layout.sigmas = sigmas;
      const Json& c = j.at("counts");
      if (!c.is_array() || c.size() != sigmas.size()) config_error(where + ".counts", "one count per phase");
      for (std::size_t p = 0; p < c.size(); ++p) {
        if (!c[p].is_number_integer() || c[p].get<int>() < 0) config_error(where + ".counts", "expected counts ≥ 0");
        layout.phase_of_cell.insert(layout.phase_of_cell.end(), c[p].get<int>(), static_cast<int>(p));
      }
    } else {
      grid(layout);
      layout.sigmas = sigmas;
      const Json& ph = require(j, "phases", where);
      if (!ph.is_array()) config_error(where + ".phases", "expected a list of phase indices");
      for (const auto& v : ph) {
        if (!v.is_number_integer()) config_error(where + ".phases", "expected integers");
        layout.phase_of_cell.push_back(v.get<int>());
      }
    }
    if (static_cast<int>(layout.phase_of_cell.size()) != layout.num_cells()) {
      config_error(where, "cell count does not match nx*ny");
    }
    layout.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(where, e.what());
  }
  return layout;
}

Json to_json(const UnimodalCharacter& c) {
  return Json{{"T", c.T}, {"m", c.m}, {"M", c.M}, {"t1", c.t1}, {"t2", c.t2},
              {"t3", c.t3}, {"t4", c.t4}, {"omega_slope", c.omega_slope}};
}

Json to_json(const ConvexityCharacter& c) {
  return Json{{"T", c.T}, {"D", c.D}, {"omega_slope", c.omega_slope}, {"directions_tested", c.directions_tested}};
}

Json to_json(const CharacterFailure& f) {
  Json j{{"kind", std::string(to_string(f.kind))}, {"message", f.message}};
  if (f.direction_angle) j["direction_angle"] = *f.direction_angle;
  return j;
}

Json to_json(const Mat2& m) { return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})}); }

Json to_json(const BoundResult& r) {
  Json j{{"value", r.value},
         {"mean_residual", r.mean_residual},
         {"det_residual", r.det_residual},
         {"min_det", r.min_det},
         {"multiplier", r.multiplier},
         {"iterations", r.iterations},
         {"certified", r.certified},
         {"non_convex_regime", r.non_convex_regime},
         {"infeasible", r.infeasible},
         {"message", r.message}};
  if (!r.phase_multipliers.empty()) j["phase_multipliers"] = r.phase_multipliers;
  j["dual_bound"] = r.dual_bound ? Json(*r.dual_bound) : Json(nullptr);
  return j;
}

Json to_json(const PowerLawFit& f) {
  return Json{{"exponent", f.exponent}, {"r_squared", f.r_squared}, {"bins_used", f.bins_used}};
}

Json to_json(const PhaseLayout& layout) {
  return Json{{"nx", layout.nx}, {"ny", layout.ny}, {"sigmas", layout.sigmas}, {"phases", layout.phase_of_cell},
              {"fractions", layout.fractions()}};
}

Json character_report(const DomainSpec& domain, int n_directions) {
  Json j;
  const BoundaryCurve& curve = domain.boundary;
  j["samples"] = curve.size();
  j["total_length"] = curve.total_length;
  const ConvexResult measured = certify_convex(map_from_curve(curve), n_directions);
  if (measured.ok()) {
    j["measured"] = to_json(*measured.character);
  } else {
    j["measured"] = nullptr;
    j["failure"] = to_json(*measured.failure);
  }
  try {
    const CurvatureCharacter pred = curvature_character(curve);
    j["kappa_min"] = pred.kappa_min;
    j["kappa_max"] = pred.kappa_max;
    j["predicted"] = to_json(pred.predicted);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotStrictlyConvex) throw;
    j["predicted"] = nullptr;
    j["prediction_error"] = e.what();
  }
  j["certified"] = measured.ok();
  return j;
}

}  // namespace sigmalab
