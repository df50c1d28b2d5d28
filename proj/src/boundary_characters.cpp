#include "sigmalab/boundary_characters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigmalab/error.hpp"

namespace sigmalab {

std::string_view to_string(CharacterFailureKind kind) {
  switch (kind) {
    case CharacterFailureKind::NotUnimodal: return "NotUnimodal";
    case CharacterFailureKind::PlateauOverlap: return "PlateauOverlap";
    case CharacterFailureKind::ZeroRange: return "ZeroRange";
    case CharacterFailureKind::DerivativeBound: return "DerivativeBound";
  }
  return "Unknown";
}

namespace {

template <class T>
std::vector<T> periodic_derivative(const std::vector<T>& v, double step) {
  const int n = static_cast<int>(v.size());
  auto at = [&](int i) -> const T& { return v[((i % n) + n) % n]; };
  std::vector<T> d(n);
  for (int i = 0; i < n; ++i) {
    d[i] = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * step);
  }
  return d;
}

UnimodalResult failure(CharacterFailureKind kind, std::string message) {
  UnimodalResult r;
  r.failure = CharacterFailure{kind, std::move(message), std::nullopt};
  return r;
}

}  // namespace

ScalarBoundaryDatum sample_datum(double period, int n, const std::function<double(double)>& f,
                                 const std::function<double(double)>& df) {
  ScalarBoundaryDatum d;
  d.period = period;
  d.t.resize(n);
  d.values.resize(n);
  d.derivatives.resize(n);
  for (int i = 0; i < n; ++i) {
    d.t[i] = period * i / n;
    d.values[i] = f(d.t[i]);
    d.derivatives[i] = df(d.t[i]);
  }
  return d;
}

ScalarBoundaryDatum sample_datum(double period, int n, const std::function<double(double)>& f) {
  ScalarBoundaryDatum d;
  d.period = period;
  d.t.resize(n);
  d.values.resize(n);
  for (int i = 0; i < n; ++i) {
    d.t[i] = period * i / n;
    d.values[i] = f(d.t[i]);
  }
  d.derivatives = periodic_derivative(d.values, period / n);
  return d;
}

ScalarBoundaryDatum datum_on_curve(const BoundaryCurve& curve, const std::function<double(const Vec2&)>& g,
                                   const std::function<Vec2(const Vec2&)>& gradient) {
  ScalarBoundaryDatum d;
  d.period = curve.total_length;
  for (const auto& s : curve.samples) {
    d.t.push_back(s.t);
    d.values.push_back(g(s.point));
    if (gradient) d.derivatives.push_back(gradient(s.point).dot(s.tangent));
  }
  if (!gradient) d.derivatives = periodic_derivative(d.values, curve.total_length / curve.size());
  return d;
}

VectorBoundaryDatum map_from_curve(const BoundaryCurve& curve) {
  VectorBoundaryDatum m;
  m.period = curve.total_length;
  for (const auto& s : curve.samples) {
    m.t.push_back(s.t);
    m.values.push_back(s.point);
    m.derivatives.push_back(s.tangent);
  }
  return m;
}

ScalarBoundaryDatum project(const VectorBoundaryDatum& map, const Vec2& direction) {
  ScalarBoundaryDatum d;
  d.period = map.period;
  d.t = map.t;
  d.values.reserve(map.size());
  d.derivatives.reserve(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    d.values.push_back(map.values[i].dot(direction));
    d.derivatives.push_back(map.derivatives[i].dot(direction));
  }
  return d;
}

UnimodalResult certify_unimodal(const ScalarBoundaryDatum& datum, double tol) {
  const int n = static_cast<int>(datum.size());
  if (n < 64) throw Error(ErrorCode::InvalidArgument, "certify_unimodal needs at least 64 samples");
  if (datum.values.size() != datum.t.size() || datum.derivatives.size() != datum.t.size()) {
    throw Error(ErrorCode::InvalidArgument, "datum arrays have inconsistent lengths");
  }
  const auto [lo_it, hi_it] = std::minmax_element(datum.values.begin(), datum.values.end());
  const double m = *lo_it, M = *hi_it;
  const double range = M - m;
  if (tol <= 0.0) tol = 1e-6 * range;
  if (!(range > 2.0 * tol) || !(range > 0.0)) {
    return failure(CharacterFailureKind::ZeroRange, "M - m does not exceed the plateau tolerance");
  }

  enum Label : char { Low, Mid, High };
  std::vector<Label> label(n);
  for (int i = 0; i < n; ++i) {
    const double v = datum.values[i];
    label[i] = v <= m + tol ? Low : (v >= M - tol ? High : Mid);
  }
  auto wrap = [n](int i) { return ((i % n) + n) % n; };

  // Start of the low plateau containing the global minimum.
  int start = static_cast<int>(lo_it - datum.values.begin());
  for (int k = 0; k < n && label[wrap(start - 1)] == Low; ++k) start = wrap(start - 1);
  if (label[wrap(start - 1)] == Low) {
    return failure(CharacterFailureKind::ZeroRange, "datum is constant within tolerance");
  }

  enum Stage { LowPlateau, Rising, HighPlateau, Falling };
  Stage stage = LowPlateau;
  int low_end = start, high_start = -1, high_end = -1;
  for (int k = 1; k < n; ++k) {
    const int i = wrap(start + k);
    const int prev = wrap(start + k - 1);
    const double dv = datum.values[i] - datum.values[prev];
    switch (stage) {
      case LowPlateau:
        if (label[i] == Low) {
          low_end = i;
          break;
        }
        stage = label[i] == High ? HighPlateau : Rising;
        if (stage == HighPlateau) high_start = high_end = i;
        break;
      case Rising:
        if (label[i] == Low) {
          return failure(CharacterFailureKind::NotUnimodal, "second minimum plateau before the maximum");
        }
        if (dv < -tol) {
          return failure(CharacterFailureKind::NotUnimodal,
                         "datum decreases inside the rising arc near t=" + std::to_string(datum.t[i]));
        }
        if (label[i] == High) {
          stage = HighPlateau;
          high_start = high_end = i;
        }
        break;
      case HighPlateau:
        if (label[i] == High) {
          high_end = i;
          break;
        }
        if (label[i] == Low) {
          // Jump straight back to the lower plateau closes the cycle only at the end.
          return failure(CharacterFailureKind::NotUnimodal, "second minimum plateau after the maximum");
        }
        stage = Falling;
        break;
      case Falling:
        if (label[i] == High) {
          return failure(CharacterFailureKind::NotUnimodal, "second maximum plateau");
        }
        if (label[i] == Low) {
          return failure(CharacterFailureKind::NotUnimodal, "second minimum plateau");
        }
        if (dv > tol) {
          return failure(CharacterFailureKind::NotUnimodal,
                         "datum increases inside the falling arc near t=" + std::to_string(datum.t[i]));
        }
        break;
    }
  }
  if (high_start < 0) {
    return failure(CharacterFailureKind::NotUnimodal, "no maximum plateau found");
  }
  {
    const int last = wrap(start - 1);
    if (datum.values[start] - datum.values[last] > tol) {
      return failure(CharacterFailureKind::NotUnimodal, "datum increases into the minimum plateau");
    }
  }

  // Unwrapped parameters measured from the start of the low plateau.
  const double T = datum.period;
  auto unwrap = [&](int i) {
    double t = datum.t[i];
    if (i < start) t += T;
    return t;
  };
  UnimodalCharacter c;
  c.T = T;
  c.m = m;
  c.M = M;
  c.t1 = datum.t[start];
  c.t2 = unwrap(low_end);
  c.t3 = unwrap(high_start);
  c.t4 = unwrap(high_end);
  if (!(c.t1 <= c.t2 && c.t2 < c.t3 && c.t3 <= c.t4 && c.t4 < c.t1 + T)) {
    return failure(CharacterFailureKind::PlateauOverlap, "plateau endpoints out of order");
  }

  double slope = std::numeric_limits<double>::infinity();
  int interior = 0;
  for (int i = 0; i < n; ++i) {
    const double t = unwrap(i);
    double w = 0.0, rate = 0.0;
    if (t > c.t2 && t < c.t3) {
      w = std::min(t - c.t2, c.t3 - t);
      rate = datum.derivatives[i];
    } else if (t > c.t4 && t < c.t1 + T) {
      w = std::min(t - c.t4, c.t1 + T - t);
      rate = -datum.derivatives[i];
    } else {
      continue;
    }
    ++interior;
    slope = std::min(slope, rate / w);
  }
  if (interior == 0 || !(slope > 0.0)) {
    return failure(CharacterFailureKind::DerivativeBound,
                   "no positive linear modulus satisfies the derivative bounds");
  }
  c.omega_slope = slope;
  UnimodalResult r;
  r.character = c;
  return r;
}

ConvexResult certify_convex(const VectorBoundaryDatum& map, int n_directions, double tol) {
  if (n_directions < 32) throw Error(ErrorCode::InvalidArgument, "certify_convex needs ≥ 32 directions");
  ConvexResult result;
  ConvexityCharacter c;
  c.T = map.period;
  c.D = std::numeric_limits<double>::infinity();
  c.omega_slope = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_directions; ++k) {
    const double angle = 2.0 * kPi * k / n_directions;
    const UnimodalResult r = certify_unimodal(project(map, Vec2(std::cos(angle), std::sin(angle))), tol);
    if (!r.ok()) {
      result.failure = *r.failure;
      result.failure->direction_angle = angle;
      result.failure->message += " (direction " + std::to_string(k) + ")";
      return result;
    }
    c.D = std::min(c.D, r.character->M - r.character->m);
    c.omega_slope = std::min(c.omega_slope, r.character->omega_slope);
    result.per_direction.push_back(*r.character);
  }
  c.directions_tested = n_directions;
  result.character = c;
  return result;
}

CurvatureCharacter curvature_character(const BoundaryCurve& curve, double tol) {
  if (curve.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty curve");
  CurvatureCharacter out;
  out.kappa_min = std::numeric_limits<double>::infinity();
  out.kappa_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : curve.samples) {
    const double k = cross(s.tangent, s.second);
    out.kappa_min = std::min(out.kappa_min, k);
    out.kappa_max = std::max(out.kappa_max, k);
  }
  if (!(out.kappa_min > tol)) {
    throw Error(ErrorCode::NotStrictlyConvex,
                "minimum curvature " + std::to_string(out.kappa_min) + " is not positive");
  }
  out.predicted.T = curve.total_length;
  out.predicted.D = 1.0 / out.kappa_max;
  out.predicted.omega_slope = 2.0 * out.kappa_min / kPi;
  out.predicted.directions_tested = 0;
  return out;
}

ExtremalArcs extremal_arcs(const ScalarBoundaryDatum& datum, const UnimodalCharacter& c) {
  ExtremalArcs arcs;
  arcs.T = datum.period;
  auto reduce = [&](double t) {
    double r = std::fmod(t, arcs.T);
    return r < 0.0 ? r + arcs.T : r;
  };
  arcs.gamma_min = {reduce(c.t1), c.t2 - c.t1};
  arcs.gamma_max = {reduce(c.t3), c.t4 - c.t3};
  return arcs;
}

}  // namespace sigmalab
