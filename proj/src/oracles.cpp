#include "sigmalab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sigmalab/error.hpp"

namespace sigmalab {

namespace {

Mat2 meyers_sigma(double alpha, const Vec2& x) {
  const Vec2 e = x.normalized();
  const Vec2 p(-e.y(), e.x());
  return (1.0 / alpha) * e * e.transpose() + alpha * p * p.transpose();
}

Mat2 meyers_du(double alpha, const Vec2& x) {
  const double r2 = x.squaredNorm();
  const double scale = std::pow(r2, 0.5 * (alpha - 1.0));
  return scale * (Mat2::Identity() + (alpha - 1.0) * x * x.transpose() / r2);
}

Vec3 wood_value(const Vec3& x) {
  const double x1 = x.x(), x2 = x.y(), x3 = x.z();
  return {x1 * x1 * x1 - 3.0 * x1 * x3 * x3 + x2 * x3, x2 - 3.0 * x1 * x3, x3};
}

double hermite(double s, double h, double y0, double d0, double y1, double d1) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

}  // namespace

OracleEvaluation meyers_eval(double alpha, const Vec2& x) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  OracleEvaluation ev;
  const double r2 = x.squaredNorm();
  if (r2 == 0.0) {
    if (alpha < 1.0) throw Error(ErrorCode::OriginDerivative, "DU is unbounded at the origin for alpha < 1");
    ev.U = Eigen::Vector2d::Zero();
    ev.DU = Eigen::MatrixXd::Zero(2, 2);
    if (alpha == 1.0) ev.DU.setIdentity();
    ev.det = alpha == 1.0 ? 1.0 : 0.0;
    return ev;
  }
  ev.U = std::pow(r2, 0.5 * (alpha - 1.0)) * x;
  const Mat2 du = meyers_du(alpha, x);
  ev.DU = du;
  ev.det = du(0, 0) * du(1, 1) - du(0, 1) * du(1, 0);
  return ev;
}

double meyers_residual(double alpha, const Vec2& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw Error(ErrorCode::OriginDerivative, "residual is undefined at the origin");
  const double s = 1e-5 * r;
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    double div = 0.0;
    for (int k = 0; k < 2; ++k) {
      Vec2 step = Vec2::Zero();
      step(k) = s;
      const Vec2 xp = x + step, xm = x - step;
      const Vec2 fp = meyers_sigma(alpha, xp) * meyers_du(alpha, xp).row(i).transpose();
      const Vec2 fm = meyers_sigma(alpha, xm) * meyers_du(alpha, xm).row(i).transpose();
      div += (fp(k) - fm(k)) / (2.0 * s);
    }
    worst = std::max(worst, std::abs(div));
  }
  return worst;
}

OracleEvaluation wood_eval(const Vec3& x) {
  const double x1 = x.x(), x2 = x.y(), x3 = x.z();
  OracleEvaluation ev;
  ev.U = wood_value(x);
  Mat3 du;
  du << 3.0 * x1 * x1 - 3.0 * x3 * x3, x3, x2 - 6.0 * x1 * x3,  //
      -3.0 * x3, 1.0, -3.0 * x1,                                 //
      0.0, 0.0, 1.0;
  ev.DU = du;
  ev.det = du.determinant();
  ev.residual = wood_laplacian_residual(x);
  return ev;
}

double wood_laplacian_residual(const Vec3& x, double h) {
  const Vec3 center = wood_value(x);
  Vec3 lap = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    Vec3 step = Vec3::Zero();
    step(k) = h;
    lap += (wood_value(x + step) - 2.0 * center + wood_value(x - step)) / (h * h);
  }
  return lap.cwiseAbs().maxCoeff();
}

std::size_t JinKazdanProfile::interval(double x3) const {
  const std::size_t n = grid_.size() - 1;
  const double step = x3_max_ / static_cast<double>(n);
  return std::min(n - 1, static_cast<std::size_t>(x3 / step));
}

double JinKazdanProfile::phi(double x3) const {
  if (x3 <= 0.0) return 0.0;
  if (!amplitude_.smooth) {
    const double a0 = amplitude_.a0;
    return a0 * (1.0 - a0 * a0) * x3 * x3;
  }
  if (x3 > x3_max_) throw Error(ErrorCode::InvalidArgument, "x3 beyond the integrated profile");
  const std::size_t i = interval(x3);
  const double h = grid_[i + 1] - grid_[i];
  auto dphi = [&](std::size_t k) {
    const double a = amplitude_.a(grid_[k]);
    return flux_[k] * (1.0 - a * a);
  };
  return hermite((x3 - grid_[i]) / h, h, phi_[i], dphi(i), phi_[i + 1], dphi(i + 1));
}

double JinKazdanProfile::flux(double x3) const {
  if (x3 <= 0.0) return 0.0;
  if (!amplitude_.smooth) return 2.0 * amplitude_.a0 * x3;
  if (x3 > x3_max_) throw Error(ErrorCode::InvalidArgument, "x3 beyond the integrated profile");
  const std::size_t i = interval(x3);
  const double h = grid_[i + 1] - grid_[i];
  return hermite((x3 - grid_[i]) / h, h, flux_[i], 2.0 * amplitude_.a(grid_[i]), flux_[i + 1],
                 2.0 * amplitude_.a(grid_[i + 1]));
}

double JinKazdanProfile::phi_prime(double x3) const {
  if (x3 <= 0.0) return 0.0;
  const double a = amplitude_.a(x3);
  return flux(x3) * (1.0 - a * a);
}

JinKazdanProfile jin_kazdan_smooth(const JinKazdanAmplitude& amplitude, double x3_max, int n_grid) {
  if (n_grid < 1000) throw Error(ErrorCode::InvalidArgument, "profile grid needs at least 1000 steps");
  if (!(x3_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "x3_max must be positive");
  if (!amplitude.a) throw Error(ErrorCode::InvalidArgument, "amplitude function missing");
  JinKazdanProfile p;
  p.amplitude_ = amplitude;
  p.amplitude_.smooth = true;
  p.x3_max_ = x3_max;
  const double h = x3_max / n_grid;
  const auto& a = amplitude.a;
  // State (φ, w) with φ′ = w(1 − a²), w′ = 2a.
  auto rhs = [&a](double x, double w) {
    const double ax = a(x);
    return std::pair<double, double>{w * (1.0 - ax * ax), 2.0 * ax};
  };
  double phi = 0.0, w = 0.0;
  p.grid_.push_back(0.0);
  p.phi_.push_back(0.0);
  p.flux_.push_back(0.0);
  for (int k = 0; k < n_grid; ++k) {
    const double x = k * h;
    const auto [k1p, k1w] = rhs(x, w);
    const auto [k2p, k2w] = rhs(x + 0.5 * h, w + 0.5 * h * k1w);
    const auto [k3p, k3w] = rhs(x + 0.5 * h, w + 0.5 * h * k2w);
    const auto [k4p, k4w] = rhs(x + h, w + h * k3w);
    phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    if (!std::isfinite(phi) || !std::isfinite(w)) {
      throw Error(ErrorCode::ODEStep, "non-finite profile value at x3=" + std::to_string(x + h));
    }
    p.grid_.push_back((k + 1) * h);
    p.phi_.push_back(phi);
    p.flux_.push_back(w);
  }
  for (std::size_t k = 1; k < p.grid_.size(); ++k) {
    const double ax = a(p.grid_[k]);
    if (ax > 0.0 && !(p.flux_[k] * (1.0 - ax * ax) > 0.0)) {
      throw Error(ErrorCode::InvariantViolation, "phi' is not positive at x3=" + std::to_string(p.grid_[k]));
    }
  }
  return p;
}

JinKazdanProfile jin_kazdan_piecewise(double a0) {
  JinKazdanProfile p;
  p.amplitude_ = jin_kazdan_amplitude(a0, false);
  p.x3_max_ = std::numeric_limits<double>::infinity();
  return p;
}

OracleEvaluation jin_kazdan_eval(const JinKazdanProfile& profile, const Vec3& x) {
  const double x1 = x.x(), x2 = x.y(), x3 = x.z();
  OracleEvaluation ev;
  const double dphi = profile.phi_prime(x3);
  ev.U = Vec3(x1, x2, -x1 * x2 + profile.phi(x3));
  Mat3 du;
  du << 1.0, 0.0, 0.0,  //
      0.0, 1.0, 0.0,    //
      -x2, -x1, dphi;
  ev.DU = du;
  ev.det = dphi;
  return ev;
}

double jin_kazdan_residual(const JinKazdanProfile& profile, const Vec3& x, double h) {
  const auto& a = profile.amplitude().a;
  // Flux σ∇u_i; the x₃ entry of σ∇u₃ is bφ′, taken from the profile directly.
  auto flux = [&](int i, const Vec3& p) {
    const double ap = a(p.z());
    Mat3 sigma;
    sigma << 1.0, ap, 0.0, ap, 1.0, 0.0, 0.0, 0.0, 1.0 / (1.0 - ap * ap);
    if (i < 2) return Vec3(sigma.col(i));
    Vec3 f = sigma * Vec3(-p.y(), -p.x(), 0.0);
    f.z() = profile.flux(p.z());
    return f;
  };
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    double div = 0.0;
    for (int k = 0; k < 3; ++k) {
      Vec3 step = Vec3::Zero();
      step(k) = h;
      div += (flux(i, x + step)(k) - flux(i, x - step)(k)) / (2.0 * h);
    }
    worst = std::max(worst, std::abs(div));
  }
  return worst;
}

UniqueContinuationReport unique_continuation_demo(const JinKazdanProfile& profile, int n, double x3_extent) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "grid size must be even and >= 2");
  if (x3_extent > profile.x3_max()) throw Error(ErrorCode::InvalidArgument, "x3 extent beyond the profile");
  UniqueContinuationReport r;
  r.min_det_above = std::numeric_limits<double>::infinity();
  r.min_trace = std::numeric_limits<double>::infinity();
  r.trace_bound_holds = true;
  bool below_zero = true;
  auto coord = [n](int k, double extent) { return -extent + 2.0 * extent * (k + 0.5) / n; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 x(coord(i, 1.0), coord(j, 1.0), coord(k, x3_extent));
        const OracleEvaluation ev = jin_kazdan_eval(profile, x);
        const double trace = (ev.DU.transpose() * ev.DU).trace();
        r.rows.push_back({x, ev.det, trace});
        if (x.z() <= 0.0) {
          r.max_abs_det_below = std::max(r.max_abs_det_below, std::abs(ev.det));
          below_zero &= ev.det == 0.0;
        } else {
          r.min_det_above = std::min(r.min_det_above, ev.det);
        }
        r.min_trace = std::min(r.min_trace, trace);
        r.trace_bound_holds &= trace >= 2.0 + x.x() * x.x() + x.y() * x.y() - 1e-12;
      }
    }
  }
  r.split_at_interface = below_zero && r.min_det_above > 0.0;
  return r;
}

void write_continuation_csv(std::ostream& out, const UniqueContinuationReport& report) {
  char buf[160];
  out << "x1,x2,x3,det,trace\n";
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", row.x.x(), row.x.y(), row.x.z(), row.det,
                  row.trace);
    out << buf;
  }
}

}  // namespace sigmalab
