#include "sigmalab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "sigmalab/error.hpp"

namespace sigmalab {

CoefficientField::CoefficientField(Eval2 eval, double K, bool symmetric, std::string description,
                                   std::optional<HolderData> holder)
    : dim_(2), eval2_(std::move(eval)), K_(K), symmetric_(symmetric),
      description_(std::move(description)), holder_(holder) {}

CoefficientField::CoefficientField(Eval3 eval, double K, bool symmetric, std::string description,
                                   std::optional<HolderData> holder)
    : dim_(3), eval3_(std::move(eval)), K_(K), symmetric_(symmetric),
      description_(std::move(description)), holder_(holder) {}

Mat2 CoefficientField::eval(const Vec2& x) const {
  if (dim_ != 2) throw Error(ErrorCode::InvalidArgument, description_ + " is a 3x3 field");
  return eval2_(x);
}

Mat3 CoefficientField::eval3(const Vec3& x) const {
  if (dim_ != 3) throw Error(ErrorCode::InvalidArgument, description_ + " is a 2x2 field");
  return eval3_(x);
}

namespace {

template <int N>
void accumulate_ellipticity(const Eigen::Matrix<double, N, N>& sigma, double K, std::size_t index,
                            EllipticityReport& report) {
  using MatN = Eigen::Matrix<double, N, N>;
  if (!(sigma.determinant() > 1e-14)) {
    throw Error(ErrorCode::SingularMatrix, "det sigma <= 1e-14 at sample " + std::to_string(index));
  }
  const MatN sym = 0.5 * (sigma + sigma.transpose());
  const MatN inv = sigma.inverse();
  const MatN inv_sym = 0.5 * (inv + inv.transpose());
  Eigen::SelfAdjointEigenSolver<MatN> fwd(sym), bwd(inv_sym);
  const double f = fwd.eigenvalues()(0);
  const double b = bwd.eigenvalues()(0);
  const double bound = 1.0 / K - 1e-10;
  if ((f < bound || b < bound) && !report.violating_point) {
    report.violating_point = index;
    const auto v = (f < bound ? fwd.eigenvectors().col(0) : bwd.eigenvectors().col(0)).eval();
    report.violating_angle = std::atan2(v(1), v(0));
  }
  report.worst_ratio_forward = std::min(report.worst_ratio_forward, f);
  report.worst_ratio_inverse = std::min(report.worst_ratio_inverse, b);
}

}  // namespace

EllipticityReport verify_ellipticity(const CoefficientField& field, const std::vector<Vec2>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no sample points");
  EllipticityReport report;
  report.worst_ratio_forward = report.worst_ratio_inverse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    accumulate_ellipticity<2>(field.eval(points[i]), field.K(), i, report);
  }
  report.passes = !report.violating_point.has_value();
  return report;
}

EllipticityReport verify_ellipticity(const CoefficientField& field, const std::vector<Vec3>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no sample points");
  EllipticityReport report;
  report.worst_ratio_forward = report.worst_ratio_inverse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    accumulate_ellipticity<3>(field.eval3(points[i]), field.K(), i, report);
  }
  report.passes = !report.violating_point.has_value();
  return report;
}

HolderReport verify_holder(const CoefficientField& field, double lo, double hi, int pairs,
                           std::uint64_t seed) {
  if (!field.holder()) throw Error(ErrorCode::InvalidArgument, field.description() + " has no Hölder data");
  const HolderData h = *field.holder();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(lo, hi);
  HolderReport report;
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < pairs; ++p) {
    const Vec2 x(coord(rng), coord(rng));
    const Vec2 y(coord(rng), coord(rng));
    const double allowance = h.E * std::pow((x - y).norm(), h.alpha);
    const Mat2 diff = field.eval(x) - field.eval(y);
    report.worst_excess = std::max(report.worst_excess, diff.cwiseAbs().maxCoeff() - allowance);
  }
  report.passes = report.worst_excess <= 1e-10;
  return report;
}

BeltramiPair complex_dilatations(const Mat2& s) {
  const double den = 1.0 + s.trace() + s.determinant();
  BeltramiPair p;
  p.mu = Complex(s(1, 1) - s(0, 0), -(s(0, 1) + s(1, 0))) / den;
  p.nu = Complex(1.0 - s.determinant(), s(0, 1) - s(1, 0)) / den;
  return p;
}

BeltramiPair beltrami_dilatations(const Mat2& sigma, double K) {
  if (!(1.0 + sigma.trace() + sigma.determinant() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "1 + tr sigma + det sigma must be positive");
  }
  const BeltramiPair p = complex_dilatations(sigma);
  const double bound = (K - 1.0) / (K + 1.0);
  if (std::abs(p.mu) + std::abs(p.nu) > bound + 1e-12) {
    throw Error(ErrorCode::InvariantViolation,
                "|mu|+|nu| = " + std::to_string(std::abs(p.mu) + std::abs(p.nu)) +
                    " exceeds (K-1)/(K+1) = " + std::to_string(bound));
  }
  return p;
}

double ellipticity_constant(const Mat2& sigma) {
  if (!(sigma.determinant() > 1e-14)) throw Error(ErrorCode::SingularMatrix, "singular sigma");
  const Mat2 sym = 0.5 * (sigma + sigma.transpose());
  const Mat2 inv = sigma.inverse();
  const Mat2 inv_sym = 0.5 * (inv + inv.transpose());
  const double f = Eigen::SelfAdjointEigenSolver<Mat2>(sym).eigenvalues()(0);
  const double b = Eigen::SelfAdjointEigenSolver<Mat2>(inv_sym).eigenvalues()(0);
  if (!(f > 0.0 && b > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma is not elliptic");
  // For nonsymmetric σ the two quadratic-form bounds do not control |μ|+|ν|;
  // the constant also has to cover k = |μ|+|ν| through K = (1+k)/(1−k).
  const BeltramiPair p = complex_dilatations(sigma);
  const double k = std::abs(p.mu) + std::abs(p.nu);
  return std::max({1.0 / f, 1.0 / b, (1.0 + k) / (1.0 - k), 1.0});
}

CoefficientField family_constant(const Mat2& sigma) {
  const bool sym = sigma(0, 1) == sigma(1, 0);
  return CoefficientField(CoefficientField::Eval2([sigma](const Vec2&) { return sigma; }), ellipticity_constant(sigma), sym,
                          "constant", HolderData{1.0, 0.0});
}

CoefficientField family_isotropic(double value) {
  if (!(value > 0.0)) throw Error(ErrorCode::InvalidArgument, "conductivity must be positive");
  return family_constant(value * Mat2::Identity());
}

CoefficientField family_meyers(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "Meyers alpha must be positive");
  const double inv = 1.0 / alpha;
  auto eval = [alpha, inv](const Vec2& x) {
    const double r2 = x.squaredNorm();
    Mat2 s;
    if (r2 == 0.0) {
      s << inv, 0.0, 0.0, alpha;
      return s;
    }
    const double x1 = x.x(), x2 = x.y();
    const double off = (inv - alpha) * x1 * x2 / r2;
    s << (inv * x1 * x1 + alpha * x2 * x2) / r2, off, off, (alpha * x1 * x1 + inv * x2 * x2) / r2;
    return s;
  };
  return CoefficientField(CoefficientField::Eval2(eval), std::max(alpha, inv), true,
                          "meyers(alpha=" + std::to_string(alpha) + ")");
}

JinKazdanAmplitude jin_kazdan_amplitude(double a0, bool smooth) {
  if (!(a0 > 0.0 && a0 < 1.0)) throw Error(ErrorCode::A0OutOfRange, "a0 must lie in (0,1)");
  JinKazdanAmplitude amp;
  amp.a0 = a0;
  amp.smooth = smooth;
  if (smooth) {
    amp.a = [a0](double x3) { return x3 > 0.0 ? a0 * std::exp(-1.0 / x3) : 0.0; };
    amp.da = [a0](double x3) { return x3 > 0.0 ? a0 * std::exp(-1.0 / x3) / (x3 * x3) : 0.0; };
  } else {
    amp.a = [a0](double x3) { return x3 > 0.0 ? a0 : 0.0; };
    amp.da = [](double) { return 0.0; };
  }
  return amp;
}

CoefficientField family_jin_kazdan(const JinKazdanAmplitude& amplitude) {
  if (!(amplitude.a0 > 0.0 && amplitude.a0 < 1.0)) {
    throw Error(ErrorCode::A0OutOfRange, "a0 must lie in (0,1)");
  }
  auto a = amplitude.a;
  auto eval = [a](const Vec3& x) {
    const double ax = a(x.z());
    Mat3 s;
    s << 1.0, ax, 0.0, ax, 1.0, 0.0, 0.0, 0.0, 1.0 / (1.0 - ax * ax);
    return s;
  };
  // Block eigenvalues 1 ± a and b = 1/(1 − a²): the binding bound is 1 − a0 ≥ 1/K.
  const double a0 = amplitude.a0;
  const double K = std::max({1.0 / (1.0 - a0), 1.0 + a0, 1.0 / (1.0 - a0 * a0)});
  return CoefficientField(CoefficientField::Eval3(eval), K, true,
                          std::string("jin_kazdan(") + (amplitude.smooth ? "smooth" : "piecewise") +
                              ", a0=" + std::to_string(a0) + ")");
}

CoefficientField family_jin_kazdan(double a0, bool smooth) {
  return family_jin_kazdan(jin_kazdan_amplitude(a0, smooth));
}

namespace {

// Normalized trigonometric polynomial with values in [−1, 1].
struct TrigMode {
  Vec2 k;
  double phase;
  double weight;
};

struct TrigPoly {
  std::vector<TrigMode> modes;

  double operator()(const Vec2& x) const {
    double v = 0.0;
    for (const auto& m : modes) v += m.weight * std::cos(m.k.dot(x) + m.phase);
    return v;
  }

  double gradient_bound() const {
    double g = 0.0;
    for (const auto& m : modes) g += std::abs(m.weight) * m.k.norm();
    return g;
  }
};

TrigPoly random_poly(std::mt19937_64& rng, int modes) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrigPoly p;
  double total = 0.0;
  for (int i = 0; i < modes; ++i) {
    const double freq = 0.5 + 2.0 * unit(rng);
    const double dir = 2.0 * kPi * unit(rng);
    TrigMode m{Vec2(freq * std::cos(dir), freq * std::sin(dir)), 2.0 * kPi * unit(rng), 0.5 + 0.5 * unit(rng)};
    total += m.weight;
    p.modes.push_back(m);
  }
  for (auto& m : p.modes) m.weight /= total;
  return p;
}

double beltrami_box_max(double q, double s) {
  constexpr int n = 33;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double l1 = std::exp(std::log(q) * (2.0 * i / (n - 1) - 1.0));
      const double l2 = std::exp(std::log(q) * (2.0 * j / (n - 1) - 1.0));
      for (double sk : {-s, s}) {
        Mat2 m;
        m << l1, -sk, sk, l2;
        const BeltramiPair p = complex_dilatations(m);
        worst = std::max(worst, std::abs(p.mu) + std::abs(p.nu));
      }
    }
  }
  return worst;
}

// Largest skew amplitude keeping both the inverse ellipticity bound and the
// Beltrami bound on the eigenvalue box [1/q, q]², halved for margin.
double admissible_skew(double K, double q) {
  const double target = (K - 1.0) / (K + 1.0);
  double lo = 0.0, hi = std::sqrt((K - q) / q);
  if (beltrami_box_max(q, hi) <= target) return 0.5 * hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (beltrami_box_max(q, mid) <= target ? lo : hi) = mid;
  }
  return 0.5 * lo;
}

}  // namespace

CoefficientField family_smooth_random(const SmoothRandomOptions& opt) {
  if (!(opt.K_target > 1.0)) throw Error(ErrorCode::InvalidArgument, "K_target must exceed 1");
  if (!(opt.holder_alpha > 0.0 && opt.holder_alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "holder_alpha must lie in (0,1]");
  }
  if (opt.skew < 0.0 || opt.skew > 1.0) throw Error(ErrorCode::InvalidArgument, "skew must lie in [0,1]");
  std::mt19937_64 rng(opt.seed);
  auto l1 = random_poly(rng, opt.modes);
  auto l2 = random_poly(rng, opt.modes);
  auto th = random_poly(rng, opt.modes);
  auto sk = random_poly(rng, opt.modes);

  const double K = opt.K_target;
  const double q = std::sqrt(K);
  const double log_q = std::log(q);
  const double skew_amp = opt.skew > 0.0 ? opt.skew * admissible_skew(K, q) : 0.0;

  auto eval = [l1, l2, th, sk, log_q, skew_amp](const Vec2& x) {
    const double lam1 = std::exp(log_q * l1(x));
    const double lam2 = std::exp(log_q * l2(x));
    const Mat2 r = rotation(kPi * th(x));
    Mat2 s = r * Vec2(lam1, lam2).asDiagonal() * r.transpose();
    s(0, 1) = s(1, 0) = 0.5 * (s(0, 1) + s(1, 0));
    if (skew_amp > 0.0) s += skew_amp * sk(x) * rotation_j();
    return s;
  };

  // Lipschitz bound of the entries, converted to a Hölder constant on a box of
  // diameter 4√2 (the region [-2,2]² used by all experiments).
  const double lip = q * log_q * (l1.gradient_bound() + l2.gradient_bound()) +
                     (q - 1.0 / q) * kPi * th.gradient_bound() + skew_amp * sk.gradient_bound();
  const double diam = 4.0 * std::sqrt(2.0);
  const HolderData holder{opt.holder_alpha, lip * std::pow(diam, 1.0 - opt.holder_alpha)};
  return CoefficientField(CoefficientField::Eval2(eval), K, skew_amp == 0.0,
                          "smooth_random(seed=" + std::to_string(opt.seed) + ")", holder);
}

}  // namespace sigmalab
