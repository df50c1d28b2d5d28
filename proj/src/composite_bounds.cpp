#include "sigmalab/composite_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "sigmalab/elliptic_solver.hpp"
#include "sigmalab/error.hpp"

namespace sigmalab {

std::vector<int> PhaseLayout::counts() const {
  std::vector<int> c(sigmas.size(), 0);
  for (int p : phase_of_cell) ++c[p];
  return c;
}

std::vector<double> PhaseLayout::fractions() const {
  const auto c = counts();
  std::vector<double> f(c.size());
  for (std::size_t p = 0; p < c.size(); ++p) f[p] = static_cast<double>(c[p]) / num_cells();
  return f;
}

void PhaseLayout::validate() const {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::InvalidArgument, "grid must have at least one cell");
  if (static_cast<int>(phase_of_cell.size()) != num_cells()) {
    throw Error(ErrorCode::InvalidArgument, "phase_of_cell has the wrong length");
  }
  if (sigmas.empty()) throw Error(ErrorCode::InvalidArgument, "no phases");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "phase conductivity must be positive");
  }
  for (int p : phase_of_cell) {
    if (p < 0 || p >= num_phases()) throw Error(ErrorCode::InvalidArgument, "phase index out of range");
  }
  for (int c : counts()) {
    if (c == 0) throw Error(ErrorCode::InvalidArgument, "every phase must occupy at least one cell");
  }
}

PhaseLayout single_phase_layout(double sigma, int n) {
  PhaseLayout l;
  l.nx = l.ny = n;
  l.sigmas = {sigma};
  l.phase_of_cell.assign(n * n, 0);
  l.validate();
  return l;
}

PhaseLayout random_layout(int n, const std::vector<double>& sigmas, std::uint64_t seed) {
  const int P = static_cast<int>(sigmas.size());
  if (n * n < P) throw Error(ErrorCode::InvalidArgument, "grid too small for the number of phases");
  PhaseLayout l;
  l.nx = l.ny = n;
  l.sigmas = sigmas;
  std::mt19937_64 rng(seed);
  std::vector<int> cells(n * n);
  for (int c = 0; c < n * n; ++c) cells[c] = c % P;
  // Fisher–Yates with an explicit draw keeps the layout identical across
  // standard library implementations.
  for (int i = n * n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(cells[i], cells[j]);
  }
  l.phase_of_cell = cells;
  l.validate();
  return l;
}

double wiener_bound(const PhaseLayout& layout, const Mat2& A) {
  layout.validate();
  const auto f = layout.fractions();
  double inv = 0.0;
  for (int p = 0; p < layout.num_phases(); ++p) inv += f[p] / layout.sigmas[p];
  return (A.transpose() * A).trace() / inv;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat2 conformal(double a, double b) {
  Mat2 m;
  m << a, -b, b, a;
  return m;
}

Mat2 anticonformal(double c, double d) {
  Mat2 m;
  m << c, d, d, -c;
  return m;
}

double det2(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

// Dual of the per-cell problem with per-phase multipliers τ_p: the conformal
// part of B sees the weights s_p − τ_p, the anticonformal part s_p + τ_p.
class Dual {
 public:
  Dual(const PhaseLayout& layout, const Mat2& A) : P_(layout.num_phases()) {
    const auto c = layout.counts();
    for (int p = 0; p < P_; ++p) {
      s_.push_back(layout.sigmas[p]);
      W_.push_back(static_cast<double>(c[p]) / layout.num_cells());
      n_.push_back(c[p]);
    }
    a_ = 0.5 * (A(0, 0) + A(1, 1));
    b_ = 0.5 * (A(1, 0) - A(0, 1));
    c_ = 0.5 * (A(0, 0) - A(1, 1));
    d_ = 0.5 * (A(0, 1) + A(1, 0));
    a2p_ = 2.0 * (a_ * a_ + b_ * b_);
    a2m_ = 2.0 * (c_ * c_ + d_ * d_);
    detA_ = det2(A);
    scale_ = *std::max_element(s_.begin(), s_.end()) * std::max(1.0, a2p_ + a2m_);
  }

  int phases() const { return P_; }
  double scale() const { return scale_; }
  double detA() const { return detA_; }
  double W(int p) const { return W_[p]; }
  int count(int p) const { return n_[p]; }
  double a2p() const { return a2p_; }
  double a2m() const { return a2m_; }

  // One side of the inner problem is bounded below on zero-mean fields iff
  // all weights are positive, or a single one-cell phase is negative and the
  // weighted harmonic sum is negative.
  bool side_valid(const std::vector<double>& d) const {
    int negative = -1;
    double sum = 0.0;
    for (int p = 0; p < P_; ++p) {
      if (!(d[p] != 0.0) || !std::isfinite(d[p])) return false;
      if (d[p] < 0.0) {
        if (negative >= 0 || n_[p] != 1) return false;
        negative = p;
      }
      sum += W_[p] / d[p];
    }
    return negative < 0 || sum < 0.0;
  }

  std::vector<double> plus(const std::vector<double>& tau) const {
    std::vector<double> d(P_);
    for (int p = 0; p < P_; ++p) d[p] = s_[p] - tau[p];
    return d;
  }
  std::vector<double> minus(const std::vector<double>& tau) const {
    std::vector<double> d(P_);
    for (int p = 0; p < P_; ++p) d[p] = s_[p] + tau[p];
    return d;
  }

  bool valid(const std::vector<double>& tau) const { return side_valid(plus(tau)) && side_valid(minus(tau)); }

  static double harmonic(const std::vector<double>& W, const std::vector<double>& d) {
    double sum = 0.0;
    for (std::size_t p = 0; p < d.size(); ++p) sum += W[p] / d[p];
    return 1.0 / sum;
  }

  double value(double t, const std::vector<double>& tau) const {
    double g = 2.0 * t * detA_;
    if (a2p_ > 0.0) g += a2p_ * harmonic(W_, plus(tau));
    if (a2m_ > 0.0) g += a2m_ * harmonic(W_, minus(tau));
    return g;
  }

  // γ_p = ∂G/∂τ_p = −2 W_p det B_p and the Hessian in τ.
  void derivatives(const std::vector<double>& tau, std::vector<double>& gamma, Eigen::MatrixXd& H) const {
    gamma.assign(P_, 0.0);
    H = Eigen::MatrixXd::Zero(P_, P_);
    auto side = [&](const std::vector<double>& d, double a2, double sign) {
      if (a2 == 0.0) return;
      const double hm = harmonic(W_, d);
      std::vector<double> u(P_);
      for (int p = 0; p < P_; ++p) u[p] = W_[p] / (d[p] * d[p]);
      for (int p = 0; p < P_; ++p) {
        gamma[p] += -sign * a2 * hm * hm * u[p];
        for (int q = 0; q < P_; ++q) {
          H(p, q) += a2 * 2.0 * hm * hm * hm * u[p] * u[q];
        }
        H(p, p) -= a2 * 2.0 * hm * hm * W_[p] / (d[p] * d[p] * d[p]);
      }
    };
    side(plus(tau), a2p_, 1.0);
    side(minus(tau), a2m_, -1.0);
  }

  // Per-phase matrices B_p at τ, before any null-direction completion.
  std::vector<Mat2> primal(const std::vector<double>& tau) const {
    std::vector<Mat2> B(P_, Mat2::Zero());
    const auto dp = plus(tau), dm = minus(tau);
    const double hp = a2p_ > 0.0 ? harmonic(W_, dp) : 0.0;
    const double hmn = a2m_ > 0.0 ? harmonic(W_, dm) : 0.0;
    for (int p = 0; p < P_; ++p) {
      if (a2p_ > 0.0) B[p] += (hp / dp[p]) * conformal(a_, b_);
      if (a2m_ > 0.0) B[p] += (hmn / dm[p]) * anticonformal(c_, d_);
    }
    return B;
  }

  // Unit coordinates in the conformal (or anticonformal) plane orthogonal to
  // the corresponding part of A.
  Vec2 orthogonal_direction(bool conformal_side) const {
    Vec2 v = conformal_side ? Vec2(-b_, a_) : Vec2(-d_, c_);
    if (v.norm() == 0.0) return Vec2(1.0, 0.0);
    return v.normalized();
  }

 private:
  int P_;
  std::vector<double> s_, W_;
  std::vector<int> n_;
  double a_ = 0, b_ = 0, c_ = 0, d_ = 0;
  double a2p_ = 0, a2m_ = 0, detA_ = 0, scale_ = 1;
};

struct Ascent {
  double t = 0.0;
  std::vector<double> lambda;
  double value = -kInf;
  double grad_norm = kInf;
  bool converged = false;
  int iterations = 0;
};

std::vector<double> taus(const Dual& dual, double t, const std::vector<double>& lambda) {
  std::vector<double> tau(dual.phases());
  for (int p = 0; p < dual.phases(); ++p) tau[p] = t + lambda[p];
  return tau;
}

// Damped Newton ascent of the concave dual in (t, λ_S) with λ_p = 0 off S.
Ascent maximize(const Dual& dual, const std::vector<int>& free_phases) {
  const int P = dual.phases();
  const int m = 1 + static_cast<int>(free_phases.size());
  Ascent st;
  st.lambda.assign(P, 0.0);
  auto pack_tau = [&](const Eigen::VectorXd& x) {
    std::vector<double> lambda(P, 0.0);
    for (std::size_t k = 0; k < free_phases.size(); ++k) lambda[free_phases[k]] = x(1 + k);
    return std::pair{taus(dual, x(0), lambda), lambda};
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  const double tol = 1e-13 * dual.scale();
  double G = dual.value(0.0, taus(dual, 0.0, st.lambda));
  for (int it = 0; it < 400; ++it) {
    st.iterations = it + 1;
    const auto [tau, lambda] = pack_tau(x);
    std::vector<double> gamma;
    Eigen::MatrixXd Ht;
    dual.derivatives(tau, gamma, Ht);
    Eigen::VectorXd g(m);
    Eigen::MatrixXd H(m, m);
    g(0) = std::accumulate(gamma.begin(), gamma.end(), 0.0) + 2.0 * dual.detA();
    H(0, 0) = Ht.sum();
    for (std::size_t k = 0; k < free_phases.size(); ++k) {
      const int p = free_phases[k];
      g(1 + k) = gamma[p];
      H(0, 1 + k) = H(1 + k, 0) = Ht.col(p).sum();
      for (std::size_t l = 0; l < free_phases.size(); ++l) H(1 + k, 1 + l) = Ht(p, free_phases[l]);
    }
    st.grad_norm = g.cwiseAbs().maxCoeff();
    if (st.grad_norm <= tol) {
      st.converged = true;
      break;
    }
    Eigen::VectorXd step;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
      step = ldlt.solve(g);
    } else {
      step = g / std::max(1.0, g.norm());
    }
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 80; ++k, alpha *= 0.5) {
      Eigen::VectorXd trial = x + alpha * step;
      if (m > 1) trial.tail(m - 1) = trial.tail(m - 1).cwiseMax(0.0);
      const auto [tt, ll] = pack_tau(trial);
      if (!dual.valid(tt)) continue;
      const double Gt = dual.value(trial(0), tt);
      if (Gt >= G - 1e-15 * dual.scale()) {
        if ((trial - x).cwiseAbs().maxCoeff() == 0.0) break;
        x = trial;
        G = Gt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const auto [tau, lambda] = pack_tau(x);
  st.t = x(0);
  st.lambda = lambda;
  st.value = dual.value(st.t, tau);
  return st;
}

struct Primal {
  std::vector<Mat2> cells;
  double value = 0.0;
  double mean_residual = 0.0;
  double det_residual = 0.0;
  double min_det = kInf;
  bool completed = false;
};

void measure(const PhaseLayout& layout, const Mat2& A, Primal& pr) {
  const int N = layout.num_cells();
  Mat2 mean = Mat2::Zero();
  double mean_det = 0.0;
  pr.value = 0.0;
  pr.min_det = kInf;
  for (int c = 0; c < N; ++c) {
    const Mat2& B = pr.cells[c];
    mean += B / N;
    const double dB = det2(B);
    mean_det += dB / N;
    pr.min_det = std::min(pr.min_det, dB);
    pr.value += layout.cell_sigma(c) * B.squaredNorm() / N;
  }
  pr.mean_residual = (mean - A).cwiseAbs().maxCoeff();
  pr.det_residual = std::abs(mean_det - det2(A));
}

// Per-cell fields from the dual point, plus a completion along null
// directions of the degenerate side when the mean det is not yet matched.
Primal recover(const PhaseLayout& layout, const Mat2& A, const Dual& dual, const std::vector<double>& tau) {
  const int N = layout.num_cells();
  const auto Bp = dual.primal(tau);
  Primal pr;
  pr.cells.resize(N);
  for (int c = 0; c < N; ++c) pr.cells[c] = Bp[layout.phase_of_cell[c]];
  double mean_det = 0.0;
  for (const auto& B : pr.cells) mean_det += det2(B) / N;
  const double deficit = dual.detA() - mean_det;
  if (std::abs(deficit) > 1e-12 * dual.scale()) {
    // deficit < 0 lowers det: anticonformal directions; deficit > 0: conformal.
    const bool conf = deficit > 0.0;
    const auto d = conf ? dual.plus(tau) : dual.minus(tau);
    const Vec2 u = dual.orthogonal_direction(conf);
    auto as_matrix = [conf](const Vec2& v) { return conf ? conformal(v.x(), v.y()) : anticonformal(v.x(), v.y()); };
    int negative = -1;
    for (int p = 0; p < dual.phases(); ++p) {
      if (d[p] < 0.0) negative = p;
    }
    if (negative >= 0) {
      // Single-cell phase past zero: X_c = r u / d_c has zero mean at the root.
      double sum = 0.0;
      for (int c = 0; c < N; ++c) sum += 1.0 / (N * d[layout.phase_of_cell[c]] * d[layout.phase_of_cell[c]]);
      const double r = std::sqrt(std::abs(deficit) / sum);
      for (int c = 0; c < N; ++c) pr.cells[c] += as_matrix(r * u / d[layout.phase_of_cell[c]]);
    } else {
      const int q = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
      const int n = dual.count(q);
      const double r = std::sqrt(std::abs(deficit) / dual.W(q));
      // Zero-mean unit directions on the cells of phase q; pairs ±u keep
      // the cross term with the base field zero cell by cell.
      std::vector<Vec2> dirs;
      if (n % 2 == 0) {
        for (int k = 0; k < n; ++k) dirs.push_back(k % 2 == 0 ? u : Vec2(-u));
      } else {
        const Vec2 w(-u.y(), u.x());
        for (int k = 0; k < 3; ++k) {
          const double th = 2.0 * kPi * k / 3.0;
          dirs.push_back(std::cos(th) * u + std::sin(th) * w);
        }
        for (int k = 3; k < n; ++k) dirs.push_back(k % 2 == 1 ? u : Vec2(-u));
      }
      int k = 0;
      for (int c = 0; c < N; ++c) {
        if (layout.phase_of_cell[c] == q) pr.cells[c] += as_matrix(r * dirs[k++]);
      }
    }
    pr.completed = true;
  }
  measure(layout, A, pr);
  return pr;
}

BoundResult to_result(const Primal& pr, const Ascent& st, double dual_value) {
  BoundResult r;
  r.value = pr.value;
  r.minimizer = pr.cells;
  r.mean_residual = pr.mean_residual;
  r.det_residual = pr.det_residual;
  r.min_det = pr.min_det;
  r.multiplier = st.t;
  r.phase_multipliers = st.lambda;
  r.dual_bound = dual_value;
  r.iterations = st.iterations;
  r.non_convex_regime = !st.converged;
  return r;
}

bool gap_closed(const Primal& pr, double dual_value, double scale) {
  return std::abs(pr.value - dual_value) <= 1e-8 * scale && pr.mean_residual <= 1e-8 &&
         pr.det_residual <= 1e-6;
}

// Local solve of the per-cell F₂ problem by an augmented Lagrangian with
// slacks det B_c = z_c². Variables per cell: the four entries of B_c and z_c.
// Used only when the dual enumeration does not produce a certificate, so its
// result is an upper estimate of the infimum.
Primal local_primal(const PhaseLayout& layout, const Mat2& A, const std::vector<Mat2>& start) {
  const int N = layout.num_cells();
  const int nv = 5 * N;
  const int nc = 5 + N;
  const double w = 1.0 / N;
  const double detA = det2(A);
  const double a[4] = {A(0, 0), A(0, 1), A(1, 0), A(1, 1)};
  Eigen::VectorXd x(nv);
  for (int c = 0; c < N; ++c) {
    const Mat2& B = start[c];
    x.segment<4>(5 * c) << B(0, 0), B(0, 1), B(1, 0), B(1, 1);
    x(5 * c + 4) = std::sqrt(std::max(0.0, det2(B)));
  }
  auto cofactor = [](const Eigen::Ref<const Eigen::VectorXd>& b) {
    return Eigen::Vector4d(b(3), -b(2), -b(1), b(0));
  };
  auto constraints = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(nc);
    for (int k = 0; k < 4; ++k) h(k) = -a[k];
    h(4) = -detA;
    for (int c = 0; c < N; ++c) {
      const auto b = v.segment<4>(5 * c);
      const double d = b(0) * b(3) - b(1) * b(2);
      for (int k = 0; k < 4; ++k) h(k) += w * b(k);
      h(4) += w * d;
      h(5 + c) = w * (d - v(5 * c + 4) * v(5 * c + 4));
    }
    return h;
  };
  auto lagrangian = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& mu, double rho) {
    double f = 0.0;
    for (int c = 0; c < N; ++c) f += w * layout.cell_sigma(c) * v.segment<4>(5 * c).squaredNorm();
    const Eigen::VectorXd h = constraints(v);
    return f + mu.dot(h) + 0.5 * rho * h.squaredNorm();
  };

  // Newton matrix = per-cell 5×5 blocks + ρ·J_gᵀJ_g from the five global
  // rows; solved blockwise with the Woodbury identity.
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(nc);
  double rho = 10.0;
  double last_violation = constraints(x).cwiseAbs().maxCoeff();
  std::vector<Mat5> blocks(N);
  for (int outer = 0; outer < 80; ++outer) {
    for (int inner = 0; inner < 80; ++inner) {
      const Eigen::VectorXd h = constraints(x);
      const Eigen::VectorXd m = mu + rho * h;
      Eigen::MatrixXd Jg = Eigen::MatrixXd::Zero(5, nv);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(nv);
      for (int c = 0; c < N; ++c) {
        const int o = 5 * c;
        const auto b = x.segment<4>(o);
        const Eigen::Vector4d cof = cofactor(b);
        for (int k = 0; k < 4; ++k) Jg(k, o + k) = w;
        Jg.block(4, o, 1, 4) = w * cof.transpose();
        Eigen::Matrix<double, 5, 1> row;
        row << w * cof, -2.0 * w * x(o + 4);
        Mat5& Hc = blocks[c];
        Hc.setZero();
        for (int k = 0; k < 4; ++k) Hc(k, k) = 2.0 * w * layout.cell_sigma(c);
        // Hessian of det: ∂²/∂b0∂b3 = 1, ∂²/∂b1∂b2 = −1.
        const double coef = w * (m(4) + m(5 + c));
        Hc(0, 3) += coef;
        Hc(3, 0) += coef;
        Hc(1, 2) -= coef;
        Hc(2, 1) -= coef;
        Hc(4, 4) += -2.0 * w * m(5 + c);
        Hc += rho * row * row.transpose();
        g.segment<4>(o) += 2.0 * w * layout.cell_sigma(c) * b;
        g.segment<5>(o) += m(5 + c) * row;
      }
      g += Jg.transpose() * m.head(5);
      if (g.cwiseAbs().maxCoeff() <= 1e-13) break;
      const Eigen::MatrixXd U = std::sqrt(rho) * Jg.transpose();
      double shift = 0.0;
      Eigen::VectorXd step;
      for (int attempt = 0; attempt < 40 && step.size() == 0; ++attempt) {
        std::vector<Eigen::LLT<Mat5>> f(N);
        bool ok = true;
        for (int c = 0; c < N && ok; ++c) {
          f[c].compute(blocks[c] + shift * Mat5::Identity());
          ok = f[c].info() == Eigen::Success;
        }
        if (ok) {
          auto solve_blocks = [&](const Eigen::MatrixXd& rhs) {
            Eigen::MatrixXd out(rhs.rows(), rhs.cols());
            for (int c = 0; c < N; ++c) out.middleRows(5 * c, 5) = f[c].solve(rhs.middleRows(5 * c, 5));
            return out;
          };
          const Eigen::MatrixXd BiU = solve_blocks(U);
          const Eigen::VectorXd Big = solve_blocks(-g);
          const Eigen::MatrixXd S = Eigen::MatrixXd::Identity(5, 5) + U.transpose() * BiU;
          step = Big - BiU * S.ldlt().solve(U.transpose() * Big);
        } else {
          shift = shift == 0.0 ? 1e-8 : shift * 10.0;
        }
      }
      if (step.size() == 0) break;
      const double L0 = lagrangian(x, mu, rho);
      double alpha = 1.0;
      bool moved = false;
      for (int k = 0; k < 50; ++k, alpha *= 0.5) {
        const Eigen::VectorXd trial = x + alpha * step;
        if (lagrangian(trial, mu, rho) <= L0 + 1e-4 * alpha * g.dot(step)) {
          x = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    const Eigen::VectorXd h = constraints(x);
    const double violation = h.cwiseAbs().maxCoeff();
    if (violation <= 1e-13) break;
    mu += rho * h;
    if (violation > 0.25 * last_violation) rho = std::min(rho * 10.0, 1e12);
    last_violation = violation;
  }
  Primal pr;
  pr.cells.resize(N);
  for (int c = 0; c < N; ++c) pr.cells[c] << x(5 * c), x(5 * c + 1), x(5 * c + 2), x(5 * c + 3);
  measure(layout, A, pr);
  return pr;
}

}  // namespace

BoundResult cell_energy_upper(const PhaseLayout& layout, const Mat2& A, int resolution) {
  layout.validate();
  if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  const int n = std::lcm(layout.nx, layout.ny) * resolution;
  auto mesh = std::make_shared<const Mesh>(triangulate_unit_square(n));
  const PhaseLayout lay = layout;
  CoefficientField field(CoefficientField::Eval2([lay](const Vec2& x) {
                           const int i = std::clamp(static_cast<int>(x.x() * lay.nx), 0, lay.nx - 1);
                           const int j = std::clamp(static_cast<int>(x.y() * lay.ny), 0, lay.ny - 1);
                           return Mat2(lay.cell_sigma(j * lay.nx + i) * Mat2::Identity());
                         }),
                         *std::max_element(lay.sigmas.begin(), lay.sigmas.end()), true, "phase layout");
  const auto U = solve_mapping(
      mesh, field, [&A](const Vec2& x) { return A.row(0).dot(x); }, [&A](const Vec2& x) { return A.row(1).dot(x); });
  BoundResult r;
  double mean_det = 0.0;
  Mat2 mean = Mat2::Zero();
  r.min_det = kInf;
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    Mat2 B;
    B.row(0) = U.first.element_gradients[t].transpose();
    B.row(1) = U.second.element_gradients[t].transpose();
    const double area = mesh->signed_area(t);
    const double s = field.eval(mesh->centroid(t))(0, 0);
    r.value += area * s * B.squaredNorm();
    mean += area * B;
    mean_det += area * det2(B);
    r.min_det = std::min(r.min_det, det2(B));
    r.minimizer.push_back(B);
  }
  r.mean_residual = (mean - A).cwiseAbs().maxCoeff();
  r.det_residual = std::abs(mean_det - det2(A));
  r.iterations = 1;
  return r;
}

BoundResult translation_bound(const PhaseLayout& layout, const Mat2& A) {
  layout.validate();
  const Dual dual(layout, A);
  const Ascent st = maximize(dual, {});
  const auto tau = taus(dual, st.t, st.lambda);
  const Primal pr = recover(layout, A, dual, tau);
  BoundResult r = to_result(pr, st, st.value);
  r.certified = gap_closed(pr, st.value, dual.scale());
  if (r.non_convex_regime) r.message = "multiplier reached the boundary of the admissible range";
  if (!r.certified) r.message += (r.message.empty() ? "" : "; ") + std::string("duality gap not closed");
  return r;
}

BoundResult improved_bound(const PhaseLayout& layout, const Mat2& A) {
  layout.validate();
  const Dual dual(layout, A);
  if (dual.detA() < 0.0) {
    BoundResult r;
    r.value = kInf;
    r.infeasible = true;
    r.certified = false;
    r.message = "det A < 0 while det B >= 0 forces a nonnegative mean det";
    return r;
  }
  const double feas_tol = 1e-10 * dual.scale();
  BoundResult f1 = translation_bound(layout, A);
  if (f1.certified && f1.min_det >= -feas_tol) {
    f1.phase_multipliers.assign(dual.phases(), 0.0);
    f1.message = f1.message.empty() ? "det constraint inactive at the F1 minimizer" : f1.message;
    return f1;
  }

  const int P = dual.phases();
  std::optional<BoundResult> best;
  double best_dual = f1.dual_bound.value_or(-kInf);
  std::optional<BoundResult> best_feasible;
  std::vector<std::vector<Mat2>> candidates;
  for (int mask = 1; mask < (1 << P); ++mask) {
    std::vector<int> free_phases;
    for (int p = 0; p < P; ++p) {
      if (mask & (1 << p)) free_phases.push_back(p);
    }
    const Ascent st = maximize(dual, free_phases);
    const auto tau = taus(dual, st.t, st.lambda);
    bool multipliers_ok = true;
    for (int p : free_phases) multipliers_ok &= st.lambda[p] >= -1e-12;
    if (multipliers_ok) best_dual = std::max(best_dual, st.value);
    const Primal pr = recover(layout, A, dual, tau);
    candidates.push_back(pr.cells);
    BoundResult r = to_result(pr, st, st.value);
    const bool feasible = pr.min_det >= -feas_tol && pr.mean_residual <= 1e-8 && pr.det_residual <= 1e-6;
    if (feasible && (!best_feasible || r.value < best_feasible->value)) best_feasible = r;
    if (feasible && multipliers_ok && gap_closed(pr, st.value, dual.scale())) {
      if (!best || r.value < best->value) best = r;
    }
  }
  if (best) {
    best->certified = true;
    best->dual_bound = std::max(best_dual, *best->dual_bound);
    best->message = "KKT point with closed duality gap";
    return *best;
  }
  // No certificate: refine candidate start points with the local solver and
  // keep the best feasible result.
  std::vector<std::vector<Mat2>> starts;
  starts.push_back(f1.minimizer);
  for (const auto& c : candidates) starts.push_back(c);
  for (const auto& start : starts) {
    const Primal pr = local_primal(layout, A, start);
    const bool feasible = pr.min_det >= -feas_tol && pr.mean_residual <= 1e-8 && pr.det_residual <= 1e-6;
    if (!feasible) continue;
    if (!best_feasible || pr.value < best_feasible->value) {
      Ascent none;
      none.t = f1.multiplier;
      none.lambda.assign(P, 0.0);
      none.converged = true;
      best_feasible = to_result(pr, none, best_dual);
    }
  }
  if (best_feasible) {
    best_feasible->certified = false;
    best_feasible->dual_bound = best_dual;
    best_feasible->message = "feasible point without a matching dual certificate";
    return *best_feasible;
  }
  BoundResult r;
  r.value = best_dual;
  r.dual_bound = best_dual;
  r.certified = false;
  r.message = "no feasible point found; value is the best dual lower bound";
  return r;
}

BoundChain bound_chain_report(const PhaseLayout& layout, const Mat2& A, int resolution, double allowance,
                              bool throw_on_violation) {
  BoundChain chain;
  chain.F0 = wiener_bound(layout, A);
  chain.f1 = translation_bound(layout, A);
  chain.F1 = chain.f1.value;
  chain.f2 = improved_bound(layout, A);
  chain.f2_defined = !chain.f2.infeasible;
  chain.F2 = chain.f2.value;
  chain.upper = cell_energy_upper(layout, A, resolution);
  chain.F_upper = chain.upper.value;
  chain.tolerance = 1e-6 + allowance * chain.F_upper;
  const double tiny = 1e-8 * std::max(1.0, chain.F_upper);
  chain.ordered = chain.F0 <= chain.F1 + tiny && chain.F1 <= chain.F_upper + chain.tolerance;
  if (chain.f2_defined) {
    chain.ordered = chain.ordered && chain.F1 <= chain.F2 + tiny && chain.F2 <= chain.F_upper + chain.tolerance;
  }
  if (throw_on_violation && !chain.ordered) {
    throw Error(ErrorCode::OrderingViolation,
                "bound chain out of order: F0=" + std::to_string(chain.F0) + " F1=" + std::to_string(chain.F1) +
                    " F2=" + std::to_string(chain.F2) + " F_upper=" + std::to_string(chain.F_upper));
  }
  return chain;
}

}  // namespace sigmalab
