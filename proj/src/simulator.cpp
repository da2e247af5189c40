#include "scalelaw/simulator.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include "scalelaw/parallel.hpp"

namespace scalelaw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::atomic<std::size_t> g_budget{std::size_t(2) << 30};

std::size_t as_count(double x, const char* what) {
  if (!std::isfinite(x) || x < 1.0 || x != std::floor(x))
    throw InvalidArgument(std::string("simulator: ") + what + " must be a finite positive integer");
  return std::size_t(x);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id, std::uint64_t sub = 0) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(id),
                    std::uint32_t(sub), std::uint32_t(sub >> 32)};
  return std::mt19937_64(seq);
}

void fill_normal(MatrixXd& X, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = nd(rng);
}

void check_budget(std::size_t doubles) {
  std::size_t bytes = doubles * sizeof(double);
  if (bytes > g_budget.load())
    throw ResourceError("simulator: draw needs " + std::to_string(bytes >> 20) +
                        " MiB, budget is " + std::to_string(g_budget.load() >> 20) + " MiB");
}

VectorXd sqrt_lambda(const Spectrum& spec) {
  VectorXd s(static_cast<Eigen::Index>(spec.size()));
  for (std::size_t k = 0; k < spec.size(); ++k) s(Eigen::Index(k)) = std::sqrt(spec.lambda[k]);
  return s;
}

VectorXd initial_error(const Spectrum& spec) {
  VectorXd v(static_cast<Eigen::Index>(spec.size()));
  for (std::size_t k = 0; k < spec.size(); ++k) v(Eigen::Index(k)) = std::sqrt(spec.wstar_sq[k]);
  return v;
}

// Applies X v for X = F^T F / n, dense when that is cheaper.
struct Gram {
  MatrixXd dense;
  const MatrixXd* F = nullptr;
  double inv_n = 1.0;

  Gram(const MatrixXd& f, double n) : F(&f), inv_n(1.0 / n) {
    if (std::size_t(f.rows()) * 2 >= std::size_t(f.cols())) {
      dense = MatrixXd::Zero(f.cols(), f.cols());
      dense.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose(), inv_n);
      dense = dense.selfadjointView<Eigen::Lower>();
    }
  }
  VectorXd operator*(const VectorXd& v) const {
    if (dense.size()) return dense * v;
    return F->transpose() * (*F * v) * inv_n;
  }
};

struct Scale {
  double M, s2, c, loss_scale;
  Scale(const SystemShape& shape) {
    Couplings cp = couplings(shape);
    M = shape.M;
    s2 = cp.sigma2;
    c = std::sqrt(M * s2);
    loss_scale = cp.loss_scale;
  }
};

double test_loss(const VectorXd& v, const Spectrum& spec, const Scale& sc) {
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) acc += spec.lambda[k] * v(Eigen::Index(k)) * v(Eigen::Index(k));
  return sc.loss_scale * (acc / sc.M + sc.s2);
}

void check_divergence(double loss, double initial, std::size_t t) {
  if (!std::isfinite(loss) || loss > 1e6 * initial)
    throw Diverged("simulation diverged at step " + std::to_string(t));
}

// Full-batch heavy-ball descent with per-step callback on v(t), t = 0..steps-1.
template <class OnStep>
void descend(const Gram& K, const Gram& Q, const VectorXd& b, VectorXd v, double eta, double mu,
             std::size_t steps, OnStep&& on_step) {
  VectorXd prev = v;
  for (std::size_t t = 0; t < steps; ++t) {
    on_step(t, v);
    if (t + 1 == steps) break;
    VectorXd g = Q * v + b;
    VectorXd next = v - eta * (K * g) + mu * (v - prev);
    prev = std::move(v);
    v = std::move(next);
  }
}

}  // namespace

std::size_t memory_budget() { return g_budget.load(); }
void set_memory_budget(std::size_t bytes) { g_budget.store(bytes); }

MatrixXd draw_projection(std::size_t N, std::size_t M, std::uint64_t seed) {
  check_budget(N * M);
  MatrixXd A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
  auto rng = stream(seed, 1);
  fill_normal(A, rng);
  return A;
}

void draw_design(const Spectrum& spec, std::size_t P, std::uint64_t seed, MatrixXd& Psi,
                 VectorXd& eps) {
  const std::size_t M = spec.size();
  check_budget(P * M + P);
  Psi.resize(Eigen::Index(P), Eigen::Index(M));
  auto rng = stream(seed, 2);
  fill_normal(Psi, rng);
  Psi = Psi * sqrt_lambda(spec).asDiagonal();
  eps.resize(Eigen::Index(P));
  auto rng3 = stream(seed, 3);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = nd(rng3);
}

Disorder draw_disorder(const SystemShape& shape, const Spectrum& spec, std::uint64_t seed) {
  validate(spec);
  validate(shape);
  const std::size_t M = as_count(shape.M, "M");
  if (M != spec.size()) throw InvalidArgument("simulator: shape.M differs from spectrum size");
  const std::size_t N = as_count(shape.N, "N"), P = as_count(shape.P, "P");
  check_budget(N * M + P * M + P);
  Disorder d;
  d.seed = seed;
  d.A = draw_projection(N, M, seed);
  draw_design(spec, P, seed, d.Psi, d.eps);
  return d;
}

LossCurve run_discrete_gd(const Disorder& d, const Spectrum& spec, const SystemShape& shape,
                          const OptimizerConfig& opt) {
  if (opt.kind != OptimizerKind::discrete_gd && opt.kind != OptimizerKind::discrete_gd_momentum)
    throw InvalidArgument("run_discrete_gd: optimizer kind must be discrete_gd or momentum");
  if (!(opt.eta > 0.0)) throw InvalidArgument("run_discrete_gd: eta must be positive");
  if (!(opt.mu >= 0.0 && opt.mu < 1.0)) throw InvalidArgument("run_discrete_gd: need 0 <= mu < 1");
  const Scale sc(shape);
  const double P = double(d.Psi.rows());
  Gram K(d.A, double(d.A.rows()));
  Gram Q(d.Psi, P);
  VectorXd b = d.Psi.transpose() * d.eps * (sc.c / P);
  const double eps_sq = d.eps.squaredNorm() / P;
  const double mu = opt.kind == OptimizerKind::discrete_gd ? 0.0 : opt.mu;

  LossCurve out;
  out.t.resize(opt.steps);
  out.train.resize(opt.steps);
  out.test.resize(opt.steps);
  descend(K, Q, b, initial_error(spec), opt.eta, mu, opt.steps,
          [&](std::size_t t, const VectorXd& v) {
            out.t[t] = double(t);
            out.test[t] = test_loss(v, spec, sc);
            double tr = (v.dot(Q * v) + 2.0 * v.dot(b)) / sc.M + sc.s2 * eps_sq;
            out.train[t] = sc.loss_scale * std::max(tr, 0.0);
            check_divergence(out.test[t], out.test[0], t);
          });
  return out;
}

namespace {

struct FlowBasis {
  MatrixXd U;
  VectorXd D;
  VectorXd r0;  // residual at t = 0 in the sample basis, rotated: U^T r0
  double cutoff;
};

FlowBasis flow_basis(const Disorder& d, const Spectrum& spec, const Scale& sc) {
  const double N = double(d.A.rows()), P = double(d.Psi.rows());
  MatrixXd Z = d.A * d.Psi.transpose();  // N x P
  MatrixXd X = Z.transpose() * Z / (N * P);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(X);
  if (es.info() != Eigen::Success) throw std::runtime_error("gradient flow: eigensolver failed");
  FlowBasis fb;
  fb.U = es.eigenvectors();
  fb.D = es.eigenvalues();
  VectorXd r0 = (d.Psi * initial_error(spec) + sc.c * d.eps) / std::sqrt(P);
  fb.r0 = fb.U.transpose() * r0;
  fb.cutoff = 1e-10 * std::max(fb.D.maxCoeff(), 0.0);
  return fb;
}

VectorXd flow_state(const Disorder& d, const Spectrum& spec, const FlowBasis& fb, double t) {
  const double N = double(d.A.rows()), P = double(d.Psi.rows());
  VectorXd f(fb.D.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    double x = fb.D(i);
    if (x <= fb.cutoff)
      f(i) = std::isinf(t) ? 0.0 : -t;
    else
      f(i) = std::isinf(t) ? -1.0 / x : std::expm1(-t * x) / x;
  }
  VectorXd y = fb.U * f.cwiseProduct(fb.r0);
  VectorXd z = d.A.transpose() * (d.A * (d.Psi.transpose() * y)) / (N * std::sqrt(P));
  return initial_error(spec) + z;
}

double flow_train(const FlowBasis& fb, double t, const Scale& sc) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < fb.D.size(); ++i) {
    double x = fb.D(i) <= fb.cutoff ? 0.0 : fb.D(i);
    double decay = std::isinf(t) ? (x == 0.0 ? 1.0 : 0.0) : std::exp(-t * x);
    acc += decay * decay * fb.r0(i) * fb.r0(i);
  }
  return sc.loss_scale * acc / sc.M;
}

}  // namespace

LossCurve run_gradient_flow_exact(const Disorder& d, const Spectrum& spec,
                                  const SystemShape& shape, const std::vector<double>& t_grid) {
  const Scale sc(shape);
  FlowBasis fb = flow_basis(d, spec, sc);
  LossCurve out;
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw InvalidArgument("run_gradient_flow_exact: times must be >= 0");
    out.t.push_back(t);
    out.test.push_back(test_loss(flow_state(d, spec, fb, t), spec, sc));
    out.train.push_back(flow_train(fb, t, sc));
  }
  return out;
}

VectorXd gradient_flow_limit(const Disorder& d, const Spectrum& spec, const SystemShape& shape) {
  const Scale sc(shape);
  return flow_state(d, spec, flow_basis(d, spec, sc), kInf);
}

LossCurve run_one_pass_sgd(const Spectrum& spec, const SystemShape& shape,
                           const OptimizerConfig& opt, std::uint64_t seed) {
  if (opt.kind != OptimizerKind::one_pass_sgd)
    throw InvalidArgument("run_one_pass_sgd: optimizer kind must be one_pass_sgd");
  if (opt.batch < 1) throw InvalidArgument("run_one_pass_sgd: batch must be >= 1");
  validate(spec);
  const std::size_t M = as_count(shape.M, "M"), N = as_count(shape.N, "N");
  if (M != spec.size()) throw InvalidArgument("simulator: shape.M differs from spectrum size");
  const Scale sc(shape);
  MatrixXd A = draw_projection(N, M, seed);
  Gram K(A, double(N));
  const VectorXd sl = sqrt_lambda(spec);
  auto rng = stream(seed, 4);
  std::normal_distribution<double> nd;
  const double B = double(opt.batch);

  MatrixXd Psi(static_cast<Eigen::Index>(opt.batch), static_cast<Eigen::Index>(M));
  VectorXd eps(static_cast<Eigen::Index>(opt.batch));
  VectorXd v = initial_error(spec);
  LossCurve out;
  for (std::size_t t = 0; t < opt.steps; ++t) {
    fill_normal(Psi, rng);
    Psi = Psi * sl.asDiagonal();
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = nd(rng);
    VectorXd resid = Psi * v + sc.c * eps;  // sqrt(M) times the per-sample residual
    out.t.push_back(double(t));
    out.test.push_back(test_loss(v, spec, sc));
    out.train.push_back(sc.loss_scale * resid.squaredNorm() / (B * sc.M));
    check_divergence(out.test.back(), out.test.front(), t);
    v -= opt.eta * (K * (Psi.transpose() * resid / B));
  }
  return out;
}

LossCurve run_ensemble_bag(const Spectrum& spec, const SystemShape& shape,
                           const OptimizerConfig& opt, std::size_t E, std::size_t bags,
                           std::uint64_t seed) {
  if (E < 1 || bags < 1) throw InvalidArgument("run_ensemble_bag: E and bags must be >= 1");
  if (opt.kind != OptimizerKind::discrete_gd && opt.kind != OptimizerKind::discrete_gd_momentum)
    throw InvalidArgument("run_ensemble_bag: discrete optimizers only");
  validate(spec);
  const std::size_t M = as_count(shape.M, "M"), N = as_count(shape.N, "N"),
                    P = as_count(shape.P, "P");
  if (M != spec.size()) throw InvalidArgument("simulator: shape.M differs from spectrum size");
  const Scale sc(shape);
  const double mu = opt.kind == OptimizerKind::discrete_gd ? 0.0 : opt.mu;

  // Systems are streamed; only the running mean trajectory is kept.
  MatrixXd vbar = MatrixXd::Zero(Eigen::Index(M), Eigen::Index(opt.steps));
  const double w = 1.0 / double(E * bags);
  for (std::size_t b = 0; b < bags; ++b) {
    MatrixXd Psi;
    VectorXd eps;
    draw_design(spec, P, seed + 7919 * b, Psi, eps);
    Gram Q(Psi, double(P));
    VectorXd bvec = Psi.transpose() * eps * (sc.c / double(P));
    for (std::size_t e = 0; e < E; ++e) {
      MatrixXd A = draw_projection(N, M, seed + 104729 * e);
      Gram K(A, double(N));
      descend(K, Q, bvec, initial_error(spec), opt.eta, mu, opt.steps,
              [&](std::size_t t, const VectorXd& v) { vbar.col(Eigen::Index(t)) += w * v; });
    }
  }
  LossCurve out;
  for (std::size_t t = 0; t < opt.steps; ++t) {
    out.t.push_back(double(t));
    out.test.push_back(test_loss(vbar.col(Eigen::Index(t)), spec, sc));
    out.train.push_back(0.0);
    check_divergence(out.test.back(), out.test.front(), t);
  }
  return out;
}

LossCurve multi_seed(const std::vector<std::uint64_t>& seeds,
                     const std::function<LossCurve(std::uint64_t)>& run) {
  if (seeds.empty()) throw InvalidArgument("multi_seed: no seeds");
  std::vector<LossCurve> runs(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { runs[i] = run(seeds[i]); });
  const std::size_t T = runs.front().size();
  for (auto& r : runs)
    if (r.size() != T) throw std::runtime_error("multi_seed: curve lengths differ");
  const double n = double(runs.size());
  LossCurve out;
  out.seeds = runs.size();
  out.t = runs.front().t;
  out.train.assign(T, 0.0);
  out.test.assign(T, 0.0);
  out.std_train.assign(T, 0.0);
  out.std_test.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (auto& r : runs) {
      out.train[t] += r.train[t] / n;
      out.test[t] += r.test[t] / n;
    }
    if (runs.size() > 1) {
      double a = 0.0, b = 0.0;
      for (auto& r : runs) {
        a += (r.train[t] - out.train[t]) * (r.train[t] - out.train[t]);
        b += (r.test[t] - out.test[t]) * (r.test[t] - out.test[t]);
      }
      out.std_train[t] = std::sqrt(a / (n - 1.0));
      out.std_test[t] = std::sqrt(b / (n - 1.0));
    }
  }
  return out;
}

LossCurve simulate(const Spectrum& spec, const SystemShape& shape, const OptimizerConfig& opt,
                   std::uint64_t seed) {
  switch (opt.kind) {
    case OptimizerKind::one_pass_sgd:
      return run_one_pass_sgd(spec, shape, opt, seed);
    case OptimizerKind::gradient_flow_exact: {
      std::vector<double> grid(opt.steps);
      for (std::size_t i = 0; i < opt.steps; ++i) grid[i] = double(i) * opt.eta;
      return run_gradient_flow_exact(draw_disorder(shape, spec, seed), spec, shape, grid);
    }
    default:
      return run_discrete_gd(draw_disorder(shape, spec, seed), spec, shape, opt);
  }
}

}  // namespace scalelaw
