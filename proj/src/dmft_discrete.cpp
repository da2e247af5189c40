#include "scalelaw/dmft_discrete.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "scalelaw/correlation_engine.hpp"
#include "scalelaw/series.hpp"
#include "scalelaw/simulator.hpp"

namespace scalelaw {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd OrderParameters::R02() const { return series::toeplitz(r02); }
MatrixXd OrderParameters::R1() const { return series::toeplitz(r1); }
MatrixXd OrderParameters::R24() const { return series::toeplitz(r24); }
MatrixXd OrderParameters::R3() const { return series::toeplitz(r3); }

std::vector<double> OrderParameters::test_loss() const {
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t)
    out[t] = cpl.loss_scale * (C0(Index(t), Index(t)) + cpl.sigma2);
  return out;
}

std::vector<double> OrderParameters::train_loss() const {
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) out[t] = cpl.loss_scale * C1(Index(t), Index(t));
  return out;
}

OrderParameters solve_responses(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                                double eta, double mu) {
  validate(spec);
  if (T < 1) throw InvalidArgument("solve_responses: T must be >= 1");
  if (!(eta > 0.0)) throw InvalidArgument("solve_responses: eta must be positive");
  if (!(mu >= 0.0 && mu < 1.0)) throw InvalidArgument("solve_responses: need 0 <= mu < 1");

  OrderParameters ops;
  ops.T = T;
  ops.eta = eta;
  ops.mu = mu;
  ops.cpl = couplings(shape);
  ops.theta = series::step_kernel(eta, T, mu);
  const auto& th = ops.theta;
  const double ia = ops.cpl.inv_alpha, in = ops.cpl.inv_nu;

  const Index M = Index(spec.size());
  VectorXd lam = Eigen::Map<const VectorXd>(spec.lambda.data(), M);
  const double invM = 1.0 / double(M);

  MatrixXd h(M, Index(T));
  h.col(0).setOnes();
  std::vector<double> q(T, 0.0), S(T, 0.0), a(T, 0.0), p(T, 0.0), qS(T, 0.0);
  ops.r1.assign(T, 0.0);
  ops.r3.assign(T, 0.0);
  ops.r1[0] = ops.r3[0] = 1.0;
  q[0] = 1.0;
  S[0] = lam.sum() * invM;
  qS[0] = S[0];

  VectorXd coeff(static_cast<Index>(T));
  for (std::size_t n = 1; n < T; ++n) {
    double an = 0.0;
    for (std::size_t j = 1; j <= n; ++j) an += th[j] * q[n - j];
    a[n] = an;
    // h_k[n] = -lambda_k sum_{j=1..n} a[j] h_k[n-j]; column c pairs with a[n-c].
    for (std::size_t c = 0; c < n; ++c) coeff(Index(c)) = a[n - c];
    h.col(Index(n)) = -lam.cwiseProduct(h.leftCols(Index(n)) * coeff.head(Index(n)));
    S[n] = lam.dot(h.col(Index(n))) * invM;

    double pn = 0.0;
    for (std::size_t j = 1; j <= n; ++j) pn += th[j] * qS[n - j];
    p[n] = pn;
    ops.r1[n] = -ia * pn;
    ops.r3[n] = -in * pn;
    double qn = 0.0;
    for (std::size_t i = 0; i <= n; ++i) qn += ops.r1[i] * ops.r3[n - i];
    q[n] = qn;
    double qsn = 0.0;
    for (std::size_t i = 0; i <= n; ++i) qsn += q[i] * S[n - i];
    qS[n] = qsn;
    if (!std::isfinite(qn) || !std::isfinite(S[n]))
      throw Diverged("solve_responses: non-finite response at lag " +
                               std::to_string(n));
  }

  auto thS = series::conv(th, S, T);
  ops.r02 = series::conv(thS, ops.r3, T);
  ops.r24 = series::conv(thS, ops.r1, T);
  for (auto& x : ops.r02) x = -x;
  for (auto& x : ops.r24) x = -x;

  // Mean transfer H_k(t) = sum_{n<=t} h_k[n].
  ops.H.resize(M, Index(T));
  ops.H.col(0) = h.col(0);
  for (Index t = 1; t < Index(T); ++t) ops.H.col(t) = ops.H.col(t - 1) + h.col(t);
  ops.response_diag = {1, 0.0, true};
  return ops;
}

namespace {

MatrixXd lag_series_from_H(const MatrixXd& H) {
  // Returns T x M with per-mode increments h_k[n].
  MatrixXd hT(H.cols(), H.rows());
  hT.row(0) = H.col(0).transpose();
  for (Index t = 1; t < H.cols(); ++t) hT.row(t) = (H.col(t) - H.col(t - 1)).transpose();
  return hT;
}

}  // namespace

namespace {

detail::CorrelationResult run_engine(const OrderParameters& ops, const Spectrum& spec,
                                     const DiscreteSettings& cfg, bool share_data,
                                     bool share_projection) {
  const Index T = Index(ops.T);
  const Index M = Index(spec.size());
  if (ops.H.rows() != M || ops.H.cols() != T)
    throw InvalidArgument("solve_correlations: responses missing or spectrum mismatch");
  VectorXd lam = Eigen::Map<const VectorXd>(spec.lambda.data(), M);
  VectorXd w2 = Eigen::Map<const VectorXd>(spec.wstar_sq.data(), M);
  const double invM = 1.0 / double(M);

  MatrixXd hT = lag_series_from_H(ops.H);
  MatrixXd vT = ops.H.transpose();
  MatrixXd gT = series::toeplitz(ops.theta).triangularView<Eigen::Lower>() * hT;

  detail::Conv2D conv(T);
  detail::CorrelationSources src;
  src.Ka = detail::mode_kernel(gT, lam * invM);
  src.Kb = detail::mode_kernel(gT, lam.cwiseAbs2() * invM);
  src.Kc = detail::mode_kernel(hT, lam * invM);
  src.b0 = detail::mode_kernel(vT, lam.cwiseProduct(w2) * invM);
  src.b2 = conv.sandwich(ops.r1, detail::mode_kernel(vT, lam.cwiseAbs2().cwiseProduct(w2) * invM));

  detail::CorrelationSettings cs;
  cs.inv_alpha = ops.cpl.inv_alpha;
  cs.inv_nu = ops.cpl.inv_nu;
  cs.sigma2 = ops.cpl.sigma2;
  cs.data_shared = share_data;
  cs.projection_shared = share_projection;
  cs.damping = cfg.damping;
  cs.tol = cfg.tol;
  cs.max_iter = cfg.max_iter;
  return detail::solve_correlation_system(conv, src, ops.r1, ops.r3, cs);
}

}  // namespace

void solve_correlations(OrderParameters& ops, const Spectrum& spec, const DiscreteSettings& cfg) {
  auto res = run_engine(ops, spec, cfg, true, true);
  ops.C0 = std::move(res.C0);
  ops.C1 = std::move(res.C1);
  ops.C2 = std::move(res.C2);
  ops.C3 = std::move(res.C3);
  ops.has_correlations = true;
  ops.correlation_diag = {res.iterations, res.residual, res.converged};
  if (!cfg.keep_transfer) ops.H.resize(0, 0);
}

CrossCorrelation cross_system_c0(const OrderParameters& ops, const Spectrum& spec,
                                 bool share_data, bool share_projection,
                                 const DiscreteSettings& cfg) {
  auto res = run_engine(ops, spec, cfg, share_data, share_projection);
  CrossCorrelation out;
  out.c0.resize(ops.T);
  for (std::size_t t = 0; t < ops.T; ++t) out.c0[t] = res.C0(Index(t), Index(t));
  out.diag = {res.iterations, res.residual, res.converged};
  return out;
}

OrderParameters solve_discrete(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                               double eta, double mu, const DiscreteSettings& cfg) {
  OrderParameters ops = solve_responses(spec, shape, T, eta, mu);
  solve_correlations(ops, spec, cfg);
  return ops;
}

std::vector<double> train_test_gap(const OrderParameters& ops) {
  if (!ops.has_correlations) throw InvalidArgument("train_test_gap: correlations not solved");
  const double ia = ops.cpl.inv_alpha;
  MatrixXd R = ops.R02();
  MatrixXd W = R.triangularView<Eigen::Lower>() * ops.C1;
  std::vector<double> gap(ops.T);
  for (Index t = 0; t < Index(ops.T); ++t) {
    double lin = W(t, t);
    double quad = W.row(t).dot(R.row(t));
    gap[std::size_t(t)] = ops.cpl.loss_scale * (-2.0 * ia * lin + ia * ia * quad);
  }
  return gap;
}

OrderParameters dense_recipe_solve(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                                   double eta, const DiscreteSettings& cfg) {
  validate(spec);
  const Index n = Index(T);
  const Couplings cpl = couplings(shape);
  const double ia = cpl.inv_alpha, in = cpl.inv_nu;
  const double invM = 1.0 / double(spec.size());

  // Identical modes share every matrix; group them.
  std::map<std::pair<double, double>, double> groups;
  for (std::size_t k = 0; k < spec.size(); ++k)
    groups[{spec.lambda[k], spec.wstar_sq[k]}] += invM;

  const MatrixXd I = MatrixXd::Identity(n, n);
  MatrixXd Th = MatrixXd::Zero(n, n);
  for (Index t = 0; t < n; ++t)
    for (Index s = 0; s < t; ++s) Th(t, s) = eta;
  const MatrixXd ones = MatrixXd::Ones(n, n);

  MatrixXd R1 = I, R3 = I, R02 = MatrixXd::Zero(n, n), R24 = MatrixXd::Zero(n, n);
  const double d = cfg.damping;
  OrderParameters ops;
  ops.response_diag.converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    MatrixXd R02n = MatrixXd::Zero(n, n), R24n = MatrixXd::Zero(n, n);
    for (auto& [key, wt] : groups) {
      double lam = key.first;
      MatrixXd A = I + lam * Th * R3 * R1;
      R02n -= wt * lam * A.triangularView<Eigen::Lower>().solve(Th * R3);
      MatrixXd B = I + lam * R1 * Th * R3;
      R24n -= wt * lam * B.triangularView<Eigen::Lower>().solve(R1 * Th);
    }
    MatrixXd R1n = (I - ia * R02n).triangularView<Eigen::Lower>().solve(I);
    MatrixXd R3n = (I - in * R24n).triangularView<Eigen::Lower>().solve(I);
    double res = (R1n - R1).norm() / R1n.norm() + (R3n - R3).norm() / R3n.norm();
    R02 = (1 - d) * R02n + d * R02;
    R24 = (1 - d) * R24n + d * R24;
    R1 = (1 - d) * R1n + d * R1;
    R3 = (1 - d) * R3n + d * R3;
    ops.response_diag.iterations = it;
    ops.response_diag.residual = res;
    if (res < cfg.tol) {
      ops.response_diag.converged = true;
      break;
    }
  }

  MatrixXd C0 = MatrixXd::Zero(n, n), C1 = C0, C2 = C0, C3 = C0;
  ops.correlation_diag.converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    MatrixXd C0n = MatrixXd::Zero(n, n), C2n = MatrixXd::Zero(n, n);
    MatrixXd mid0 = in * C3;
    for (auto& [key, wt] : groups) {
      double lam = key.first, w2 = key.second;
      MatrixXd A = I + lam * Th * R3 * R1;
      MatrixXd src = w2 * ones + Th * (mid0 + ia * lam * R3 * C1 * R3.transpose()) * Th.transpose();
      MatrixXd X = A.triangularView<Eigen::Lower>().solve(src);
      C0n += wt * lam * A.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
      MatrixXd B = I + lam * R1 * Th * R3;
      MatrixXd src2 = ia * lam * C1 + R1 * (w2 * lam * lam * ones +
                                           in * lam * lam * Th * C3 * Th.transpose()) *
                                          R1.transpose();
      MatrixXd Y = B.triangularView<Eigen::Lower>().solve(src2);
      C2n += wt * B.triangularView<Eigen::Lower>().solve(Y.transpose()).transpose();
    }
    MatrixXd C1n = R1 * (C0n.array() + cpl.sigma2).matrix() * R1.transpose();
    MatrixXd C3n = R3 * C2n * R3.transpose();
    double res = (C0n - C0).norm() / std::max(C0n.norm(), 1e-300) +
                 (C2n - C2).norm() / std::max(C2n.norm(), 1e-300);
    C0 = (1 - d) * C0n + d * C0;
    C1 = (1 - d) * C1n + d * C1;
    C2 = (1 - d) * C2n + d * C2;
    C3 = (1 - d) * C3n + d * C3;
    ops.correlation_diag.iterations = it;
    ops.correlation_diag.residual = res;
    if (res < cfg.tol) {
      ops.correlation_diag.converged = true;
      break;
    }
  }

  ops.T = T;
  ops.eta = eta;
  ops.cpl = cpl;
  ops.theta = series::step_kernel(eta, T);
  ops.r02.resize(T);
  ops.r1.resize(T);
  ops.r24.resize(T);
  ops.r3.resize(T);
  for (Index t = 0; t < n; ++t) {
    ops.r02[std::size_t(t)] = R02(t, 0);
    ops.r1[std::size_t(t)] = R1(t, 0);
    ops.r24[std::size_t(t)] = R24(t, 0);
    ops.r3[std::size_t(t)] = R3(t, 0);
  }
  ops.C0 = C0;
  ops.C1 = C1;
  ops.C2 = C2;
  ops.C3 = C3;
  ops.has_correlations = true;
  return ops;
}

void write_matrix_dump(const std::string& path, const MatrixXd& X) {
  if (X.rows() != X.cols()) throw InvalidArgument("write_matrix_dump: matrix must be square");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const char magic[8] = {'S', 'L', 'A', 'W', 'M', 'A', 'T', '1'};
  std::uint64_t T = std::uint64_t(X.rows());
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&T), 8);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = X;
  out.write(reinterpret_cast<const char*>(rm.data()), std::streamsize(sizeof(double) * T * T));
}

MatrixXd read_matrix_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[8];
  std::uint64_t T = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&T), 8);
  if (!in || std::memcmp(magic, "SLAWMAT1", 8) != 0)
    throw std::runtime_error(path + ": not a matrix dump");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(T, T);
  in.read(reinterpret_cast<char*>(rm.data()), std::streamsize(sizeof(double) * T * T));
  if (!in) throw std::runtime_error(path + ": truncated matrix dump");
  return rm;
}

}  // namespace scalelaw
