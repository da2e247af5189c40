#include "scalelaw/sgd_online.hpp"

#include <cmath>

#include "scalelaw/correlation_engine.hpp"
#include "scalelaw/series.hpp"

namespace scalelaw {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Pass {
  detail::CorrelationResult res;
  OrderParameters resp;
};

Pass run_pass(const Spectrum& spec, const SystemShape& shape, double inv_batch, double eta,
              std::size_t T, const DiscreteSettings& cfg) {
  SystemShape full = shape;
  full.P = kInf;
  Pass out;
  out.resp = solve_responses(spec, full, T, eta);
  const OrderParameters& ops = out.resp;
  const Index M = Index(spec.size());
  VectorXd lam = Eigen::Map<const VectorXd>(spec.lambda.data(), M);
  VectorXd w2 = Eigen::Map<const VectorXd>(spec.wstar_sq.data(), M);
  const double invM = 1.0 / double(M);

  MatrixXd hT(Index(T), M);
  hT.row(0) = ops.H.col(0).transpose();
  for (Index t = 1; t < Index(T); ++t) hT.row(t) = (ops.H.col(t) - ops.H.col(t - 1)).transpose();
  MatrixXd vT = ops.H.transpose();
  MatrixXd gT = series::toeplitz(ops.theta).triangularView<Eigen::Lower>() * hT;

  detail::Conv2D conv(static_cast<Index>(T));
  detail::CorrelationSources src;
  src.Ka = detail::mode_kernel(gT, lam * invM);
  src.Kb = detail::mode_kernel(gT, lam.cwiseAbs2() * invM);
  src.Kc = detail::mode_kernel(hT, lam * invM);
  src.b0 = detail::mode_kernel(vT, lam.cwiseProduct(w2) * invM);
  src.b2 = detail::mode_kernel(vT, lam.cwiseAbs2().cwiseProduct(w2) * invM);

  detail::CorrelationSettings cs;
  cs.inv_alpha = inv_batch;
  cs.inv_nu = ops.cpl.inv_nu;
  cs.sigma2 = ops.cpl.sigma2;
  cs.c1_mode = detail::C1Mode::diagonal;
  cs.damping = cfg.damping;
  cs.tol = cfg.tol;
  cs.max_iter = cfg.max_iter;
  out.res = detail::solve_correlation_system(conv, src, ops.r1, ops.r3, cs);
  return out;
}

}  // namespace

SgdSolution solve_sgd_dmft(const Spectrum& spec, const SystemShape& shape, std::size_t batch,
                           double eta, std::size_t T, const SgdSettings& cfg) {
  validate(spec);
  if (batch < 1) throw InvalidArgument("solve_sgd_dmft: batch must be >= 1");
  SystemShape sh = shape;
  sh.P = double(batch);
  const Couplings cpl = couplings(sh);

  Pass main = run_pass(spec, shape, cpl.inv_alpha, eta, T, cfg.solver);

  SgdSolution sol;
  SgdOrderParameters& o = sol.ops;
  o.T = T;
  o.eta = eta;
  o.batch = double(batch);
  o.cpl = cpl;
  o.r3 = main.resp.r3;
  o.r24 = main.resp.r24;
  o.C2 = main.res.C2;
  o.C3 = main.res.C3;
  o.diag = {main.res.iterations, main.res.residual, main.res.converged};
  o.C0_diag.resize(T);
  for (std::size_t t = 0; t < T; ++t) o.C0_diag[t] = main.res.C0(Index(t), Index(t));

  const double initial = cpl.loss_scale * (o.C0_diag[0] + cpl.sigma2);
  for (std::size_t t = 0; t < T; ++t) {
    double loss = cpl.loss_scale * (o.C0_diag[t] + cpl.sigma2);
    if (!std::isfinite(loss) || loss > 1e6 * initial)
      throw Diverged("SGD theory diverged at step " + std::to_string(t) +
                     "; reduce eta or increase the batch");
    sol.curve.t.push_back(double(t));
    sol.curve.test.push_back(loss);
  }
  sol.curve.train = sol.curve.test;

  if (cfg.decompose) {
    Pass full = run_pass(spec, shape, 0.0, eta, T, cfg.solver);
    for (std::size_t t = 0; t < T; ++t) {
      double b = cpl.loss_scale * full.res.C0(Index(t), Index(t));
      sol.bias_component.push_back(b);
      sol.variance_component.push_back(sol.curve.test[t] - cpl.loss_scale * cpl.sigma2 - b);
    }
  }
  return sol;
}

SgdPlateau sgd_asymptote(const SgdSolution& sol, double drift_tol) {
  const auto& L = sol.curve.test;
  const std::size_t T = L.size();
  if (T < 20) throw InvalidArgument("sgd_asymptote: need at least 20 steps");
  const std::size_t w = std::max<std::size_t>(T / 10, 2);
  const std::size_t start = T - w, mid = T - w / 2;
  auto mean = [](const std::vector<double>& x, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += x[i];
    return s / double(b - a);
  };
  SgdPlateau p;
  p.value = mean(L, start, T);
  double first = mean(L, start, mid), second = mean(L, mid, T);
  p.drift = std::abs(first - second) / std::max(std::abs(p.value), 1e-300);
  p.reached = p.drift <= drift_tol;
  if (!sol.bias_component.empty()) {
    p.bias = mean(sol.bias_component, start, T);
    p.variance = mean(sol.variance_component, start, T);
  }
  return p;
}

SgdPlateau sgd_asymptote(const Spectrum& spec, const SystemShape& shape, std::size_t batch,
                         double eta, std::size_t T, const SgdSettings& cfg) {
  return sgd_asymptote(solve_sgd_dmft(spec, shape, batch, eta, T, cfg));
}

}  // namespace scalelaw
