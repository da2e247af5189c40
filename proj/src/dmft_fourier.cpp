#include "scalelaw/dmft_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "scalelaw/asymptotics.hpp"
#include "scalelaw/parallel.hpp"

namespace scalelaw {

using Eigen::Index;

ModeGroups group_modes(const Spectrum& spec) {
  validate(spec);
  ModeGroups g;
  const double invM = 1.0 / double(spec.size());
  g.of_mode.resize(spec.size());
  // Eigenvalues are sorted, so equal values are adjacent.
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (g.lambda.empty() || spec.lambda[k] != g.lambda.back()) {
      g.lambda.push_back(spec.lambda[k]);
      g.weight.push_back(0.0);
      g.wsq.push_back(0.0);
    }
    g.weight.back() += invM;
    g.wsq.back() += spec.wstar_sq[k] * invM;
    g.of_mode[k] = g.lambda.size() - 1;
  }
  return g;
}

ResponseSystem::ResponseSystem(const Spectrum& spec, const SystemShape& shape)
    : cpl_(couplings(shape)), g_(group_modes(spec)) {
  lmax_ = g_.lambda.front();
  lmin_ = g_.lambda.back();
  trace_ = spec.trace();
}

// Newton in u = q/s.  Then p = sum_g w lambda u/(1 + lambda u) exactly and the
// scalar equation becomes q(p(u)) = s u, which has no poles near the physical
// root even when q -> 0 at small s.
ResponseValue ResponseSystem::newton(cplx s, cplx u0) const {
  const double ia = cpl_.inv_alpha, in = cpl_.inv_nu;
  auto eval = [&](cplx u, cplx* dG, cplx* pout) {
    cplx p = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      cplx den = 1.0 / (1.0 + g_.lambda[i] * u);
      p += g_.weight[i] * g_.lambda[i] * u * den;
      dp += g_.weight[i] * g_.lambda[i] * den * den;
    }
    cplx q = (1.0 - ia * p) * (1.0 - in * p);
    if (dG) {
      cplx dq = -ia * (1.0 - in * p) - in * (1.0 - ia * p);
      *dG = dq * dp - s;
    }
    if (pout) *pout = p;
    return q - s * u;
  };
  auto scale = [&](cplx u) { return std::max(1.0, std::abs(s * u)); };

  ResponseValue v;
  v.s = s;
  cplx u = u0, dG, p;
  cplx G = eval(u, &dG, &p);
  double res = std::abs(G) / scale(u);
  for (int it = 1; it <= 100; ++it) {
    v.iterations = it;
    if (res <= 1e-14) break;
    cplx step = -G / dG;
    double lam = 1.0;
    cplx un, Gn, dGn, pn;
    double rn = 0.0;
    for (int ls = 0; ls < 30; ++ls) {
      un = u + lam * step;
      Gn = eval(un, &dGn, &pn);
      rn = std::abs(Gn) / scale(un);
      if (rn < res || ls == 29) break;
      lam *= 0.5;
    }
    bool stalled = std::abs(un - u) <= 4e-16 * std::max(std::abs(u), 1e-300);
    u = un;
    G = Gn;
    dG = dGn;
    p = pn;
    res = rn;
    if (stalled) break;
  }
  v.u = u;
  v.p = p;
  v.R1 = 1.0 - ia * p;
  v.R3 = 1.0 - in * p;
  v.residual = res;
  if (!std::isfinite(res) || res > 1e-11)
    throw SolverError("response Newton did not converge at s = (" + std::to_string(s.real()) +
                          ", " + std::to_string(s.imag()) + ")",
                      res);
  return v;
}

ResponseValue ResponseSystem::segment(const ResponseValue& from, cplx s, int depth,
                                      int& budget) const {
  if (--budget < 0) throw SolverError("response continuation exhausted its step budget", kInf);
  auto attempt = [&](cplx u0) -> std::optional<ResponseValue> {
    try {
      return newton(s, u0);
    } catch (const SolverError&) {
      return std::nullopt;
    }
  };
  // Two guesses: q held fixed (large |s|) and u held fixed (small |s|).
  std::optional<ResponseValue> v = attempt(from.u * from.s / s);
  auto accept = [&](const std::optional<ResponseValue>& c) {
    if (!c) return false;
    double scale = std::max(std::abs(from.p), std::abs(c->p));
    return std::abs(c->p - from.p) <= 0.05 * scale + 1e-14;
  };
  if (!accept(v)) {
    auto w = attempt(from.u);
    if (accept(w)) v = w;
  }
  if (accept(v) || (v && depth >= 40)) return *v;
  if (depth >= 40) throw SolverError("response continuation failed to converge", kInf);
  cplx mid = 0.5 * (from.s + s);
  ResponseValue m = segment(from, mid, depth + 1, budget);
  return segment(m, s, depth + 1, budget);
}

ResponseValue ResponseSystem::continue_to(const ResponseValue& from, cplx s) const {
  int budget = 20000;
  return segment(from, s, 0, budget);
}

ResponseValue ResponseSystem::solve(cplx s) const {
  if (s == 0.0) throw InvalidArgument("response solve at s = 0 is undefined; use asymptotics");
  const double far = 1e4 * (lmax_ + 1.0) * (1.0 + cpl_.inv_alpha + cpl_.inv_nu);
  const double mod = std::abs(s);
  cplx dir = s / mod;
  // q ~ 1 at large |s|.
  if (mod >= far) return newton(s, 1.0 / s);
  ResponseValue v = newton(dir * far, 1.0 / (dir * far));
  for (double r = far * 0.7; r > mod; r *= 0.7) v = continue_to(v, dir * r);
  return continue_to(v, s);
}

std::vector<ResponseValue> ResponseSystem::path(const std::vector<cplx>& pts) const {
  std::vector<ResponseValue> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    out.push_back(i == 0 ? solve(pts[0]) : continue_to(out.back(), pts[i]));
  return out;
}

namespace {

FrequencySolution grid_once(const Spectrum& spec, const SystemShape& shape,
                            const FourierSettings& cfg) {
  ResponseSystem sys(spec, shape);
  FrequencySolution sol;
  sol.eps = cfg.eps_rel * sys.lambda_max();
  const int n = cfg.points_per_sign;
  const double lo = std::log(cfg.omega_min_rel * sys.lambda_min());
  const double hi = std::log(cfg.omega_max_rel * sys.lambda_max());
  std::vector<cplx> pts(static_cast<std::size_t>(n));
  std::vector<double> pos(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double w = std::exp(hi - (hi - lo) * double(i) / double(std::max(n - 1, 1)));
    pos[std::size_t(i)] = w;
    pts[std::size_t(i)] = cplx(sol.eps, w);
  }
  auto vals = sys.path(pts);
  // Ascending frequency: negative side by conjugation, then positive.
  for (int i = 0; i < n; ++i) {
    const auto& v = vals[std::size_t(i)];
    sol.omega.push_back(-pos[std::size_t(i)]);
    sol.R1.push_back(std::conj(v.R1));
    sol.R3.push_back(std::conj(v.R3));
    sol.max_residual = std::max(sol.max_residual, v.residual);
  }
  for (int i = n - 1; i >= 0; --i) {
    const auto& v = vals[std::size_t(i)];
    sol.omega.push_back(pos[std::size_t(i)]);
    sol.R1.push_back(v.R1);
    sol.R3.push_back(v.R3);
  }
  return sol;
}

}  // namespace

FrequencySolution solve_frequency_grid(const Spectrum& spec, const SystemShape& shape,
                                       const FourierSettings& cfg) {
  if (cfg.points_per_sign < 1) throw InvalidArgument("frequency grid needs at least one point");
  const double a = shape.alpha(), nu = shape.nu();
  if (std::isfinite(a) && std::isfinite(nu) && std::abs(a - nu) <= 1e-12 * a) {
    SystemShape lo = shape, hi = shape;
    lo.N = shape.N * (1.0 - 1e-6);
    hi.N = shape.N * (1.0 + 1e-6);
    FrequencySolution s1 = grid_once(spec, lo, cfg), s2 = grid_once(spec, hi, cfg);
    for (std::size_t i = 0; i < s1.omega.size(); ++i) {
      s1.R1[i] = 0.5 * (s1.R1[i] + s2.R1[i]);
      s1.R3[i] = 0.5 * (s1.R3[i] + s2.R3[i]);
    }
    s1.max_residual = std::max(s1.max_residual, s2.max_residual);
    s1.knife_edge = true;
    return s1;
  }
  return grid_once(spec, shape, cfg);
}

std::pair<cplx, cplx> solve_response_at(double omega, const Spectrum& spec,
                                        const SystemShape& shape, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("solve_response_at: eps must be positive");
  ResponseSystem sys(spec, shape);
  ResponseValue v = sys.solve(cplx(eps, omega));
  return {v.R1, v.R3};
}

cplx transfer_function(const FrequencySolution& sol, std::size_t i, double lambda_k) {
  cplx s(sol.eps, sol.omega.at(i));
  return 1.0 / (s + lambda_k * sol.R1[i] * sol.R3[i]);
}

TalbotRule talbot_rule(double t, int n) {
  if (!(t > 0.0)) throw InvalidArgument("talbot_rule: t must be positive");
  if (n < 2) throw InvalidArgument("talbot_rule: need at least 2 nodes");
  const double r = 2.0 * n / (5.0 * t);
  TalbotRule rule;
  rule.s.push_back(r);
  rule.w.push_back(0.5 * std::exp(r * t) * r / n);
  for (int k = 1; k < n; ++k) {
    double th = k * M_PI / n;
    double cot = 1.0 / std::tan(th);
    cplx s(r * th * cot, r * th);
    double sig = th + (th * cot - 1.0) * cot;
    rule.s.push_back(s);
    rule.w.push_back(std::exp(s * t) * cplx(1.0, sig) * r / double(n));
  }
  return rule;
}

double talbot_invert(const std::function<cplx(cplx)>& F, double t, int n) {
  TalbotRule rule = talbot_rule(t, n);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.s.size(); ++k) acc += (rule.w[k] * F(rule.s[k])).real();
  return acc;
}

Eigen::MatrixXd inverse_transfer_groups(const ResponseSystem& sys,
                                        const std::vector<double>& times, int n) {
  const auto& g = sys.groups();
  Eigen::MatrixXd out(Index(g.size()), Index(times.size()));
  parallel_for(times.size(), [&](std::size_t j) {
    double t = times[j];
    if (t == 0.0) {
      out.col(Index(j)).setOnes();
      return;
    }
    TalbotRule rule = talbot_rule(t, n);
    auto vals = sys.path(rule.s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < vals.size(); ++k)
        acc += (rule.w[k] * sys.transfer(vals[k], g.lambda[i])).real();
      out(Index(i), Index(j)) = acc;
    }
  });
  return out;
}

std::vector<double> inverse_transfer(const ResponseSystem& sys, double lambda,
                                     const std::vector<double>& times, int n) {
  std::vector<double> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] < 0.0) throw InvalidArgument("inverse_transfer: negative time");
    if (times[j] == 0.0) {
      out[j] = 1.0;
      continue;
    }
    TalbotRule rule = talbot_rule(times[j], n);
    auto vals = sys.path(rule.s);
    double acc = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k)
      acc += (rule.w[k] * sys.transfer(vals[k], lambda)).real();
    out[j] = acc;
  }
  return out;
}

namespace {

struct PairCoeffs {
  cplx a0, b0, c0, a2, b2, c2, n;
};

PairCoeffs pair_coeffs(const Couplings& c, const ResponseValue& a, const ResponseValue& b,
                       cplx Slw2, cplx Sl, cplx Sl2, cplx Sl2w2) {
  PairCoeffs k;
  cplx r11 = a.R1 * b.R1, r33 = a.R3 * b.R3;
  k.a0 = Slw2;
  k.b0 = r33 * c.inv_nu * Sl;
  k.c0 = r11 * r33 * c.inv_alpha * Sl2;
  k.a2 = r11 * Sl2w2;
  k.c2 = r11 * r33 * c.inv_nu * Sl2;
  k.b2 = a.s * b.s * c.inv_alpha * r11 * Sl;
  k.n = c.sigma2 / (a.s * b.s);
  return k;
}

cplx full_c0(const PairCoeffs& k) {
  cplx det = (1.0 - k.c0) * (1.0 - k.c2) - k.b0 * k.b2;
  return ((k.a0 + k.c0 * k.n) * (1.0 - k.c2) + k.b0 * (k.a2 + k.b2 * k.n)) / det;
}

}  // namespace

TwoFreqCorrelation correlation_two_freq(const ResponseSystem& sys, const ResponseValue& a,
                                        const ResponseValue& b) {
  const auto& g = sys.groups();
  cplx Slw2 = 0.0, Sl = 0.0, Sl2 = 0.0, Sl2w2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double l = g.lambda[i];
    cplx hh = sys.transfer(a, l) * sys.transfer(b, l);
    Slw2 += l * g.wsq[i] * hh;
    Sl += g.weight[i] * l * hh;
    Sl2 += g.weight[i] * l * l * hh;
    Sl2w2 += l * l * g.wsq[i] * hh;
  }
  PairCoeffs k = pair_coeffs(sys.cpl(), a, b, Slw2, Sl, Sl2, Sl2w2);
  TwoFreqCorrelation out;
  out.C0 = full_c0(k);
  out.C1 = a.R1 * b.R1 * (out.C0 + k.n);
  out.C2 = (k.a2 + k.b2 * (out.C0 + k.n)) / (1.0 - k.c2);
  out.C3 = a.R3 * b.R3 * out.C2;
  return out;
}

FourierCurves fourier_curves(const ResponseSystem& sys, const std::vector<double>& times, int n) {
  const auto& g = sys.groups();
  const Index G = Index(g.size());
  Eigen::VectorXd clw2(G), cl(G), cl2(G), cl2w2(G);
  for (Index i = 0; i < G; ++i) {
    double l = g.lambda[std::size_t(i)];
    clw2(i) = l * g.wsq[std::size_t(i)];
    cl(i) = g.weight[std::size_t(i)] * l;
    cl2(i) = g.weight[std::size_t(i)] * l * l;
    cl2w2(i) = l * l * g.wsq[std::size_t(i)];
  }

  FourierCurves out;
  out.t = times;
  const std::size_t T = times.size();
  out.c0.assign(T, 0.0);
  out.c1.assign(T, 0.0);
  out.beta.assign(T, 0.0);
  out.cross_e.assign(T, 0.0);
  out.cross_b.assign(T, 0.0);

  parallel_for(T, [&](std::size_t ti) {
    const double t = times[ti];
    if (t < 0.0) throw InvalidArgument("fourier_curves: negative time");
    if (t == 0.0) {
      // Initial condition: every mode at its target weight.
      double b = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) b += g.lambda[i] * g.wsq[i];
      out.c0[ti] = out.beta[ti] = out.cross_e[ti] = out.cross_b[ti] = b;
      out.c1[ti] = b + sys.cpl().sigma2;
      return;
    }
    TalbotRule rule = talbot_rule(t, n);
    std::vector<ResponseValue> up = sys.path(rule.s);
    // Full node set: upper nodes then conjugates of k >= 1.
    std::vector<ResponseValue> full = up;
    std::vector<cplx> W(rule.w.begin(), rule.w.end());
    for (int k = 1; k < n; ++k) {
      ResponseValue c = up[std::size_t(k)];
      c.s = std::conj(c.s);
      c.u = std::conj(c.u);
      c.p = std::conj(c.p);
      c.R1 = std::conj(c.R1);
      c.R3 = std::conj(c.R3);
      full.push_back(c);
      W[std::size_t(k)] *= 0.5;
      W.push_back(std::conj(W[std::size_t(k)]));
    }
    const Index F = Index(full.size());
    Eigen::MatrixXcd H(G, F);
    for (Index j = 0; j < F; ++j) {
      cplx s = full[std::size_t(j)].s, q = full[std::size_t(j)].q();
      for (Index i = 0; i < G; ++i) H(i, j) = 1.0 / (s + g.lambda[std::size_t(i)] * q);
    }
    Eigen::MatrixXcd HU = H.leftCols(n);
    auto bil = [&](const Eigen::VectorXd& c) -> Eigen::MatrixXcd {
      return HU.transpose() * (c.cast<cplx>().asDiagonal() * H);
    };
    Eigen::MatrixXcd Slw2 = bil(clw2), Sl = bil(cl), Sl2 = bil(cl2), Sl2w2 = bil(cl2w2);

    cplx acc[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (Index j = 0; j < n; ++j) {
      cplx row[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
      for (Index k = 0; k < F; ++k) {
        PairCoeffs c = pair_coeffs(sys.cpl(), full[std::size_t(j)], full[std::size_t(k)],
                                   Slw2(j, k), Sl(j, k), Sl2(j, k), Sl2w2(j, k));
        cplx X = full_c0(c);
        cplx w = W[std::size_t(k)];
        row[0] += w * X;
        row[1] += w * full[std::size_t(j)].R1 * full[std::size_t(k)].R1 * (X + c.n);
        row[2] += w * c.a0;
        row[3] += w * (c.a0 + c.c0 * c.n) / (1.0 - c.c0);
        row[4] += w * (c.a0 + c.b0 * c.a2 / (1.0 - c.c2));
      }
      double f = j == 0 ? 1.0 : 2.0;
      for (int m = 0; m < 5; ++m) acc[m] += f * W[std::size_t(j)] * row[m];
    }
    out.c0[ti] = acc[0].real();
    out.c1[ti] = acc[1].real();
    out.beta[ti] = acc[2].real();
    out.cross_e[ti] = acc[3].real();
    out.cross_b[ti] = acc[4].real();
  });
  return out;
}

TheoryCurve fourier_loss_curve(const Spectrum& spec, const SystemShape& shape,
                               const std::vector<double>& times, const FourierSettings& cfg) {
  ResponseSystem sys(spec, shape);
  FourierCurves fc = fourier_curves(sys, times, cfg.talbot_nodes_2d);
  const Couplings& c = sys.cpl();
  TheoryCurve out;
  out.t = times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.test.push_back(c.loss_scale * (fc.c0[i] + c.sigma2));
    out.train.push_back(c.loss_scale * fc.c1[i]);
  }
  return out;
}

TimescaleDensity timescale_density(const ResponseSystem& sys, double lambda,
                                   const std::vector<double>& u, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("timescale_density: eps must be positive");
  TimescaleDensity out;
  out.u = u;
  const double top = 1e3 * std::max(1.0, sys.lambda_max());
  for (double x : u) {
    if (!(x > 0.0)) throw InvalidArgument("timescale_density: u must be positive");
    ResponseValue v = sys.solve(cplx(-x, -top));
    double y = top;
    while (y * 0.5 > 2.0 * eps) {
      y *= 0.5;
      v = sys.continue_to(v, cplx(-x, -y));
    }
    ResponseValue v2 = sys.continue_to(v, cplx(-x, -2.0 * eps));
    ResponseValue v1 = sys.continue_to(v2, cplx(-x, -eps));
    double r1 = sys.transfer(v1, lambda).imag() / M_PI;
    double r2 = sys.transfer(v2, lambda).imag() / M_PI;
    out.rho.push_back(2.0 * r1 - r2);
  }
  const auto& g = sys.groups();
  const Couplings& c = sys.cpl();
  double target = std::min(c.inv_alpha > 0.0 ? 1.0 / c.inv_alpha : kInf,
                           c.inv_nu > 0.0 ? 1.0 / c.inv_nu : kInf);
  double r = std::isinf(target) ? kInf : solve_r_value(g.lambda, g.weight, target);
  out.mass0 = std::isinf(r) ? 0.0 : 1.0 / (1.0 + lambda * r);
  return out;
}

cplx z_transfer(cplx z, double lambda_k, const ResponseSystem& sys, double eta, double mu) {
  if (std::abs(std::abs(z) - 1.0) > 1e-9) throw InvalidArgument("z_transfer: |z| must be 1");
  if (std::abs(z - 1.0) < 1e-14) throw InvalidArgument("z_transfer: z = 1 is the final-value pole");
  if (!(eta > 0.0) || !(mu >= 0.0 && mu < 1.0))
    throw InvalidArgument("z_transfer: need eta > 0 and 0 <= mu < 1");
  cplx s = (z - 1.0) * (z - mu) / (eta * z);
  ResponseValue v = sys.solve(s);
  return 1.0 / (z - 1.0 - mu + mu / z + eta * lambda_k * v.q());
}

}  // namespace scalelaw
