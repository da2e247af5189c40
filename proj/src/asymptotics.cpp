#include "scalelaw/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

namespace scalelaw {

namespace {

double min_ratio(const SystemShape& shape) {
  Couplings c = couplings(shape);
  double a = c.inv_alpha > 0.0 ? 1.0 / c.inv_alpha : kInf;
  double n = c.inv_nu > 0.0 ? 1.0 / c.inv_nu : kInf;
  return std::min(a, n);
}

std::vector<double> uniform_weights(const Spectrum& spec) {
  return std::vector<double>(spec.size(), 1.0 / double(spec.size()));
}

}  // namespace

double solve_r_value(const std::vector<double>& lambda, const std::vector<double>& weight,
                     double target) {
  double total = 0.0;
  for (double w : weight) total += w;
  if (!(target > 0.0)) throw InvalidArgument("solve_r: target must be positive");
  if (target >= total) return kInf;
  auto f = [&](double r, double* df) {
    double v = 0.0, d = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      double x = lambda[k] * r;
      v += weight[k] * x / (1.0 + x);
      d += weight[k] * lambda[k] / ((1.0 + x) * (1.0 + x));
    }
    if (df) *df = d;
    return v - target;
  };
  // The map is increasing in r; bisect in log r, then polish with Newton.
  double lo = 1e-12, hi = 1e12;
  while (f(hi, nullptr) < 0.0 && hi < 1e300) hi *= 1e6;
  while (f(lo, nullptr) > 0.0 && lo > 1e-300) lo *= 1e-6;
  while (hi / lo > 1.0 + 1e-6) {
    double mid = std::sqrt(lo * hi);
    (f(mid, nullptr) < 0.0 ? lo : hi) = mid;
  }
  double r = std::sqrt(lo * hi);
  for (int it = 0; it < 50; ++it) {
    double d;
    double v = f(r, &d);
    double step = v / d;
    r -= step;
    if (std::abs(step) <= 1e-15 * r || std::abs(v) <= 1e-12 * target) break;
  }
  return r;
}

AsymptoticSolution solve_r(const Spectrum& spec, const SystemShape& shape) {
  validate(spec);
  Couplings c = couplings(shape);
  AsymptoticSolution sol;
  sol.branch = c.inv_nu < c.inv_alpha ? Branch::over : Branch::under;
  double target = min_ratio(shape);
  sol.r = std::isinf(target) ? kInf : solve_r_value(spec.lambda, uniform_weights(spec), target);
  sol.H_inf.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k)
    sol.H_inf[k] = std::isinf(sol.r) ? 0.0 : 1.0 / (1.0 + spec.lambda[k] * sol.r);
  // p at s -> 0 is min(alpha, nu, 1).
  double p0 = std::min(target, 1.0);
  sol.R1_0 = 1.0 - c.inv_alpha * p0;
  sol.R3_0 = 1.0 - c.inv_nu * p0;
  return sol;
}

FinalLoss final_loss(const AsymptoticSolution& sol, const Spectrum& spec,
                     const SystemShape& shape) {
  Couplings c = couplings(shape);
  const double invM = 1.0 / double(spec.size());
  // hr = lim q H / s... per mode: r/(1 + lambda r), or 1/lambda when r = inf.
  double A0 = 0, B0 = 0, G0 = 0, B2 = 0, A2 = 0, G2 = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double l = spec.lambda[k], w2 = spec.wstar_sq[k];
    double H = sol.H_inf[k];
    double hr = std::isinf(sol.r) ? 1.0 / l : sol.r / (1.0 + l * sol.r);
    A0 += invM * l * H * H * w2;
    B0 += invM * l * H * H;
    G0 += invM * l * l * hr * hr;
    B2 += invM * l * hr * hr;
    A2 += invM * l * l * hr * hr * w2;
    G2 += invM * l * l * hr * hr;
  }
  B0 *= c.inv_nu;
  G0 *= c.inv_alpha;
  B2 *= c.inv_alpha;
  G2 *= c.inv_nu;
  // C0 = A0 + B0 C3 + G0 (C0 + s2);  C3 = A2 + B2 (C0 + s2) + G2 C3
  Eigen::Matrix2d K;
  K << 1.0 - G0, -B0, -B2, 1.0 - G2;
  Eigen::Vector2d rhs(A0 + G0 * c.sigma2, A2 + B2 * c.sigma2);
  FinalLoss out;
  double det = K.determinant();
  if (!(det > 1e-14)) {
    out.divergent = true;
    out.test = out.train = kInf;
    out.C0 = out.C3 = kInf;
    return out;
  }
  Eigen::Vector2d x = K.partialPivLu().solve(rhs);
  out.C0 = x(0);
  out.C3 = x(1);
  out.test = c.loss_scale * (x(0) + c.sigma2);
  out.train = c.loss_scale * sol.R1_0 * sol.R1_0 * (x(0) + c.sigma2);
  if (sol.R1_0 == 0.0) out.train = 0.0;
  return out;
}

FinalLoss final_loss(const Spectrum& spec, const SystemShape& shape) {
  return final_loss(solve_r(spec, shape), spec, shape);
}

KernelLimit kernel_regression_limit(const Spectrum& spec, const SystemShape& shape) {
  validate(spec);
  Couplings c = couplings(shape);
  KernelLimit out;
  const double invM = 1.0 / double(spec.size());
  if (c.inv_alpha == 0.0) {
    out.test = c.loss_scale * c.sigma2;
    return out;
  }
  const double alpha = 1.0 / c.inv_alpha;
  if (alpha < 1.0) {
    double r = solve_r_value(spec.lambda, uniform_weights(spec), alpha);
    out.kappa = alpha / r;
  }
  double A = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double l = spec.lambda[k];
    double d = l * alpha + out.kappa;
    out.gamma += invM * alpha * l * l / (d * d);
    A += invM * l * spec.wstar_sq[k] * out.kappa * out.kappa / (d * d);
  }
  if (!(out.gamma < 1.0 - 1e-14)) {
    out.divergent = true;
    out.test = kInf;
    return out;
  }
  out.test = c.loss_scale * (A + c.sigma2) / (1.0 - out.gamma);
  return out;
}

double early_time_transfer(double lambda_k, double t, const Spectrum& spec,
                           const SystemShape& shape) {
  Couplings c = couplings(shape);
  double e = std::exp(-lambda_k * t);
  double corr = spec.trace() * (c.inv_alpha + c.inv_nu) / lambda_k;
  return e + corr * (1.0 - e - lambda_k * t * e);
}

ScalingReport bottleneck_exponents(double a, double b) {
  if (!(a > 1.0) || !(b > 0.0)) throw InvalidArgument("exponents need a > 1 and b > 0");
  ScalingReport s;
  s.r_t = (a - 1.0) / b;
  s.m = std::min(a - 1.0, 2.0 * b);
  s.r_N = s.r_P = s.m;
  s.easy_task = 2.0 * b < a - 1.0;
  return s;
}

ScalingReport compute_optimal(double a, double b) {
  ScalingReport s = bottleneck_exponents(a, b);
  double den = a - 1.0 + b * s.m;
  s.c_N = (a - 1.0) / den;
  s.c_t = b * s.m / den;
  s.c_L = (a - 1.0) * s.m / den;
  return s;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                          double xmin, double xmax) {
  if (x.size() != y.size()) throw InvalidArgument("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < xmin || x[i] > xmax) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw InvalidArgument("fit_power_law: nonpositive value in window");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 8) throw InvalidArgument("fit_power_law: need at least 8 points in window");
  const double n = double(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  PowerLawFit f;
  f.points = lx.size();
  f.exponent = sxy / sxx;
  f.prefactor = std::exp(my - f.exponent * mx);
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

std::vector<FrontierPoint> pareto_frontier(const std::vector<SurfacePoint>& surface,
                                           std::size_t buckets) {
  std::map<double, std::vector<std::pair<double, double>>> curves;  // N -> (t, loss)
  for (const auto& p : surface) {
    if (!(p.N > 0.0) || !(p.t > 0.0) || !(p.loss > 0.0)) continue;
    curves[p.N].push_back({p.t, p.loss});
  }
  std::vector<FrontierPoint> out;
  if (curves.empty() || buckets == 0) return out;
  double cmin = kInf, cmax = 0.0;
  for (auto& [N, c] : curves) {
    std::sort(c.begin(), c.end());
    cmin = std::min(cmin, N * c.front().first);
    cmax = std::max(cmax, N * c.back().first);
  }
  for (std::size_t b = 0; b < buckets; ++b) {
    double C = buckets == 1 ? cmin
                            : std::exp(std::log(cmin) + (std::log(cmax) - std::log(cmin)) *
                                                            double(b) / double(buckets - 1));
    FrontierPoint best{C, kInf, 0.0, 0.0};
    for (const auto& [N, c] : curves) {
      double t = C / N;
      if (t < c.front().first * (1 - 1e-12) || t > c.back().first * (1 + 1e-12)) continue;
      auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(t, -kInf));
      double loss;
      if (it == c.end()) {
        loss = c.back().second;
      } else if (it == c.begin() || it->first == t) {
        loss = it->second;
      } else {
        auto lo = it - 1;
        double u = (std::log(t) - std::log(lo->first)) / (std::log(it->first) - std::log(lo->first));
        loss = std::exp((1 - u) * std::log(lo->second) + u * std::log(it->second));
      }
      if (loss < best.loss) best = {C, loss, N, t};
    }
    if (std::isfinite(best.loss)) out.push_back(best);
  }
  return out;
}

namespace white {

namespace {

// Follows the root of a polynomial (coefficients low to high, in s) along the
// ray from large |s| down to s, starting next to x_far.
template <class Coeffs>
cplx track_root(cplx s, cplx x_far, Coeffs coeffs) {
  const double mod = std::abs(s);
  if (mod == 0.0) throw InvalidArgument("closed form at s = 0 is undefined");
  const cplx dir = s / mod;
  double far = std::max(1e6, 1e3 * mod);
  cplx x = x_far;
  auto roots_at = [&](cplx z) {
    std::vector<cplx> c = coeffs(z);
    while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
    const int deg = int(c.size()) - 1;
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[std::size_t(i)] / c.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
    return es.eigenvalues();
  };
  auto nearest = [&](cplx z, cplx prev) {
    auto r = roots_at(z);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < r.size(); ++i)
      if (std::abs(r(i) - prev) < std::abs(r(best) - prev)) best = i;
    // Polish with Newton on the polynomial.
    cplx x = r(best);
    std::vector<cplx> c = coeffs(z);
    for (int it = 0; it < 3; ++it) {
      cplx v = 0.0, d = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) {
        d = d * x + v;
        v = v * x + c[i];
      }
      if (d != 0.0) x -= v / d;
    }
    return x;
  };
  for (double r = far; r > mod; r *= 0.9) x = nearest(dir * r, x);
  return nearest(s, x);
}

}  // namespace

cplx R3_cubic(cplx s, double alpha, double nu) {
  // nu(1-x) s alpha + x (alpha - nu + nu x)(nu - nu x - 1), expanded in x.
  auto coeffs = [&](cplx z) {
    double A = alpha - nu, Bc = nu - 1.0;
    // x (A + nu x)(Bc - nu x) = A Bc x + (nu Bc - nu A) x^2 - nu^2 x^3
    std::vector<cplx> c(4);
    c[0] = nu * alpha * z;
    c[1] = -nu * alpha * z + A * Bc;
    c[2] = nu * Bc - nu * A;
    c[3] = -nu * nu;
    return c;
  };
  return track_root(s, 1.0, coeffs);
}

cplx R3_alpha_inf(cplx s, double nu) {
  // Roots of x^2 - (1 - 1/nu - s) x - s = 0; the physical one tends to 1.
  auto coeffs = [&](cplx z) {
    return std::vector<cplx>{-z, -(1.0 - 1.0 / nu - z), 1.0};
  };
  return track_root(s, 1.0, coeffs);
}

cplx H_nu_inf(cplx s, double alpha) {
  auto coeffs = [&](cplx z) {
    return std::vector<cplx>{-alpha, alpha * z + alpha - 1.0, z};
  };
  double far = std::max(1e6, 1e3 * std::abs(s));
  return track_root(s, 1.0 / (s / std::abs(s) * far), coeffs);
}

double mp_density(double u, double alpha) {
  if (!(alpha > 1.0)) throw InvalidArgument("mp_density: alpha must exceed 1");
  double c = 1.0 / alpha;
  double lo = (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
  double hi = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
  if (u <= lo || u >= hi) return 0.0;
  return std::sqrt((hi - u) * (u - lo)) / (2.0 * M_PI * c * u);
}

double H_small_nu(double tau, double nu) { return (1.0 - nu) + nu * std::exp(-tau / nu); }

double H_large_nu(double tau, double nu) { return std::exp(-tau) * std::cosh(tau / std::sqrt(nu)); }

}  // namespace white

}  // namespace scalelaw
