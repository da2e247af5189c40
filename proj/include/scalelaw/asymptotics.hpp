#pragma once

// Long-time limits, the kernel-regression limit, early-time expansion,
// power-law exponents, compute-optimal algebra and the closed forms of the
// white (all lambda_k = 1) model.

#include <complex>
#include <vector>

#include "scalelaw/spectrum.hpp"

namespace scalelaw {

enum class Branch { over, under };

// r solves (1/M) sum_k lambda_k r/(1 + lambda_k r) = target; returns kInf when
// target >= sum of weights (every mode learnable).
double solve_r_value(const std::vector<double>& lambda, const std::vector<double>& weight,
                     double target);

struct AsymptoticSolution {
  double r = 0.0;  // kInf when min(alpha, nu) >= 1
  Branch branch = Branch::over;
  std::vector<double> H_inf;  // 1/(1 + lambda_k r), per mode
  double R1_0 = 0.0, R3_0 = 0.0;  // zero-frequency responses
};

AsymptoticSolution solve_r(const Spectrum& spec, const SystemShape& shape);

struct FinalLoss {
  double test = 0.0, train = 0.0;  // reported scale
  double C0 = 0.0;                 // internal scale, excludes sigma^2
  double C3 = 0.0;                 // limit of R3 R3' C2 on the internal scale
  bool divergent = false;          // interpolation threshold
};

FinalLoss final_loss(const AsymptoticSolution& sol, const Spectrum& spec, const SystemShape& shape);
FinalLoss final_loss(const Spectrum& spec, const SystemShape& shape);

// nu -> infinity: kappa solves 1 = (1/M) sum lambda/(lambda alpha + kappa), kappa = 0 for alpha >= 1.
struct KernelLimit {
  double kappa = 0.0, gamma = 0.0;
  double test = 0.0;  // reported scale, includes sigma^2
  bool divergent = false;
};
KernelLimit kernel_regression_limit(const Spectrum& spec, const SystemShape& shape);

// Leading 1/alpha + 1/nu correction to exp(-lambda t) for the mode lambda_k.
double early_time_transfer(double lambda_k, double t, const Spectrum& spec,
                           const SystemShape& shape);

struct ScalingReport {
  double r_t = 0, r_N = 0, r_P = 0, m = 0;
  double c_N = 0, c_t = 0, c_L = 0;
  bool easy_task = false;  // 2b < a-1
};
ScalingReport bottleneck_exponents(double a, double b);
ScalingReport compute_optimal(double a, double b);

struct PowerLawFit {
  double exponent = 0, prefactor = 0, r2 = 0;
  std::size_t points = 0;
};
// Least squares of log y on log x over x in [xmin, xmax].
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                          double xmin = 0.0, double xmax = kInf);

struct SurfacePoint {
  double N, t, loss;
};
struct FrontierPoint {
  double C, loss, N, t;
};
// Compute C = N t.  On a log grid of C, each N curve is interpolated
// log-linearly in t at t = C/N and the minimum over N is taken.  Buckets
// that no curve covers are skipped.
std::vector<FrontierPoint> pareto_frontier(const std::vector<SurfacePoint>& surface,
                                           std::size_t buckets = 64);

namespace white {

using cplx = std::complex<double>;

// R3 at Laplace variable s from the cubic
//   nu (1-x) s alpha + x (alpha - nu + nu x)(nu - nu x - 1) = 0,
// root chosen by continuity from x = 1 at large |s|.
cplx R3_cubic(cplx s, double alpha, double nu);
// alpha -> infinity: R3 = [(1 - 1/nu - s) + sqrt((1 - 1/nu - s)^2 + 4 s)] / 2.
cplx R3_alpha_inf(cplx s, double nu);
// nu -> infinity: s H^2 + (alpha s + alpha - 1) H - alpha = 0.
cplx H_nu_inf(cplx s, double alpha);
// Marchenko-Pastur density of rates for aspect ratio 1/alpha (alpha > 1).
double mp_density(double u, double alpha);
// alpha -> infinity perturbative transfer functions.
double H_small_nu(double tau, double nu);
double H_large_nu(double tau, double nu);

}  // namespace white

}  // namespace scalelaw
