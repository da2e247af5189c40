#pragma once

// Time-translation-invariant solution in the Laplace variable s (s = eps + i omega
// on the frequency axis).  In terms of one scalar p,
//   R1 = 1 - p/alpha,  R3 = 1 - p/nu,  q = R1 R3,
//   p = q (1/M) sum_k lambda_k / (s + lambda_k q),
// and the transfer function of mode k is H_k(s) = 1/(s + lambda_k q).
// The scalar equation is solved by Newton's method in u = q/s, continued along
// paths from large |s| where q ~ 1, so the physical branch is kept.
//
// Time-domain quantities are obtained by numerical inverse Laplace transform
// on a fixed Talbot contour (Abate-Valko), in one and two variables.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "scalelaw/spectrum.hpp"

namespace scalelaw {

using cplx = std::complex<double>;

struct SolverError : std::runtime_error {
  double residual;
  SolverError(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
};

// Distinct eigenvalues with their share of modes: weight = count/M,
// wsq = sum of w*^2 over the group divided by M.
struct ModeGroups {
  std::vector<double> lambda, weight, wsq;
  std::vector<std::size_t> of_mode;  // group index of every mode
  std::size_t size() const { return lambda.size(); }
};

ModeGroups group_modes(const Spectrum& spec);

struct ResponseValue {
  cplx s, p, R1, R3;
  cplx u;  // q/s, the Newton variable
  double residual = 0.0;
  int iterations = 0;
  cplx q() const { return R1 * R3; }
};

class ResponseSystem {
 public:
  ResponseSystem(const Spectrum& spec, const SystemShape& shape);

  const Couplings& cpl() const { return cpl_; }
  const ModeGroups& groups() const { return g_; }
  double lambda_max() const { return lmax_; }
  double lambda_min() const { return lmin_; }

  // Newton from u0 (u = q/s); throws SolverError when it does not converge.
  ResponseValue newton(cplx s, cplx u0) const;
  // From large |s| along the ray through s.
  ResponseValue solve(cplx s) const;
  // Adaptive continuation from a solved point to s.
  ResponseValue continue_to(const ResponseValue& from, cplx s) const;
  // First point by solve(), the rest by continuation in order.
  std::vector<ResponseValue> path(const std::vector<cplx>& pts) const;

  cplx transfer(const ResponseValue& v, double lambda) const { return 1.0 / (v.s + lambda * v.q()); }

 private:
  ResponseValue segment(const ResponseValue& from, cplx s, int depth, int& budget) const;
  Couplings cpl_;
  ModeGroups g_;
  double lmax_, lmin_, trace_;
};

struct FourierSettings {
  int points_per_sign = 1000;
  double omega_min_rel = 1e-6;  // times lambda_M
  double omega_max_rel = 1e3;   // times lambda_1
  double eps_rel = 1e-9;        // times lambda_1
  int talbot_nodes = 32;        // 1D inversions
  int talbot_nodes_2d = 24;     // loss curves
};

// Responses on the symmetric log grid, negative frequencies first.
struct FrequencySolution {
  std::vector<double> omega;
  double eps = 0.0;
  std::vector<cplx> R1, R3;
  double max_residual = 0.0;
  bool knife_edge = false;  // alpha == nu: averaged over nu (1 +- 1e-6)
};

FrequencySolution solve_frequency_grid(const Spectrum& spec, const SystemShape& shape,
                                       const FourierSettings& cfg = {});

// (R1, R3) at s = eps + i omega.
std::pair<cplx, cplx> solve_response_at(double omega, const Spectrum& spec,
                                        const SystemShape& shape, double eps);

// H_k at grid point i of a frequency solution.
cplx transfer_function(const FrequencySolution& sol, std::size_t i, double lambda_k);

// Fixed Talbot rule for time t: the upper-half nodes s_0 = r (real), s_1..s_{n-1};
// f(t) ~ Re sum_k w_k F(s_k).  The full symmetric rule uses W_k = w_k / 2 for
// k > 0 on both s_k and conj(s_k), and W_0 = w_0.
struct TalbotRule {
  std::vector<cplx> s, w;
};
TalbotRule talbot_rule(double t, int n);
double talbot_invert(const std::function<cplx(cplx)>& F, double t, int n = 32);

// H(t) for an eigenvalue lambda on the given times (t >= 0).
std::vector<double> inverse_transfer(const ResponseSystem& sys, double lambda,
                                     const std::vector<double>& times, int n = 32);
// All groups at once: groups x times.
Eigen::MatrixXd inverse_transfer_groups(const ResponseSystem& sys,
                                        const std::vector<double>& times, int n = 32);

// Two-frequency correlations (Laplace in both arguments).
struct TwoFreqCorrelation {
  cplx C0, C1, C2, C3;
};
TwoFreqCorrelation correlation_two_freq(const ResponseSystem& sys, const ResponseValue& a,
                                        const ResponseValue& b);

// Diagonal time-domain correlators from the 2D inversion.  Values are on the
// internal scale (no sigma^2, no loss_scale):
//   c0: single system C0(t,t);  c1: C1(t,t)
//   beta: irreducible bias (1/M) sum lambda w*^2 H_k(t)^2
//   cross_e: two systems sharing data only;  cross_b: sharing projection only
struct FourierCurves {
  std::vector<double> t, c0, c1, beta, cross_e, cross_b;
};
FourierCurves fourier_curves(const ResponseSystem& sys, const std::vector<double>& times,
                             int n = 24);

struct TheoryCurve {
  std::vector<double> t, test, train;
};
TheoryCurve fourier_loss_curve(const Spectrum& spec, const SystemShape& shape,
                               const std::vector<double>& times, const FourierSettings& cfg = {});

struct TimescaleDensity {
  std::vector<double> u, rho;
  double mass0 = 0.0;  // unlearnable weight 1/(1 + lambda r)
};

// rho(u) = (1/pi) Im H(-u - i eps), Richardson-extrapolated from eps and 2 eps.
TimescaleDensity timescale_density(const ResponseSystem& sys, double lambda,
                                   const std::vector<double>& u, double eps = 1e-7);

// Discrete-time transfer on the unit circle, heavy ball with momentum mu:
//   H_k(z) = 1/(z - 1 - mu + mu/z + eta lambda_k q(s)),  s = (z-1)(z-mu)/(eta z).
// Its series (z-1)(1-mu/z) H_k(z) = sum_n (h_k[n] - h_k[n-1]) z^-n, h_k[-1] = 0,
// matches the lag differences of the discrete solver.
cplx z_transfer(cplx z, double lambda_k, const ResponseSystem& sys, double eta, double mu = 0.0);

}  // namespace scalelaw
