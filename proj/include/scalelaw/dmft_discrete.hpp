#pragma once

// Discrete-time DMFT on T x T order parameters.
//
// Responses are time-translation invariant and causal, so they are lag
// series.  They are obtained by forward recursion in the lag: the lag-n
// coefficient of every update only needs lower lags, which makes the
// fixed point exact after one sweep.  Correlations are iterated with the
// damped scheme in correlation_engine.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scalelaw/spectrum.hpp"

namespace scalelaw {

struct SolveDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

struct OrderParameters {
  std::size_t T = 0;
  double eta = 0.0;
  double mu = 0.0;  // heavy-ball momentum folded into the step kernel
  Couplings cpl;

  // Lag series; R(t,s) = r[t-s] for t >= s.
  std::vector<double> theta;
  std::vector<double> r02, r1, r24, r3;

  // Mean trajectory of each mode divided by w*_k: H_k(t), M x T.
  Eigen::MatrixXd H;

  Eigen::MatrixXd C0, C1, C2, C3;
  bool has_correlations = false;

  SolveDiagnostics response_diag, correlation_diag;

  Eigen::MatrixXd R02() const;
  Eigen::MatrixXd R1() const;
  Eigen::MatrixXd R24() const;
  Eigen::MatrixXd R3() const;

  std::vector<double> test_loss() const;   // loss_scale * (C0(t,t) + sigma^2)
  std::vector<double> train_loss() const;  // loss_scale * C1(t,t)
};

struct DiscreteSettings {
  double damping = 0.5;
  double tol = 1e-8;
  int max_iter = 500;
  bool keep_transfer = true;
};

OrderParameters solve_responses(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                                double eta, double mu = 0.0);

void solve_correlations(OrderParameters& ops, const Spectrum& spec,
                        const DiscreteSettings& cfg = {});

// Diagonal of C0 between two systems with the same responses that share only
// the data, only the projection, or neither (both false: the irreducible bias).
// Internal scale.  Needs ops.H.
struct CrossCorrelation {
  std::vector<double> c0;
  SolveDiagnostics diag;
};
CrossCorrelation cross_system_c0(const OrderParameters& ops, const Spectrum& spec,
                                 bool share_data, bool share_projection,
                                 const DiscreteSettings& cfg = {});

// Convenience: both steps.
OrderParameters solve_discrete(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                               double eta, double mu = 0.0, const DiscreteSettings& cfg = {});

// Loss - train loss from the response/correlation formula
//   -(2/alpha) sum_s R02(t,s) C1(t,s) + (1/alpha^2) sum_{s,s'} R02(t,s) R02(t,s') C1(s,s')
// on the reported loss scale.
std::vector<double> train_test_gap(const OrderParameters& ops);

// Literal dense transcription of the T x T recipe (O(M T^3) per sweep).  Used
// as an independent reference for small T.
OrderParameters dense_recipe_solve(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                                   double eta, const DiscreteSettings& cfg = {});

// Raw dump: 8-byte magic "SLAWMAT1", uint64 T, then T*T row-major doubles.
void write_matrix_dump(const std::string& path, const Eigen::MatrixXd& X);
Eigen::MatrixXd read_matrix_dump(const std::string& path);

}  // namespace scalelaw
