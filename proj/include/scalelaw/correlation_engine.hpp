#pragma once

// Shared machinery for the discrete-time correlation block.  Every term of the
// C-updates is a causal two-dimensional convolution
//   (K (*) X)(t,s) = sum_{t'<=t, s'<=s} K(t-t', s-s') X(t', s'),
// with K(a,b) = (1/M) sum_k c_k g_k[a] g_k[b] built from per-mode lag series.
// Convolutions are done with zero-padded real FFTs (length >= 3T-2) and truncated to [0,T)^2.

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

namespace scalelaw::detail {

class Conv2D {
 public:
  using Spec = std::vector<std::complex<double>>;

  explicit Conv2D(Eigen::Index T);
  ~Conv2D();
  Conv2D(const Conv2D&) = delete;
  Conv2D& operator=(const Conv2D&) = delete;

  Eigen::Index T() const { return T_; }
  Eigen::Index L() const { return L_; }
  Eigen::Index half() const { return L_ / 2 + 1; }

  Spec forward(const Eigen::MatrixXd& X);
  Eigen::MatrixXd inverse(const Spec& F);
  // Full complex transform of a zero-padded lag series, length L.
  Spec forward1d(const std::vector<double>& f) const;

  // R X R^T for a causal Toeplitz R given by its lag series.
  Eigen::MatrixXd sandwich(const std::vector<double>& r, const Eigen::MatrixXd& X);

 private:
  struct Plans;
  Eigen::Index T_, L_;
  std::unique_ptr<Plans> p_;
};

struct CorrelationSources {
  Eigen::MatrixXd Ka;  // (1/M) sum lambda   g g^T, g = Theta h_k
  Eigen::MatrixXd Kb;  // (1/M) sum lambda^2 g g^T
  Eigen::MatrixXd Kc;  // (1/M) sum lambda   h h^T
  Eigen::MatrixXd b0;  // (1/M) sum lambda w*^2 v v^T, v = mean trajectory
  Eigen::MatrixXd b2;  // R1 [(1/M) sum lambda^2 w*^2 v v^T] R1^T
};

enum class C1Mode { full, diagonal };

struct CorrelationSettings {
  double inv_alpha = 0.0;
  double inv_nu = 0.0;
  double sigma2 = 0.0;
  bool data_shared = true;        // u^1, u^2 sources present
  bool projection_shared = true;  // u^3, u^4 sources present
  C1Mode c1_mode = C1Mode::full;  // diagonal: one-pass data, C1 = diag(C0 + sigma^2)
  double damping = 0.5;
  double tol = 1e-8;
  int max_iter = 500;
};

struct CorrelationResult {
  Eigen::MatrixXd C0, C1, C2, C3;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

CorrelationResult solve_correlation_system(Conv2D& conv, const CorrelationSources& src,
                                           const std::vector<double>& r1,
                                           const std::vector<double>& r3,
                                           const CorrelationSettings& cfg);

// Per-mode lag series -> weighted outer-product kernel sum_k w_k f_k f_k^T.
// F holds one series per column (T x M); weights must be nonnegative.
Eigen::MatrixXd mode_kernel(const Eigen::MatrixXd& F, const Eigen::VectorXd& weights);

}  // namespace scalelaw::detail
