#pragma once

// Monte Carlo reference: draws the random projection, design and label noise
// and runs the optimizer on the weight error v = w* - A^T w / sqrt(N).
//
// Losses follow the solver convention.  Proportional: test loss
// (1/M) sum lambda_k v_k^2 + sigma^2, labels carry sqrt(M) sigma eps.
// Non-proportional: test loss sum lambda_k v_k^2 + sigma^2, labels carry
// sigma eps.  Both are the same dynamics on different reporting scales.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "scalelaw/spectrum.hpp"

namespace scalelaw {

struct Diverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cap on the bytes held by one draw (A, Psi, eps).  Default 2 GiB.
std::size_t memory_budget();
void set_memory_budget(std::size_t bytes);

struct Disorder {
  Eigen::MatrixXd A;    // N x M, N(0,1)
  Eigen::MatrixXd Psi;  // P x M, column k ~ N(0, lambda_k)
  Eigen::VectorXd eps;  // P, N(0,1)
  std::uint64_t seed = 0;
};

// Independent streams per seed: 1 = A, 2 = Psi, 3 = eps, 4 = minibatches.
Disorder draw_disorder(const SystemShape& shape, const Spectrum& spec, std::uint64_t seed);
Eigen::MatrixXd draw_projection(std::size_t N, std::size_t M, std::uint64_t seed);
void draw_design(const Spectrum& spec, std::size_t P, std::uint64_t seed, Eigen::MatrixXd& Psi,
                 Eigen::VectorXd& eps);

enum class OptimizerKind { gradient_flow_exact, discrete_gd, discrete_gd_momentum, one_pass_sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::discrete_gd;
  double eta = 0.05;
  double mu = 0.0;          // heavy-ball momentum, discrete only
  std::size_t batch = 1;    // one-pass SGD
  std::size_t steps = 100;  // recorded points t = 0..steps-1
};

struct LossCurve {
  std::vector<double> t;
  std::vector<double> train, test;
  std::vector<double> std_train, std_test;  // empty for single runs
  std::size_t seeds = 1;

  std::size_t size() const { return t.size(); }
};

LossCurve run_discrete_gd(const Disorder& d, const Spectrum& spec, const SystemShape& shape,
                          const OptimizerConfig& opt);

// Exact solution of gradient flow for every t in t_grid; t = inf gives the
// converged (minimum-norm update) solution.
LossCurve run_gradient_flow_exact(const Disorder& d, const Spectrum& spec,
                                  const SystemShape& shape, const std::vector<double>& t_grid);

// Weight error of the converged flow, useful for ridgeless checks.
Eigen::VectorXd gradient_flow_limit(const Disorder& d, const Spectrum& spec,
                                    const SystemShape& shape);

LossCurve run_one_pass_sgd(const Spectrum& spec, const SystemShape& shape,
                           const OptimizerConfig& opt, std::uint64_t seed);

// E projections times Bags datasets, every pair trained, predictor averaged.
// Train loss is not defined for the averaged predictor and is left at 0.
LossCurve run_ensemble_bag(const Spectrum& spec, const SystemShape& shape,
                           const OptimizerConfig& opt, std::size_t E, std::size_t bags,
                           std::uint64_t seed);

// Runs one curve per seed (in parallel) and reduces to mean and sample std,
// in seed order.
LossCurve multi_seed(const std::vector<std::uint64_t>& seeds,
                     const std::function<LossCurve(std::uint64_t)>& run);

// Convenience dispatcher on opt.kind for a fresh draw per seed.
LossCurve simulate(const Spectrum& spec, const SystemShape& shape, const OptimizerConfig& opt,
                   std::uint64_t seed);

}  // namespace scalelaw
