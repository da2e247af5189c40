#pragma once

// One-pass SGD with fresh minibatches of size B.  The data fields become
// time-local: C1(t,s) = delta(t,s) (C0(t,t) + sigma^2) and the data coupling
// is M/B.  Mean dynamics are those of full-batch descent with P = inf, so
// R1 = delta and only R3 carries memory.

#include <Eigen/Dense>
#include <vector>

#include "scalelaw/dmft_discrete.hpp"
#include "scalelaw/simulator.hpp"
#include "scalelaw/spectrum.hpp"

namespace scalelaw {

struct SgdSettings {
  DiscreteSettings solver;
  bool decompose = true;  // also solve B = inf for the bias component
};

struct SgdOrderParameters {
  std::size_t T = 0;
  double eta = 0.0, batch = 0.0;
  Couplings cpl;  // inv_alpha = M/B
  std::vector<double> r3, r24;
  Eigen::MatrixXd C2, C3;
  std::vector<double> C0_diag;
  SolveDiagnostics diag;
};

struct SgdSolution {
  LossCurve curve;  // train == test
  // bias: full-batch (B = inf) loss minus sigma^2; variance: the rest.
  std::vector<double> bias_component, variance_component;
  SgdOrderParameters ops;
};

// shape.P is ignored.  Throws Diverged when the loss grows past 1e6 times its
// initial value.
SgdSolution solve_sgd_dmft(const Spectrum& spec, const SystemShape& shape, std::size_t batch,
                           double eta, std::size_t T, const SgdSettings& cfg = {});

struct SgdPlateau {
  double value = 0.0;  // mean of the last 10% of the curve (reported scale)
  double drift = 0.0;  // relative change between the two halves of that window
  bool reached = true;  // false: value is only an upper estimate of the plateau
  double bias = 0.0, variance = 0.0;
};

SgdPlateau sgd_asymptote(const SgdSolution& sol, double drift_tol = 1e-2);
SgdPlateau sgd_asymptote(const Spectrum& spec, const SystemShape& shape, std::size_t batch,
                         double eta, std::size_t T, const SgdSettings& cfg = {});

}  // namespace scalelaw
