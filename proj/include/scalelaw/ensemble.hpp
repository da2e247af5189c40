#pragma once

// Averaging the predictor over E projections and Bags datasets.  With
//   C0      one system,
//   ce      two systems sharing the data only,
//   cb      two systems sharing the projection only,
//   beta    two independent systems (irreducible bias),
// the averaged loss minus sigma^2 is
//   beta + (cb - beta)/E + (ce - beta)/Bags + (C0 - ce - cb + beta)/(E Bags).

#include <vector>

#include "scalelaw/dmft_discrete.hpp"
#include "scalelaw/dmft_fourier.hpp"
#include "scalelaw/spectrum.hpp"

namespace scalelaw {

// Internal scale (no sigma^2, no loss_scale).
struct CrossTerms {
  std::vector<double> t, c0, beta, cross_e, cross_b;
};

CrossTerms cross_terms(const FourierCurves& fc);
CrossTerms cross_terms_fourier(const Spectrum& spec, const SystemShape& shape,
                               const std::vector<double>& times, int talbot_nodes = 24);
// Discrete time: three extra passes of the correlation engine.
CrossTerms cross_terms_discrete(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                                double eta, const DiscreteSettings& cfg = {});

// Reported scale; the variance terms already carry their 1/E, 1/Bags factors.
struct EnsembleCurve {
  double E = 1, bags = 1;
  std::vector<double> t, loss_ens, bias, var_init, var_data, var_inter;
  bool divergent = false;
};

EnsembleCurve ensembled_loss(const CrossTerms& x, const Couplings& cpl, double E, double bags);
EnsembleCurve ensembled_loss(const Spectrum& spec, const SystemShape& shape,
                             const std::vector<double>& times, double E, double bags,
                             int talbot_nodes = 24);

// Single-system decomposition at time t (E = Bags = 1), reported scale.
struct BiasVariance {
  double bias = 0, var_init = 0, var_data = 0, var_inter = 0;
};
BiasVariance bias_variance(const Spectrum& spec, const SystemShape& shape, double t,
                           int talbot_nodes = 24);

// Fixed compute C = N E t at fixed t: for each E, N = C/(E t) and the
// ensembled loss is evaluated.  shape gives M, P and sigma; shape.N is ignored.
struct WidthEnsembleRow {
  double nu = 0, E = 1, loss = 0, bias = 0, variance = 0;
};
struct WidthEnsembleTable {
  std::vector<WidthEnsembleRow> rows;
  std::size_t best = 0;       // argmin of loss
  bool bias_monotone = true;  // bias non-increasing in nu over the rows
  bool variance_monotone = true;
};
WidthEnsembleTable ensemble_vs_width(const Spectrum& spec, const SystemShape& shape, double C,
                                     double t, const std::vector<double>& E_values,
                                     int talbot_nodes = 24);

}  // namespace scalelaw
