#include "scalelaw/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace scalelaw {

CrossTerms cross_terms(const FourierCurves& fc) {
  return {fc.t, fc.c0, fc.beta, fc.cross_e, fc.cross_b};
}

CrossTerms cross_terms_fourier(const Spectrum& spec, const SystemShape& shape,
                               const std::vector<double>& times, int talbot_nodes) {
  ResponseSystem sys(spec, shape);
  return cross_terms(fourier_curves(sys, times, talbot_nodes));
}

CrossTerms cross_terms_discrete(const Spectrum& spec, const SystemShape& shape, std::size_t T,
                                double eta, const DiscreteSettings& cfg) {
  OrderParameters ops = solve_responses(spec, shape, T, eta);
  CrossTerms x;
  for (std::size_t t = 0; t < T; ++t) x.t.push_back(double(t));
  x.c0 = cross_system_c0(ops, spec, true, true, cfg).c0;
  x.cross_e = cross_system_c0(ops, spec, true, false, cfg).c0;
  x.cross_b = cross_system_c0(ops, spec, false, true, cfg).c0;
  x.beta = cross_system_c0(ops, spec, false, false, cfg).c0;
  return x;
}

EnsembleCurve ensembled_loss(const CrossTerms& x, const Couplings& cpl, double E, double bags) {
  if (!(E >= 1.0) || !(bags >= 1.0)) throw InvalidArgument("ensembled_loss: need E, Bags >= 1");
  EnsembleCurve out;
  out.E = E;
  out.bags = bags;
  out.t = x.t;
  const double s = cpl.loss_scale;
  // Infinite E or Bags: the 1/E, 1/Bags factors vanish.
  const double iE = std::isinf(E) ? 0.0 : 1.0 / E;
  const double iB = std::isinf(bags) ? 0.0 : 1.0 / bags;
  for (std::size_t i = 0; i < x.t.size(); ++i) {
    double b = x.beta[i];
    double vi = (x.cross_b[i] - b) * iE;
    double vd = (x.cross_e[i] - b) * iB;
    double vx = (x.c0[i] - x.cross_e[i] - x.cross_b[i] + b) * iE * iB;
    out.bias.push_back(s * b);
    out.var_init.push_back(s * vi);
    out.var_data.push_back(s * vd);
    out.var_inter.push_back(s * vx);
    double L = s * (b + vi + vd + vx + cpl.sigma2);
    out.loss_ens.push_back(L);
    if (!std::isfinite(L)) out.divergent = true;
  }
  return out;
}

EnsembleCurve ensembled_loss(const Spectrum& spec, const SystemShape& shape,
                             const std::vector<double>& times, double E, double bags,
                             int talbot_nodes) {
  return ensembled_loss(cross_terms_fourier(spec, shape, times, talbot_nodes), couplings(shape),
                        E, bags);
}

BiasVariance bias_variance(const Spectrum& spec, const SystemShape& shape, double t,
                           int talbot_nodes) {
  EnsembleCurve c = ensembled_loss(spec, shape, {t}, 1.0, 1.0, talbot_nodes);
  return {c.bias[0], c.var_init[0], c.var_data[0], c.var_inter[0]};
}

WidthEnsembleTable ensemble_vs_width(const Spectrum& spec, const SystemShape& shape, double C,
                                     double t, const std::vector<double>& E_values,
                                     int talbot_nodes) {
  if (!(C > 0.0) || !(t > 0.0)) throw InvalidArgument("ensemble_vs_width: need C, t > 0");
  if (E_values.empty()) throw InvalidArgument("ensemble_vs_width: no ensemble sizes");
  WidthEnsembleTable tab;
  for (double E : E_values) {
    SystemShape sh = shape;
    sh.N = C / (E * t);
    if (!(sh.N > 0.0)) throw InvalidArgument("ensemble_vs_width: width must be positive");
    CrossTerms x = cross_terms_fourier(spec, sh, {t}, talbot_nodes);
    EnsembleCurve c = ensembled_loss(x, couplings(sh), E, 1.0);
    const double s = couplings(sh).loss_scale;
    WidthEnsembleRow row;
    row.nu = sh.nu();
    row.E = E;
    row.loss = c.loss_ens[0];
    row.bias = s * x.cross_e[0];  // Bags = 1: the part ensembling cannot remove
    row.variance = s * (x.c0[0] - x.cross_e[0]);
    tab.rows.push_back(row);
  }
  for (std::size_t i = 1; i < tab.rows.size(); ++i)
    if (tab.rows[i].loss < tab.rows[tab.best].loss) tab.best = i;
  std::vector<WidthEnsembleRow> by_nu = tab.rows;
  std::sort(by_nu.begin(), by_nu.end(), [](auto& a, auto& b) { return a.nu < b.nu; });
  for (std::size_t i = 1; i < by_nu.size(); ++i) {
    double tol = 1e-9 * std::max(by_nu[i - 1].loss, 1e-300);
    if (by_nu[i].bias > by_nu[i - 1].bias + tol) tab.bias_monotone = false;
    if (by_nu[i].variance > by_nu[i - 1].variance + tol) tab.variance_monotone = false;
  }
  return tab;
}

}  // namespace scalelaw
