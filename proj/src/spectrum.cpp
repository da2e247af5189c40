#include "scalelaw/spectrum.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace scalelaw {

double Spectrum::trace() const {
  if (lambda.empty()) return 0.0;
  return std::accumulate(lambda.begin(), lambda.end(), 0.0) / double(lambda.size());
}

double Spectrum::initial_loss() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) acc += lambda[k] * wstar_sq[k];
  return lambda.empty() ? 0.0 : acc / double(lambda.size());
}

Spectrum power_law_spectrum(double a, double b, std::size_t M) {
  if (!(a > 1.0)) throw InvalidArgument("power_law_spectrum: need a > 1");
  if (!(b > 0.0)) throw InvalidArgument("power_law_spectrum: need b > 0");
  if (M == 0) throw InvalidArgument("power_law_spectrum: need M >= 1");
  Spectrum s;
  s.lambda.resize(M);
  s.wstar_sq.resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    double k = double(i + 1);
    s.lambda[i] = std::pow(k, -b);
    s.wstar_sq[i] = std::pow(k, b - a);
  }
  return s;
}

Spectrum white_spectrum(std::size_t M) {
  if (M == 0) throw InvalidArgument("white_spectrum: need M >= 1");
  Spectrum s;
  s.lambda.assign(M, 1.0);
  s.wstar_sq.assign(M, 1.0);
  return s;
}

Spectrum load_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open spectrum file: " + path);
  Spectrum s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    double lam, w2;
    if (!(ls >> lam)) continue;
    if (!(ls >> w2))
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected two columns");
    std::string extra;
    if (ls >> extra)
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": trailing data");
    s.lambda.push_back(lam);
    s.wstar_sq.push_back(w2);
  }
  validate(s);
  return s;
}

void validate(const Spectrum& s) {
  if (s.lambda.empty()) throw InvalidArgument("spectrum is empty");
  if (s.lambda.size() != s.wstar_sq.size())
    throw InvalidArgument("spectrum: lambda and w_star_sq lengths differ");
  for (std::size_t k = 0; k < s.lambda.size(); ++k) {
    if (!(s.lambda[k] > 0.0) || !std::isfinite(s.lambda[k]))
      throw InvalidArgument("spectrum: eigenvalues must be positive and finite");
    if (k > 0 && s.lambda[k] > s.lambda[k - 1])
      throw InvalidArgument("spectrum: eigenvalues must be non-increasing");
    if (!(s.wstar_sq[k] >= 0.0) || !std::isfinite(s.wstar_sq[k]))
      throw InvalidArgument("spectrum: target weights must be nonnegative and finite");
  }
}

double task_fraction(const Spectrum& s, std::size_t k) {
  if (k < 1 || k > s.size()) throw InvalidArgument("task_fraction: k out of range");
  double head = 0.0, total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double c = s.lambda[i] * s.wstar_sq[i];
    total += c;
    if (i < k) head += c;
  }
  return total > 0.0 ? head / total : 0.0;
}

SystemShape SystemShape::ratios(double M, double nu, double alpha, double sigma) {
  SystemShape s;
  s.M = M;
  s.N = nu * M;
  s.P = alpha * M;
  s.sigma = sigma;
  return s;
}

SystemShape SystemShape::counts(double M, double N, double P, double sigma, Limit limit) {
  SystemShape s;
  s.M = M;
  s.N = N;
  s.P = P;
  s.sigma = sigma;
  s.limit = limit;
  return s;
}

void validate(const SystemShape& shape) {
  if (!(shape.M >= 1.0)) throw InvalidArgument("shape: M must be >= 1");
  if (!(shape.N > 0.0)) throw InvalidArgument("shape: N must be positive");
  if (!(shape.P > 0.0)) throw InvalidArgument("shape: P must be positive");
  if (!(shape.sigma >= 0.0)) throw InvalidArgument("shape: sigma must be >= 0");
  if (shape.limit == Limit::nonproportional && (shape.N < 1.0 || shape.P < 1.0))
    throw InvalidArgument("shape: N and P must be >= 1 in the non-proportional limit");
}

Couplings couplings(const SystemShape& shape) {
  validate(shape);
  Couplings c;
  c.inv_alpha = std::isinf(shape.P) ? 0.0 : shape.M / shape.P;
  c.inv_nu = std::isinf(shape.N) ? 0.0 : shape.M / shape.N;
  if (shape.limit == Limit::proportional) {
    c.sigma2 = shape.sigma * shape.sigma;
    c.loss_scale = 1.0;
  } else {
    c.sigma2 = shape.sigma * shape.sigma / shape.M;
    c.loss_scale = shape.M;
  }
  return c;
}

}  // namespace scalelaw
