#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace scalelaw {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Eigenvalues lambda_k (non-increasing, positive) and squared target weights
// of the base features.  Stored explicitly for every mode, power laws included.
struct Spectrum {
  std::vector<double> lambda;
  std::vector<double> wstar_sq;

  std::size_t size() const { return lambda.size(); }
  double trace() const;         // (1/M) sum lambda_k
  double initial_loss() const;  // (1/M) sum lambda_k w*_k^2
};

Spectrum power_law_spectrum(double a, double b, std::size_t M);
Spectrum white_spectrum(std::size_t M);

// Two whitespace separated columns "lambda w_star_sq", '#' starts a comment.
Spectrum load_spectrum(const std::string& path);

// Throws InvalidArgument when an invariant is broken.
void validate(const Spectrum& s);

// C(k) = sum_{i<=k} lambda_i w*_i^2 / sum_i lambda_i w*_i^2, 1-based k.
double task_fraction(const Spectrum& s, std::size_t k);

enum class Limit { proportional, nonproportional };

// Model size N, dataset size P, base dimension M.  Infinite N or P are allowed
// for theory.  In the non-proportional limit the equations carry N and P
// directly and mode sums lose their 1/M; with an explicit M this is the
// proportional system reported on a different scale (see Couplings).
struct SystemShape {
  double M = 1;
  double N = kInf;
  double P = kInf;
  double sigma = 0.0;
  Limit limit = Limit::proportional;

  double nu() const { return N / M; }
  double alpha() const { return P / M; }

  static SystemShape ratios(double M, double nu, double alpha, double sigma = 0.0);
  static SystemShape counts(double M, double N, double P, double sigma = 0.0,
                            Limit limit = Limit::proportional);
};

void validate(const SystemShape& shape);

// Coefficients of the closed equations.  Internally every solver uses
// (1/M) mode sums, 1/alpha and 1/nu; reported losses are
// loss_scale * (C_0 + sigma2).
struct Couplings {
  double inv_alpha = 0.0;
  double inv_nu = 0.0;
  double sigma2 = 0.0;
  double loss_scale = 1.0;
};

Couplings couplings(const SystemShape& shape);

}  // namespace scalelaw
