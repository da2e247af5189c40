#pragma once

// Causal time-translation-invariant kernels are stored as their lag series
// f[0..T-1]; the T x T lower-triangular Toeplitz matrix has F(t,s) = f[t-s].

#include <Eigen/Dense>
#include <vector>

namespace scalelaw::series {

using Vec = std::vector<double>;

// (a*b)[n] = sum_{j<=n} a[j] b[n-j], truncated to n < T.
Vec conv(const Vec& a, const Vec& b, std::size_t T);

Vec cumsum(const Vec& a);

// Series reciprocal; a[0] must be nonzero.
Vec reciprocal(const Vec& a);

Eigen::MatrixXd toeplitz(const Vec& f);

// Step kernel Theta(t,s) = eta * 1[t>s]; with heavy-ball momentum mu the
// accumulated step becomes eta (1-mu^n)/(1-mu).
Vec step_kernel(double eta, std::size_t T, double mu = 0.0);

}  // namespace scalelaw::series
