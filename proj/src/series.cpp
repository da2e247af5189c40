#include "scalelaw/series.hpp"

#include <cmath>
#include <stdexcept>

namespace scalelaw::series {

Vec conv(const Vec& a, const Vec& b, std::size_t T) {
  Vec out(T, 0.0);
  std::size_t na = std::min(a.size(), T), nb = std::min(b.size(), T);
  for (std::size_t i = 0; i < na; ++i) {
    if (a[i] == 0.0) continue;
    std::size_t lim = std::min(nb, T - i);
    for (std::size_t j = 0; j < lim; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Vec cumsum(const Vec& a) {
  Vec out(a.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (acc += a[i]);
  return out;
}

Vec reciprocal(const Vec& a) {
  if (a.empty() || a[0] == 0.0) throw std::domain_error("series::reciprocal: a[0] == 0");
  std::size_t T = a.size();
  Vec out(T, 0.0);
  out[0] = 1.0 / a[0];
  for (std::size_t n = 1; n < T; ++n) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= n; ++j) acc += a[j] * out[n - j];
    out[n] = -acc / a[0];
  }
  return out;
}

Eigen::MatrixXd toeplitz(const Vec& f) {
  const Eigen::Index T = Eigen::Index(f.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(T, T);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index s = 0; s <= t; ++s) M(t, s) = f[std::size_t(t - s)];
  return M;
}

Vec step_kernel(double eta, std::size_t T, double mu) {
  Vec th(T, 0.0);
  double acc = 0.0, pw = 1.0;
  for (std::size_t n = 1; n < T; ++n) {
    acc += pw;
    pw *= mu;
    th[n] = eta * acc;
  }
  return th;
}

}  // namespace scalelaw::series
