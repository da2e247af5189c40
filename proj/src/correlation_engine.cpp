#include "scalelaw/correlation_engine.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace scalelaw::detail {

namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Eigen::Index good_size(Eigen::Index n) {
  for (Eigen::Index m = n;; ++m) {
    Eigen::Index r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace

struct Conv2D::Plans {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

// Triple products (kernel, response, response) reach lag 3T-3 before truncation,
// so the padding must cover that to keep wraparound out of [0,T).
Conv2D::Conv2D(Eigen::Index T) : T_(T), L_(good_size(std::max<Eigen::Index>(3 * T - 2, 2))), p_(new Plans) {
  std::lock_guard<std::mutex> lk(planner_mutex());
  const std::size_t nreal = std::size_t(L_) * std::size_t(L_);
  const std::size_t ncplx = std::size_t(L_) * std::size_t(half());
  p_->real = fftw_alloc_real(nreal);
  p_->cplx = fftw_alloc_complex(ncplx);
  p_->fwd = fftw_plan_dft_r2c_2d(int(L_), int(L_), p_->real, p_->cplx, FFTW_ESTIMATE);
  p_->inv = fftw_plan_dft_c2r_2d(int(L_), int(L_), p_->cplx, p_->real, FFTW_ESTIMATE);
}

Conv2D::~Conv2D() {
  std::lock_guard<std::mutex> lk(planner_mutex());
  fftw_destroy_plan(p_->fwd);
  fftw_destroy_plan(p_->inv);
  fftw_free(p_->real);
  fftw_free(p_->cplx);
}

// Layout: real buffer row index = second time index s, column = first index t.
Conv2D::Spec Conv2D::forward(const Eigen::MatrixXd& X) {
  std::fill(p_->real, p_->real + L_ * L_, 0.0);
  for (Eigen::Index s = 0; s < T_; ++s)
    for (Eigen::Index t = 0; t < T_; ++t) p_->real[s * L_ + t] = X(t, s);
  fftw_execute(p_->fwd);
  Spec out(std::size_t(L_ * half()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {p_->cplx[i][0], p_->cplx[i][1]};
  return out;
}

Eigen::MatrixXd Conv2D::inverse(const Spec& F) {
  for (std::size_t i = 0; i < F.size(); ++i) {
    p_->cplx[i][0] = F[i].real();
    p_->cplx[i][1] = F[i].imag();
  }
  fftw_execute(p_->inv);
  const double scale = 1.0 / double(L_ * L_);
  Eigen::MatrixXd X(T_, T_);
  for (Eigen::Index s = 0; s < T_; ++s)
    for (Eigen::Index t = 0; t < T_; ++t) X(t, s) = p_->real[s * L_ + t] * scale;
  return X;
}

Conv2D::Spec Conv2D::forward1d(const std::vector<double>& f) const {
  std::vector<std::complex<double>> buf(std::size_t(L_), 0.0);
  for (std::size_t i = 0; i < f.size() && i < std::size_t(L_); ++i) buf[i] = f[i];
  Spec out(static_cast<std::size_t>(L_));
  {
    std::lock_guard<std::mutex> lk(planner_mutex());
    fftw_plan pl = fftw_plan_dft_1d(int(L_), reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(pl);
    fftw_destroy_plan(pl);
  }
  return out;
}

Eigen::MatrixXd Conv2D::sandwich(const std::vector<double>& r, const Eigen::MatrixXd& X) {
  Spec rh = forward1d(r);
  Spec F = forward(X);
  const Eigen::Index H = half();
  for (Eigen::Index i0 = 0; i0 < L_; ++i0)
    for (Eigen::Index i1 = 0; i1 < H; ++i1) F[std::size_t(i0 * H + i1)] *= rh[i0] * rh[i1];
  return inverse(F);
}

Eigen::MatrixXd mode_kernel(const Eigen::MatrixXd& F, const Eigen::VectorXd& weights) {
  Eigen::MatrixXd G = F * weights.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(F.rows(), F.rows());
  K.selfadjointView<Eigen::Lower>().rankUpdate(G);
  return K.selfadjointView<Eigen::Lower>();
}

namespace {

double rel_change(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double nb = b.norm();
  double d = (a - b).norm();
  return nb > 0.0 ? d / nb : d;
}

}  // namespace

CorrelationResult solve_correlation_system(Conv2D& conv, const CorrelationSources& src,
                                           const std::vector<double>& r1,
                                           const std::vector<double>& r3,
                                           const CorrelationSettings& cfg) {
  const Eigen::Index T = conv.T();
  const Eigen::Index L = conv.L(), H = conv.half();
  const std::size_t n = std::size_t(L * H);
  const bool c1 = cfg.data_shared && cfg.inv_alpha != 0.0;
  const bool c3 = cfg.projection_shared && cfg.inv_nu != 0.0;

  Conv2D::Spec r1h = conv.forward1d(r1), r3h = conv.forward1d(r3);
  auto pair = [&](const Conv2D::Spec& rh, Eigen::Index i0, Eigen::Index i1) {
    return rh[std::size_t(i0)] * rh[std::size_t(i1)];
  };

  Conv2D::Spec Ka, Kb, Kc;
  if (c3) Ka = conv.forward(src.Ka);
  if (c1 || c3) Kb = conv.forward(src.Kb);
  if (c1) Kc = conv.forward(src.Kc);

  CorrelationResult res;
  res.C0 = src.b0;
  res.C1 = Eigen::MatrixXd::Zero(T, T);
  res.C2 = src.b2;
  res.C3 = Eigen::MatrixXd::Zero(T, T);

  auto make_c1 = [&](const Eigen::MatrixXd& C0) -> Eigen::MatrixXd {
    if (cfg.c1_mode == C1Mode::diagonal) {
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(T, T);
      for (Eigen::Index t = 0; t < T; ++t) D(t, t) = C0(t, t) + cfg.sigma2;
      return D;
    }
    Eigen::MatrixXd X = C0.array() + cfg.sigma2;
    return conv.sandwich(r1, X);
  };

  const bool full_r1 = cfg.c1_mode == C1Mode::full;
  if (c1) res.C1 = make_c1(res.C0);
  if (c3) res.C3 = conv.sandwich(r3, res.C2);
  if (!c1 && !c3) {
    res.converged = true;
    if (cfg.data_shared) res.C1 = make_c1(res.C0);
    return res;
  }

  Conv2D::Spec F1, F3, Y(n);
  const double d = cfg.damping;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (c1) F1 = conv.forward(res.C1);
    if (c3) F3 = conv.forward(res.C3);

    for (Eigen::Index i0 = 0; i0 < L; ++i0)
      for (Eigen::Index i1 = 0; i1 < H; ++i1) {
        std::size_t i = std::size_t(i0 * H + i1);
        std::complex<double> y = 0.0;
        if (c3) y += cfg.inv_nu * Ka[i] * F3[i];
        if (c1) y += cfg.inv_alpha * Kb[i] * pair(r3h, i0, i1) * F1[i];
        Y[i] = y;
      }
    Eigen::MatrixXd C0 = src.b0 + conv.inverse(Y);

    Eigen::MatrixXd C1new = res.C1;
    if (c1) {
      C1new = make_c1(C0);
      F1 = conv.forward(C1new);
    }
    for (Eigen::Index i0 = 0; i0 < L; ++i0)
      for (Eigen::Index i1 = 0; i1 < H; ++i1) {
        std::size_t i = std::size_t(i0 * H + i1);
        std::complex<double> y = 0.0;
        if (c1) y += cfg.inv_alpha * Kc[i] * F1[i];
        if (c3) {
          std::complex<double> r1r1 = full_r1 ? pair(r1h, i0, i1) : 1.0;
          y += cfg.inv_nu * r1r1 * Kb[i] * F3[i];
        }
        Y[i] = y;
      }
    Eigen::MatrixXd C2 = src.b2 + conv.inverse(Y);
    Eigen::MatrixXd C3new = c3 ? conv.sandwich(r3, C2) : res.C3;

    res.residual = std::max(rel_change(C0, res.C0), rel_change(C2, res.C2));
    res.C0 = std::move(C0);
    res.C2 = std::move(C2);
    if (c1) res.C1 = (1.0 - d) * C1new + d * res.C1;
    if (c3) res.C3 = (1.0 - d) * C3new + d * res.C3;
    res.iterations = it;
    if (res.residual < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  // Report C1 and C3 consistent with the final C0, C2.
  if (cfg.data_shared) res.C1 = make_c1(res.C0);
  if (c3) res.C3 = conv.sandwich(r3, res.C2);
  return res;
}

}  // namespace scalelaw::detail
