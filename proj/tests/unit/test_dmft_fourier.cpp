#include <gtest/gtest.h>

#include <cmath>

#include "scalelaw/asymptotics.hpp"
#include "scalelaw/dmft_discrete.hpp"
#include "scalelaw/dmft_fourier.hpp"

using namespace scalelaw;

namespace {

// Reference values: tests/oracles/fourier.py (mpmath, 40 digits).
const Spectrum kSpec{{1, .5, .25, .125}, {1, 2, .5, 1}};
const SystemShape kShape = SystemShape::counts(4, 2, 3, 0.3);

struct RespCase {
  cplx s, R1, R3;
};
const RespCase kResp[] = {
    {{0.3, 0}, {6.322187548915824e-01, 0}, {4.483281323373737e-01, 0}},
    {{0.1, 2}, {8.712467410400695e-01, 1.544333509664749e-01}, {8.068701115601042e-01, 2.316500264497124e-01}},
    {{-0.2, 0.5}, {6.940039604140193e-01, 2.451715753814003e-01}, {5.410059406210290e-01, 3.677573630721004e-01}},
    {{0.01, -0.05}, {4.393131268736944e-01, -1.041706477269797e-01}, {1.589696903105417e-01, -1.562559715904696e-01}},
};

}  // namespace

TEST(DmftFourier, GroupModes) {
  Spectrum s{{1, 1, .5}, {2, 4, 1}};
  ModeGroups g = group_modes(s);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_DOUBLE_EQ(g.weight[0], 2.0 / 3);
  EXPECT_DOUBLE_EQ(g.wsq[0], 2.0);
  EXPECT_EQ(g.of_mode, (std::vector<std::size_t>{0, 0, 1}));
}

TEST(DmftFourier, ResponsesMatchOracle) {
  ResponseSystem sys(kSpec, kShape);
  for (const auto& c : kResp) {
    ResponseValue v = sys.solve(c.s);
    EXPECT_NEAR(std::abs(v.R1 - c.R1), 0.0, 1e-11) << c.s;
    EXPECT_NEAR(std::abs(v.R3 - c.R3), 0.0, 1e-11) << c.s;
    // Consistency of the defining relations.
    EXPECT_NEAR(std::abs(v.R1 - (1.0 - v.p * (4.0 / 3.0))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(v.R3 - (1.0 - v.p * 2.0)), 0.0, 1e-12);
  }
}

TEST(DmftFourier, ContinuationAgreesWithDirectSolve) {
  ResponseSystem sys(kSpec, kShape);
  std::vector<cplx> pts;
  for (int i = 0; i <= 40; ++i) pts.push_back(cplx(1e-3, -5.0 + 0.25 * i));
  auto path = sys.path(pts);
  for (std::size_t i = 0; i < pts.size(); i += 7) {
    ResponseValue d = sys.solve(pts[i]);
    EXPECT_NEAR(std::abs(path[i].R1 - d.R1), 0.0, 1e-10) << pts[i];
  }
}

// alpha close to nu near the imaginary axis: two roots nearly collide and a
// loose step acceptance used to land on the wrong one.
TEST(DmftFourier, ContinuationStaysOnPhysicalBranch) {
  const double alpha = 0.249989, nu = 0.212555;
  ResponseSystem sys(white_spectrum(500), SystemShape::counts(500, nu * 500, alpha * 500, 0.0));
  const cplx want1(1.032397628084650e-02, -3.920790051271605e-02);
  const cplx want2(2.283454022330816e-02, -3.363052040681096e-02);
  EXPECT_LT(std::abs(sys.solve({1e-6, -0.0246355}).R3 - want1), 1e-9);
  EXPECT_LT(std::abs(sys.solve({0.01, -0.0246355}).R3 - want2), 1e-9);
  ResponseValue v = sys.solve({1.0, -0.0246355});
  for (double re : {0.3, 0.1, 0.03, 0.01}) v = sys.continue_to(v, {re, -0.0246355});
  EXPECT_LT(std::abs(v.R3 - want2), 1e-9);
}

TEST(DmftFourier, TalbotInvertsKnownTransform) {
  for (double t : {0.1, 1.0, 5.0, 20.0}) {
    double f = talbot_invert([](cplx s) { return 1.0 / (s + 0.7) + 1.0 / ((s + 0.1) * (s + 0.1)); }, t);
    EXPECT_NEAR(f, std::exp(-0.7 * t) + t * std::exp(-0.1 * t), 1e-9) << t;
  }
}

TEST(DmftFourier, TransferInverseMatchesOracle) {
  ResponseSystem sys(kSpec, kShape);
  std::vector<double> H = inverse_transfer(sys, 0.5, {0.0, 0.5, 2.0, 6.0});
  EXPECT_NEAR(H[0], 1.0, 1e-8);
  EXPECT_NEAR(H[1], 8.359260423382083e-01, 1e-8);
  EXPECT_NEAR(H[2], 6.711502685063645e-01, 1e-8);
  EXPECT_NEAR(H[3], 5.557424113724044e-01, 1e-8);
}

TEST(DmftFourier, LargeTimeApproachesFinalValue) {
  // Final values also from the oracle (two-frequency limit).
  TheoryCurve c = fourier_loss_curve(kSpec, kShape, {4000.0});
  EXPECT_NEAR(c.test[0], 9.007426932519932e-01, 1e-5);
  EXPECT_NEAR(c.train[0], 1.000825214724777e-01, 1e-5);
}

TEST(DmftFourier, SmallStepDiscreteApproachesFlow) {
  Spectrum s = power_law_spectrum(1.5, 1.25, 30);
  SystemShape sh = SystemShape::counts(30, 20, 45, 0.3);
  std::vector<double> times{1.0, 3.0, 6.0};
  TheoryCurve fc = fourier_loss_curve(s, sh, times);
  double prev_err = kInf;
  for (double eta : {0.1, 0.05}) {
    std::size_t T = std::size_t(std::lround(6.0 / eta)) + 1;
    OrderParameters ops = solve_discrete(s, sh, T, eta);
    std::vector<double> d = ops.test_loss();
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      err = std::max(err, std::abs(d[std::size_t(std::lround(times[i] / eta))] - fc.test[i]));
    EXPECT_LT(err, 0.05 * fc.test[0]);
    // First-order convergence in eta.
    if (std::isfinite(prev_err)) EXPECT_NEAR(err / prev_err, 0.5, 0.15);
    prev_err = err;
  }
}

TEST(DmftFourier, ZTransferSeriesMatchesDiscreteSolver) {
  Spectrum s = power_law_spectrum(1.5, 1.25, 12);
  SystemShape sh = SystemShape::counts(12, 8, 16, 0.0);
  const double eta = 0.4, mu = 0.3;
  ResponseSystem sys(s, sh);
  OrderParameters ops = solve_responses(s, sh, 10, eta, mu);
  const int K = 4096;
  for (std::size_t k : {std::size_t(0), std::size_t(5)}) {
    std::vector<cplx> F(K);
    std::vector<cplx> zs(K);
    for (int j = 0; j < K; ++j) {
      cplx z = std::polar(1.0, 2 * M_PI * (j + 0.5) / K);
      zs[std::size_t(j)] = z;
      F[std::size_t(j)] = (z - 1.0) * (1.0 - mu / z) * z_transfer(z, s.lambda[k], sys, eta, mu);
    }
    for (int n = 0; n < 10; ++n) {
      cplx acc = 0.0;
      for (int j = 0; j < K; ++j) acc += F[std::size_t(j)] * std::pow(zs[std::size_t(j)], n);
      double prev = n == 0 ? 0.0 : ops.H(Eigen::Index(k), n - 1);
      EXPECT_NEAR(acc.real() / K, ops.H(Eigen::Index(k), n) - prev, 1e-6) << "k=" << k << " n=" << n;
    }
  }
}

TEST(DmftFourier, TimescaleDensityIsNormalized) {
  // White spectrum, nu = inf, alpha = 4: Marchenko-Pastur bulk plus no atom.
  Spectrum s = white_spectrum(100);
  SystemShape sh = SystemShape::counts(100, kInf, 400, 0.0);
  ResponseSystem sys(s, sh);
  std::vector<double> u;
  for (int i = 0; i <= 2000; ++i) u.push_back(0.2 + 2.2 * i / 2000.0);
  TimescaleDensity d = timescale_density(sys, 1.0, u);
  double mass = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) mass += 0.5 * (d.rho[i] + d.rho[i - 1]) * (u[i] - u[i - 1]);
  EXPECT_NEAR(mass + d.mass0, 1.0, 2e-3);
  EXPECT_NEAR(d.mass0, 0.0, 1e-12);
  EXPECT_NEAR(d.rho[1000], white::mp_density(u[1000], 4.0), 1e-4);
}
