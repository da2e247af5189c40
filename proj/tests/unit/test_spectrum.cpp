#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "scalelaw/spectrum.hpp"

using namespace scalelaw;

TEST(Spectrum, PowerLawValues) {
  Spectrum s = power_law_spectrum(1.5, 1.25, 8);
  ASSERT_EQ(s.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    double kk = double(k + 1);
    EXPECT_DOUBLE_EQ(s.lambda[k], std::pow(kk, -1.25));
    // lambda w*^2 = k^-a
    EXPECT_NEAR(s.lambda[k] * s.wstar_sq[k], std::pow(kk, -1.5), 1e-15);
  }
}

TEST(Spectrum, TraceAndInitialLoss) {
  Spectrum s{{1, .5, .25, .125}, {1, 2, .5, 1}};
  EXPECT_DOUBLE_EQ(s.trace(), 1.875 / 4);
  EXPECT_DOUBLE_EQ(s.initial_loss(), (1 + 1 + .125 + .125) / 4);
}

TEST(Spectrum, TaskFraction) {
  Spectrum s{{1, .5, .25, .125}, {1, 2, .5, 1}};
  EXPECT_DOUBLE_EQ(task_fraction(s, 1), 1 / 2.25);
  EXPECT_DOUBLE_EQ(task_fraction(s, 4), 1.0);
  EXPECT_THROW(task_fraction(s, 0), InvalidArgument);
  EXPECT_THROW(task_fraction(s, 5), InvalidArgument);
}

TEST(Spectrum, ValidationRejectsBadInput) {
  EXPECT_THROW(validate(Spectrum{{}, {}}), InvalidArgument);
  EXPECT_THROW(validate(Spectrum{{1, 2}, {1, 1}}), InvalidArgument);
  EXPECT_THROW(validate(Spectrum{{1, 0}, {1, 1}}), InvalidArgument);
  EXPECT_THROW(validate(Spectrum{{1, .5}, {1, -1}}), InvalidArgument);
  EXPECT_THROW(validate(Spectrum{{1, .5}, {1}}), InvalidArgument);
  EXPECT_NO_THROW(validate(Spectrum{{1, 1, .5}, {0, 1, 1}}));
}

TEST(Spectrum, LoadFromFile) {
  std::string path = ::testing::TempDir() + "spec.txt";
  {
    std::ofstream f(path);
    f << "# lambda w2\n1.0 2.0\n\n0.5 1.0  # tail\n";
  }
  Spectrum s = load_spectrum(path);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.lambda[1], 0.5);
  EXPECT_EQ(s.wstar_sq[0], 2.0);
  {
    std::ofstream f(path);
    f << "1.0\n";
  }
  EXPECT_THROW(load_spectrum(path), InvalidArgument);
  std::remove(path.c_str());
}

TEST(Shape, Couplings) {
  Couplings c = couplings(SystemShape::counts(100, 50, 400, 0.5));
  EXPECT_DOUBLE_EQ(c.inv_nu, 2.0);
  EXPECT_DOUBLE_EQ(c.inv_alpha, 0.25);
  EXPECT_DOUBLE_EQ(c.sigma2, 0.25);
  EXPECT_DOUBLE_EQ(c.loss_scale, 1.0);

  Couplings np = couplings(SystemShape::counts(100, kInf, 400, 0.5, Limit::nonproportional));
  EXPECT_EQ(np.inv_nu, 0.0);
  EXPECT_DOUBLE_EQ(np.sigma2, 0.0025);
  EXPECT_DOUBLE_EQ(np.loss_scale, 100.0);

  SystemShape r = SystemShape::ratios(10, 0.5, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(r.N, 5.0);
  EXPECT_DOUBLE_EQ(r.P, 20.0);

  EXPECT_THROW(couplings(SystemShape::counts(10, 0, 10, 0)), InvalidArgument);
  EXPECT_THROW(couplings(SystemShape::counts(10, 5, 10, -1)), InvalidArgument);
}
