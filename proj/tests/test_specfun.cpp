#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gkp/error.hpp"
#include "gkp/specfun.hpp"
#include "oracles.hpp"

using namespace gkp::specfun;

namespace {
std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / n;
  return x;
}
}  // namespace

TEST(HermitePhi, GaussianAtOrigin) { EXPECT_NEAR(hermite_phi(0, 0.0), std::pow(M_PI, -0.25), 1e-15); }

TEST(HermitePhi, OddVanishesAtOrigin) { EXPECT_EQ(hermite_phi(1, 0.0), 0.0); }

TEST(HermitePhi, HighOrderMatchesExtendedPrecision) {
  const double got = hermite_phi(40, 9.0);
  const long double want = oracle::phi(40, 9.0L);
  ASSERT_TRUE(std::isfinite(got));
  EXPECT_LT(std::abs((got - double(want)) / double(want)), 1e-10);
}

TEST(HermitePhi, ArrayMatchesScalar) {
  const auto x = linspace(-8, 8, 101);
  const auto v = hermite_phi(17, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(v[i], hermite_phi(17, x[i]));
}

TEST(HermitePhi, CapabilityErrorAboveCap) {
  const std::vector<double> x{0.0};
  EXPECT_THROW(hermite_phi(61, x), gkp::CapabilityError);
  EXPECT_NO_THROW(hermite_phi(61, x, 80));
}

TEST(HermitePhi, Parity) {
  for (int n : {3, 8, 21}) {
    for (double x : {0.3, 1.7, 4.2}) {
      EXPECT_EQ(hermite_phi(n, -x), (n % 2 ? -1.0 : 1.0) * hermite_phi(n, x));
    }
  }
}

TEST(HermiteTable, OrthonormalOnWideGrid) {
  const int G = 4096;
  const double L = 20;
  const auto x = linspace(-L, L, G);
  const double dx = 2 * L / G;
  HermiteTable t(40, x);
  double worst = 0;
  for (int m = 0; m <= 40; ++m) {
    for (int n = m; n <= 40; ++n) {
      double s = 0;
      for (int j = 0; j < G; ++j) s += t.row(m)[j] * t.row(n)[j];
      worst = std::max(worst, std::abs(s * dx - (m == n ? 1.0 : 0.0)));
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(HermiteTable, RowsFiniteAndChecked) {
  const auto x = linspace(-30, 30, 1024);
  HermiteTable t(60, x);
  for (int n = 0; n <= 60; ++n) {
    for (double v : t.row(n)) ASSERT_TRUE(std::isfinite(v));
  }
  EXPECT_THROW(t.row(61), gkp::CapabilityError);
  EXPECT_THROW(t.row(-1), gkp::Error);
}

TEST(GaussianPower, Values) {
  const std::vector<double> x{0.0, 1.0, 2.0};
  const auto g1 = gaussian_power(1.0, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(g1[i], std::exp(-x[i] * x[i] / 2), 1e-15);
  EXPECT_NEAR(gaussian_power(2.0, x)[1], std::exp(-1.0), 1e-15);
  EXPECT_EQ(gaussian_power(1.3, x)[0], 1.0);
}

TEST(CombWavenumber, Values) {
  EXPECT_NEAR(comb_wavenumber(0), 1.77245385, 1e-8);
  EXPECT_NEAR(comb_wavenumber(20), 0.27682, 1e-4);
  EXPECT_NEAR(comb_wavenumber(40), 0.19694, 1e-5);
  for (int n : {0, 5, 20, 40}) {
    const double k = comb_wavenumber(n);
    EXPECT_NEAR(k * k * (2 * n + 1), M_PI, 1e-13);
  }
}

TEST(LatticeWavenumber, CombSpacing) {
  // phi_n(kappa_n x) oscillates with zero spacing sqrt(2 pi) near the origin.
  for (int n : {20, 21}) {
    const double kappa = lattice_wavenumber(n);
    std::vector<double> zeros;
    double prev = hermite_phi(n, -6 * kappa);
    for (double x = -6; x <= 6; x += 1e-4) {
      const double v = hermite_phi(n, kappa * x);
      if ((v > 0) != (prev > 0)) zeros.push_back(x);
      prev = v;
    }
    ASSERT_GE(zeros.size(), 3u);
    for (std::size_t i = 1; i < zeros.size(); ++i) {
      EXPECT_NEAR(zeros[i] - zeros[i - 1], std::sqrt(2 * M_PI), 0.02 * std::sqrt(2 * M_PI));
    }
  }
}
