#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gkp/breeding.hpp"
#include "gkp/error.hpp"
#include "gkp/gps.hpp"
#include "gkp/specfun.hpp"
#include "gkp/targets.hpp"

using namespace gkp;
using namespace gkp::breeding;

namespace {
const GridSpec kGrid{25.0, 4096};

GridWavefunction phi_state(int n, double scale = 1.0) {
  std::vector<double> s(kGrid.points);
  for (std::size_t j = 0; j < kGrid.points; ++j) s[j] = specfun::hermite_phi(n, scale * kGrid.x(j));
  return from_samples(kGrid, s);
}

GridWavefunction raw(std::vector<cplx> a) { return GridWavefunction(kGrid, std::move(a)); }

const gps::GpsParams& row1() {
  static const auto p = gps::solve_params(1.3, 5, 10, 20).params;
  return p;
}
}  // namespace

TEST(Plan, ChainSchedule) {
  const auto p = BreedingPlan::chain(5);
  ASSERT_EQ(p.transmittances.size(), 4u);
  for (int k = 1; k <= 4; ++k) EXPECT_DOUBLE_EQ(p.transmittances[k - 1], double(k) / (k + 1));
  auto bad = BreedingPlan::with_outcomes(3, {0.0});
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(BsCondition, VacuumClosedUnderMerge) {
  const auto out = bs_condition(phi_state(0), phi_state(0), 0.5, 0.0);
  EXPECT_GT(fidelity(out.state, phi_state(0)), 1 - 1e-8);
}

TEST(BsCondition, VacuumOutcomeOnlyDisplaces) {
  const auto a = bs_condition(phi_state(0), phi_state(0), 0.5, 0.0);
  const auto b = bs_condition(phi_state(0), phi_state(0), 0.5, 1.1);
  EXPECT_GT(fidelity(a.state, b.state), 1 - 1e-8);
  // p(x_m) of a vacuum homodyne: Gaussian of variance 1/2.
  EXPECT_NEAR(b.density / a.density, std::exp(-1.1 * 1.1), 1e-6);
}

TEST(BsCondition, OddProductHasNodeAtOrigin) {
  const auto out = bs_condition(phi_state(0), phi_state(1), 0.5, 0.0);
  const double s = 1 / std::sqrt(2.0);
  std::vector<double> want(kGrid.points);
  for (std::size_t j = 0; j < want.size(); ++j) {
    want[j] = specfun::hermite_phi(0, s * kGrid.x(j)) * specfun::hermite_phi(1, s * kGrid.x(j));
  }
  EXPECT_GT(fidelity(out.state, from_samples(kGrid, want)), 1 - 1e-8);
  EXPECT_NEAR(std::abs(out.state[kGrid.points / 2]), 0.0, 1e-12);
}

TEST(BsCondition, DegenerateOutcome) {
  std::vector<cplx> a(kGrid.points), b(kGrid.points);
  for (std::size_t j = 0; j < kGrid.points; ++j) {
    const double x = kGrid.x(j);
    a[j] = std::abs(x + 10) < 0.5 ? 1.0 : 0.0;
    b[j] = std::abs(x - 10) < 0.5 ? 1.0 : 0.0;
  }
  EXPECT_THROW(bs_condition(raw(a), raw(b), 0.5, 0.0), DegenerateConditioningError);
}

TEST(HomodyneDensity, VacuumVariance) {
  const auto t = homodyne_density(phi_state(0), phi_state(0), 0.5);
  const auto x = t.outcomes();
  const auto p = t.density();
  double m2 = 0, m1 = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double h = x[i] - x[i - 1];
    m1 += 0.5 * h * (x[i] * p[i] + x[i - 1] * p[i - 1]);
    m2 += 0.5 * h * (x[i] * x[i] * p[i] + x[i - 1] * x[i - 1] * p[i - 1]);
  }
  EXPECT_NEAR(m1, 0.0, 1e-6);
  EXPECT_NEAR(m2, 0.5, 0.005);
  EXPECT_NEAR(t.integral(), 1.0, 1e-12);
}

TEST(HomodyneDensity, SymmetricAndNonNegative) {
  const auto in = phi_state(4, 0.8);
  const auto t = homodyne_density(in, in, 0.5, 401);
  const auto p = t.density();
  for (double v : p) EXPECT_GE(v, 0.0);
  const auto x = t.outcomes();
  EXPECT_NEAR(x.front(), -x.back(), 1e-9);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], p[p.size() - 1 - i], 1e-6 * p[p.size() / 2]);
}

TEST(SampleOutcome, NarrowDensity) {
  std::vector<double> x, p;
  for (int i = -50; i <= 50; ++i) {
    x.push_back(i * 1e-4);
    p.push_back(std::exp(-std::pow(i * 1e-4 / 1e-5, 2)));
  }
  DensityTable t(x, p);
  Stream rng(3, 0, 0);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(sample_outcome(t, rng), 0.0, 2e-4);
}

TEST(SampleOutcome, UniformLaw) {
  DensityTable t({-1.0, 1.0}, {0.5, 0.5});
  Stream rng(7, 0, 0);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = sample_outcome(t, rng);
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0 / 3, 0.02 / 3);
}

TEST(SampleOutcome, Deterministic) {
  DensityTable t({-2.0, 0.0, 2.0}, {0.1, 1.0, 0.1});
  Stream a(11, 4, 3), b(11, 4, 3);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_outcome(t, a), sample_outcome(t, b));
}

TEST(Breed, VacuumPair) {
  const std::vector<GridWavefunction> in{phi_state(0), phi_state(0)};
  const auto r = breed(in, BreedingPlan::with_outcomes(2));
  EXPECT_GT(fidelity(r.state, phi_state(0)), 1 - 1e-8);
}

TEST(Breed, ZeroOutcomesReproduceTarget) {
  const auto in = gps::adaptive_breeding_input(row1(), 20, 5, kGrid);
  const std::vector<GridWavefunction> inputs(5, in);
  const auto r = breed(inputs, BreedingPlan::with_outcomes(5));
  EXPECT_GT(fidelity(r.state, chi_target(1.3, 20, 5, kGrid)), 0.99);
}

TEST(Breed, MixedPhotonNumbersStayClose) {
  const auto& p = row1();
  std::vector<GridWavefunction> mixed, same;
  for (int n : {18, 20, 20, 22, 20}) mixed.push_back(gps::adaptive_breeding_input(p, n, 5, kGrid));
  for (int i = 0; i < 5; ++i) same.push_back(gps::adaptive_breeding_input(p, 20, 5, kGrid));
  const auto a = effective_squeezing(breed(mixed, BreedingPlan::with_outcomes(5)).state);
  const auto b = effective_squeezing(breed(same, BreedingPlan::with_outcomes(5)).state);
  EXPECT_NEAR(a.db_x(), b.db_x(), 0.5);
  EXPECT_NEAR(a.db_p(), b.db_p(), 0.5);
}

TEST(Breed, SampledNeedsStream) {
  const std::vector<GridWavefunction> in{phi_state(0), phi_state(0)};
  EXPECT_THROW(breed(in, BreedingPlan::chain(2)), ConfigError);
  Stream rng(1, 0, 3);
  const auto r = breed(in, BreedingPlan::chain(2), &rng);
  EXPECT_EQ(r.record.outcomes.size(), 1u);
}

TEST(Correction, SensorIsFixedPoint) {
  const auto s = sensor_state({0.316, 0.316, 0}, kGrid);
  const auto c = optimize_correction(s, 0);
  EXPECT_NEAR(c.correction.sigma, 1.0, 0.01);
  EXPECT_NEAR(c.correction.x0, 0.0, 0.01);
  EXPECT_NEAR(c.correction.p0, 0.0, 0.01);
  const auto before = effective_squeezing(s);
  EXPECT_NEAR(c.metrics.db_x(), before.db_x(), 0.05);
  EXPECT_NEAR(c.metrics.db_p(), before.db_p(), 0.05);
}

TEST(Correction, OddTargetCarriesImaginaryPart) {
  const auto c = optimize_correction(chi_target(1.3, 20, 5, kGrid), 1);
  EXPECT_NEAR(std::abs(c.correction.p0), std::sqrt(M_PI / 2), 0.01);
  EXPECT_NEAR(imaginary_fraction(c.state), 0.07, 0.03);
}

TEST(Correction, EvenTargetStaysReal) {
  const auto c = optimize_correction(chi_target(1.3, 20, 4, kGrid), 0);
  EXPECT_NEAR(c.correction.p0, 0.0, 0.01);
  EXPECT_LT(imaginary_fraction(c.state), 0.01);
}

TEST(Correction, ApplyReproducesState) {
  const auto in = chi_target(1.1, 12, 3, kGrid);
  const auto c = optimize_correction(in, 1);
  EXPECT_GT(fidelity(apply_correction(in, c.correction), c.state), 1 - 1e-12);
}
