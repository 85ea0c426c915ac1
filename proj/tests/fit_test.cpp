#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "powertail/fit.hpp"
#include "powertail/sampler.hpp"

namespace pt = powertail;

namespace {

const pt::SurvivalTable& reference_table() {
  static const pt::SurvivalTable table = pt::tabulate(pt::kReferenceParams);
  return table;
}

}  // namespace

TEST(FitCurve, RecoversNoiseFreeParameters) {
  const auto grid = pt::log_grid(0.05, 300.0, 40);
  const auto f = pt::Model(pt::kReferenceParams, pt::QuadratureSettings::fast()).survival(grid);
  const pt::FitResult r = pt::fit_curve(grid, f, {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.params.T, 1.5, 0.015);
  EXPECT_NEAR(r.params.theta, 30.0, 0.3);
  EXPECT_DOUBLE_EQ(r.params.beta, 2.0);
  EXPECT_LT(r.objective, 1e-6);
  EXPECT_EQ(r.residuals.size(), grid.size());
}

TEST(FitCurve, RecoversOtherParameters) {
  const pt::ModelParams truth{3.0, 2.0, 10.0};
  const auto grid = pt::log_grid(0.1, 400.0, 30);
  const auto f = pt::Model(truth, pt::QuadratureSettings::fast()).survival(grid);
  const pt::FitResult r = pt::fit_curve(grid, f, {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.params.T, 3.0, 0.03);
  EXPECT_NEAR(r.params.theta, 10.0, 0.1);
}

TEST(FitCurve, RejectsBadCurves) {
  const auto grid = pt::log_grid(0.1, 10.0, 12);
  std::vector<double> f(grid.size(), 0.5);
  f[3] = 0.0;
  EXPECT_THROW(pt::fit_curve(grid, f, {}), pt::DataError);
  EXPECT_THROW(pt::fit_curve(std::vector<double>(5, 1.0), std::vector<double>(5, 0.5), {}), pt::DataError);
  EXPECT_THROW(pt::fit_curve(grid, std::vector<double>(3, 0.5), {}), pt::DomainError);
}

TEST(Fit, TooFewValuesIsInsufficientData) {
  const std::vector<double> v{1.0, 2.0, 0.5, 3.0, 1.2};
  try {
    (void)pt::fit(v);
    FAIL() << "expected DataError";
  } catch (const pt::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient data"), std::string::npos);
  }
}

TEST(Fit, ConfigValidation) {
  const auto v = pt::sample(reference_table(), 1000, 1);
  pt::FitConfig c;
  c.grid_points = 3;
  EXPECT_THROW(pt::fit(v, c), pt::ConfigError);
  c = {};
  c.bounds.t_min = 5.0;
  c.bounds.t_max = 1.0;
  EXPECT_THROW(pt::fit(v, c), pt::ConfigError);
  c = {};
  c.r_range = std::pair{10.0, 1.0};
  EXPECT_THROW(pt::fit(v, c), pt::ConfigError);
}

TEST(Fit, IterationCapReportsNonConvergence) {
  const auto v = pt::sample(reference_table(), 2000, 5);
  pt::FitConfig c;
  c.minimizer.max_iterations = 1;
  pt::FitResult r;
  EXPECT_NO_THROW(r = pt::fit(v, c));
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.iterations, 1);
}

TEST(Fit, SampledDataRecoversTemperature) {
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto v = pt::sample(reference_table(), 10000, seed);
    const pt::FitResult r = pt::fit(v);
    EXPECT_TRUE(r.converged) << seed;
    EXPECT_GE(r.objective, 0.0);
    if (std::abs(r.params.T - 1.5) <= 0.15 * 1.5) ++within;
  }
  EXPECT_GE(within, 18);
}

TEST(Fit, ParametersStayInsideBounds) {
  const auto v = pt::sample(reference_table(), 5000, 77);
  pt::FitConfig c;
  c.fit_beta = true;
  const pt::FitResult r = pt::fit(v, c);
  EXPECT_GE(r.params.T, c.bounds.t_min);
  EXPECT_LE(r.params.T, c.bounds.t_max);
  EXPECT_GE(r.params.theta, c.bounds.theta_min);
  EXPECT_LE(r.params.theta, c.bounds.theta_max);
  EXPECT_GE(r.params.beta, c.bounds.beta_min);
  EXPECT_LE(r.params.beta, c.bounds.beta_max);

  pt::FitConfig tight;
  tight.bounds.theta_max = 5.0;
  const pt::FitResult rt = pt::fit(v, tight);
  EXPECT_LE(rt.params.theta, 5.0);
}

TEST(Fit, Deterministic) {
  const auto v = pt::sample(reference_table(), 3000, 9);
  const pt::FitResult a = pt::fit(v);
  const pt::FitResult b = pt::fit(v);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Fit, GridHonoursTailCount) {
  const auto v = pt::sample(reference_table(), 3000, 4);
  const pt::EmpiricalSurvival emp(v);
  pt::FitConfig c;
  const auto grid = pt::fit_grid(emp, c);
  ASSERT_FALSE(grid.empty());
  for (double r : grid) EXPECT_GE(emp.count_above(r), c.min_tail_count);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
}
