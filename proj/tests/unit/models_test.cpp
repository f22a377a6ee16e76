#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stripsurvey/models.hpp"

using namespace stripsurvey;

TEST(LinearModel, ExactLine) {
  const std::vector<double> h{0, 1, 2}, y{0, 2, 4};
  const auto m = fit_linear(h, y);
  EXPECT_DOUBLE_EQ(m.intercept, 0.0);
  EXPECT_DOUBLE_EQ(m.slope, 2.0);
  EXPECT_FALSE(m.intercept_only);
}

TEST(LinearModel, TenPointNormalEquations) {
  // Coefficients from solving X'X b = X'y by hand (exact rational solution).
  const std::vector<double> h{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> y{3.1, 4.9, 7.2, 8.8, 11.1, 13.0, 15.2, 16.8, 19.1, 21.0};
  const auto m = fit_linear(h, y);
  // sum h = 55, sum h^2 = 385, sum y = 120.2, sum hy = 825.9
  const double b1 = (10 * 825.9 - 55 * 120.2) / (10 * 385.0 - 55 * 55.0);
  const double b0 = (120.2 - b1 * 55) / 10;
  EXPECT_NEAR(m.slope, b1, 1e-10 * std::abs(b1));
  EXPECT_NEAR(m.intercept, b0, 1e-10 * std::abs(b0));
  double resid = 0.0, abs_y = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    resid += y[k] - (m.intercept + m.slope * h[k]);
    abs_y += std::abs(y[k]);
  }
  EXPECT_LT(std::abs(resid), 1e-8 * abs_y);
}

TEST(LinearModel, NoSpreadFallsBackToMean) {
  const std::vector<double> h{3, 3, 3}, y{1, 2, 6};
  const auto m = fit_linear(h, y);
  EXPECT_TRUE(m.intercept_only);
  EXPECT_DOUBLE_EQ(m.intercept, 3.0);
  EXPECT_DOUBLE_EQ(m.slope, 0.0);
}

TEST(LinearModel, PredictionIsClampedAtZero) {
  LinearModel m;
  m.intercept = -5.0;
  m.slope = 1.0;
  EXPECT_DOUBLE_EQ(m.predict(2.0), 0.0);
  EXPECT_DOUBLE_EQ(m.predict(7.0), 2.0);
}

TEST(LogisticModel, AllOnesFallsBackToOne) {
  const std::vector<double> h{1, 2, 3, 4}, a{1, 1, 1, 1};
  const auto m = fit_logistic(h, a);
  EXPECT_TRUE(m.constant_fallback);
  EXPECT_DOUBLE_EQ(m.predict(10.0), 1.0);
}

TEST(LogisticModel, SeparatedResponseFallsBack) {
  const std::vector<double> h{1, 2, 3, 4, 5, 6}, a{0, 0, 0, 1, 1, 1};
  EXPECT_TRUE(fit_logistic(h, a).constant_fallback);
}

TEST(LogisticModel, RecoversKnownCoefficients) {
  // Fractional responses equal to the true mean function are fitted exactly.
  std::vector<double> h, a;
  for (int k = 0; k < 40; ++k) {
    const double x = 0.25 * k;
    h.push_back(x);
    a.push_back(1.0 / (1.0 + std::exp(-(-2.0 + 0.7 * x))));
  }
  const auto m = fit_logistic(h, a);
  ASSERT_TRUE(m.converged);
  EXPECT_NEAR(m.intercept, -2.0, 1e-7);
  EXPECT_NEAR(m.slope, 0.7, 1e-7);
  EXPECT_LT(m.predict(1.0), m.predict(2.0));
}

TEST(Models, FitIsDeterministic) {
  std::vector<FieldObservation> obs;
  for (int k = 0; k < 30; ++k) obs.push_back({0.5 * k, k % 3 == 0 ? 0.0 : 2.0 * k, k % 3 == 0 ? 0.0 : 1.0});
  obs[4].domain = 0.5;
  const auto a = fit_models(obs);
  const auto b = fit_models(obs);
  EXPECT_EQ(a.biomass.intercept, b.biomass.intercept);
  EXPECT_EQ(a.biomass.slope, b.biomass.slope);
  EXPECT_EQ(a.domain.intercept, b.domain.intercept);
  EXPECT_EQ(a.domain.slope, b.domain.slope);
  // Biomass model uses domain plots only: y = 2k = 4h exactly there.
  EXPECT_NEAR(a.biomass.slope, 4.0, 1e-12);
  EXPECT_NEAR(a.biomass.intercept, 0.0, 1e-10);
}

TEST(Models, TooFewPlots) {
  std::vector<FieldObservation> obs{{1, 1, 1}, {2, 2, 1}};
  EXPECT_THROW(fit_models(obs), ModelError);
}

TEST(Models, ResidualHandExample) {
  // y = 12 observed, y_hat = 10, q_hat = 0.8 -> e_y = 12 - 8 = 4.
  CellRecord c;
  c.lidar_height = 5.0;
  c.biomass_density = 12.0;
  c.domain_proportion = 1.0;
  CellRecord d = c;
  d.cell_id = 1;
  d.strip_id = 1;
  PopulationFrame f({c, d}, 2, 1, 1.0);
  WorkingModels m;
  m.biomass.intercept = 0.0;
  m.biomass.slope = 2.0;
  m.domain.constant_fallback = true;
  m.domain.constant = 0.8;
  const auto p = predict_cell(m, f, 0, true);
  EXPECT_DOUBLE_EQ(p.y_hat, 10.0);
  EXPECT_DOUBLE_EQ(p.q_hat, 0.8);
  EXPECT_DOUBLE_EQ(p.e_y, 4.0);
  EXPECT_NEAR(p.e_a, 0.2, 1e-15);
  const auto q = predict_cell(m, f, 0, false);
  EXPECT_EQ(q.e_y, 0.0);
}

TEST(Models, PerfectModelsGiveZeroResiduals) {
  std::vector<CellRecord> cells;
  for (int k = 0; k < 6; ++k) {
    CellRecord c;
    c.cell_id = k;
    c.strip_id = k % 2;
    c.lidar_height = k;
    c.biomass_density = 3.0 + 2.0 * k;
    c.domain_proportion = 1.0;
    cells.push_back(c);
  }
  PopulationFrame f(cells, 2, 1, 1.0);
  WorkingModels m;
  m.biomass.intercept = 3.0;
  m.biomass.slope = 2.0;
  m.domain.constant_fallback = true;
  m.domain.constant = 1.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto p = predict_cell(m, f, k, true);
    EXPECT_EQ(p.e_y, 0.0);
    EXPECT_EQ(p.e_a, 0.0);
  }
}
