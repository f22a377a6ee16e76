#include <gtest/gtest.h>

#include <vector>

#include "stripsurvey/srs_estimators.hpp"

using namespace stripsurvey;

TEST(SrsPs, SingleStratumTotal) {
  // V(t_bar) = 100 / 3 and with one stratum V = A_T^2 / n * n V(t_bar).
  const std::vector<FieldPlot> plots{{0, 10, 1}, {0, 20, 1}, {0, 30, 1}};
  const Poststrata s{{1.0}, 100.0};
  const auto e = srs_ps_total(plots, s);
  EXPECT_DOUBLE_EQ(e.value, 2000.0);
  EXPECT_NEAR(e.variance, 1e6 / 3.0, 1e-6);
  EXPECT_EQ(e.flags, kNoFlags);
}

TEST(SrsPs, SingleStratumArea) {
  const std::vector<FieldPlot> plots{{0, 0, 0}, {0, 0, 1}};
  const Poststrata s{{1.0}, 10.0};
  const auto e = srs_ps_area(plots, s);
  EXPECT_DOUBLE_EQ(e.value, 5.0);
  EXPECT_DOUBLE_EQ(e.variance, 25.0);
}

TEST(SrsPs, TwoStrataWeightedMean) {
  const std::vector<FieldPlot> plots{{0, 10, 1}, {0, 20, 1}, {1, 30, 1}, {1, 40, 1}};
  const Poststrata s{{0.5, 0.5}, 10.0};
  EXPECT_DOUBLE_EQ(srs_ps_total(plots, s).value, 250.0);
}

TEST(SrsPs, FullDomainDensityIsTotalOverArea) {
  const std::vector<FieldPlot> plots{{0, 10, 1}, {0, 20, 1}, {1, 30, 1}, {1, 45, 1}};
  const Poststrata s{{0.3, 0.7}, 40.0};
  const auto t = srs_ps_total(plots, s);
  const auto a = srs_ps_area(plots, s);
  const auto d = srs_ps_density(plots, s);
  EXPECT_DOUBLE_EQ(a.value, 40.0);
  EXPECT_DOUBLE_EQ(a.variance, 0.0);
  EXPECT_DOUBLE_EQ(d.value, t.value / 40.0);
  EXPECT_NEAR(d.variance, t.variance / 1600.0, 1e-12 * t.variance);
}

TEST(SrsPs, ConstantWithinStrataGivesZeroVariance) {
  const std::vector<FieldPlot> plots{{0, 7, 1}, {0, 7, 1}, {1, 3, 0.5}, {1, 3, 0.5}};
  const Poststrata s{{0.25, 0.75}, 8.0};
  EXPECT_DOUBLE_EQ(srs_ps_total(plots, s).variance, 0.0);
  EXPECT_DOUBLE_EQ(srs_ps_density(plots, s).variance, 0.0);
}

TEST(SrsPs, SinglePlotStratumIsFlagged) {
  const std::vector<FieldPlot> plots{{0, 7, 1}, {0, 9, 1}, {1, 3, 1}};
  const Poststrata s{{0.5, 0.5}, 8.0};
  EXPECT_TRUE(srs_ps_total(plots, s).has(kSmallNStratum));
}

TEST(SrsPs, EmptyStratumWeightMovesToNeighbour) {
  const std::vector<FieldPlot> plots{{0, 10, 1}, {0, 20, 1}, {2, 30, 1}, {2, 50, 1}};
  const Poststrata s{{0.25, 0.25, 0.5}, 4.0};
  const auto e = srs_ps_total(plots, s);
  EXPECT_TRUE(e.has(kSmallNStratum));
  // Stratum 1 is empty and joins stratum 0 (lower index on ties).
  EXPECT_DOUBLE_EQ(e.value, 4.0 * (0.5 * 15.0 + 0.5 * 40.0));
}

TEST(SrsPs, RejectsBadInput) {
  const Poststrata s{{0.5, 0.6}, 1.0};
  const std::vector<FieldPlot> plots{{0, 1, 1}, {1, 1, 1}};
  EXPECT_THROW(srs_ps_total(plots, s), EstimationError);
  EXPECT_THROW(srs_ps_total(std::vector<FieldPlot>{}, Poststrata{{1.0}, 1.0}), EstimationError);
  EXPECT_THROW(srs_ps_density(std::vector<FieldPlot>{{0, 0, 0}, {0, 0, 0}}, Poststrata{{1.0}, 1.0}),
               EstimationError);
}
