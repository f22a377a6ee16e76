#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stripsurvey/config.hpp"
#include "stripsurvey/population.hpp"

using namespace stripsurvey;

namespace {

CopulaSpec default_spec() { return load_copula_spec(std::string(STRIPSURVEY_CONFIGS) + "/default_population.json"); }

CopulaSpec small_spec() {
  CopulaSpec s = default_spec();
  s.pool_size = 20000;
  s.grid.strips = 20;
  s.grid.rows = 60;
  return s;
}

}  // namespace

TEST(Population, DefaultFrameMatchesTargetCorrelation) {
  const CopulaSpec spec = default_spec();
  const auto frame = generate_population(spec, 42);
  EXPECT_EQ(frame.strip_count(), 120);
  EXPECT_EQ(frame.stratum_count(), 4);
  EXPECT_GT(frame.size(), 95000);
  EXPECT_LT(frame.size(), 105000);
  const auto r = frame_correlation(frame);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_NEAR(r[i][j], spec.correlation[i][j], 0.05) << "(" << i << "," << j << ")";
}

TEST(Population, SameSeedSameFrame) {
  const auto spec = small_spec();
  EXPECT_TRUE(generate_population(spec, 9) == generate_population(spec, 9));
  EXPECT_FALSE(generate_population(spec, 9) == generate_population(spec, 10));
}

TEST(Population, IdentityCorrelationGivesIndependentColumns) {
  CopulaSpec spec = small_spec();
  spec.correlation = identity_correlation();
  spec.match_correlation = false;
  spec.domain_link = {std::numeric_limits<double>::infinity(), 0.0};
  spec.pool_size = 100000;
  const auto r = frame_correlation(generate_population(spec, 3));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) {
        EXPECT_LT(std::abs(r[i][j]), 0.05) << "(" << i << "," << j << ")";
      }
}

TEST(Population, ConstantMarginalsGiveTrivialTruth) {
  CopulaSpec spec = small_spec();
  spec.correlation = identity_correlation();
  spec.stratum = Marginal::ordinal({1.0});
  spec.height = Marginal::constant(5.0);
  spec.biomass = Marginal::constant(50.0);
  spec.domain_fraction = Marginal::constant(1.0);
  spec.domain_link = {std::numeric_limits<double>::infinity(), 0.0};
  const auto frame = generate_population(spec, 1);
  const auto t = enumerate_truth(frame);
  const double area = static_cast<double>(frame.size()) * spec.grid.cell_area_ha;
  EXPECT_NEAR(t.area, area, 1e-9 * area);
  EXPECT_NEAR(t.total, 50.0 * area, 1e-9 * 50.0 * area);
  EXPECT_NEAR(t.density, 50.0, 1e-12);
}

TEST(Population, DomainLinkHoldsConditionally) {
  // Off-domain cells carry no biomass and the share in the domain rises
  // with lidar height.
  const auto frame = generate_population(small_spec(), 5);
  std::int64_t low_n = 0, low_in = 0, high_n = 0, high_in = 0;
  for (const auto& c : frame.cells()) {
    if (c.domain_proportion == 0.0) {
      EXPECT_EQ(c.biomass_density, 0.0);
    }
    const bool in = c.domain_proportion > 0.0;
    if (c.lidar_height < 3.0) {
      ++low_n;
      low_in += in;
    } else if (c.lidar_height > 8.0) {
      ++high_n;
      high_in += in;
    }
  }
  ASSERT_GT(low_n, 0);
  ASSERT_GT(high_n, 0);
  EXPECT_LT(double(low_in) / low_n, double(high_in) / high_n);
}

TEST(Population, RejectsNonPositiveDefiniteCorrelation) {
  CopulaSpec spec = small_spec();
  spec.correlation = {{{1.0, 0.9, 0.9, 0.0}, {0.9, 1.0, -0.9, 0.0}, {0.9, -0.9, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}}};
  try {
    validate_spec(spec);
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("correlation"), std::string::npos);
  }
}

TEST(Population, RejectsBadMarginals) {
  CopulaSpec spec = small_spec();
  spec.stratum = Marginal::ordinal({0.5, 0.6});
  EXPECT_THROW(validate_spec(spec), SpecError);
  spec = small_spec();
  spec.domain_fraction = Marginal::lognormal(0, 1);
  EXPECT_THROW(validate_spec(spec), SpecError);
  spec = small_spec();
  spec.biomass = Marginal::gamma(-1, 2);
  EXPECT_THROW(validate_spec(spec), SpecError);
}

TEST(Population, CoverFieldIsSpatiallySmooth) {
  // Neighbouring cells along a strip are more alike in height than random pairs.
  const auto frame = generate_population(small_spec(), 8);
  double near = 0.0, far = 0.0;
  std::int64_t n = 0;
  for (int i = 0; i < frame.strip_count(); ++i) {
    const auto& cells = frame.strip_cells(i);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const double a = frame.cell(cells[k]).lidar_height;
      near += std::abs(a - frame.cell(cells[k - 1]).lidar_height);
      far += std::abs(a - frame.cell((cells[k] * 7919) % frame.cells().size()).lidar_height);
      ++n;
    }
  }
  EXPECT_LT(near / n, far / n);
}
