#pragma once

// Loaders for the tabulated estimator fixtures and their frozen expectations.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stripsurvey/ratio_estimators.hpp"
#include "stripsurvey/srs_estimators.hpp"

namespace fixtures {

using namespace stripsurvey;
using nlohmann::json;

inline json load(const std::string& name) {
  const std::string path = std::string(STRIPSURVEY_FIXTURES) + "/" + name;
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return json::parse(in);
}

struct SrsFixture {
  std::vector<FieldPlot> plots;
  Poststrata strata;
};

inline SrsFixture t0() {
  const json j = load("t0.json");
  SrsFixture f;
  for (const auto& p : j["plots"]) f.plots.push_back({p["stratum"].get<int>(), p["y"].get<double>(), p["a"].get<double>()});
  const auto cells = j["stratum_cells"].get<std::vector<double>>();
  double N = 0.0;
  for (double c : cells) N += c;
  for (double c : cells) f.strata.weights.push_back(c / N);
  f.strata.total_area = N * j["cell_area_ha"].get<double>();
  return f;
}

inline SampleAggregates t1() {
  const json j = load("t1.json");
  SampleAggregates agg;
  agg.population_strips = j["population_strips"];
  agg.stratum_cells = j["stratum_cells"].get<std::vector<std::int64_t>>();
  for (auto n : agg.stratum_cells) agg.population_cells += n;
  agg.cell_area = j["cell_area_ha"];
  for (const auto& s : j["strips"]) {
    StripAggregate strip;
    strip.strip_id = s["id"];
    for (const auto& h : s["strata"]) {
      StratumSlice sl;
      sl.cells = h["cells"];
      sl.predicted_total = h["predicted_total"];
      sl.predicted_area = h["predicted_area"];
      sl.resid_y = h["e_y"].get<std::vector<double>>();
      sl.resid_a = h["e_a"].get<std::vector<double>>();
      strip.strata.push_back(sl);
    }
    agg.strips.push_back(strip);
  }
  return agg;
}

/// The same strips with every stratum merged into one.
inline SampleAggregates single_stratum(SampleAggregates agg) {
  for (auto& strip : agg.strips) {
    StratumSlice all;
    for (const auto& sl : strip.strata) {
      all.cells += sl.cells;
      all.predicted_total += sl.predicted_total;
      all.predicted_area += sl.predicted_area;
      all.resid_y.insert(all.resid_y.end(), sl.resid_y.begin(), sl.resid_y.end());
      all.resid_a.insert(all.resid_a.end(), sl.resid_a.begin(), sl.resid_a.end());
    }
    strip.strata = {all};
  }
  agg.stratum_cells = {agg.population_cells};
  return agg;
}

/// Every strip sampled and every cell a plot, with the given residuals.
inline SampleAggregates census(SampleAggregates agg) {
  agg.population_strips = agg.sampled_strips();
  agg.population_cells = 0;
  agg.stratum_cells.assign(agg.stratum_cells.size(), 0);
  for (auto& strip : agg.strips) {
    for (std::size_t h = 0; h < strip.strata.size(); ++h) {
      auto& sl = strip.strata[h];
      sl.cells = sl.plots();
      agg.stratum_cells[h] += sl.cells;
      agg.population_cells += sl.cells;
    }
  }
  return agg;
}

inline SampleAggregates zero_residuals(SampleAggregates agg) {
  for (auto& strip : agg.strips) {
    for (auto& sl : strip.strata) {
      for (double& e : sl.resid_y) e = 0.0;
      for (double& e : sl.resid_a) e = 0.0;
    }
  }
  return agg;
}

}  // namespace fixtures
