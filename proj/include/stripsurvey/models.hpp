#pragma once

// Working models fitted on each sample's field plots: a linear biomass model
// on lidar height and a fractional-response logistic domain model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "design.hpp"
#include "frame.hpp"

namespace stripsurvey {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One field plot as seen by the model fit.
struct FieldObservation {
  double height = 0.0;
  double biomass = 0.0;  // y, Mg/ha
  double domain = 0.0;   // a, fraction
};

struct LinearModel {
  double intercept = 0.0;  // b0, Mg/ha
  double slope = 0.0;      // b1, Mg/ha per m
  std::int64_t n_used = 0;
  bool intercept_only = false;

  double predict(double height) const { return std::max(0.0, intercept + slope * height); }
};

struct LogisticModel {
  double intercept = 0.0;  // g0
  double slope = 0.0;      // g1
  std::int64_t n_used = 0;
  int iterations = 0;
  bool converged = false;
  /// Set when IRLS could not be used; predictions are then `constant`.
  bool constant_fallback = false;
  double constant = 0.0;

  double predict(double height) const {
    if (constant_fallback) return constant;
    const double eta = intercept + slope * height;
    return 1.0 / (1.0 + std::exp(-eta));
  }
};

struct WorkingModels {
  LinearModel biomass;
  LogisticModel domain;

  double predict_biomass(double height) const { return biomass.predict(height); }
  double predict_domain(double height) const { return domain.predict(height); }
};

/// Ordinary least squares of y on x with intercept; falls back to the mean
/// when x has no spread.
inline LinearModel fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ModelError("fit_linear: size mismatch");
  if (x.empty()) throw ModelError("fit_linear: no observations");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LinearModel m;
  m.n_used = static_cast<std::int64_t>(x.size());
  if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * n)) {
    m.intercept = my;
    m.slope = 0.0;
    m.intercept_only = true;
    return m;
  }
  m.slope = sxy / sxx;
  m.intercept = my - m.slope * mx;
  return m;
}

/// Quasi-binomial logistic regression of a fractional response on x by
/// iteratively reweighted least squares.
inline LogisticModel fit_logistic(std::span<const double> x, std::span<const double> a,
                                  int max_iterations = 50, double tolerance = 1e-8) {
  if (x.size() != a.size()) throw ModelError("fit_logistic: size mismatch");
  if (x.empty()) throw ModelError("fit_logistic: no observations");
  const double n = static_cast<double>(x.size());
  double mean_a = 0.0;
  double mx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mean_a += a[k];
    mx += x[k];
  }
  mean_a /= n;
  mx /= n;
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);

  LogisticModel m;
  m.n_used = static_cast<std::int64_t>(x.size());
  const auto fallback = [&] {
    m.constant_fallback = true;
    m.constant = std::clamp(mean_a, 0.0, 1.0);
    return m;
  };
  // All-zero or all-one responses separate perfectly; no spread in x leaves
  // only the intercept.
  if (mean_a <= 0.0 || mean_a >= 1.0) return fallback();
  if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * n)) return fallback();

  double b0 = std::log(mean_a / (1.0 - mean_a));
  double b1 = 0.0;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    // Weighted least squares of the working response on x.
    double sw = 0.0, swx = 0.0, swz = 0.0, swxx = 0.0, swxz = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double eta = b0 + b1 * x[k];
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const double w = mu * (1.0 - mu);
      if (!(w > 1e-300)) continue;
      const double z = eta + (a[k] - mu) / w;
      sw += w;
      swx += w * x[k];
      swz += w * z;
      swxx += w * x[k] * x[k];
      swxz += w * x[k] * z;
    }
    const double det = sw * swxx - swx * swx;
    if (!(sw > 0.0) || !(std::abs(det) > 1e-300)) return fallback();
    const double nb1 = (sw * swxz - swx * swz) / det;
    const double nb0 = (swz - nb1 * swx) / sw;
    if (!std::isfinite(nb0) || !std::isfinite(nb1)) return fallback();
    const double change = std::max(std::abs(nb0 - b0), std::abs(nb1 - b1));
    b0 = nb0;
    b1 = nb1;
    m.iterations = iter;
    if (change < tolerance) {
      m.converged = true;
      break;
    }
  }
  // Diverging coefficients signal (quasi-)separation.
  if (!m.converged || std::abs(b1) * std::sqrt(sxx / n) > 30.0) return fallback();
  m.intercept = b0;
  m.slope = b1;
  return m;
}

/// Biomass model on domain plots (a > 0), falling back to all plots when
/// fewer than three domain plots exist; domain model on all plots.
inline WorkingModels fit_models(std::span<const FieldObservation> plots) {
  if (plots.size() < 3) throw ModelError("fit: need at least 3 field plots");
  std::vector<double> h_dom, y_dom, h_all, y_all, a_all;
  for (const auto& p : plots) {
    h_all.push_back(p.height);
    y_all.push_back(p.biomass);
    a_all.push_back(p.domain);
    if (p.domain > 0.0) {
      h_dom.push_back(p.height);
      y_dom.push_back(p.biomass);
    }
  }
  WorkingModels m;
  m.biomass = h_dom.size() >= 3 ? fit_linear(h_dom, y_dom) : fit_linear(h_all, y_all);
  m.domain = fit_logistic(h_all, a_all);
  return m;
}

/// Per-cell prediction; residuals are present on field plots only.
struct PlotPrediction {
  std::size_t cell = 0;  // frame cell index
  double y_hat = 0.0;    // Mg/ha
  double q_hat = 0.0;    // fraction
  bool field_plot = false;
  double e_y = 0.0;      // y - q_hat * y_hat, Mg/ha
  double e_a = 0.0;      // a - q_hat, in cell-area units
};

inline std::vector<FieldObservation> field_observations(const PopulationFrame& frame,
                                                        const TwoStageSample& sample) {
  std::vector<FieldObservation> out;
  out.reserve(static_cast<std::size_t>(sample.plot_count()));
  for (const auto& s : sample.strips) {
    for (std::size_t k : s.plots) {
      const auto& c = frame.cell(k);
      out.push_back({c.lidar_height, c.biomass_density, c.domain_proportion});
    }
  }
  return out;
}

inline PlotPrediction predict_cell(const WorkingModels& models, const PopulationFrame& frame, std::size_t k,
                                   bool field_plot) {
  const auto& c = frame.cell(k);
  PlotPrediction p;
  p.cell = k;
  p.y_hat = models.predict_biomass(c.lidar_height);
  p.q_hat = models.predict_domain(c.lidar_height);
  p.field_plot = field_plot;
  if (field_plot) {
    p.e_y = c.biomass_density - p.q_hat * p.y_hat;
    p.e_a = c.domain_proportion - p.q_hat;
  }
  return p;
}

/// Predictions for every cell of the selected strips, strip by strip.
inline std::vector<PlotPrediction> predict(const WorkingModels& models, const PopulationFrame& frame,
                                           const TwoStageSample& sample) {
  std::vector<PlotPrediction> out;
  for (const auto& s : sample.strips) {
    std::vector<std::size_t> plots = s.plots;
    std::sort(plots.begin(), plots.end());
    for (std::size_t k : frame.strip_cells(s.strip_id)) {
      const bool field = std::binary_search(plots.begin(), plots.end(), k);
      out.push_back(predict_cell(models, frame, k, field));
    }
  }
  return out;
}

}  // namespace stripsurvey
