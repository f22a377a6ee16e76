#pragma once

// Two-stage model-assisted ratio estimators of the domain total, domain area
// and domain density (ratio-of-ratios), with and without poststratification.
//
// All strip aggregates are held in cell units: predicted totals are sums of
// q_hat * y_hat (Mg/ha per cell), predicted areas are sums of q_hat (cells).
// Totals are converted to Mg and areas to ha by the cell area once, at the
// end; densities need no conversion.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "design.hpp"
#include "estimate.hpp"
#include "frame.hpp"
#include "models.hpp"

namespace stripsurvey {

/// One stratum's share of a sampled strip.
struct StratumSlice {
  std::int64_t cells = 0;          // N_hi
  double predicted_total = 0.0;    // sum over the N_hi cells of q_hat * y_hat
  double predicted_area = 0.0;     // sum over the N_hi cells of q_hat
  std::vector<double> resid_y;     // e_y on the n_hi field plots
  std::vector<double> resid_a;     // e_a on the same plots

  std::int64_t plots() const { return static_cast<std::int64_t>(resid_y.size()); }
};

struct StripAggregate {
  int strip_id = 0;
  std::vector<StratumSlice> strata;  // indexed by stratum, size H

  std::int64_t cells() const {
    std::int64_t n = 0;
    for (const auto& s : strata) n += s.cells;
    return n;
  }
};

/// Everything the ratio estimators need from one realized sample.
struct SampleAggregates {
  int population_strips = 0;               // M
  std::int64_t population_cells = 0;       // N
  std::vector<std::int64_t> stratum_cells; // N_h
  double cell_area = 1.0;                  // ha
  std::vector<StripAggregate> strips;      // S_1

  int stratum_count() const { return static_cast<int>(stratum_cells.size()); }
  int sampled_strips() const { return static_cast<int>(strips.size()); }
};

inline SampleAggregates aggregate_sample(const PopulationFrame& frame, const TwoStageSample& sample,
                                         const WorkingModels& models) {
  const int H = frame.stratum_count();
  SampleAggregates agg;
  agg.population_strips = frame.strip_count();
  agg.population_cells = frame.size();
  agg.stratum_cells = frame.stratum_sizes();
  agg.cell_area = frame.cell_area();
  agg.strips.reserve(sample.strips.size());
  for (const auto& s : sample.strips) {
    StripAggregate strip;
    strip.strip_id = s.strip_id;
    strip.strata.resize(static_cast<std::size_t>(H));
    for (std::size_t k : frame.strip_cells(s.strip_id)) {
      const auto& c = frame.cell(k);
      const double q = models.predict_domain(c.lidar_height);
      auto& slice = strip.strata[c.stratum_id];
      ++slice.cells;
      slice.predicted_total += q * models.predict_biomass(c.lidar_height);
      slice.predicted_area += q;
    }
    for (std::size_t k : s.plots) {
      const auto p = predict_cell(models, frame, k, true);
      auto& slice = strip.strata[frame.cell(k).stratum_id];
      slice.resid_y.push_back(p.e_y);
      slice.resid_a.push_back(p.e_a);
    }
    agg.strips.push_back(std::move(strip));
  }
  return agg;
}

namespace detail {

inline double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// Sample variance with divisor n - 1 (0 when n < 2).
inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = sum_of(v) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

/// N^2 (1/n - 1/N) s^2, the second-stage variance of an expanded total.
/// Returns 0 and raises kSmallNStratum when fewer than two plots leave s^2
/// undefined.
inline double expansion_variance(std::int64_t cells, const std::vector<double>& resid, unsigned& flags) {
  const auto n = static_cast<std::int64_t>(resid.size());
  if (cells == 0 || n == cells) return 0.0;
  if (n < 2) {
    flags |= kSmallNStratum;
    return 0.0;
  }
  const double N = static_cast<double>(cells);
  return N * N * (1.0 / static_cast<double>(n) - 1.0 / N) * sample_variance(resid);
}

/// Model-assisted strip-level estimate: prediction sum plus expanded
/// residual sum (the expansion is skipped when no plot fell in the cell).
inline double strip_estimate(double predicted, std::int64_t cells, const std::vector<double>& resid) {
  if (resid.empty()) return predicted;
  return predicted + static_cast<double>(cells) / static_cast<double>(resid.size()) * sum_of(resid);
}

/// Unstratified view of one strip.
struct StripTotals {
  std::int64_t cells = 0;        // N_i
  double total = 0.0;            // t_ri
  double area = 0.0;             // a_ri
  std::vector<double> resid_y;
  std::vector<double> resid_a;
};

inline std::vector<StripTotals> collapse_strata(const SampleAggregates& agg) {
  std::vector<StripTotals> out;
  out.reserve(agg.strips.size());
  for (const auto& strip : agg.strips) {
    StripTotals t;
    double pred_total = 0.0;
    double pred_area = 0.0;
    for (const auto& slice : strip.strata) {
      t.cells += slice.cells;
      pred_total += slice.predicted_total;
      pred_area += slice.predicted_area;
      t.resid_y.insert(t.resid_y.end(), slice.resid_y.begin(), slice.resid_y.end());
      t.resid_a.insert(t.resid_a.end(), slice.resid_a.begin(), slice.resid_a.end());
    }
    t.total = strip_estimate(pred_total, t.cells, t.resid_y);
    t.area = strip_estimate(pred_area, t.cells, t.resid_a);
    out.push_back(std::move(t));
  }
  return out;
}

struct DesignScalars {
  double M = 0.0;
  double m = 0.0;
  double first_stage = 0.0;  // M^2 (1/m - 1/M)
  double expansion = 0.0;    // M / m
};

inline DesignScalars design_scalars(const SampleAggregates& agg) {
  if (agg.sampled_strips() < 2) throw EstimationError("ratio estimators need at least 2 sampled strips");
  if (agg.population_strips < agg.sampled_strips()) throw EstimationError("more sampled strips than M");
  DesignScalars d;
  d.M = static_cast<double>(agg.population_strips);
  d.m = static_cast<double>(agg.sampled_strips());
  d.first_stage = d.M * d.M * (1.0 / d.m - 1.0 / d.M);
  d.expansion = d.M / d.m;
  return d;
}

/// Unstratified ratio estimator of a strip-level quantity, in cell units.
inline Estimate ratio_estimate(const SampleAggregates& agg, bool area) {
  const auto d = design_scalars(agg);
  const auto strips = collapse_strata(agg);
  double sum_est = 0.0;
  double sum_cells = 0.0;
  for (const auto& s : strips) {
    sum_est += area ? s.area : s.total;
    sum_cells += static_cast<double>(s.cells);
  }
  if (!(sum_cells > 0.0)) throw EstimationError("ratio estimator: sampled strips contain no cells");
  const double N = static_cast<double>(agg.population_cells);
  const double ratio = sum_est / sum_cells;
  const double value = N * ratio;

  unsigned flags = kNoFlags;
  double ss_r = 0.0;
  double second = 0.0;
  for (const auto& s : strips) {
    const double r = (area ? s.area : s.total) - ratio * static_cast<double>(s.cells);
    ss_r += r * r;
    second += expansion_variance(s.cells, area ? s.resid_a : s.resid_y, flags);
  }
  const double s2_r = ss_r / (d.m - 1.0);
  const double n_hat = d.expansion * sum_cells;
  const double variance = (N * N) / (n_hat * n_hat) * (d.first_stage * s2_r + d.expansion * second);
  return finalize(value, variance, flags);
}

/// Per-stratum pieces of the poststratified ratio estimators.
struct StratumRatio {
  bool present = false;          // some sampled strip has cells of this stratum
  double population_cells = 0.0; // N_h
  double sampled_cells = 0.0;    // sum over S_1 of N_hi
  double ratio = 0.0;            // R_h
  double estimate = 0.0;         // N_h R_h
  double weight = 0.0;           // N_h / N_hat_h
  std::vector<double> strip_values;  // t_rhi (or a_rhi), one per sampled strip
  std::vector<double> residuals;     // t_rhi - R_h N_hi, one per sampled strip
  double within = 0.0;           // sum over S_1 of N_hi^2 (1/n_hi - 1/N_hi) s^2
};

inline std::vector<StratumRatio> stratum_ratios(const SampleAggregates& agg, const DesignScalars& d, bool area,
                                                unsigned& flags) {
  const int H = agg.stratum_count();
  std::vector<StratumRatio> out(static_cast<std::size_t>(H));
  for (int h = 0; h < H; ++h) {
    auto& sr = out[h];
    sr.population_cells = static_cast<double>(agg.stratum_cells[h]);
    for (const auto& strip : agg.strips) {
      const auto& slice = strip.strata.at(h);
      const double v = area ? strip_estimate(slice.predicted_area, slice.cells, slice.resid_a)
                            : strip_estimate(slice.predicted_total, slice.cells, slice.resid_y);
      sr.strip_values.push_back(v);
      sr.sampled_cells += static_cast<double>(slice.cells);
      sr.within += expansion_variance(slice.cells, area ? slice.resid_a : slice.resid_y, flags);
    }
    if (sr.population_cells == 0.0) continue;
    if (sr.sampled_cells == 0.0) {
      flags |= kEmptyStratumStrip;
      continue;
    }
    sr.present = true;
    sr.ratio = sum_of(sr.strip_values) / sr.sampled_cells;
    sr.estimate = sr.population_cells * sr.ratio;
    sr.weight = sr.population_cells / (d.expansion * sr.sampled_cells);
    for (std::size_t i = 0; i < agg.strips.size(); ++i) {
      sr.residuals.push_back(sr.strip_values[i] -
                             sr.ratio * static_cast<double>(agg.strips[i].strata[h].cells));
    }
  }
  return out;
}

inline double residual_cross(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Poststratified ratio estimator in cell units: per-stratum variances plus
/// cross-stratum covariances of the strip residuals.
inline Estimate ratio_estimate_ps(const SampleAggregates& agg, bool area) {
  const auto d = design_scalars(agg);
  unsigned flags = kNoFlags;
  const auto strata = stratum_ratios(agg, d, area, flags);
  double value = 0.0;
  double variance = 0.0;
  for (const auto& sr : strata) {
    if (!sr.present) continue;
    value += sr.estimate;
    const double s2 = residual_cross(sr.residuals, sr.residuals) / (d.m - 1.0);
    variance += sr.weight * sr.weight * (d.first_stage * s2 + d.expansion * sr.within);
  }
  for (std::size_t h = 0; h < strata.size(); ++h) {
    if (!strata[h].present) continue;
    for (std::size_t g = 0; g < strata.size(); ++g) {
      if (g == h || !strata[g].present) continue;
      const double cov = residual_cross(strata[h].residuals, strata[g].residuals) / (d.m - 1.0);
      variance += strata[h].weight * strata[g].weight * d.first_stage * cov;
    }
  }
  return finalize(value, variance, flags);
}

inline Estimate scaled(Estimate e, double factor) {
  e.value *= factor;
  e.variance *= factor * factor;
  return e;
}

}  // namespace detail

/// Ratio estimator of the domain total (Mg).
inline Estimate ratio_total(const SampleAggregates& agg) {
  return detail::scaled(detail::ratio_estimate(agg, false), agg.cell_area);
}

/// Ratio estimator of the domain area (ha).
inline Estimate ratio_area(const SampleAggregates& agg) {
  return detail::scaled(detail::ratio_estimate(agg, true), agg.cell_area);
}

/// Poststratified ratio estimator of the domain total (Mg).
inline Estimate ratio_total_ps(const SampleAggregates& agg) {
  return detail::scaled(detail::ratio_estimate_ps(agg, false), agg.cell_area);
}

/// Poststratified ratio estimator of the domain area (ha).
inline Estimate ratio_area_ps(const SampleAggregates& agg) {
  return detail::scaled(detail::ratio_estimate_ps(agg, true), agg.cell_area);
}

/// Linearization terms of the unstratified ratio-of-ratios estimator.
struct RorLinearization {
  double density = 0.0;              // D_RoR, Mg/ha
  std::vector<double> u;             // t_ri - D a_ri, one per strip
  std::vector<std::vector<double>> v;  // e_y - D e_a, per strip per plot
  double area_star = 0.0;            // (M/m) sum a_ri, cells
  double first_stage = 0.0;          // M^2 (1/m - 1/M) s_u^2
  double second_stage = 0.0;         // (M/m) sum N_i^2 (1/n_i - 1/N_i) s_vi^2
  unsigned flags = kNoFlags;
};

inline RorLinearization ror_linearization(const SampleAggregates& agg) {
  const auto d = detail::design_scalars(agg);
  const auto strips = detail::collapse_strata(agg);
  const Estimate total = ratio_total(agg);
  const Estimate area = ratio_area(agg);
  if (!(area.value > 0.0)) throw EstimationError("ror_density: estimated domain area is not positive");

  RorLinearization lin;
  lin.density = total.value / area.value;
  double sum_area = 0.0;
  for (const auto& s : strips) {
    lin.u.push_back(s.total - lin.density * s.area);
    std::vector<double> v;
    for (std::size_t k = 0; k < s.resid_y.size(); ++k) v.push_back(s.resid_y[k] - lin.density * s.resid_a[k]);
    lin.second_stage += detail::expansion_variance(s.cells, v, lin.flags);
    lin.v.push_back(std::move(v));
    sum_area += s.area;
  }
  lin.area_star = d.expansion * sum_area;
  lin.first_stage = d.first_stage * detail::sample_variance(lin.u);
  lin.second_stage *= d.expansion;
  return lin;
}

/// Ratio-of-ratios estimator of the domain density (Mg/ha).
inline Estimate ror_density(const SampleAggregates& agg) {
  const auto lin = ror_linearization(agg);
  const double variance = (lin.first_stage + lin.second_stage) / (lin.area_star * lin.area_star);
  return finalize(lin.density, variance, lin.flags);
}

/// Components of the poststratified ratio-of-ratios variance, in cell units.
struct RorPsComponents {
  double total = 0.0;           // t_R,PS (cell units)
  double area = 0.0;            // A_R,PS (cells)
  double density = 0.0;         // D_RoR,PS
  double var_total = 0.0;       // V(t_R,PS)
  double var_area = 0.0;        // V(A_R,PS)
  double cov_total_area = 0.0;  // Cov(t_R,PS, A_R,PS)
  std::vector<std::vector<double>> resid_total;  // r_h per stratum, per strip
  std::vector<std::vector<double>> resid_area;   // r_a,h per stratum, per strip
  unsigned flags = kNoFlags;
};

/// Assembles the three variance components as quadratic forms over the
/// stratum-by-strip residual matrices.
inline RorPsComponents ror_ps_components(const SampleAggregates& agg) {
  const auto d = detail::design_scalars(agg);
  RorPsComponents c;
  const auto ts = detail::stratum_ratios(agg, d, false, c.flags);
  const auto as = detail::stratum_ratios(agg, d, true, c.flags);
  const std::size_t H = ts.size();
  const std::size_t m = agg.strips.size();

  std::vector<double> weight(H, 0.0);
  c.resid_total.assign(H, std::vector<double>(m, 0.0));
  c.resid_area.assign(H, std::vector<double>(m, 0.0));
  double within_total = 0.0;
  double within_area = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    if (!ts[h].present) continue;
    weight[h] = ts[h].weight;
    c.total += ts[h].estimate;
    c.area += as[h].estimate;
    c.resid_total[h] = ts[h].residuals;
    c.resid_area[h] = as[h].residuals;
    within_total += weight[h] * weight[h] * ts[h].within;
    within_area += weight[h] * weight[h] * as[h].within;
  }
  if (!(c.area > 0.0)) throw EstimationError("ror_density_ps: estimated domain area is not positive");
  c.density = c.total / c.area;

  // Weighted strip residual sums: z_i = sum_h w_h r_hi.
  std::vector<double> zt(m, 0.0);
  std::vector<double> za(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t h = 0; h < H; ++h) {
      zt[i] += weight[h] * c.resid_total[h][i];
      za[i] += weight[h] * c.resid_area[h][i];
    }
  }
  double tt = 0.0, aa = 0.0, ta = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    tt += zt[i] * zt[i];
    aa += za[i] * za[i];
    ta += zt[i] * za[i];
  }
  const double scale = d.first_stage / (d.m - 1.0);
  c.var_total = scale * tt + d.expansion * within_total;
  c.var_area = scale * aa + d.expansion * within_area;
  c.cov_total_area = scale * ta;
  return c;
}

/// Poststratified ratio-of-ratios estimator of the domain density (Mg/ha).
inline Estimate ror_density_ps(const SampleAggregates& agg) {
  const auto c = ror_ps_components(agg);
  const double variance =
      (c.var_total + c.density * c.density * c.var_area - 2.0 * c.density * c.cov_total_area) /
      (c.area * c.area);
  return finalize(c.density, variance, c.flags);
}

}  // namespace stripsurvey
