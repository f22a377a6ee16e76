#pragma once

// Poststratified estimators that treat the field plots as a simple random
// sample: total, domain area and domain density.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "design.hpp"
#include "estimate.hpp"
#include "frame.hpp"

namespace stripsurvey {

struct FieldPlot {
  int stratum = 0;
  double y = 0.0;  // Mg/ha
  double a = 0.0;  // domain fraction
};

/// Known stratum structure of the population.
struct Poststrata {
  std::vector<double> weights;  // W_h = N_h / N
  double total_area = 0.0;      // A_T, ha

  static Poststrata from_frame(const PopulationFrame& frame) {
    Poststrata p;
    p.total_area = frame.total_area();
    for (int h = 0; h < frame.stratum_count(); ++h) p.weights.push_back(frame.stratum_weight(h));
    return p;
  }
};

inline std::vector<FieldPlot> field_plots(const PopulationFrame& frame, const TwoStageSample& sample) {
  std::vector<FieldPlot> out;
  for (const auto& s : sample.strips) {
    for (std::size_t k : s.plots) {
      const auto& c = frame.cell(k);
      out.push_back({c.stratum_id, c.biomass_density, c.domain_proportion});
    }
  }
  return out;
}

namespace detail {

/// Per-stratum plot summaries after collapsing empty strata.
struct StratumMoments {
  std::vector<double> weight;      // W_h (collapsed)
  std::vector<std::int64_t> n;     // n_h
  std::vector<double> mean_y;
  std::vector<double> mean_a;
  std::vector<double> var_mean_y;  // V(t_bar_h)
  std::vector<double> var_mean_a;  // V(a_bar_h)
  std::vector<double> cov_mean;    // Cov(t_bar_h, a_bar_h)
  std::int64_t n_total = 0;
  unsigned flags = kNoFlags;
};

inline StratumMoments stratum_moments(std::span<const FieldPlot> plots, const Poststrata& strata) {
  const std::size_t H = strata.weights.size();
  if (H == 0) throw EstimationError("srs: no strata");
  double wsum = 0.0;
  for (double w : strata.weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-9) throw EstimationError("srs: stratum weights must sum to 1");

  StratumMoments s;
  s.weight = strata.weights;
  s.n.assign(H, 0);
  s.mean_y.assign(H, 0.0);
  s.mean_a.assign(H, 0.0);
  s.var_mean_y.assign(H, 0.0);
  s.var_mean_a.assign(H, 0.0);
  s.cov_mean.assign(H, 0.0);
  for (const auto& p : plots) {
    if (p.stratum < 0 || static_cast<std::size_t>(p.stratum) >= H) throw EstimationError("srs: stratum out of range");
    ++s.n[p.stratum];
    s.mean_y[p.stratum] += p.y;
    s.mean_a[p.stratum] += p.a;
  }
  s.n_total = static_cast<std::int64_t>(plots.size());
  if (s.n_total == 0) throw EstimationError("srs: no plots");

  // An empty stratum hands its weight to the nearest non-empty stratum
  // (lower index on ties).
  for (std::size_t h = 0; h < H; ++h) {
    if (s.n[h] > 0 || s.weight[h] == 0.0) continue;
    std::size_t target = H;
    for (std::size_t d = 1; d < H && target == H; ++d) {
      if (h >= d && s.n[h - d] > 0) target = h - d;
      else if (h + d < H && s.n[h + d] > 0) target = h + d;
    }
    s.weight[target] += s.weight[h];
    s.weight[h] = 0.0;
    s.flags |= kSmallNStratum;
  }

  for (std::size_t h = 0; h < H; ++h) {
    if (s.n[h] > 0) {
      s.mean_y[h] /= static_cast<double>(s.n[h]);
      s.mean_a[h] /= static_cast<double>(s.n[h]);
    }
  }
  std::vector<double> syy(H, 0.0), saa(H, 0.0), sya(H, 0.0);
  for (const auto& p : plots) {
    const double dy = p.y - s.mean_y[p.stratum];
    const double da = p.a - s.mean_a[p.stratum];
    syy[p.stratum] += dy * dy;
    saa[p.stratum] += da * da;
    sya[p.stratum] += dy * da;
  }
  for (std::size_t h = 0; h < H; ++h) {
    if (s.n[h] >= 2) {
      const double denom = static_cast<double>(s.n[h]) * static_cast<double>(s.n[h] - 1);
      s.var_mean_y[h] = syy[h] / denom;
      s.var_mean_a[h] = saa[h] / denom;
      s.cov_mean[h] = sya[h] / denom;
    } else if (s.n[h] == 1) {
      s.flags |= kSmallNStratum;
    }
  }
  return s;
}

/// A_T^2 / n * [sum W_h n_h X_h + sum (1 - W_h) (n_h / n) X_h]
inline double poststratified_combination(const StratumMoments& s, const std::vector<double>& x,
                                         double total_area) {
  const double n = static_cast<double>(s.n_total);
  double first = 0.0;
  double second = 0.0;
  for (std::size_t h = 0; h < x.size(); ++h) {
    const double nh = static_cast<double>(s.n[h]);
    first += s.weight[h] * nh * x[h];
    second += (1.0 - s.weight[h]) * (nh / n) * x[h];
  }
  return total_area * total_area / n * (first + second);
}

inline double weighted_mean(const StratumMoments& s, const std::vector<double>& m) {
  double v = 0.0;
  for (std::size_t h = 0; h < m.size(); ++h) v += s.weight[h] * m[h];
  return v;
}

}  // namespace detail

/// Total of y over the population (Mg).
inline Estimate srs_ps_total(std::span<const FieldPlot> plots, const Poststrata& strata) {
  const auto s = detail::stratum_moments(plots, strata);
  return finalize(strata.total_area * detail::weighted_mean(s, s.mean_y),
                  detail::poststratified_combination(s, s.var_mean_y, strata.total_area), s.flags);
}

/// Domain area (ha).
inline Estimate srs_ps_area(std::span<const FieldPlot> plots, const Poststrata& strata) {
  const auto s = detail::stratum_moments(plots, strata);
  return finalize(strata.total_area * detail::weighted_mean(s, s.mean_a),
                  detail::poststratified_combination(s, s.var_mean_a, strata.total_area), s.flags);
}

/// Domain density (Mg/ha) as the ratio of the two estimators above, with a
/// linearized variance.
inline Estimate srs_ps_density(std::span<const FieldPlot> plots, const Poststrata& strata) {
  const auto s = detail::stratum_moments(plots, strata);
  const double area = strata.total_area * detail::weighted_mean(s, s.mean_a);
  if (!(area > 0.0)) throw EstimationError("srs_ps_density: estimated domain area is not positive");
  const double total = strata.total_area * detail::weighted_mean(s, s.mean_y);
  const double density = total / area;
  const double v_total = detail::poststratified_combination(s, s.var_mean_y, strata.total_area);
  const double v_area = detail::poststratified_combination(s, s.var_mean_a, strata.total_area);
  const double cov = detail::poststratified_combination(s, s.cov_mean, strata.total_area);
  const double variance = (v_total + density * density * v_area - 2.0 * density * cov) / (area * area);
  return finalize(density, variance, s.flags);
}

}  // namespace stripsurvey
