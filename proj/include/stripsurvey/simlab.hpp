#pragma once

// Monte Carlo harness: K replicates per design, all nine estimators per
// replicate, and the bias / precision / SE-bias / coverage summaries.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "design.hpp"
#include "estimate.hpp"
#include "frame.hpp"
#include "models.hpp"
#include "ratio_estimators.hpp"
#include "rng.hpp"
#include "srs_estimators.hpp"
#include "text.hpp"

namespace stripsurvey {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Target { kTotal, kArea, kDensity };

enum class EstimatorId {
  kSrsPsTotal,
  kRatioTotal,
  kRatioTotalPs,
  kSrsPsArea,
  kRatioArea,
  kRatioAreaPs,
  kSrsPsDensity,
  kRorDensity,
  kRorDensityPs,
};

inline constexpr EstimatorId kAllEstimators[] = {
    EstimatorId::kSrsPsTotal, EstimatorId::kRatioTotal,   EstimatorId::kRatioTotalPs,
    EstimatorId::kSrsPsArea,  EstimatorId::kRatioArea,    EstimatorId::kRatioAreaPs,
    EstimatorId::kSrsPsDensity, EstimatorId::kRorDensity, EstimatorId::kRorDensityPs,
};

inline Target target_of(EstimatorId id) {
  switch (id) {
    case EstimatorId::kSrsPsTotal:
    case EstimatorId::kRatioTotal:
    case EstimatorId::kRatioTotalPs: return Target::kTotal;
    case EstimatorId::kSrsPsArea:
    case EstimatorId::kRatioArea:
    case EstimatorId::kRatioAreaPs: return Target::kArea;
    default: return Target::kDensity;
  }
}

inline const char* to_string(Target t) {
  switch (t) {
    case Target::kTotal: return "total";
    case Target::kArea: return "area";
    default: return "density";
  }
}

/// Short label as used in result tables: SRS,PS / R / R,PS / RoR / RoR,PS.
inline const char* short_label(EstimatorId id) {
  switch (id) {
    case EstimatorId::kSrsPsTotal:
    case EstimatorId::kSrsPsArea:
    case EstimatorId::kSrsPsDensity: return "SRS,PS";
    case EstimatorId::kRatioTotal:
    case EstimatorId::kRatioArea: return "R";
    case EstimatorId::kRatioTotalPs:
    case EstimatorId::kRatioAreaPs: return "R,PS";
    case EstimatorId::kRorDensity: return "RoR";
    default: return "RoR,PS";
  }
}

/// Stable identifier used in configs and CSV files, e.g. "total.R_PS".
inline std::string to_string(EstimatorId id) {
  std::string label = short_label(id);
  std::replace(label.begin(), label.end(), ',', '_');
  return std::string(to_string(target_of(id))) + "." + label;
}

inline std::optional<EstimatorId> parse_estimator(std::string_view name) {
  for (EstimatorId id : kAllEstimators)
    if (to_string(id) == name) return id;
  return std::nullopt;
}

/// Everything one replicate produces for one estimator.
struct ReplicateEstimate {
  bool has_value = false;   // false when the estimator threw
  Estimate estimate;
  std::string error;

  /// Excluded from SE-based metrics: no point estimate or a negative variance.
  bool flagged() const { return !has_value || estimate.has(kNegativeVariance); }
};

/// Estimates of every estimator on one realized sample, in kAllEstimators order.
struct ReplicateResult {
  std::uint64_t seed = 0;
  std::int64_t plots = 0;
  std::vector<ReplicateEstimate> estimates;
};

template <class F>
ReplicateEstimate guarded(F&& f) {
  ReplicateEstimate r;
  try {
    r.estimate = f();
    r.has_value = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

/// Draws one sample, refits the working models on its plots and evaluates
/// all nine estimators.
inline ReplicateResult run_replicate(const PopulationFrame& frame, const Poststrata& strata, DesignConfig design,
                                     std::uint64_t seed) {
  design.seed = seed;
  Rng rng(seed);
  const TwoStageSample sample = draw_sample(frame, design, rng);
  ReplicateResult out;
  out.seed = seed;
  out.plots = sample.plot_count();

  const auto plots = field_plots(frame, sample);
  std::optional<SampleAggregates> agg;
  std::string model_error;
  try {
    const auto models = fit_models(field_observations(frame, sample));
    agg = aggregate_sample(frame, sample, models);
  } catch (const std::exception& e) {
    model_error = e.what();
  }
  const auto ratio = [&](auto fn) {
    return guarded([&] {
      if (!agg) throw EstimationError(model_error);
      return fn(*agg);
    });
  };
  out.estimates.reserve(std::size(kAllEstimators));
  for (EstimatorId id : kAllEstimators) {
    switch (id) {
      case EstimatorId::kSrsPsTotal: out.estimates.push_back(guarded([&] { return srs_ps_total(plots, strata); })); break;
      case EstimatorId::kSrsPsArea: out.estimates.push_back(guarded([&] { return srs_ps_area(plots, strata); })); break;
      case EstimatorId::kSrsPsDensity: out.estimates.push_back(guarded([&] { return srs_ps_density(plots, strata); })); break;
      case EstimatorId::kRatioTotal: out.estimates.push_back(ratio([](const auto& a) { return ratio_total(a); })); break;
      case EstimatorId::kRatioTotalPs: out.estimates.push_back(ratio([](const auto& a) { return ratio_total_ps(a); })); break;
      case EstimatorId::kRatioArea: out.estimates.push_back(ratio([](const auto& a) { return ratio_area(a); })); break;
      case EstimatorId::kRatioAreaPs: out.estimates.push_back(ratio([](const auto& a) { return ratio_area_ps(a); })); break;
      case EstimatorId::kRorDensity: out.estimates.push_back(ratio([](const auto& a) { return ror_density(a); })); break;
      case EstimatorId::kRorDensityPs: out.estimates.push_back(ratio([](const auto& a) { return ror_density_ps(a); })); break;
    }
  }
  return out;
}

struct SimConfig {
  int replicates = 2000;                  // K
  std::vector<DesignConfig> designs;
  std::vector<EstimatorId> estimators{std::begin(kAllEstimators), std::end(kAllEstimators)};
  double z = 1.96;
  std::uint64_t master_seed = 0;
  std::optional<TruthValues> truth;       // checked against the frame when present

  void validate() const {
    if (replicates < 2) throw SimulationError("simulation: replicates must be at least 2");
    if (!(z > 0.0)) throw SimulationError("simulation: z must be positive");
    if (designs.empty()) throw SimulationError("simulation: no designs");
    if (estimators.empty()) throw SimulationError("simulation: no estimators");
  }
};

/// Monte Carlo metrics of one estimator under one design.
struct SimulationSummary {
  EstimatorId estimator = EstimatorId::kSrsPsTotal;
  std::size_t design_index = 0;
  DesignMode mode = DesignMode::kSrs;
  double intensity = 0.0;
  int strips_sampled = 0;
  double truth = 0.0;
  std::int64_t replicates = 0;     // K
  std::int64_t point_count = 0;    // replicates with a point estimate
  std::int64_t used = 0;           // replicates entering SE metrics and coverage
  std::int64_t flagged = 0;        // K - used
  std::int64_t small_n = 0;        // replicates carrying small_n_stratum (informational)
  double mean = 0.0;
  double sd = 0.0;
  double bias_pct = 0.0;
  double mean_se = 0.0;
  double sd_se = 0.0;
  double se_bias_pct = 0.0;
  double coverage = 0.0;
};

namespace detail {

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

inline double sd_of(std::span<const double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Metrics over one estimator's replicate stream.
inline SimulationSummary summarize(std::span<const ReplicateEstimate> reps, double truth, double z) {
  SimulationSummary s;
  s.truth = truth;
  s.replicates = static_cast<std::int64_t>(reps.size());
  std::vector<double> values;
  std::vector<double> ses;
  std::int64_t covered = 0;
  for (const auto& r : reps) {
    if (r.has_value) {
      values.push_back(r.estimate.value);
      if (r.estimate.has(kSmallNStratum)) ++s.small_n;
    }
    if (r.flagged()) continue;
    const double se = r.estimate.se();
    ses.push_back(se);
    if (truth >= r.estimate.value - z * se && truth <= r.estimate.value + z * se) ++covered;
  }
  s.point_count = static_cast<std::int64_t>(values.size());
  s.used = static_cast<std::int64_t>(ses.size());
  s.flagged = s.replicates - s.used;
  s.mean = detail::mean_of(values);
  s.sd = detail::sd_of(values);
  s.bias_pct = 100.0 * (s.mean - truth) / truth;
  s.mean_se = detail::mean_of(ses);
  s.sd_se = detail::sd_of(ses);
  s.se_bias_pct = 100.0 * (s.mean_se - s.sd) / s.sd;
  s.coverage = s.used > 0 ? static_cast<double>(covered) / static_cast<double>(s.used)
                          : std::numeric_limits<double>::quiet_NaN();
  return s;
}

inline double truth_for(const TruthValues& t, Target target) {
  switch (target) {
    case Target::kTotal: return t.total;
    case Target::kArea: return t.area;
    default: return t.density;
  }
}

/// Seed of replicate k under design d.
inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t design, std::int64_t k) {
  return child_seed(master, static_cast<std::uint64_t>(design), static_cast<std::uint64_t>(k));
}

struct SimulationResult {
  TruthValues truth;
  std::vector<SimulationSummary> summaries;             // design-major, then estimator
  std::vector<std::vector<ReplicateResult>> replicates;  // [design][k]
};

inline bool truth_matches(const TruthValues& a, const TruthValues& b) {
  const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(std::abs(x), std::abs(y)); };
  return close(a.total, b.total) && close(a.area, b.area) && close(a.density, b.density);
}

/// Runs every (design, replicate) pair on `jobs` workers. Results are stored
/// by index and reduced in index order, so the output does not depend on the
/// worker count.
inline SimulationResult run(const PopulationFrame& frame, const SimConfig& config, int jobs = 1) {
  config.validate();
  for (const auto& d : config.designs) d.validate(frame.strip_count());
  SimulationResult result;
  result.truth = enumerate_truth(frame);
  if (config.truth && !truth_matches(*config.truth, result.truth)) {
    throw SimulationError("simulation: configured truth does not match the frame's enumerated truth");
  }
  const Poststrata strata = Poststrata::from_frame(frame);
  const std::size_t D = config.designs.size();
  const auto K = static_cast<std::size_t>(config.replicates);
  result.replicates.assign(D, std::vector<ReplicateResult>(K));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= D * K || failed.load()) return;
      const std::size_t d = job / K;
      const std::size_t k = job % K;
      try {
        result.replicates[d][k] = run_replicate(frame, strata, config.designs[d],
                                                replicate_seed(config.master_seed, d, static_cast<std::int64_t>(k)));
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t d = 0; d < D; ++d) {
    for (EstimatorId id : config.estimators) {
      const auto slot = static_cast<std::size_t>(id);
      std::vector<ReplicateEstimate> stream;
      stream.reserve(K);
      for (const auto& rep : result.replicates[d]) stream.push_back(rep.estimates[slot]);
      auto s = summarize(stream, truth_for(result.truth, target_of(id)), config.z);
      s.estimator = id;
      s.design_index = d;
      s.mode = config.designs[d].mode;
      s.intensity = config.designs[d].plot_intensity;
      s.strips_sampled = config.designs[d].strips_sampled;
      result.summaries.push_back(s);
    }
  }
  return result;
}

/// Plots needed by the less precise estimator to match the more precise one:
/// the variance ratio 1 / (SD ratio)^2.
inline double plot_multiplier(double sd_ratio) { return 1.0 / (sd_ratio * sd_ratio); }

struct EfficiencyRow {
  EstimatorId estimator = EstimatorId::kRatioTotal;
  EstimatorId baseline = EstimatorId::kSrsPsTotal;
  std::size_t design_index = 0;
  double sd_ratio = 1.0;     // sd(estimator) / sd(baseline)
  double multiplier = 1.0;   // plot_multiplier(sd_ratio)
};

/// Within each design, every estimator against the SRS,PS estimator of the
/// same target.
inline std::vector<EfficiencyRow> compare_designs(std::span<const SimulationSummary> summaries) {
  std::vector<EfficiencyRow> rows;
  for (const auto& s : summaries) {
    for (const auto& b : summaries) {
      if (b.design_index != s.design_index || target_of(b.estimator) != target_of(s.estimator)) continue;
      if (short_label(b.estimator) != std::string_view("SRS,PS") || b.estimator == s.estimator) continue;
      if (b.truth != s.truth) throw SimulationError("compare_designs: summaries disagree on the truth");
      EfficiencyRow r;
      r.estimator = s.estimator;
      r.baseline = b.estimator;
      r.design_index = s.design_index;
      r.sd_ratio = s.sd / b.sd;
      r.multiplier = plot_multiplier(r.sd_ratio);
      rows.push_back(r);
    }
  }
  return rows;
}

/// Pairwise comparison of two summaries of the same quantity.
inline EfficiencyRow compare(const SimulationSummary& a, const SimulationSummary& b) {
  if (a.truth != b.truth) throw SimulationError("compare_designs: summaries disagree on the truth");
  EfficiencyRow r;
  r.estimator = a.estimator;
  r.baseline = b.estimator;
  r.design_index = a.design_index;
  r.sd_ratio = a.sd / b.sd;
  r.multiplier = plot_multiplier(r.sd_ratio);
  return r;
}

/// Per-replicate audit log: one line per (design, replicate, estimator).
inline void write_replicate_log(const SimulationResult& result, const SimConfig& config, std::ostream& out) {
  out << "design,replicate,seed,estimator,value,variance,se,flags,error\n";
  for (std::size_t d = 0; d < result.replicates.size(); ++d) {
    for (std::size_t k = 0; k < result.replicates[d].size(); ++k) {
      const auto& rep = result.replicates[d][k];
      for (EstimatorId id : config.estimators) {
        const auto& e = rep.estimates[static_cast<std::size_t>(id)];
        out << d << ',' << k << ',' << rep.seed << ',' << to_string(id) << ',';
        if (e.has_value) {
          out << text::format_double(e.estimate.value) << ',' << text::format_double(e.estimate.variance) << ','
              << text::format_double(e.estimate.se()) << ',' << describe_flags(e.estimate.flags) << ',';
        } else {
          out << ",,,error,";
        }
        std::string msg = e.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        out << msg << '\n';
      }
    }
  }
}

}  // namespace stripsurvey
