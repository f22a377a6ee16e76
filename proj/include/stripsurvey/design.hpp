#pragma once

// Two-stage strip sampling: strips (first stage) then field-plot cells
// within each selected strip (second stage). The lidar stage covers every
// cell of a selected strip.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "frame.hpp"
#include "rng.hpp"

namespace stripsurvey {

class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DesignMode { kSrs, kSystematic };

inline const char* to_string(DesignMode mode) {
  return mode == DesignMode::kSrs ? "SRS" : "SYSTEMATIC";
}

struct DesignConfig {
  DesignMode mode = DesignMode::kSrs;
  int strips_sampled = 2;          // m
  double plot_intensity = 0.015;   // field plots per remote-sensing cell
  int min_plots_per_strip = 2;
  std::uint64_t seed = 0;

  void validate(int population_strips) const {
    if (strips_sampled < 2 || strips_sampled > population_strips) {
      throw DesignError("design: need 2 <= m <= M (m = " + std::to_string(strips_sampled) +
                        ", M = " + std::to_string(population_strips) + ")");
    }
    if (!(plot_intensity > 0.0 && plot_intensity <= 1.0)) {
      throw DesignError("design: plot intensity must lie in (0, 1]");
    }
    if (min_plots_per_strip < 2) throw DesignError("design: min_plots_per_strip must be at least 2");
  }
};

struct SampledStrip {
  int strip_id = 0;
  std::int64_t cells = 0;                       // N_i
  std::vector<std::int64_t> cells_by_stratum;   // N_hi
  std::vector<std::size_t> plots;               // S_i, frame cell indices
  std::vector<std::int64_t> plots_by_stratum;   // n_hi

  std::int64_t plot_count() const { return static_cast<std::int64_t>(plots.size()); }  // n_i
};

struct TwoStageSample {
  int population_strips = 0;     // M
  std::int64_t population_cells = 0;  // N
  std::vector<SampledStrip> strips;   // S_1, ascending strip id

  std::int64_t plot_count() const {
    std::int64_t n = 0;
    for (const auto& s : strips) n += s.plot_count();
    return n;
  }
};

/// n_i = max(min_plots, round(f * N_i)), never more than N_i.
inline std::int64_t plots_for_strip(std::int64_t strip_cells, double intensity, int min_plots) {
  const auto target = static_cast<std::int64_t>(std::llround(intensity * static_cast<double>(strip_cells)));
  return std::min(strip_cells, std::max<std::int64_t>(min_plots, target));
}

namespace detail {

/// k distinct values of [0, n), by partial Fisher-Yates, returned sorted.
inline std::vector<std::size_t> choose_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(pool[j], pool[pick]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline SampledStrip start_strip(const PopulationFrame& frame, int strip, const DesignConfig& cfg,
                                std::int64_t& plots_wanted) {
  SampledStrip s;
  s.strip_id = strip;
  s.cells = frame.strip_size(strip);
  if (s.cells < cfg.min_plots_per_strip) {
    throw DesignError("design: strip " + std::to_string(strip) + " has " + std::to_string(s.cells) +
                      " cells, fewer than min_plots_per_strip");
  }
  s.cells_by_stratum.resize(static_cast<std::size_t>(frame.stratum_count()));
  for (int h = 0; h < frame.stratum_count(); ++h) s.cells_by_stratum[h] = frame.strip_stratum_size(strip, h);
  plots_wanted = plots_for_strip(s.cells, cfg.plot_intensity, cfg.min_plots_per_strip);
  return s;
}

inline void finish_strip(const PopulationFrame& frame, SampledStrip& s) {
  s.plots_by_stratum.assign(static_cast<std::size_t>(frame.stratum_count()), 0);
  for (std::size_t k : s.plots) ++s.plots_by_stratum[frame.cell(k).stratum_id];
}

}  // namespace detail

inline TwoStageSample draw_srs(const PopulationFrame& frame, const DesignConfig& cfg, Rng& rng) {
  cfg.validate(frame.strip_count());
  TwoStageSample sample;
  sample.population_strips = frame.strip_count();
  sample.population_cells = frame.size();
  const auto chosen = detail::choose_without_replacement(
      static_cast<std::size_t>(frame.strip_count()), static_cast<std::size_t>(cfg.strips_sampled), rng);
  for (std::size_t strip : chosen) {
    std::int64_t n = 0;
    SampledStrip s = detail::start_strip(frame, static_cast<int>(strip), cfg, n);
    const auto& cells = frame.strip_cells(static_cast<int>(strip));
    for (std::size_t pos : detail::choose_without_replacement(cells.size(), static_cast<std::size_t>(n), rng)) {
      s.plots.push_back(cells[pos]);
    }
    detail::finish_strip(frame, s);
    sample.strips.push_back(std::move(s));
  }
  return sample;
}

/// Every floor(M/m)-th strip from a uniform start in [0, step); within each
/// strip every floor(N_i/n_i)-th cell along the strip axis from a uniform
/// start in [0, step).
inline TwoStageSample draw_systematic(const PopulationFrame& frame, const DesignConfig& cfg, Rng& rng) {
  cfg.validate(frame.strip_count());
  TwoStageSample sample;
  sample.population_strips = frame.strip_count();
  sample.population_cells = frame.size();
  const int strip_step = frame.strip_count() / cfg.strips_sampled;
  const int strip_start = static_cast<int>(rng.below(static_cast<std::uint64_t>(strip_step)));
  for (int j = 0; j < cfg.strips_sampled; ++j) {
    const int strip = strip_start + j * strip_step;
    std::int64_t n = 0;
    SampledStrip s = detail::start_strip(frame, strip, cfg, n);
    const auto& cells = frame.strip_cells(strip);
    const std::int64_t step = s.cells / n;
    const auto start = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(step)));
    for (std::int64_t k = 0; k < n; ++k) s.plots.push_back(cells[static_cast<std::size_t>(start + k * step)]);
    detail::finish_strip(frame, s);
    sample.strips.push_back(std::move(s));
  }
  return sample;
}

inline TwoStageSample draw_sample(const PopulationFrame& frame, const DesignConfig& cfg, Rng& rng) {
  return cfg.mode == DesignMode::kSrs ? draw_srs(frame, cfg, rng) : draw_systematic(frame, cfg, rng);
}

}  // namespace stripsurvey
