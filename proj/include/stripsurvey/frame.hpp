#pragma once

// Finite-population data model: grid cells grouped into strips (first-stage
// units) and map strata, plus full-enumeration truth.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stripsurvey {

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellRecord {
  std::int64_t cell_id = 0;
  std::int32_t strip_id = 0;
  std::int32_t stratum_id = 0;
  double lidar_height = 0.0;       // m
  double biomass_density = 0.0;    // Mg/ha, zero off-domain
  double domain_proportion = 0.0;  // fraction of the cell inside the domain
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const CellRecord&, const CellRecord&) = default;
};

/// Immutable population of cells. Counts are derived from the cells at
/// construction and every invariant is checked there.
class PopulationFrame {
 public:
  PopulationFrame() = default;

  PopulationFrame(std::vector<CellRecord> cells, int strips, int strata, double cell_area_ha)
      : cells_(std::move(cells)), strips_(strips), strata_(strata), cell_area_(cell_area_ha) {
    if (strips_ < 1) throw FrameError("frame: strip count must be positive");
    if (strata_ < 1) throw FrameError("frame: stratum count must be positive");
    if (!(cell_area_ > 0.0)) throw FrameError("frame: cell area must be positive");
    if (cells_.empty()) throw FrameError("frame: no cells");

    strip_sizes_.assign(static_cast<std::size_t>(strips_), 0);
    stratum_sizes_.assign(static_cast<std::size_t>(strata_), 0);
    strip_stratum_sizes_.assign(static_cast<std::size_t>(strips_) * strata_, 0);
    strip_cells_.assign(static_cast<std::size_t>(strips_), {});

    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const CellRecord& c = cells_[k];
      check_cell(c);
      ++strip_sizes_[c.strip_id];
      ++stratum_sizes_[c.stratum_id];
      ++strip_stratum_sizes_[static_cast<std::size_t>(c.strip_id) * strata_ + c.stratum_id];
      strip_cells_[c.strip_id].push_back(k);
    }
    for (int i = 0; i < strips_; ++i) {
      if (strip_sizes_[i] == 0) {
        throw FrameError("frame: strip " + std::to_string(i) + " has no cells");
      }
      auto& idx = strip_cells_[i];
      std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
        const CellRecord& ca = cells_[a];
        const CellRecord& cb = cells_[b];
        if (ca.y_km != cb.y_km) return ca.y_km < cb.y_km;
        return ca.x_km < cb.x_km;
      });
    }
  }

  const std::vector<CellRecord>& cells() const noexcept { return cells_; }
  const CellRecord& cell(std::size_t k) const { return cells_.at(k); }

  int strip_count() const noexcept { return strips_; }     // M
  int stratum_count() const noexcept { return strata_; }   // H
  double cell_area() const noexcept { return cell_area_; }  // a_cell, ha
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(cells_.size()); }  // N
  double total_area() const noexcept { return static_cast<double>(size()) * cell_area_; }  // A_T

  std::int64_t strip_size(int strip) const { return strip_sizes_.at(strip); }
  std::int64_t stratum_size(int stratum) const { return stratum_sizes_.at(stratum); }
  std::int64_t strip_stratum_size(int strip, int stratum) const {
    return strip_stratum_sizes_.at(static_cast<std::size_t>(strip) * strata_ + stratum);
  }
  const std::vector<std::int64_t>& strip_sizes() const noexcept { return strip_sizes_; }
  const std::vector<std::int64_t>& stratum_sizes() const noexcept { return stratum_sizes_; }

  double stratum_weight(int stratum) const {
    return static_cast<double>(stratum_size(stratum)) / static_cast<double>(size());
  }

  /// Cell indices of a strip ordered along the strip axis (y, then x).
  const std::vector<std::size_t>& strip_cells(int strip) const { return strip_cells_.at(strip); }

  friend bool operator==(const PopulationFrame& a, const PopulationFrame& b) {
    return a.strips_ == b.strips_ && a.strata_ == b.strata_ && a.cell_area_ == b.cell_area_ &&
           a.cells_ == b.cells_;
  }

 private:
  void check_cell(const CellRecord& c) const {
    const auto where = [&] { return "frame: cell " + std::to_string(c.cell_id) + ": "; };
    if (c.strip_id < 0 || c.strip_id >= strips_) throw FrameError(where() + "strip_id out of range");
    if (c.stratum_id < 0 || c.stratum_id >= strata_) {
      throw FrameError(where() + "stratum_id out of range");
    }
    if (!(c.domain_proportion >= 0.0 && c.domain_proportion <= 1.0)) {
      throw FrameError(where() + "domain_proportion outside [0,1]");
    }
    if (!(c.biomass_density >= 0.0)) throw FrameError(where() + "negative biomass_density");
    if (c.domain_proportion == 0.0 && c.biomass_density != 0.0) {
      throw FrameError(where() + "biomass_density must be 0 outside the domain");
    }
    if (!(c.lidar_height >= 0.0)) throw FrameError(where() + "negative lidar_height");
  }

  std::vector<CellRecord> cells_;
  int strips_ = 0;
  int strata_ = 0;
  double cell_area_ = 0.0;
  std::vector<std::int64_t> strip_sizes_;
  std::vector<std::int64_t> stratum_sizes_;
  std::vector<std::int64_t> strip_stratum_sizes_;
  std::vector<std::vector<std::size_t>> strip_cells_;
};

/// Population parameters: total (Mg), domain area (ha), density (Mg/ha).
struct TruthValues {
  double total = 0.0;
  double area = 0.0;
  double density = 0.0;

  friend bool operator==(const TruthValues&, const TruthValues&) = default;
};

inline TruthValues enumerate_truth(const PopulationFrame& frame) {
  double sum_y = 0.0;
  double sum_a = 0.0;
  for (const auto& c : frame.cells()) {
    sum_y += c.biomass_density;
    sum_a += c.domain_proportion;
  }
  TruthValues t;
  t.total = frame.cell_area() * sum_y;
  t.area = frame.cell_area() * sum_a;
  if (!(t.area > 0.0)) throw FrameError("truth: domain area is zero, density undefined");
  t.density = t.total / t.area;
  return t;
}

}  // namespace stripsurvey
