#pragma once

// Summary CSV (full precision), Markdown tables in the layout of the
// published simulation tables, and run manifests.

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simlab.hpp"
#include "text.hpp"

namespace stripsurvey {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSummaryColumns =
    "estimator,design,mode,strips_sampled,intensity,truth,replicates,point_count,used,flagged,small_n,"
    "mean,sd,bias_pct,mean_se,sd_se,se_bias_pct,coverage";

inline void write_summary_csv(const std::vector<SimulationSummary>& rows, std::ostream& out) {
  using text::format_double;
  out << kSummaryColumns << '\n';
  for (const auto& s : rows) {
    out << to_string(s.estimator) << ',' << s.design_index << ',' << to_string(s.mode) << ',' << s.strips_sampled
        << ',' << format_double(s.intensity) << ',' << format_double(s.truth) << ',' << s.replicates << ','
        << s.point_count << ',' << s.used << ',' << s.flagged << ',' << s.small_n << ',' << format_double(s.mean)
        << ',' << format_double(s.sd) << ',' << format_double(s.bias_pct) << ',' << format_double(s.mean_se) << ','
        << format_double(s.sd_se) << ',' << format_double(s.se_bias_pct) << ',' << format_double(s.coverage)
        << '\n';
  }
}

inline std::vector<SimulationSummary> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kSummaryColumns) {
    throw ReportError("summary: missing or unexpected header");
  }
  std::vector<SimulationSummary> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    const auto fail = [&](const std::string& what) {
      return ReportError("summary: line " + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 18) throw fail("expected 18 fields");
    const auto num = [&](std::size_t k) {
      const auto v = text::parse_double(f[k]);
      if (!v) throw fail("bad number \"" + std::string(f[k]) + "\"");
      return *v;
    };
    const auto integer = [&](std::size_t k) {
      const auto v = text::parse_int(f[k]);
      if (!v) throw fail("bad integer \"" + std::string(f[k]) + "\"");
      return *v;
    };
    SimulationSummary s;
    const auto id = parse_estimator(f[0]);
    if (!id) throw fail("unknown estimator \"" + std::string(f[0]) + "\"");
    s.estimator = *id;
    s.design_index = static_cast<std::size_t>(integer(1));
    if (f[2] == "SRS") s.mode = DesignMode::kSrs;
    else if (f[2] == "SYSTEMATIC") s.mode = DesignMode::kSystematic;
    else throw fail("unknown design mode");
    s.strips_sampled = static_cast<int>(integer(3));
    s.intensity = num(4);
    s.truth = num(5);
    s.replicates = integer(6);
    s.point_count = integer(7);
    s.used = integer(8);
    s.flagged = integer(9);
    s.small_n = integer(10);
    s.mean = num(11);
    s.sd = num(12);
    s.bias_pct = num(13);
    s.mean_se = num(14);
    s.sd_se = num(15);
    s.se_bias_pct = num(16);
    s.coverage = num(17);
    rows.push_back(s);
  }
  return rows;
}

/// Display unit and decimals for a target: totals in kt, areas in km^2,
/// densities in Mg/ha.
struct DisplayUnit {
  const char* name;
  double divisor;
  int decimals;
};

inline DisplayUnit display_unit(Target t) {
  switch (t) {
    case Target::kTotal: return {"kt", 1000.0, 1};
    case Target::kArea: return {"km^2", 100.0, 2};
    default: return {"Mg/ha", 1.0, 2};
  }
}

inline const char* target_title(Target t) {
  switch (t) {
    case Target::kTotal: return "Biomass";
    case Target::kArea: return "Area of domain";
    default: return "Average biomass in domain";
  }
}

/// One Markdown table per (design mode, target), rows grouped into
/// intensity blocks in the order they appear.
inline void write_markdown(const std::vector<SimulationSummary>& rows, std::ostream& out) {
  const DesignMode modes[] = {DesignMode::kSrs, DesignMode::kSystematic};
  const Target targets[] = {Target::kTotal, Target::kArea, Target::kDensity};
  bool first = true;
  for (DesignMode mode : modes) {
    for (Target target : targets) {
      std::vector<const SimulationSummary*> block;
      for (const auto& s : rows)
        if (s.mode == mode && target_of(s.estimator) == target) block.push_back(&s);
      if (block.empty()) continue;
      const auto unit = display_unit(target);
      const auto fmt = [&](double v) { return text::format_fixed(v / unit.divisor, unit.decimals); };
      if (!first) out << '\n';
      first = false;
      out << "## " << (mode == DesignMode::kSrs ? "Simple random sampling" : "Systematic sampling") << ", "
          << target_title(target) << " (" << unit.name << ")\n\n";
      out << "True value: " << fmt(block.front()->truth) << ' ' << unit.name << "\n\n";
      out << "| Estimator | Mean | St.Dev. | Bias(%) | SE Mean | SE St.Dev. | SE Bias(%) | 95% CI Cov. Prob. | "
             "Flagged |\n";
      out << "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
      std::vector<std::size_t> designs;
      for (const auto* s : block) {
        bool seen = false;
        for (std::size_t d : designs) seen = seen || d == s->design_index;
        if (!seen) designs.push_back(s->design_index);
      }
      for (std::size_t d : designs) {
        const SimulationSummary* head = nullptr;
        for (const auto* s : block)
          if (s->design_index == d && !head) head = s;
        out << "| **Plot sampling intensity: " << text::format_double(head->intensity) << "** (m = "
            << head->strips_sampled << ") | | | | | | | | |\n";
        for (const auto* s : block) {
          if (s->design_index != d) continue;
          out << "| " << short_label(s->estimator) << " | " << fmt(s->mean) << " | " << fmt(s->sd) << " | "
              << text::format_fixed(s->bias_pct, 3) << " | " << fmt(s->mean_se) << " | " << fmt(s->sd_se) << " | "
              << text::format_fixed(s->se_bias_pct, 1) << " | " << text::format_fixed(s->coverage, 3) << " | "
              << s->flagged << " |\n";
        }
      }
    }
  }
}

inline void write_efficiency_markdown(const std::vector<SimulationSummary>& rows, std::ostream& out) {
  const auto eff = compare_designs(rows);
  if (eff.empty()) return;
  out << "\n## Relative efficiency against SRS,PS\n\n";
  out << "| Design | Intensity | Target | Estimator | SD ratio | Plot multiplier |\n";
  out << "|---|---:|---|---|---:|---:|\n";
  for (const auto& r : eff) {
    const SimulationSummary* s = nullptr;
    for (const auto& row : rows)
      if (row.design_index == r.design_index && row.estimator == r.estimator) s = &row;
    out << "| " << to_string(s->mode) << " | " << text::format_double(s->intensity) << " | "
        << to_string(target_of(r.estimator)) << " | " << short_label(r.estimator) << " | "
        << text::format_fixed(r.sd_ratio, 3) << " | " << text::format_fixed(r.multiplier, 2) << " |\n";
  }
}

/// Key/value run manifest, one `key = value` per line in insertion order.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace stripsurvey
