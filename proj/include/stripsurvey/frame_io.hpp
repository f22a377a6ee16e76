#pragma once

// Plain-text frame files.
//
//   # stripsurvey-frame 1
//   # strips <M>
//   # strata <H>
//   # cell_area_ha <a_cell>
//   # strip <i> <N_i> <N_0i> ... <N_(H-1)i>      (one line per strip)
//   cell_id,strip_id,stratum_id,lidar_height,biomass_density,domain_proportion,x_km,y_km
//   <one row per cell>
//
// Doubles are written in shortest round-trip form, so load(save(f)) == f.

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "frame.hpp"
#include "text.hpp"

namespace stripsurvey {

inline constexpr std::string_view kFrameColumns =
    "cell_id,strip_id,stratum_id,lidar_height,biomass_density,domain_proportion,x_km,y_km";

inline void write_frame(const PopulationFrame& frame, std::ostream& out) {
  using text::format_double;
  out << "# stripsurvey-frame 1\n";
  out << "# strips " << frame.strip_count() << '\n';
  out << "# strata " << frame.stratum_count() << '\n';
  out << "# cell_area_ha " << format_double(frame.cell_area()) << '\n';
  for (int i = 0; i < frame.strip_count(); ++i) {
    out << "# strip " << i << ' ' << frame.strip_size(i);
    for (int h = 0; h < frame.stratum_count(); ++h) out << ' ' << frame.strip_stratum_size(i, h);
    out << '\n';
  }
  out << kFrameColumns << '\n';
  for (const auto& c : frame.cells()) {
    out << c.cell_id << ',' << c.strip_id << ',' << c.stratum_id << ','
        << format_double(c.lidar_height) << ',' << format_double(c.biomass_density) << ','
        << format_double(c.domain_proportion) << ',' << format_double(c.x_km) << ','
        << format_double(c.y_km) << '\n';
  }
}

inline PopulationFrame read_frame(std::istream& in) {
  int strips = -1;
  int strata = -1;
  double cell_area = -1.0;
  struct DeclaredStrip {
    int id;
    std::int64_t size;
    std::vector<std::int64_t> by_stratum;
  };
  std::vector<DeclaredStrip> declared;
  std::vector<CellRecord> cells;
  bool seen_header = false;

  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) -> FrameError {
    return FrameError("frame line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = text::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (seen_header) throw fail("metadata after column header");
      auto fields = text::split(text::trim(view.substr(1)), ' ');
      if (fields.empty()) continue;
      const std::string_view key = fields[0];
      if (key == "stripsurvey-frame") {
        if (fields.size() != 2 || fields[1] != "1") throw fail("unsupported frame version");
      } else if (key == "strips" || key == "strata") {
        if (fields.size() != 2) throw fail("malformed '" + std::string(key) + "' line");
        auto v = text::parse_int(fields[1]);
        if (!v || *v < 1) throw fail("invalid " + std::string(key) + " count");
        (key == "strips" ? strips : strata) = static_cast<int>(*v);
      } else if (key == "cell_area_ha") {
        auto v = fields.size() == 2 ? text::parse_double(fields[1]) : std::nullopt;
        if (!v || !(*v > 0.0)) throw fail("invalid cell_area_ha");
        cell_area = *v;
      } else if (key == "strip") {
        if (strata < 1) throw fail("strip line before strata count");
        if (fields.size() != static_cast<std::size_t>(3 + strata)) {
          throw fail("strip line needs id, size and one count per stratum");
        }
        DeclaredStrip d{};
        auto id = text::parse_int(fields[1]);
        auto size = text::parse_int(fields[2]);
        if (!id || !size) throw fail("malformed strip line");
        d.id = static_cast<int>(*id);
        d.size = *size;
        for (int h = 0; h < strata; ++h) {
          auto v = text::parse_int(fields[3 + h]);
          if (!v) throw fail("malformed strip stratum count");
          d.by_stratum.push_back(*v);
        }
        declared.push_back(std::move(d));
      } else {
        throw fail("unknown metadata key '" + std::string(key) + "'");
      }
      continue;
    }
    if (!seen_header) {
      if (view != kFrameColumns) throw fail("expected column header '" + std::string(kFrameColumns) + "'");
      seen_header = true;
      continue;
    }
    auto f = text::split(view, ',');
    if (f.size() != 8) throw fail("expected 8 columns, found " + std::to_string(f.size()));
    CellRecord c;
    auto id = text::parse_int(f[0]);
    auto strip = text::parse_int(f[1]);
    auto stratum = text::parse_int(f[2]);
    auto h = text::parse_double(f[3]);
    auto y = text::parse_double(f[4]);
    auto a = text::parse_double(f[5]);
    auto x_km = text::parse_double(f[6]);
    auto y_km = text::parse_double(f[7]);
    if (!id || !strip || !stratum || !h || !y || !a || !x_km || !y_km) throw fail("unparseable field");
    c.cell_id = *id;
    c.strip_id = static_cast<std::int32_t>(*strip);
    c.stratum_id = static_cast<std::int32_t>(*stratum);
    c.lidar_height = *h;
    c.biomass_density = *y;
    c.domain_proportion = *a;
    c.x_km = *x_km;
    c.y_km = *y_km;
    cells.push_back(c);
  }
  if (strips < 1 || strata < 1 || cell_area <= 0.0) {
    throw FrameError("frame: missing strips/strata/cell_area_ha metadata");
  }
  if (!seen_header) throw FrameError("frame: missing column header");

  for (const auto& d : declared) {
    std::int64_t sum = 0;
    for (auto v : d.by_stratum) sum += v;
    if (sum != d.size) {
      throw FrameError("frame: strip " + std::to_string(d.id) +
                       ": stratum counts sum to " + std::to_string(sum) +
                       " but strip size is " + std::to_string(d.size));
    }
  }

  PopulationFrame frame(std::move(cells), strips, strata, cell_area);

  if (!declared.empty() && declared.size() != static_cast<std::size_t>(strips)) {
    throw FrameError("frame: expected one strip line per strip");
  }
  for (const auto& d : declared) {
    if (d.id < 0 || d.id >= strips) throw FrameError("frame: strip line id out of range");
    if (frame.strip_size(d.id) != d.size) {
      throw FrameError("frame: strip " + std::to_string(d.id) + ": declared " +
                       std::to_string(d.size) + " cells, found " +
                       std::to_string(frame.strip_size(d.id)));
    }
    for (int h = 0; h < strata; ++h) {
      if (frame.strip_stratum_size(d.id, h) != d.by_stratum[h]) {
        throw FrameError("frame: strip " + std::to_string(d.id) + ": stratum " +
                         std::to_string(h) + " count mismatch");
      }
    }
  }
  return frame;
}

inline void save_frame(const PopulationFrame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FrameError("cannot open '" + path + "' for writing");
  write_frame(frame, out);
  if (!out) throw FrameError("write to '" + path + "' failed");
}

inline PopulationFrame load_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FrameError("cannot open frame file '" + path + "'");
  return read_frame(in);
}

}  // namespace stripsurvey
