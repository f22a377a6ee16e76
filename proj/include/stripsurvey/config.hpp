#pragma once

// JSON configuration documents for population specs and simulation studies.
// Unknown keys are rejected everywhere; see configs/SCHEMA.md.

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "design.hpp"
#include "marginal.hpp"
#include "population.hpp"
#include "simlab.hpp"

namespace stripsurvey {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using Json = nlohmann::json;

inline void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

inline const Json& require(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  return j.at(key);
}

/// Number, or one of the strings "inf" / "-inf".
inline double number(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(where + ": expected a number");
}

inline int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

inline std::uint64_t seed_value(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(where + ": expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

template <class T>
void read(const Json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  const std::string w = where + "." + key;
  if constexpr (std::is_same_v<T, int>) out = integer(j.at(key), w);
  else if constexpr (std::is_same_v<T, bool>) {
    if (!j.at(key).is_boolean()) throw ConfigError(w + ": expected true or false");
    out = j.at(key).get<bool>();
  } else out = number(j.at(key), w);
}

inline Marginal parse_marginal(const Json& j, const std::string& where) {
  const std::string family = [&] {
    const auto& f = require(j, where, "family");
    if (!f.is_string()) throw ConfigError(where + ".family: expected a string");
    return f.get<std::string>();
  }();
  const auto num = [&](const char* key) { return number(require(j, where, key), where + "." + key); };
  if (family == "ordinal") {
    allow_keys(j, where, {"family", "probabilities"});
    const auto& p = require(j, where, "probabilities");
    if (!p.is_array()) throw ConfigError(where + ".probabilities: expected an array");
    std::vector<double> probs;
    for (const auto& v : p) probs.push_back(number(v, where + ".probabilities"));
    return Marginal::ordinal(probs);
  }
  if (family == "constant") {
    allow_keys(j, where, {"family", "value"});
    return Marginal::constant(num("value"));
  }
  if (family == "lognormal") {
    allow_keys(j, where, {"family", "meanlog", "sdlog"});
    return Marginal::lognormal(num("meanlog"), num("sdlog"));
  }
  if (family == "gamma") {
    allow_keys(j, where, {"family", "shape", "scale"});
    return Marginal::gamma(num("shape"), num("scale"));
  }
  if (family == "zero_inflated_gamma") {
    allow_keys(j, where, {"family", "zero_prob", "shape", "scale"});
    return Marginal::zero_inflated_gamma(num("zero_prob"), num("shape"), num("scale"));
  }
  if (family == "beta_inflated_one") {
    allow_keys(j, where, {"family", "one_prob", "alpha", "beta"});
    return Marginal::beta_inflated_one(num("one_prob"), num("alpha"), num("beta"));
  }
  throw ConfigError(where + ".family: unknown family \"" + family + "\"");
}

inline Json marginal_json(const Marginal& m) {
  switch (m.family) {
    case MarginalFamily::kOrdinal: return {{"family", "ordinal"}, {"probabilities", m.probabilities}};
    case MarginalFamily::kConstant: return {{"family", "constant"}, {"value", m.value}};
    case MarginalFamily::kLognormal: return {{"family", "lognormal"}, {"meanlog", m.meanlog}, {"sdlog", m.sdlog}};
    case MarginalFamily::kGamma: return {{"family", "gamma"}, {"shape", m.shape}, {"scale", m.scale}};
    case MarginalFamily::kZeroInflatedGamma:
      return {{"family", "zero_inflated_gamma"}, {"zero_prob", m.zero_prob}, {"shape", m.shape}, {"scale", m.scale}};
    case MarginalFamily::kBetaInflatedOne:
      return {{"family", "beta_inflated_one"}, {"one_prob", m.one_prob}, {"alpha", m.alpha}, {"beta", m.beta}};
  }
  return {};
}

inline Json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace detail

inline CopulaSpec parse_copula_spec(const nlohmann::json& j) {
  using detail::allow_keys;
  const std::string w = "spec";
  allow_keys(j, w, {"correlation", "match_correlation", "marginals", "domain_link", "pool_size", "grid", "cover"});
  CopulaSpec spec;

  const auto& corr = detail::require(j, w, "correlation");
  if (!corr.is_array() || corr.size() != 4) throw ConfigError("spec.correlation: expected a 4x4 array");
  for (int r = 0; r < 4; ++r) {
    if (!corr[r].is_array() || corr[r].size() != 4) throw ConfigError("spec.correlation: expected a 4x4 array");
    for (int c = 0; c < 4; ++c) spec.correlation[r][c] = detail::number(corr[r][c], "spec.correlation");
  }
  detail::read(j, "match_correlation", w, spec.match_correlation);

  const auto& marg = detail::require(j, w, "marginals");
  allow_keys(marg, "spec.marginals", {"stratum", "lidar_height", "biomass_density", "domain_fraction"});
  spec.stratum = detail::parse_marginal(detail::require(marg, "spec.marginals", "stratum"), "spec.marginals.stratum");
  spec.height =
      detail::parse_marginal(detail::require(marg, "spec.marginals", "lidar_height"), "spec.marginals.lidar_height");
  spec.biomass = detail::parse_marginal(detail::require(marg, "spec.marginals", "biomass_density"),
                                        "spec.marginals.biomass_density");
  spec.domain_fraction = detail::parse_marginal(detail::require(marg, "spec.marginals", "domain_fraction"),
                                                "spec.marginals.domain_fraction");

  const auto& link = detail::require(j, w, "domain_link");
  allow_keys(link, "spec.domain_link", {"intercept", "slope"});
  spec.domain_link.intercept = detail::number(detail::require(link, "spec.domain_link", "intercept"),
                                              "spec.domain_link.intercept");
  spec.domain_link.slope =
      detail::number(detail::require(link, "spec.domain_link", "slope"), "spec.domain_link.slope");

  detail::read(j, "pool_size", w, spec.pool_size);

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    const std::string gw = "spec.grid";
    allow_keys(g, gw, {"strips", "strip_width_cells", "rows", "cell_spacing_km", "cell_area_ha", "shape"});
    detail::read(g, "strips", gw, spec.grid.strips);
    detail::read(g, "strip_width_cells", gw, spec.grid.strip_width_cells);
    detail::read(g, "rows", gw, spec.grid.rows);
    detail::read(g, "cell_spacing_km", gw, spec.grid.cell_spacing_km);
    detail::read(g, "cell_area_ha", gw, spec.grid.cell_area_ha);
    if (g.contains("shape")) {
      const auto& s = g.at("shape");
      if (s == "ellipse") spec.grid.shape = GridShape::kEllipse;
      else if (s == "rectangle") spec.grid.shape = GridShape::kRectangle;
      else throw ConfigError("spec.grid.shape: expected \"ellipse\" or \"rectangle\"");
    }
  }
  if (j.contains("cover")) {
    const auto& c = j.at("cover");
    const std::string cw = "spec.cover";
    allow_keys(c, cw, {"components", "min_wavelength_km", "max_wavelength_km", "noise_weight", "proxy_noise"});
    detail::read(c, "components", cw, spec.cover.components);
    detail::read(c, "min_wavelength_km", cw, spec.cover.min_wavelength_km);
    detail::read(c, "max_wavelength_km", cw, spec.cover.max_wavelength_km);
    detail::read(c, "noise_weight", cw, spec.cover.noise_weight);
    detail::read(c, "proxy_noise", cw, spec.cover.proxy_noise);
  }
  return spec;
}

inline nlohmann::json copula_spec_json(const CopulaSpec& spec) {
  nlohmann::json corr = nlohmann::json::array();
  for (const auto& row : spec.correlation) corr.push_back(row);
  return {
      {"correlation", corr},
      {"match_correlation", spec.match_correlation},
      {"marginals",
       {{"stratum", detail::marginal_json(spec.stratum)},
        {"lidar_height", detail::marginal_json(spec.height)},
        {"biomass_density", detail::marginal_json(spec.biomass)},
        {"domain_fraction", detail::marginal_json(spec.domain_fraction)}}},
      {"domain_link",
       {{"intercept", detail::number_json(spec.domain_link.intercept)},
        {"slope", detail::number_json(spec.domain_link.slope)}}},
      {"pool_size", spec.pool_size},
      {"grid",
       {{"strips", spec.grid.strips},
        {"strip_width_cells", spec.grid.strip_width_cells},
        {"rows", spec.grid.rows},
        {"cell_spacing_km", spec.grid.cell_spacing_km},
        {"cell_area_ha", spec.grid.cell_area_ha},
        {"shape", spec.grid.shape == GridShape::kEllipse ? "ellipse" : "rectangle"}}},
      {"cover",
       {{"components", spec.cover.components},
        {"min_wavelength_km", spec.cover.min_wavelength_km},
        {"max_wavelength_km", spec.cover.max_wavelength_km},
        {"noise_weight", spec.cover.noise_weight},
        {"proxy_noise", spec.cover.proxy_noise}}},
  };
}

inline CopulaSpec load_copula_spec(const std::string& path) { return parse_copula_spec(detail::load_json(path)); }

inline DesignMode parse_design_mode(const nlohmann::json& j, const std::string& where) {
  if (j == "SRS") return DesignMode::kSrs;
  if (j == "SYSTEMATIC") return DesignMode::kSystematic;
  throw ConfigError(where + ": expected \"SRS\" or \"SYSTEMATIC\"");
}

/// Simulation document. `designs` lists explicit designs; alternatively
/// `modes` x `intensities` expands to a grid sharing `strips_sampled`.
inline SimConfig parse_sim_config(const nlohmann::json& j) {
  using detail::allow_keys;
  const std::string w = "simulation";
  allow_keys(j, w, {"replicates", "master_seed", "z", "estimators", "designs", "modes", "intensities",
                    "strips_sampled", "min_plots_per_strip", "truth"});
  SimConfig cfg;
  detail::read(j, "replicates", w, cfg.replicates);
  if (j.contains("master_seed")) cfg.master_seed = detail::seed_value(j.at("master_seed"), "simulation.master_seed");
  detail::read(j, "z", w, cfg.z);

  if (j.contains("estimators")) {
    const auto& e = j.at("estimators");
    if (!e.is_array()) throw ConfigError("simulation.estimators: expected an array of names");
    cfg.estimators.clear();
    for (const auto& name : e) {
      if (!name.is_string()) throw ConfigError("simulation.estimators: expected an array of names");
      const auto id = parse_estimator(name.get<std::string>());
      if (!id) throw ConfigError("simulation.estimators: unknown estimator \"" + name.get<std::string>() + "\"");
      cfg.estimators.push_back(*id);
    }
  }

  const bool explicit_designs = j.contains("designs");
  const bool grid = j.contains("modes") || j.contains("intensities");
  if (explicit_designs == grid) {
    throw ConfigError("simulation: give either \"designs\" or \"modes\" with \"intensities\"");
  }
  int default_m = 40;
  int default_min = 2;
  detail::read(j, "strips_sampled", w, default_m);
  detail::read(j, "min_plots_per_strip", w, default_min);
  if (explicit_designs) {
    const auto& ds = j.at("designs");
    if (!ds.is_array()) throw ConfigError("simulation.designs: expected an array");
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const std::string dw = "simulation.designs[" + std::to_string(k) + "]";
      allow_keys(ds[k], dw, {"mode", "strips_sampled", "plot_intensity", "min_plots_per_strip"});
      DesignConfig d;
      d.mode = parse_design_mode(detail::require(ds[k], dw, "mode"), dw + ".mode");
      d.strips_sampled = default_m;
      d.min_plots_per_strip = default_min;
      detail::read(ds[k], "strips_sampled", dw, d.strips_sampled);
      detail::read(ds[k], "min_plots_per_strip", dw, d.min_plots_per_strip);
      d.plot_intensity = detail::number(detail::require(ds[k], dw, "plot_intensity"), dw + ".plot_intensity");
      cfg.designs.push_back(d);
    }
  } else {
    const auto& modes = detail::require(j, w, "modes");
    const auto& fs = detail::require(j, w, "intensities");
    if (!modes.is_array() || !fs.is_array()) throw ConfigError("simulation: modes and intensities must be arrays");
    for (const auto& mode : modes) {
      for (const auto& f : fs) {
        DesignConfig d;
        d.mode = parse_design_mode(mode, "simulation.modes");
        d.strips_sampled = default_m;
        d.min_plots_per_strip = default_min;
        d.plot_intensity = detail::number(f, "simulation.intensities");
        cfg.designs.push_back(d);
      }
    }
  }
  for (std::size_t k = 0; k < cfg.designs.size(); ++k) {
    const auto& d = cfg.designs[k];
    if (d.strips_sampled < 2) throw ConfigError("simulation.designs[" + std::to_string(k) + "]: need m >= 2");
    if (!(d.plot_intensity > 0.0 && d.plot_intensity <= 1.0)) {
      throw ConfigError("simulation.designs[" + std::to_string(k) + "]: plot_intensity must lie in (0, 1]");
    }
    if (d.min_plots_per_strip < 2) {
      throw ConfigError("simulation.designs[" + std::to_string(k) + "]: min_plots_per_strip must be >= 2");
    }
  }

  if (j.contains("truth")) {
    const auto& t = j.at("truth");
    allow_keys(t, "simulation.truth", {"total", "area", "density"});
    TruthValues tv;
    tv.total = detail::number(detail::require(t, "simulation.truth", "total"), "simulation.truth.total");
    tv.area = detail::number(detail::require(t, "simulation.truth", "area"), "simulation.truth.area");
    tv.density = detail::number(detail::require(t, "simulation.truth", "density"), "simulation.truth.density");
    cfg.truth = tv;
  }
  try {
    cfg.validate();
  } catch (const SimulationError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline SimConfig load_sim_config(const std::string& path) { return parse_sim_config(detail::load_json(path)); }

}  // namespace stripsurvey
