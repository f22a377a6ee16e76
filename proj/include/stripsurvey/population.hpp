#pragma once

// Synthetic population generator.
//
// A pool of plot records is drawn from a Gaussian copula over
// (stratum, lidar height, biomass, domain fraction). Domain membership is
// then gated by a logistic link on height. A rectangular (or elliptical)
// grid of cells is laid out in strips of fixed width, a smooth random cover
// field is evaluated over it, and each cell takes the pool record whose
// cover proxy sits at the same quantile (nearest neighbour in rank space).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

#include "frame.hpp"
#include "marginal.hpp"
#include "rng.hpp"

namespace stripsurvey {

/// Copula coordinates, in correlation-matrix order.
enum CopulaVar : int { kStratumVar = 0, kHeightVar = 1, kBiomassVar = 2, kDomainVar = 3 };

using Correlation4 = std::array<std::array<double, 4>, 4>;

struct DomainLink {
  double intercept = 0.0;  // g0
  double slope = 0.0;      // g1, per metre of lidar height

  double probability(double height) const {
    const double eta = intercept + slope * height;
    return 1.0 / (1.0 + std::exp(-eta));
  }
};

enum class GridShape { kRectangle, kEllipse };

struct GridGeometry {
  int strips = 120;                 // M
  int strip_width_cells = 2;        // grid columns per strip
  int rows = 530;                   // cells along the strip axis
  double cell_spacing_km = 0.2;
  double cell_area_ha = 1.0 / 15.0;
  GridShape shape = GridShape::kEllipse;
};

struct CoverField {
  int components = 12;
  double min_wavelength_km = 8.0;
  double max_wavelength_km = 60.0;
  double noise_weight = 0.35;  // white-noise share of the field (0 = perfectly smooth)
  double proxy_noise = 0.5;    // noise on the pool's height-based cover proxy
};

struct CopulaSpec {
  Correlation4 correlation{};
  /// When set, `correlation` is the target Pearson correlation of the
  /// generated records and the latent Gaussian correlation is solved for.
  bool match_correlation = false;
  Marginal stratum = Marginal::ordinal({1.0});
  Marginal height = Marginal::lognormal(1.6, 0.6);
  Marginal biomass = Marginal::zero_inflated_gamma(0.2, 1.5, 40.0);
  Marginal domain_fraction = Marginal::beta_inflated_one(0.7, 2.0, 2.0);
  DomainLink domain_link{-2.5, 0.5};
  int pool_size = 200000;
  GridGeometry grid{};
  CoverField cover{};

  int stratum_count() const { return static_cast<int>(stratum.probabilities.size()); }
};

inline Correlation4 identity_correlation() {
  Correlation4 c{};
  for (int i = 0; i < 4; ++i) c[i][i] = 1.0;
  return c;
}

namespace detail {

inline Eigen::Matrix4d to_matrix(const Correlation4& c) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = c[i][j];
  return m;
}

inline void check_correlation(const Correlation4& c, const std::string& name) {
  for (int i = 0; i < 4; ++i) {
    if (c[i][i] != 1.0) throw SpecError(name + ": diagonal must be 1");
    for (int j = 0; j < 4; ++j) {
      if (!std::isfinite(c[i][j]) || std::abs(c[i][j]) > 1.0) {
        throw SpecError(name + ": entries must lie in [-1,1]");
      }
      if (c[i][j] != c[j][i]) throw SpecError(name + ": matrix must be symmetric");
    }
  }
  Eigen::LLT<Eigen::Matrix4d> llt(to_matrix(c));
  if (llt.info() != Eigen::Success) throw SpecError(name + ": matrix is not positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(to_matrix(c));
  if (eig.eigenvalues().minCoeff() <= 1e-10) throw SpecError(name + ": matrix is not positive definite");
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Clamp eigenvalues to keep a symmetric unit-diagonal matrix positive definite.
inline Eigen::Matrix4d nearest_correlation(const Eigen::Matrix4d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(m);
  Eigen::Vector4d ev = eig.eigenvalues().cwiseMax(1e-4);
  Eigen::Matrix4d r = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::Vector4d d = r.diagonal().cwiseSqrt().cwiseInverse();
  r = d.asDiagonal() * r * d.asDiagonal();
  for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
  return r;
}

struct PlotRecord {
  int stratum = 0;
  double height = 0.0;
  double biomass = 0.0;
  double fraction = 0.0;
};

/// Iid standard normals, pool_size rows of four columns.
inline std::vector<std::array<double, 4>> draw_innovations(int pool_size, std::uint64_t seed) {
  Rng rng(child_seed(seed, 1, 0));
  std::vector<std::array<double, 4>> eps(static_cast<std::size_t>(pool_size));
  for (auto& row : eps)
    for (auto& v : row) v = rng.normal();
  return eps;
}

/// Marginal quantile tables for a spec, built once per generation.
struct MarginalTables {
  explicit MarginalTables(const CopulaSpec& spec)
      : stratum(spec.stratum), height(spec.height), biomass(spec.biomass), fraction(spec.domain_fraction) {}
  ScoreQuantile stratum;
  ScoreQuantile height;
  ScoreQuantile biomass;
  ScoreQuantile fraction;
};

inline std::vector<PlotRecord> transform_pool(const CopulaSpec& spec, const MarginalTables& q,
                                              const Eigen::Matrix4d& latent,
                                              const std::vector<std::array<double, 4>>& eps,
                                              std::vector<double>* height_scores = nullptr) {
  Eigen::LLT<Eigen::Matrix4d> llt(latent);
  if (llt.info() != Eigen::Success) throw SpecError("latent correlation is not positive definite");
  const Eigen::Matrix4d chol = llt.matrixL();
  const double rho_ah = latent(kDomainVar, kHeightVar);
  const double resid_sd = std::sqrt(std::max(1e-12, 1.0 - rho_ah * rho_ah));

  std::vector<PlotRecord> pool(eps.size());
  if (height_scores) height_scores->resize(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const Eigen::Vector4d e(eps[k][0], eps[k][1], eps[k][2], eps[k][3]);
    const Eigen::Vector4d z = chol * e;

    PlotRecord p;
    p.stratum = static_cast<int>(q.stratum(z(kStratumVar)));
    p.height = std::max(0.0, q.height(z(kHeightVar)));
    const double biomass = std::max(0.0, q.biomass(z(kBiomassVar)));
    // Gate on the part of the domain coordinate that is independent of
    // height, so Pr[in domain | height] equals the logistic link exactly.
    const double w = (z(kDomainVar) - rho_ah * z(kHeightVar)) / resid_sd;
    const bool in_domain = std_normal_cdf(w) > 1.0 - spec.domain_link.probability(p.height);
    const double fraction = std::clamp(q.fraction(z(kDomainVar)), 0.0, 1.0);
    p.fraction = in_domain ? fraction : 0.0;
    p.biomass = p.fraction > 0.0 ? biomass : 0.0;
    pool[k] = p;
    if (height_scores) (*height_scores)[k] = z(kHeightVar);
  }
  return pool;
}

inline Eigen::Matrix4d pool_correlation(const std::vector<PlotRecord>& pool) {
  const double n = static_cast<double>(pool.size());
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (const auto& p : pool) mean += Eigen::Vector4d(p.stratum, p.height, p.biomass, p.fraction);
  mean /= n;
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (const auto& p : pool) {
    const Eigen::Vector4d d = Eigen::Vector4d(p.stratum, p.height, p.biomass, p.fraction) - mean;
    cov += d * d.transpose();
  }
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) {
        const double den = std::sqrt(cov(i, i) * cov(j, j));
        r(i, j) = den > 0.0 ? cov(i, j) / den : 0.0;
      }
  return r;
}

/// Fixed-point search for the latent correlation whose transformed records
/// hit the target Pearson correlations. Pairs with a degenerate marginal are
/// left at their target.
inline Eigen::Matrix4d calibrate_latent(const CopulaSpec& spec, const MarginalTables& tables,
                                        const std::vector<std::array<double, 4>>& eps) {
  const Eigen::Matrix4d target = to_matrix(spec.correlation);
  Eigen::Matrix4d latent = target;
  // A leading subset is plenty to pin correlations to the tolerance below.
  const std::vector<std::array<double, 4>> subset(
      eps.begin(), eps.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(eps.size(), 40000)));
  constexpr int kMaxIter = 40;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const Eigen::Matrix4d achieved = pool_correlation(transform_pool(spec, tables, latent, subset));
    const Eigen::Matrix4d err = target - achieved;
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) worst = std::max(worst, std::abs(err(i, j)));
#ifdef STRIPSURVEY_TRACE_CALIBRATION
    std::fprintf(stderr, "iter %d worst %.4f\n", iter, worst);
#endif
    if (worst < 0.005) break;
    Eigen::Matrix4d next = latent + 0.8 * err;
    for (int i = 0; i < 4; ++i) {
      next(i, i) = 1.0;
      for (int j = 0; j < 4; ++j) next(i, j) = std::clamp(next(i, j), -0.98, 0.98);
    }
    next = 0.5 * (next + next.transpose()).eval();
    for (int i = 0; i < 4; ++i) next(i, i) = 1.0;
    latent = nearest_correlation(next);
  }
  return latent;
}

}  // namespace detail

inline void validate_spec(const CopulaSpec& spec) {
  detail::check_correlation(spec.correlation, "correlation");
  if (spec.stratum.family != MarginalFamily::kOrdinal) throw SpecError("stratum: marginal must be ordinal");
  spec.stratum.validate("stratum");
  spec.height.validate("lidar_height");
  spec.biomass.validate("biomass_density");
  spec.domain_fraction.validate("domain_fraction");
  if (spec.stratum.family == MarginalFamily::kConstant) throw SpecError("stratum: marginal must be ordinal");
  if (!spec.height.nonnegative_support()) throw SpecError("lidar_height: support must be nonnegative");
  if (!spec.biomass.nonnegative_support()) throw SpecError("biomass_density: support must be nonnegative");
  if (spec.domain_fraction.family == MarginalFamily::kConstant &&
      !(spec.domain_fraction.value >= 0.0 && spec.domain_fraction.value <= 1.0)) {
    throw SpecError("domain_fraction: constant must lie in [0,1]");
  }
  if (spec.domain_fraction.family == MarginalFamily::kLognormal ||
      spec.domain_fraction.family == MarginalFamily::kGamma ||
      spec.domain_fraction.family == MarginalFamily::kZeroInflatedGamma ||
      spec.domain_fraction.family == MarginalFamily::kOrdinal) {
    throw SpecError("domain_fraction: marginal must be beta_inflated_one or constant");
  }
  if (std::isnan(spec.domain_link.intercept) || !std::isfinite(spec.domain_link.slope)) {
    throw SpecError("domain_link: coefficients must be numbers");
  }
  if (spec.pool_size < 1000) throw SpecError("pool_size must be at least 1000");
  const auto& g = spec.grid;
  if (g.strips < 2) throw SpecError("grid.strips must be at least 2");
  if (g.strip_width_cells < 1 || g.rows < 1) throw SpecError("grid: strip width and rows must be positive");
  if (!(g.cell_spacing_km > 0.0) || !(g.cell_area_ha > 0.0)) {
    throw SpecError("grid: cell spacing and cell area must be positive");
  }
  const auto& c = spec.cover;
  if (c.components < 1 || !(c.min_wavelength_km > 0.0) || c.max_wavelength_km < c.min_wavelength_km) {
    throw SpecError("cover: need components >= 1 and 0 < min_wavelength_km <= max_wavelength_km");
  }
  if (!(c.noise_weight >= 0.0 && c.noise_weight <= 1.0) || !(c.proxy_noise >= 0.0)) {
    throw SpecError("cover: noise_weight must lie in [0,1] and proxy_noise must be >= 0");
  }
}

/// Latent Gaussian correlation actually used for a spec (solved when
/// match_correlation is set).
inline Correlation4 latent_correlation(const CopulaSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  if (!spec.match_correlation) return spec.correlation;
  const auto eps = detail::draw_innovations(spec.pool_size, seed);
  const detail::MarginalTables tables(spec);
  const Eigen::Matrix4d m = detail::calibrate_latent(spec, tables, eps);
  Correlation4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = m(i, j);
  return out;
}

inline PopulationFrame generate_population(const CopulaSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  const auto eps = detail::draw_innovations(spec.pool_size, seed);
  const detail::MarginalTables tables(spec);
  const Eigen::Matrix4d latent = spec.match_correlation ? detail::calibrate_latent(spec, tables, eps)
                                                        : detail::to_matrix(spec.correlation);
  std::vector<double> height_scores;
  const auto pool = detail::transform_pool(spec, tables, latent, eps, &height_scores);

  // Cover proxy of each pool record and its rank order.
  Rng proxy_rng(child_seed(seed, 2, 0));
  std::vector<double> proxy(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    proxy[k] = height_scores[k] + spec.cover.proxy_noise * proxy_rng.normal();
  }
  std::vector<std::size_t> pool_order(pool.size());
  std::iota(pool_order.begin(), pool_order.end(), std::size_t{0});
  std::stable_sort(pool_order.begin(), pool_order.end(),
                   [&](std::size_t a, std::size_t b) { return proxy[a] < proxy[b]; });

  // Grid cells inside the study-area outline.
  const auto& g = spec.grid;
  const int cols = g.strips * g.strip_width_cells;
  struct GridCell {
    int col;
    int row;
  };
  std::vector<GridCell> grid;
  grid.reserve(static_cast<std::size_t>(cols) * g.rows);
  for (int col = 0; col < cols; ++col) {
    for (int row = 0; row < g.rows; ++row) {
      if (g.shape == GridShape::kEllipse) {
        const double dx = (col + 0.5) / cols * 2.0 - 1.0;
        const double dy = (row + 0.5) / g.rows * 2.0 - 1.0;
        if (dx * dx + dy * dy > 1.0) continue;
      }
      grid.push_back({col, row});
    }
  }
  if (grid.empty()) throw SpecError("grid: outline contains no cells");

  // Smooth cover field: a sum of random plane waves plus white noise.
  Rng field_rng(child_seed(seed, 3, 0));
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> waves;
  for (int j = 0; j < spec.cover.components; ++j) {
    const double lambda = spec.cover.min_wavelength_km +
                          (spec.cover.max_wavelength_km - spec.cover.min_wavelength_km) * field_rng.uniform();
    const double dir = 2.0 * std::numbers::pi * field_rng.uniform();
    const double k = 2.0 * std::numbers::pi / lambda;
    waves.push_back({k * std::cos(dir), k * std::sin(dir), 2.0 * std::numbers::pi * field_rng.uniform(),
                     field_rng.normal()});
  }
  double amp2 = 0.0;
  for (const auto& w : waves) amp2 += 0.5 * w.amp * w.amp;
  const double smooth_scale = amp2 > 0.0 ? 1.0 / std::sqrt(amp2) : 0.0;
  const double nw = spec.cover.noise_weight;
  std::vector<double> cover(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = (grid[k].col + 0.5) * g.cell_spacing_km;
    const double y = (grid[k].row + 0.5) * g.cell_spacing_km;
    double s = 0.0;
    for (const auto& w : waves) s += w.amp * std::cos(w.kx * x + w.ky * y + w.phase);
    cover[k] = std::sqrt(1.0 - nw) * s * smooth_scale + std::sqrt(nw) * field_rng.normal();
  }
  std::vector<std::size_t> cell_order(grid.size());
  std::iota(cell_order.begin(), cell_order.end(), std::size_t{0});
  std::stable_sort(cell_order.begin(), cell_order.end(),
                   [&](std::size_t a, std::size_t b) { return cover[a] < cover[b]; });

  // Rank-space nearest neighbour: the r-th lowest cover cell takes the pool
  // record at the same quantile of the proxy.
  std::vector<std::size_t> assigned(grid.size());
  const double n_cells = static_cast<double>(grid.size());
  const double n_pool = static_cast<double>(pool.size());
  for (std::size_t r = 0; r < cell_order.size(); ++r) {
    const double q = (static_cast<double>(r) + 0.5) / n_cells;
    auto idx = static_cast<std::size_t>(std::floor(q * n_pool));
    idx = std::min(idx, pool.size() - 1);
    assigned[cell_order[r]] = pool_order[idx];
  }

  std::vector<CellRecord> cells;
  cells.reserve(grid.size());
  // grid is already ordered by column then row, i.e. by strip then along it.
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& p = pool[assigned[k]];
    CellRecord c;
    c.cell_id = static_cast<std::int64_t>(k);
    c.strip_id = grid[k].col / g.strip_width_cells;
    c.stratum_id = p.stratum;
    c.lidar_height = p.height;
    c.domain_proportion = p.fraction;
    c.biomass_density = p.fraction > 0.0 ? p.biomass : 0.0;
    c.x_km = (grid[k].col + 0.5) * g.cell_spacing_km;
    c.y_km = (grid[k].row + 0.5) * g.cell_spacing_km;
    cells.push_back(c);
  }
  return PopulationFrame(std::move(cells), g.strips, spec.stratum_count(), g.cell_area_ha);
}

/// Pearson correlation of (stratum, height, biomass, domain proportion)
/// over all cells of a frame.
inline Correlation4 frame_correlation(const PopulationFrame& frame) {
  std::vector<detail::PlotRecord> rows;
  rows.reserve(frame.cells().size());
  for (const auto& c : frame.cells()) {
    rows.push_back({c.stratum_id, c.lidar_height, c.biomass_density, c.domain_proportion});
  }
  const Eigen::Matrix4d m = detail::pool_correlation(rows);
  Correlation4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = m(i, j);
  return out;
}

}  // namespace stripsurvey
