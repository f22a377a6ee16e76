#pragma once

// Marginal distributions used by the copula generator, each addressed by its
// quantile function.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

namespace stripsurvey {

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MarginalFamily {
  kOrdinal,             // probabilities p_0..p_(K-1); returns the level index
  kConstant,            // value
  kLognormal,           // meanlog, sdlog
  kGamma,               // shape, scale
  kZeroInflatedGamma,   // zero_prob, shape, scale
  kBetaInflatedOne,     // one_prob, alpha, beta; support [0,1]
};

struct Marginal {
  MarginalFamily family = MarginalFamily::kConstant;
  std::vector<double> probabilities;
  double value = 0.0;
  double meanlog = 0.0;
  double sdlog = 1.0;
  double shape = 1.0;
  double scale = 1.0;
  double zero_prob = 0.0;
  double one_prob = 0.0;
  double alpha = 1.0;
  double beta = 1.0;

  static Marginal ordinal(std::vector<double> p) {
    Marginal m;
    m.family = MarginalFamily::kOrdinal;
    m.probabilities = std::move(p);
    return m;
  }
  static Marginal constant(double v) {
    Marginal m;
    m.family = MarginalFamily::kConstant;
    m.value = v;
    return m;
  }
  static Marginal lognormal(double meanlog, double sdlog) {
    Marginal m;
    m.family = MarginalFamily::kLognormal;
    m.meanlog = meanlog;
    m.sdlog = sdlog;
    return m;
  }
  static Marginal gamma(double shape, double scale) {
    Marginal m;
    m.family = MarginalFamily::kGamma;
    m.shape = shape;
    m.scale = scale;
    return m;
  }
  static Marginal zero_inflated_gamma(double zero_prob, double shape, double scale) {
    Marginal m = gamma(shape, scale);
    m.family = MarginalFamily::kZeroInflatedGamma;
    m.zero_prob = zero_prob;
    return m;
  }
  static Marginal beta_inflated_one(double one_prob, double alpha, double beta) {
    Marginal m;
    m.family = MarginalFamily::kBetaInflatedOne;
    m.one_prob = one_prob;
    m.alpha = alpha;
    m.beta = beta;
    return m;
  }

  /// Throws SpecError naming `what` when a parameter is out of range.
  void validate(const std::string& what) const {
    const auto bad = [&](const std::string& msg) { return SpecError(what + ": " + msg); };
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    const auto probability = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    switch (family) {
      case MarginalFamily::kOrdinal: {
        if (probabilities.size() < 1) throw bad("ordinal needs at least one level");
        double sum = 0.0;
        for (double p : probabilities) {
          if (!probability(p)) throw bad("ordinal probabilities must lie in [0,1]");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw bad("ordinal probabilities must sum to 1");
        break;
      }
      case MarginalFamily::kConstant:
        if (!std::isfinite(value)) throw bad("constant must be finite");
        break;
      case MarginalFamily::kLognormal:
        if (!std::isfinite(meanlog) || !positive(sdlog)) throw bad("lognormal needs finite meanlog, sdlog > 0");
        break;
      case MarginalFamily::kZeroInflatedGamma:
        if (!probability(zero_prob) || zero_prob >= 1.0) throw bad("zero_prob must lie in [0,1)");
        [[fallthrough]];
      case MarginalFamily::kGamma:
        if (!positive(shape) || !positive(scale)) throw bad("gamma needs shape > 0, scale > 0");
        break;
      case MarginalFamily::kBetaInflatedOne:
        if (!probability(one_prob)) throw bad("one_prob must lie in [0,1]");
        if (!positive(alpha) || !positive(beta)) throw bad("beta needs alpha > 0, beta > 0");
        break;
    }
  }

  /// Inverse CDF at u in (0,1).
  double quantile(double u) const {
    switch (family) {
      case MarginalFamily::kOrdinal: {
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
          cum += probabilities[k];
          if (u < cum) return static_cast<double>(k);
        }
        return static_cast<double>(probabilities.size() - 1);
      }
      case MarginalFamily::kConstant:
        return value;
      case MarginalFamily::kLognormal:
        return boost::math::quantile(boost::math::lognormal_distribution<>(meanlog, sdlog), u);
      case MarginalFamily::kGamma:
        return boost::math::quantile(boost::math::gamma_distribution<>(shape, scale), u);
      case MarginalFamily::kZeroInflatedGamma:
        if (u <= zero_prob) return 0.0;
        return boost::math::quantile(boost::math::gamma_distribution<>(shape, scale),
                                     (u - zero_prob) / (1.0 - zero_prob));
      case MarginalFamily::kBetaInflatedOne: {
        if (u >= 1.0 - one_prob) return 1.0;
        return boost::math::quantile(boost::math::beta_distribution<>(alpha, beta),
                                     u / (1.0 - one_prob));
      }
    }
    return 0.0;
  }

  bool nonnegative_support() const {
    switch (family) {
      case MarginalFamily::kConstant:
        return value >= 0.0;
      default:
        return true;
    }
  }
};

/// Quantile of a marginal as a function of the Gaussian score z, i.e.
/// q(Phi(z)), tabulated on a fine z grid over each continuous segment.
/// Point masses (zero inflation, one inflation, ordinal levels) are resolved
/// exactly against their z thresholds.
class ScoreQuantile {
 public:
  ScoreQuantile() = default;

  explicit ScoreQuantile(const Marginal& m, int nodes = 16384) : marginal_(m) {
    const boost::math::normal_distribution<> std_normal;
    auto z_of = [&](double u) {
      if (u <= 0.0) return -kZMax;
      if (u >= 1.0) return kZMax;
      return std::clamp(boost::math::quantile(std_normal, u), -kZMax, kZMax);
    };
    switch (m.family) {
      case MarginalFamily::kOrdinal: {
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < m.probabilities.size(); ++k) {
          cum += m.probabilities[k];
          thresholds_.push_back(z_of(cum));
        }
        return;
      }
      case MarginalFamily::kConstant:
        return;
      case MarginalFamily::kZeroInflatedGamma:
        lo_ = m.zero_prob > 0.0 ? z_of(m.zero_prob) : -kZMax;
        hi_ = kZMax;
        below_ = 0.0;
        break;
      case MarginalFamily::kBetaInflatedOne:
        lo_ = -kZMax;
        hi_ = m.one_prob > 0.0 ? z_of(1.0 - m.one_prob) : kZMax;
        above_ = 1.0;
        break;
      default:
        lo_ = -kZMax;
        hi_ = kZMax;
        break;
    }
    if (!(hi_ > lo_)) {
      // Degenerate segment: everything sits in the point mass.
      lo_ = hi_ = 0.0;
      below_ = above_ = m.family == MarginalFamily::kBetaInflatedOne ? 1.0 : 0.0;
      degenerate_ = true;
      return;
    }
    table_.resize(static_cast<std::size_t>(nodes) + 1);
    step_ = (hi_ - lo_) / nodes;
    for (int j = 0; j <= nodes; ++j) {
      double z = lo_ + step_ * j;
      // Nudge the segment ends inside so point masses are excluded.
      if (j == 0) z += 1e-9;
      if (j == nodes) z -= 1e-9;
      const double u = std::clamp(boost::math::cdf(std_normal, z), 1e-300, 1.0 - 1e-16);
      table_[j] = m.quantile(u);
    }
    if (m.family != MarginalFamily::kZeroInflatedGamma) below_ = table_.front();
    if (m.family != MarginalFamily::kBetaInflatedOne) above_ = table_.back();
  }

  double operator()(double z) const {
    switch (marginal_.family) {
      case MarginalFamily::kOrdinal: {
        std::size_t k = 0;
        while (k < thresholds_.size() && z >= thresholds_[k]) ++k;
        return static_cast<double>(k);
      }
      case MarginalFamily::kConstant:
        return marginal_.value;
      default:
        break;
    }
    if (degenerate_) return below_;
    if (z <= lo_) return below_;
    if (z >= hi_) return above_;
    const double pos = (z - lo_) / step_;
    auto j = static_cast<std::size_t>(pos);
    if (j + 1 >= table_.size()) return table_.back();
    const double t = pos - static_cast<double>(j);
    return table_[j] + t * (table_[j + 1] - table_[j]);
  }

 private:
  static constexpr double kZMax = 8.5;
  Marginal marginal_;
  std::vector<double> thresholds_;
  std::vector<double> table_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 1.0;
  double below_ = 0.0;
  double above_ = 0.0;
  bool degenerate_ = false;
};

}  // namespace stripsurvey
