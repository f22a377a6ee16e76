#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stripsurvey {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum EstimateFlag : unsigned {
  kNoFlags = 0,
  kNegativeVariance = 1u << 0,
  kSmallNStratum = 1u << 1,     // some stratum (or stratum-strip cell) had fewer than 2 plots
  kEmptyStratumStrip = 1u << 2, // a stratum had no cells in any sampled strip and was dropped
};

/// Point estimate with its variance estimate.
struct Estimate {
  double value = 0.0;
  double variance = 0.0;
  unsigned flags = kNoFlags;

  bool has(EstimateFlag f) const { return (flags & f) != 0; }

  /// sqrt(variance), or NaN when the variance estimate is negative.
  double se() const {
    return variance >= 0.0 ? std::sqrt(variance) : std::numeric_limits<double>::quiet_NaN();
  }
};

inline Estimate finalize(double value, double variance, unsigned flags) {
  Estimate e{value, variance, flags};
  if (variance < 0.0) e.flags |= kNegativeVariance;
  return e;
}

inline std::string describe_flags(unsigned flags) {
  std::string s;
  const auto add = [&](const char* name) {
    if (!s.empty()) s += '|';
    s += name;
  };
  if (flags & kNegativeVariance) add("negative_variance");
  if (flags & kSmallNStratum) add("small_n_stratum");
  if (flags & kEmptyStratumStrip) add("empty_stratum_strip");
  return s.empty() ? "-" : s;
}

}  // namespace stripsurvey
