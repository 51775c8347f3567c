#pragma once

#include <algorithm>
#include <cmath>

namespace greenchain {

// Kahan compensated summation. Used wherever long products/sums of
// log-magnitudes or spacings must hold ~1e-12 relative accuracy.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Relative deviation |a-b| / max(|a|,|b|); zero when both are zero.
inline double rel_dev(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

// A positive quantity carried with its natural log. The log is the
// authoritative representation: long transition-probability products
// under/overflow double range long before the log does.
struct RatioValue {
  double value = 1.0;
  double log = 0.0;

  RatioValue reciprocal() const {
    return RatioValue{1.0 / value, -log};
  }
};

}  // namespace greenchain
