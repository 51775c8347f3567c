#pragma once

#include <optional>
#include <vector>

#include "greenchain/chain.hpp"

namespace greenchain {

enum class Route { Exact, LocalTime, Voltage, MonteCarlo };

const char* route_name(Route r);

// An expected visit count G(x,y) with the route that produced it.
// std_error is present only for MonteCarlo results. residual is the
// max-norm linear-solve residual where a solve was involved; results
// whose residual exceeds 1e-8 (or whose sampling was heavily truncated)
// arrive flagged.
struct GreenResult {
  double value = 0.0;
  Route route = Route::Exact;
  std::optional<double> std_error;
  std::optional<double> residual;
  bool flagged = false;
};

// Expected visit counts for every interior (start, target) pair of an
// absorbed chain. The start's own visit at step zero is counted, so
// diagonal entries are always >= 1.
class GreenMatrix {
 public:
  GreenMatrix(State lo, State hi, std::vector<double> values,
              double max_residual);

  State lo() const { return lo_; }
  State hi() const { return hi_; }
  std::size_t dim() const { return dim_; }
  double max_residual() const { return max_residual_; }

  double at(State start, State target) const;
  const std::vector<double>& values() const { return values_; }

 private:
  State lo_;
  State hi_;
  std::size_t dim_;
  std::vector<double> values_;
  double max_residual_;
};

// G(x,y): expected number of visits to y, starting at x, before the walk
// is absorbed at an endpoint; the time-zero visit counts. Computed as the
// (x,y) entry of (I - Q)^{-1} for the interior block Q by solving one
// tridiagonal system. Requires both endpoints absorbing and x, y interior.
GreenResult green(const BirthDeathChain& chain, State x, State y);

// Batch form: one factorization of (I - Q) reused for every column.
GreenMatrix green_matrix(const BirthDeathChain& chain);

// Worst agreement between the solved visit-count ratio G(j,k)/G(k,j) and
// the closed-form transition-probability product, over all interior pairs.
struct RatioCheck {
  double max_rel_dev = 0.0;
  State worst_j = 0;
  State worst_k = 0;
};

RatioCheck verify_ratio_identity(const BirthDeathChain& chain);

}  // namespace greenchain
