#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "greenchain/numeric.hpp"

namespace greenchain {

using State = std::int64_t;

// One transition row: step left with probability l, stay with a, step
// right with r. Rows of usable states must satisfy l + a + r = 1 and
// l, r > 0; a may be zero.
struct ProbabilityTriple {
  double l = 0.0;
  double a = 0.0;
  double r = 0.0;
};

struct Violation {
  std::optional<State> state;
  std::string message;
};

// A birth-death chain on the integer window [lo, hi]. The window
// endpoints may be marked absorbing; all other states are "usable" and
// must carry a proper probability row. Immutable after construction;
// construction is permissive, validate() reports problems, and the
// numeric operations call require_valid() before trusting the rows.
class BirthDeathChain {
 public:
  BirthDeathChain(State lo, State hi, std::vector<ProbabilityTriple> rows,
                  bool absorb_lo, bool absorb_hi);

  static BirthDeathChain uniform(State lo, State hi, ProbabilityTriple row,
                                 bool absorb_lo, bool absorb_hi);

  State lo() const { return lo_; }
  State hi() const { return hi_; }
  bool absorbing_lo() const { return absorb_lo_; }
  bool absorbing_hi() const { return absorb_hi_; }
  bool both_ends_absorbing() const { return absorb_lo_ && absorb_hi_; }

  bool contains(State n) const { return lo_ <= n && n <= hi_; }
  bool is_absorbing(State n) const {
    return (absorb_lo_ && n == lo_) || (absorb_hi_ && n == hi_);
  }
  // Usable states carry a live transition row.
  bool is_usable(State n) const { return contains(n) && !is_absorbing(n); }
  State first_usable() const { return absorb_lo_ ? lo_ + 1 : lo_; }
  State last_usable() const { return absorb_hi_ ? hi_ - 1 : hi_; }

  std::size_t size() const { return rows_.size(); }
  const ProbabilityTriple& row(State n) const;

  std::vector<Violation> validate() const;
  // Throws spec_error listing the first few violations.
  void require_valid() const;

  // Copy with every usable row rescaled to sum exactly to one. Explicit
  // by design: inputs are never normalized silently.
  BirthDeathChain normalized() const;

 private:
  State lo_;
  State hi_;
  std::vector<ProbabilityTriple> rows_;
  bool absorb_lo_;
  bool absorb_hi_;
};

// Removes self-transitions: a_n -> 0, l and r rescaled by 1/(l_n + r_n).
// Rows with a_n == 0 are copied bit-for-bit, which makes the transform
// exactly idempotent. Window and absorbing endpoints are unchanged.
BirthDeathChain remove_laziness(const BirthDeathChain& chain);

// Closed-form visit-count ratio G(j,k)/G(k,j) as a product of transition
// probabilities: for j < k it is (r_j r_{j+1} ... r_{k-1}) divided by
// (l_{j+1} ... l_k); for j > k the reciprocal. Computed in log space with
// compensated summation; a direct product is used when the pair is close
// (|k - j| <= 32) and every factor sits in [1e-3, 1e3].
// Throws std::invalid_argument when j == k and std::domain_error when
// either state is absorbing or outside the window.
RatioValue symmetry_ratio(const BirthDeathChain& chain, State j, State k);

enum class SeriesStatus { Converged, Diverged, Undetermined };

// Partial sum of one side's embedding-spacing series together with how
// the scan judged it. infinite() marks the divergent (+inf) case.
struct SideSum {
  double sum = 0.0;
  SeriesStatus status = SeriesStatus::Undetermined;
  bool infinite() const { return status == SeriesStatus::Diverged; }
};

enum class Recurrence { Recurrent, Transient, Inconclusive };

struct RecurrenceVerdict {
  Recurrence kind = Recurrence::Inconclusive;
  SideSum left_sum;
  SideSum right_sum;
};

// Chain supplied as a rule n -> (l_n, a_n, r_n), defined for |n| <= horizon.
using CoefficientFn = std::function<ProbabilityTriple(State)>;

struct ClassifyOptions {
  std::int64_t horizon = 10000;
  double divergence_threshold = 1e12;
  double convergence_tolerance = 1e-3;
  // Sliding window of successive-term ratios examined at the horizon.
  static constexpr int kRatioWindow = 16;
};

// Recurrence/transience via the embedding-spacing series on each side of
// the origin. A side is judged Converged when the last kRatioWindow
// term ratios all stay below 1 - convergence_tolerance (the reported sum
// then includes a geometric tail estimate), Diverged when the partial sum
// exceeds divergence_threshold or the window ratios are all >= 1 (terms
// fail to decay, so the series cannot converge). Transient iff either
// side converges; Recurrent iff both diverge; otherwise Inconclusive.
// Throws std::invalid_argument when horizon < kRatioWindow.
RecurrenceVerdict classify(const CoefficientFn& coefficients,
                           const ClassifyOptions& options = {});

}  // namespace greenchain
