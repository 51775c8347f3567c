#include "greenchain/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "greenchain/errors.hpp"

namespace greenchain {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string state_str(State n) {
  return std::to_string(n);
}

}  // namespace

BirthDeathChain::BirthDeathChain(State lo, State hi,
                                 std::vector<ProbabilityTriple> rows,
                                 bool absorb_lo, bool absorb_hi)
    : lo_(lo), hi_(hi), rows_(std::move(rows)),
      absorb_lo_(absorb_lo), absorb_hi_(absorb_hi) {
  if (hi_ < lo_) {
    throw std::invalid_argument("chain window is empty: hi < lo");
  }
  const auto want = static_cast<std::size_t>(hi_ - lo_ + 1);
  if (rows_.size() != want) {
    std::ostringstream os;
    os << "chain window [" << lo_ << ", " << hi_ << "] needs " << want
       << " rows, got " << rows_.size();
    throw std::invalid_argument(os.str());
  }
}

BirthDeathChain BirthDeathChain::uniform(State lo, State hi,
                                         ProbabilityTriple row,
                                         bool absorb_lo, bool absorb_hi) {
  if (hi < lo) {
    throw std::invalid_argument("chain window is empty: hi < lo");
  }
  std::vector<ProbabilityTriple> rows(static_cast<std::size_t>(hi - lo + 1),
                                      row);
  return BirthDeathChain(lo, hi, std::move(rows), absorb_lo, absorb_hi);
}

const ProbabilityTriple& BirthDeathChain::row(State n) const {
  if (!contains(n)) {
    throw std::domain_error("state " + state_str(n) + " outside window [" +
                            state_str(lo_) + ", " + state_str(hi_) + "]");
  }
  return rows_[static_cast<std::size_t>(n - lo_)];
}

std::vector<Violation> BirthDeathChain::validate() const {
  std::vector<Violation> out;
  for (State n = lo_; n <= hi_; ++n) {
    if (!is_usable(n)) continue;
    const ProbabilityTriple& t = rows_[static_cast<std::size_t>(n - lo_)];
    if (!std::isfinite(t.l) || !std::isfinite(t.a) || !std::isfinite(t.r)) {
      out.push_back({n, "non-finite probability at state " + state_str(n)});
      continue;
    }
    const double sum = t.l + t.a + t.r;
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os << "row sum " << sum << " != 1 at state " << n;
      out.push_back({n, os.str()});
    }
    if (!(t.l > 0.0)) {
      out.push_back({n, "l_n must be > 0 at state " + state_str(n)});
    }
    if (!(t.r > 0.0)) {
      out.push_back({n, "r_n must be > 0 at state " + state_str(n)});
    }
    if (t.a < 0.0 || t.a >= 1.0) {
      out.push_back({n, "a_n must lie in [0, 1) at state " + state_str(n)});
    }
  }
  return out;
}

void BirthDeathChain::require_valid() const {
  const auto violations = validate();
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid chain: ";
  const std::size_t shown = std::min<std::size_t>(violations.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) os << "; ";
    os << violations[i].message;
  }
  if (violations.size() > shown) {
    os << "; and " << violations.size() - shown << " more";
  }
  throw spec_error(os.str());
}

BirthDeathChain BirthDeathChain::normalized() const {
  std::vector<ProbabilityTriple> rows = rows_;
  for (State n = lo_; n <= hi_; ++n) {
    if (!is_usable(n)) continue;
    ProbabilityTriple& t = rows[static_cast<std::size_t>(n - lo_)];
    const double sum = t.l + t.a + t.r;
    if (sum > 0.0 && std::isfinite(sum)) {
      t.l /= sum;
      t.a /= sum;
      t.r /= sum;
    }
  }
  return BirthDeathChain(lo_, hi_, std::move(rows), absorb_lo_, absorb_hi_);
}

BirthDeathChain remove_laziness(const BirthDeathChain& chain) {
  chain.require_valid();
  std::vector<ProbabilityTriple> rows;
  rows.reserve(chain.size());
  for (State n = chain.lo(); n <= chain.hi(); ++n) {
    const ProbabilityTriple& t = chain.row(n);
    // Rows that are already lazy-free pass through bit-for-bit, which is
    // what makes the transform exactly idempotent.
    if (!chain.is_usable(n) || t.a == 0.0) {
      rows.push_back(t);
      continue;
    }
    const double active = t.l + t.r;
    rows.push_back({t.l / active, 0.0, t.r / active});
  }
  return BirthDeathChain(chain.lo(), chain.hi(), std::move(rows),
                         chain.absorbing_lo(), chain.absorbing_hi());
}

RatioValue symmetry_ratio(const BirthDeathChain& chain, State j, State k) {
  chain.require_valid();
  if (j == k) {
    throw std::invalid_argument("degenerate pair: j == k == " + state_str(j));
  }
  for (State s : {j, k}) {
    if (!chain.is_usable(s)) {
      throw std::domain_error("state " + state_str(s) +
                              " is absorbing or outside the window");
    }
  }
  if (j > k) {
    return symmetry_ratio(chain, k, j).reciprocal();
  }

  // Numerator r_j ... r_{k-1}, denominator l_{j+1} ... l_k.
  bool direct_ok = (k - j) <= 32;
  if (direct_ok) {
    for (State n = j; n <= k && direct_ok; ++n) {
      if (n < k && !(chain.row(n).r >= 1e-3 && chain.row(n).r <= 1e3)) {
        direct_ok = false;
      }
      if (n > j && !(chain.row(n).l >= 1e-3 && chain.row(n).l <= 1e3)) {
        direct_ok = false;
      }
    }
  }
  if (direct_ok) {
    long double num = 1.0L;
    long double den = 1.0L;
    for (State n = j; n < k; ++n) num *= chain.row(n).r;
    for (State n = j + 1; n <= k; ++n) den *= chain.row(n).l;
    const double value = static_cast<double>(num / den);
    return RatioValue{value, std::log(value)};
  }

  KahanSum log_sum;
  for (State n = j; n < k; ++n) log_sum.add(std::log(chain.row(n).r));
  for (State n = j + 1; n <= k; ++n) log_sum.add(-std::log(chain.row(n).l));
  const double log_ratio = log_sum.value();
  return RatioValue{std::exp(log_ratio), log_ratio};
}

namespace {

// One side of the spacing series: first term u_1 = exp(log_first), then
// u_i = u_{i-1} * ratio(i) for i = 2..terms. Judged by the rules in the
// classify() contract.
SideSum scan_series(double log_first,
                    const std::function<double(std::int64_t)>& ratio,
                    std::int64_t terms, const ClassifyOptions& opt) {
  const int w = ClassifyOptions::kRatioWindow;
  std::vector<double> window(static_cast<std::size_t>(w), 0.0);
  std::int64_t seen = 0;

  KahanSum sum;
  double log_u = log_first;
  sum.add(std::exp(log_u));
  for (std::int64_t i = 2; i <= terms; ++i) {
    const double q = ratio(i);
    if (!(q > 0.0) || !std::isfinite(q)) {
      throw std::domain_error("nonpositive term ratio in spacing series");
    }
    log_u += std::log(q);
    window[static_cast<std::size_t>(seen++ % w)] = q;
    // exp overflows past ~709; the series is then unambiguously divergent.
    const double term =
        log_u > 700.0 ? opt.divergence_threshold * 2.0 : std::exp(log_u);
    sum.add(term);
    if (sum.value() > opt.divergence_threshold) {
      return SideSum{sum.value(), SeriesStatus::Diverged};
    }
  }

  const std::int64_t filled = std::min<std::int64_t>(seen, w);
  if (filled < 1) {
    return SideSum{sum.value(), SeriesStatus::Undetermined};
  }
  bool all_below = true;
  bool all_at_least_one = true;
  double q_max = 0.0;
  for (std::int64_t i = 0; i < filled; ++i) {
    const double q = window[static_cast<std::size_t>(i)];
    q_max = std::max(q_max, q);
    if (!(q <= 1.0 - opt.convergence_tolerance)) all_below = false;
    if (!(q >= 1.0)) all_at_least_one = false;
  }
  if (all_below) {
    // Geometric tail estimate from the last term and the worst ratio in
    // the window; reported so the sum approximates the true limit.
    const double last = std::exp(log_u);
    sum.add(last * q_max / (1.0 - q_max));
    return SideSum{sum.value(), SeriesStatus::Converged};
  }
  if (all_at_least_one) {
    // Terms are not decaying, so the series cannot converge even though
    // the partial sum has not yet crossed the threshold.
    return SideSum{sum.value(), SeriesStatus::Diverged};
  }
  return SideSum{sum.value(), SeriesStatus::Undetermined};
}

ProbabilityTriple checked_row(const CoefficientFn& fn, State n) {
  const ProbabilityTriple t = fn(n);
  if (!std::isfinite(t.l) || !std::isfinite(t.a) || !std::isfinite(t.r) ||
      !(t.l > 0.0) || !(t.r > 0.0) || t.a < 0.0 ||
      std::abs(t.l + t.a + t.r - 1.0) > 1e-9) {
    throw std::domain_error("coefficient rule returned an invalid row at n=" +
                            std::to_string(n));
  }
  return t;
}

}  // namespace

RecurrenceVerdict classify(const CoefficientFn& coefficients,
                           const ClassifyOptions& options) {
  if (options.horizon < ClassifyOptions::kRatioWindow) {
    throw std::invalid_argument(
        "classification horizon must be at least " +
        std::to_string(ClassifyOptions::kRatioWindow));
  }
  const ProbabilityTriple origin = checked_row(coefficients, 0);

  // Right side: u_1 = t_0 = l_0, then u_i/u_{i-1} = l_{i-1}/r_{i-1}.
  SideSum right = scan_series(
      std::log(origin.l),
      [&](std::int64_t i) {
        const ProbabilityTriple t = checked_row(coefficients, i - 1);
        return t.l / t.r;
      },
      options.horizon, options);

  // Left side: u_1 = |t_{-1}| = r_0, then u_i/u_{i-1} = r_{1-i}/l_{1-i}.
  SideSum left = scan_series(
      std::log(origin.r),
      [&](std::int64_t i) {
        const ProbabilityTriple t = checked_row(coefficients, 1 - i);
        return t.r / t.l;
      },
      options.horizon, options);

  RecurrenceVerdict verdict;
  verdict.left_sum = left;
  verdict.right_sum = right;
  if (left.status == SeriesStatus::Converged ||
      right.status == SeriesStatus::Converged) {
    verdict.kind = Recurrence::Transient;
  } else if (left.status == SeriesStatus::Diverged &&
             right.status == SeriesStatus::Diverged) {
    verdict.kind = Recurrence::Recurrent;
  } else {
    verdict.kind = Recurrence::Inconclusive;
  }
  return verdict;
}

}  // namespace greenchain
