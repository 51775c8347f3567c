#include "greenchain/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "greenchain/errors.hpp"

namespace greenchain {

namespace {

State pick_anchor(const BirthDeathChain& chain) {
  // State 0 when usable, otherwise the nearest usable state: the grid is
  // unique up to translation and scale and every derived quantity is
  // invariant under both, so shifting the anchor is harmless.
  return std::clamp<State>(0, chain.first_usable(), chain.last_usable());
}

void require_lazy_free(const BirthDeathChain& chain) {
  for (State n = chain.first_usable(); n <= chain.last_usable(); ++n) {
    if (chain.row(n).a != 0.0) {
      throw std::domain_error(
          "embedding needs a lazy-free chain; apply remove_laziness first "
          "(self-transition found at state " + std::to_string(n) + ")");
    }
  }
}

// Sum of a positive quantity represented as log(scale) + log(mantissa
// sum): spacings are summed after factoring out the largest one in the
// range, so geometric growth over wide windows never overflows.
struct LogLength {
  double log_value;
};

LogLength sum_spacings(const std::map<State, double>& log_spacing, State from,
                       State to) {
  double peak = -std::numeric_limits<double>::infinity();
  for (State n = from; n < to; ++n) {
    peak = std::max(peak, log_spacing.at(n));
  }
  KahanSum mantissa;
  for (State n = from; n < to; ++n) {
    mantissa.add(std::exp(log_spacing.at(n) - peak));
  }
  return LogLength{peak + std::log(mantissa.value())};
}

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

EmbeddingData build_embedding(const BirthDeathChain& chain) {
  chain.require_valid();
  if (chain.first_usable() > chain.last_usable()) {
    throw std::domain_error("chain has no usable states to embed");
  }
  require_lazy_free(chain);

  EmbeddingData data;
  data.lo = chain.lo();
  data.hi = chain.hi();
  data.anchor = pick_anchor(chain);
  const State c = data.anchor;

  // log|t_n| by the multiplicative recurrences, each run compensated.
  // Ascending from the anchor: |t_n| = |t_{n-1}| * l_n / r_n.
  if (c <= data.hi - 1) {
    KahanSum acc;
    acc.add(std::log(chain.row(c).l));
    data.log_spacing[c] = acc.value();
    for (State n = c + 1; n <= data.hi - 1; ++n) {
      acc.add(std::log(chain.row(n).l));
      acc.add(-std::log(chain.row(n).r));
      data.log_spacing[n] = acc.value();
    }
  }
  // Descending: |t_n| = |t_{n+1}| * r_{n+1} / l_{n+1}.
  if (c - 1 >= data.lo) {
    KahanSum acc;
    acc.add(std::log(chain.row(c).r));
    data.log_spacing[c - 1] = acc.value();
    for (State n = c - 2; n >= data.lo; --n) {
      acc.add(std::log(chain.row(n + 1).r));
      acc.add(-std::log(chain.row(n + 1).l));
      data.log_spacing[n] = acc.value();
    }
  }

  // Signed spacings and the grid itself, in true magnitudes.
  for (const auto& [n, ls] : data.log_spacing) {
    data.t[n] = (n >= c ? 1.0 : -1.0) * std::exp(ls);
  }
  data.x[c] = 0.0;
  {
    KahanSum acc;
    for (State n = c; n <= data.hi - 1; ++n) {
      acc.add(std::exp(data.log_spacing.at(n)));
      data.x[n + 1] = acc.value();
    }
  }
  {
    KahanSum acc;
    for (State n = c - 1; n >= data.lo; --n) {
      acc.add(-std::exp(data.log_spacing.at(n)));
      data.x[n] = acc.value();
    }
  }
  data.x_minus_inf = Extent{data.x.at(data.lo), true};
  data.x_plus_inf = Extent{data.x.at(data.hi), true};
  return data;
}

double expected_local_time(double a, double b, double z, double y) {
  if (!(a < b)) {
    throw std::domain_error("expected_local_time needs a < b");
  }
  if (!(a < z && z < b && a < y && y < b)) {
    throw std::domain_error(
        "expected_local_time needs both z and y strictly inside (a, b)");
  }
  // Factored form of [(b-z)(y-a) + (z-a)(b-y)]/(b-a) - |z-y|; identical
  // algebraically, but free of the subtraction that cancels near y = z.
  const double inner_lo = std::min(z, y);
  const double inner_hi = std::max(z, y);
  return 2.0 * (inner_lo - a) * (b - inner_hi) / (b - a);
}

GreenResult green_via_local_time(const BirthDeathChain& chain, State j,
                                 State k) {
  chain.require_valid();
  if (!chain.both_ends_absorbing()) {
    throw std::domain_error(
        "visit counts need both window endpoints absorbing");
  }
  for (State s : {j, k}) {
    if (!chain.is_usable(s)) {
      throw std::domain_error("state " + std::to_string(s) +
                              " is not interior");
    }
  }

  bool lazy = false;
  for (State n = chain.first_usable(); n <= chain.last_usable() && !lazy;
       ++n) {
    lazy = chain.row(n).a != 0.0;
  }
  // Waiting times only stretch the visit count at the target: the grid is
  // built for the lazy-free chain and the result rescaled by 1/(1 - a_k).
  const double lazy_scale = 1.0 / (1.0 - chain.row(k).a);
  const EmbeddingData grid =
      build_embedding(lazy ? remove_laziness(chain) : chain);

  const State A = chain.lo();
  const State B = chain.hi();
  const State inner_lo = std::min(j, k);
  const State inner_hi = std::max(j, k);

  // Numerator: expected local time at x_k over the exit interval
  // (x_A, x_B), i.e. 2 (x_min - x_A)(x_B - x_max)/(x_B - x_A). Each
  // length is summed from spacings directly; differencing the stored
  // grid points would cancel catastrophically once spacings span many
  // orders of magnitude.
  const LogLength left = sum_spacings(grid.log_spacing, A, inner_lo);
  const LogLength right = sum_spacings(grid.log_spacing, inner_hi, B);
  const LogLength whole = sum_spacings(grid.log_spacing, A, B);
  const double log_num =
      std::log(2.0) + left.log_value + right.log_value - whole.log_value;

  // Denominator: local time collected at x_k per visit, the harmonic mean
  // 2 t_{k-1} t_k / (t_{k-1} + t_k) of the adjacent spacings.
  const double ls_prev = grid.log_spacing.at(k - 1);
  const double ls_next = grid.log_spacing.at(k);
  const double log_den =
      std::log(2.0) + ls_prev + ls_next - log_add_exp(ls_prev, ls_next);

  GreenResult out;
  out.value = std::exp(log_num - log_den) * lazy_scale;
  out.route = Route::LocalTime;
  return out;
}

}  // namespace greenchain
