#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "greenchain/chain.hpp"
#include "greenchain/errors.hpp"
#include "support.hpp"

using namespace greenchain;
using testsupport::random_chain;

namespace {

BirthDeathChain symmetric_chain() {
  return BirthDeathChain::uniform(0, 4, {0.5, 0.0, 0.5}, true, true);
}

BirthDeathChain drift_chain() {
  return BirthDeathChain::uniform(0, 5, {0.4, 0.0, 0.6}, true, true);
}

}  // namespace

TEST_SUITE_BEGIN("chain");

TEST_CASE("window bookkeeping") {
  const BirthDeathChain c = symmetric_chain();
  CHECK(c.lo() == 0);
  CHECK(c.hi() == 4);
  CHECK(c.size() == 5);
  CHECK(c.both_ends_absorbing());
  CHECK(c.first_usable() == 1);
  CHECK(c.last_usable() == 3);
  CHECK(c.is_absorbing(0));
  CHECK(c.is_absorbing(4));
  CHECK(c.is_usable(2));
  CHECK_FALSE(c.is_usable(0));
  CHECK_FALSE(c.contains(5));
  CHECK(c.row(2).r == 0.5);
  CHECK_THROWS_AS(c.row(7), std::domain_error);
}

TEST_CASE("construction rejects bad shapes") {
  CHECK_THROWS_AS(BirthDeathChain(0, 4, {{0.5, 0.0, 0.5}}, true, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(BirthDeathChain(3, 2, {}, true, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(BirthDeathChain::uniform(3, 2, {0.5, 0.0, 0.5}, true, true),
                  std::invalid_argument);
}

TEST_CASE("validate reports per-state problems") {
  const BirthDeathChain good = symmetric_chain();
  CHECK(good.validate().empty());

  SUBCASE("row sum off") {
    BirthDeathChain c(0, 2, {{0, 0, 0}, {0.5, 0.0, 0.6}, {0, 0, 0}}, true,
                      true);
    const auto v = c.validate();
    REQUIRE(v.size() == 1);
    CHECK(v[0].state == 1);
    CHECK(v[0].message.find("row sum") != std::string::npos);
    CHECK_THROWS_AS(c.require_valid(), spec_error);
  }
  SUBCASE("zero step probability") {
    BirthDeathChain c(0, 2, {{0, 0, 0}, {0.0, 0.5, 0.5}, {0, 0, 0}}, true,
                      true);
    const auto v = c.validate();
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("l_n") != std::string::npos);
  }
  SUBCASE("laziness of one is not a row") {
    BirthDeathChain c(0, 2, {{0, 0, 0}, {0.0, 1.0, 0.0}, {0, 0, 0}}, true,
                      true);
    CHECK(c.validate().size() == 3);  // l, r, and a all out of range
  }
  SUBCASE("non-finite probabilities") {
    const double nan = std::nan("");
    BirthDeathChain c(0, 2, {{0, 0, 0}, {nan, 0.0, 0.5}, {0, 0, 0}}, true,
                      true);
    const auto v = c.validate();
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("non-finite") != std::string::npos);
  }
  SUBCASE("absorbing endpoint rows are not inspected") {
    BirthDeathChain c(0, 2, {{9, 9, 9}, {0.5, 0.0, 0.5}, {-1, -1, -1}}, true,
                      true);
    CHECK(c.validate().empty());
  }
  SUBCASE("error message truncates after three violations") {
    BirthDeathChain c = BirthDeathChain::uniform(0, 9, {0.0, 0.0, 0.0}, true,
                                                 true);
    try {
      c.require_valid();
      FAIL("expected spec_error");
    } catch (const spec_error& e) {
      CHECK(std::string(e.what()).find("more") != std::string::npos);
    }
  }
}

TEST_CASE("live endpoints need valid rows") {
  // No absorption: every state in the window is usable.
  BirthDeathChain c = BirthDeathChain::uniform(-2, 2, {0.5, 0.0, 0.5}, false,
                                               false);
  CHECK(c.first_usable() == -2);
  CHECK(c.last_usable() == 2);
  CHECK(c.validate().empty());
}

TEST_CASE("normalized rescales rows to unit mass") {
  BirthDeathChain c(0, 2, {{0, 0, 0}, {0.2, 0.2, 0.4}, {0, 0, 0}}, true,
                    true);
  const BirthDeathChain n = c.normalized();
  CHECK(n.row(1).l == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(n.row(1).a == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(n.row(1).r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n.validate().empty());
}

TEST_CASE("remove_laziness rescales and is exactly idempotent") {
  BirthDeathChain lazy(0, 4,
                       {{0, 0, 0},
                        {0.25, 0.5, 0.25},
                        {0.3, 0.0, 0.7},
                        {0.2, 0.6, 0.2},
                        {0, 0, 0}},
                       true, true);
  const BirthDeathChain clean = remove_laziness(lazy);
  CHECK(clean.row(1).l == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(clean.row(1).a == 0.0);
  CHECK(clean.row(1).r == doctest::Approx(0.5).epsilon(1e-15));
  // The a == 0 row must come through bit-for-bit, not rescaled by
  // (l + r)/(l + r).
  CHECK(clean.row(2).l == 0.3);
  CHECK(clean.row(2).r == 0.7);

  const BirthDeathChain twice = remove_laziness(clean);
  for (State n = 0; n <= 4; ++n) {
    CHECK(twice.row(n).l == clean.row(n).l);
    CHECK(twice.row(n).a == clean.row(n).a);
    CHECK(twice.row(n).r == clean.row(n).r);
  }
}

TEST_CASE("symmetry_ratio on the symmetric walk is exactly one") {
  const BirthDeathChain c = symmetric_chain();
  const RatioValue rv = symmetry_ratio(c, 1, 3);
  CHECK(rv.value == 1.0);
  CHECK(rv.log == 0.0);
}

TEST_CASE("symmetry_ratio matches the two-factor drift product") {
  const BirthDeathChain c = drift_chain();
  const RatioValue rv = symmetry_ratio(c, 1, 3);
  // (r r)/(l l) = (0.6 * 0.6)/(0.4 * 0.4) = 2.25 up to the rounding of the
  // stored coefficients.
  CHECK(rv.value == doctest::Approx(2.25).epsilon(1e-14));
}

TEST_CASE("symmetry_ratio reciprocal pairs") {
  const BirthDeathChain c = drift_chain();
  const RatioValue fwd = symmetry_ratio(c, 1, 4);
  const RatioValue bwd = symmetry_ratio(c, 4, 1);
  CHECK(fwd.value * bwd.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bwd.log == -fwd.log);
}

TEST_CASE("symmetry_ratio against brute-force products on random chains") {
  SplitMix64 rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const BirthDeathChain c = random_chain(rng, -10, 10);
    for (State j = -9; j <= 9; j += 3) {
      for (State k = j + 1; k <= 9; k += 2) {
        long double num = 1.0L, den = 1.0L;
        for (State n = j; n < k; ++n) num *= c.row(n).r;
        for (State n = j + 1; n <= k; ++n) den *= c.row(n).l;
        const double want = static_cast<double>(num / den);
        const RatioValue got = symmetry_ratio(c, j, k);
        CHECK(got.value == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("symmetry_ratio log path agrees with long-double products") {
  // 145 factors: far beyond the direct-product cutoff, still in range.
  const BirthDeathChain c =
      BirthDeathChain::uniform(0, 200, {0.45, 0.0, 0.55}, false, false);
  const RatioValue rv = symmetry_ratio(c, 5, 150);
  long double num = 1.0L, den = 1.0L;
  for (State n = 5; n < 150; ++n) num *= c.row(n).r;
  for (State n = 6; n <= 150; ++n) den *= c.row(n).l;
  const double want = static_cast<double>(num / den);
  CHECK(rv.value == doctest::Approx(want).epsilon(1e-12));
  CHECK(rv.log == doctest::Approx(std::log(want)).epsilon(1e-12));
}

TEST_CASE("symmetry_ratio survives overflow through its log") {
  const BirthDeathChain c =
      BirthDeathChain::uniform(0, 400, {0.1, 0.0, 0.9}, false, false);
  const RatioValue rv = symmetry_ratio(c, 1, 399);
  // The value itself exceeds double range; the log is the usable answer.
  CHECK(std::isinf(rv.value));
  CHECK(rv.log ==
        doctest::Approx(398.0 * std::log(0.9 / 0.1)).epsilon(1e-12));
  const RatioValue back = symmetry_ratio(c, 399, 1);
  CHECK(back.value == 0.0);
  CHECK(back.log == -rv.log);
}

TEST_CASE("symmetry_ratio rejects bad pairs") {
  const BirthDeathChain c = symmetric_chain();
  CHECK_THROWS_AS(symmetry_ratio(c, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(symmetry_ratio(c, 0, 2), std::domain_error);
  CHECK_THROWS_AS(symmetry_ratio(c, 2, 4), std::domain_error);
  CHECK_THROWS_AS(symmetry_ratio(c, -1, 2), std::domain_error);

  BirthDeathChain bad(0, 2, {{0, 0, 0}, {0.5, 0.0, 0.6}, {0, 0, 0}}, true,
                      true);
  CHECK_THROWS_AS(symmetry_ratio(bad, 1, 1), spec_error);
}

// ---------------------------------------------------------------------
// classify

namespace {

CoefficientFn uniform_rule(double l, double r) {
  return [l, r](State) { return ProbabilityTriple{l, 0.0, r}; };
}

}  // namespace

TEST_CASE("classify: symmetric walk is recurrent") {
  for (const std::int64_t horizon : {1000, 10000}) {
    ClassifyOptions opt;
    opt.horizon = horizon;
    const RecurrenceVerdict v = classify(uniform_rule(0.5, 0.5), opt);
    CHECK(v.kind == Recurrence::Recurrent);
    CHECK(v.left_sum.status == SeriesStatus::Diverged);
    CHECK(v.right_sum.status == SeriesStatus::Diverged);
    CHECK(v.left_sum.infinite());
    // Every spacing is 1/2, so the partial sum is horizon/2.
    CHECK(v.right_sum.sum ==
          doctest::Approx(0.5 * static_cast<double>(horizon)).epsilon(1e-12));
  }
}

TEST_CASE("classify: rightward drift is transient") {
  for (const std::int64_t horizon : {1000, 10000}) {
    ClassifyOptions opt;
    opt.horizon = horizon;
    const RecurrenceVerdict v = classify(uniform_rule(0.4, 0.6), opt);
    CHECK(v.kind == Recurrence::Transient);
    CHECK(v.right_sum.status == SeriesStatus::Converged);
    CHECK(v.left_sum.status == SeriesStatus::Diverged);
    // Right side: l_0 * sum of (l/r)^i = 0.4 / (1 - 2/3) = 1.2, and the
    // geometric tail estimate recovers the limit to high accuracy.
    CHECK(v.right_sum.sum == doctest::Approx(1.2).epsilon(1e-9));
  }
}

TEST_CASE("classify: leftward drift mirrors") {
  const RecurrenceVerdict v = classify(uniform_rule(0.6, 0.4));
  CHECK(v.kind == Recurrence::Transient);
  CHECK(v.left_sum.status == SeriesStatus::Converged);
  CHECK(v.right_sum.status == SeriesStatus::Diverged);
  CHECK(v.left_sum.sum == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("classify: outward drift converges on both sides") {
  const CoefficientFn rule = [](State n) {
    return n >= 0 ? ProbabilityTriple{0.4, 0.0, 0.6}
                  : ProbabilityTriple{0.6, 0.0, 0.4};
  };
  const RecurrenceVerdict v = classify(rule);
  CHECK(v.kind == Recurrence::Transient);
  CHECK(v.left_sum.status == SeriesStatus::Converged);
  CHECK(v.right_sum.status == SeriesStatus::Converged);
}

TEST_CASE("classify: near-critical drift is honestly inconclusive") {
  // r_n = 1/2 + 1/(4n) decays too slowly for the window rule in either
  // direction; the classifier must say so instead of guessing.
  const CoefficientFn rule = [](State n) {
    double r = 0.5;
    if (n != 0) r += 0.25 / static_cast<double>(n);
    r = std::clamp(r, 1e-6, 1.0 - 1e-6);
    return ProbabilityTriple{1.0 - r, 0.0, r};
  };
  const RecurrenceVerdict v = classify(rule);
  CHECK(v.kind == Recurrence::Inconclusive);
  CHECK(v.left_sum.status == SeriesStatus::Undetermined);
  CHECK(v.right_sum.status == SeriesStatus::Undetermined);
}

TEST_CASE("classify: option validation and defaults") {
  const ClassifyOptions opt;
  CHECK(opt.horizon == 10000);
  CHECK(opt.divergence_threshold == 1e12);
  CHECK(opt.convergence_tolerance == 1e-3);

  ClassifyOptions tiny;
  tiny.horizon = ClassifyOptions::kRatioWindow - 1;
  CHECK_THROWS_AS(classify(uniform_rule(0.5, 0.5), tiny),
                  std::invalid_argument);
  tiny.horizon = ClassifyOptions::kRatioWindow;
  CHECK_NOTHROW(classify(uniform_rule(0.5, 0.5), tiny));
}

TEST_CASE("classify rejects rules that are not probability rows") {
  const CoefficientFn bad = [](State) {
    return ProbabilityTriple{0.5, 0.0, 0.6};
  };
  CHECK_THROWS_AS(classify(bad), std::domain_error);
}

TEST_SUITE_END();
