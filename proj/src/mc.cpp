#include "greenchain/mc.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "greenchain/errors.hpp"
#include "greenchain/rng.hpp"

namespace greenchain {

namespace {

struct Tally {
  std::uint64_t visit_sum = 0;
  unsigned __int128 visit_sq_sum = 0;
  std::uint64_t truncated = 0;

  void absorb(const Tally& other) {
    visit_sum += other.visit_sum;
    visit_sq_sum += other.visit_sq_sum;
    truncated += other.truncated;
  }
};

void check_config(const SimConfig& cfg) {
  if (cfg.trials < 1) {
    throw std::invalid_argument("trials must be at least 1");
  }
  if (cfg.max_steps < 1) {
    throw std::invalid_argument("max_steps must be at least 1");
  }
}

// Runs `walk_trial(rng) -> (visits, truncated)` over the trial range with
// cfg.threads workers. Trial t always draws from trial_stream(seed, t)
// and tallies combine by integer addition, so the statistics cannot
// depend on the thread count or execution order.
template <typename Trial>
VisitEstimate run_trials(const SimConfig& cfg, const Trial& walk_trial) {
  const std::uint64_t trials = cfg.trials;
  unsigned threads = std::max(1u, cfg.threads);
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, trials));

  std::vector<Tally> parts(threads);
  auto worker = [&](unsigned w) {
    const std::uint64_t begin = trials * w / threads;
    const std::uint64_t end = trials * (w + 1) / threads;
    Tally local;
    for (std::uint64_t t = begin; t < end; ++t) {
      SplitMix64 rng = trial_stream(cfg.seed, t);
      const auto [visits, truncated] = walk_trial(rng);
      local.visit_sum += visits;
      local.visit_sq_sum +=
          static_cast<unsigned __int128>(visits) * visits;
      if (truncated) ++local.truncated;
    }
    parts[w] = local;
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  Tally total;
  for (const Tally& part : parts) total.absorb(part);

  const long double n = static_cast<long double>(trials);
  const long double s1 = static_cast<long double>(total.visit_sum);
  const long double s2 = static_cast<long double>(total.visit_sq_sum);
  const long double mean = s1 / n;

  VisitEstimate est;
  est.mean = static_cast<double>(mean);
  if (trials > 1) {
    long double var = (s2 - s1 * s1 / n) / (n - 1.0L);
    if (var < 0.0L) var = 0.0L;  // roundoff guard
    est.std_error = static_cast<double>(std::sqrt(var / n));
  }
  est.truncated_trials = total.truncated;
  est.flagged = total.truncated * 20 > trials;  // more than 5%
  return est;
}

}  // namespace

VisitEstimate simulate_line(const BirthDeathChain& chain, State start,
                            State target, const SimConfig& cfg) {
  chain.require_valid();
  check_config(cfg);
  if (!chain.both_ends_absorbing()) {
    throw std::domain_error("sampling needs both window endpoints absorbing");
  }
  for (State s : {start, target}) {
    if (!chain.is_usable(s)) {
      throw std::domain_error("state " + std::to_string(s) +
                              " is not interior");
    }
  }

  // Flat row table: index i is state lo + i; thresholds resolve the
  // uniform draw as u < l -> left, u < l + a -> stay, else right.
  const std::size_t n = chain.size();
  std::vector<double> left_at(n), stay_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ProbabilityTriple& row =
        chain.row(chain.lo() + static_cast<State>(i));
    left_at[i] = row.l;
    stay_at[i] = row.l + row.a;
  }
  const std::int64_t start_i = start - chain.lo();
  const std::int64_t target_i = target - chain.lo();
  const std::int64_t lo_i = 0;
  const std::int64_t hi_i = static_cast<std::int64_t>(n) - 1;
  const std::uint64_t max_steps = cfg.max_steps;

  return run_trials(cfg, [&](SplitMix64& rng) {
    std::int64_t pos = start_i;
    std::uint64_t visits = 0;
    std::uint64_t steps = 0;
    bool truncated = false;
    for (;;) {
      if (pos == target_i) ++visits;
      if (pos == lo_i || pos == hi_i) break;
      if (steps == max_steps) {
        truncated = true;
        break;
      }
      const double u = rng.next_double();
      const auto i = static_cast<std::size_t>(pos);
      if (u < left_at[i]) {
        --pos;
      } else if (u >= stay_at[i]) {
        ++pos;
      }
      ++steps;
    }
    return std::pair<std::uint64_t, bool>{visits, truncated};
  });
}

VisitEstimate simulate_tree(const TreeChain& tc, Vertex start, Vertex target,
                            const SimConfig& cfg) {
  tc.require_valid();
  check_config(cfg);
  if (tc.leaves().empty()) {
    throw std::domain_error("tree has no absorbing leaves; walks never stop");
  }
  for (Vertex v : {start, target}) {
    if (!tc.has_vertex(v) || tc.is_leaf(v)) {
      throw std::domain_error("vertex " + std::to_string(v) +
                              " is not an interior vertex");
    }
  }

  // Compact step tables: for each vertex a cumulative-probability row
  // over its neighbors in ascending vertex order; a draw past the last
  // threshold keeps the walk in place (the self-transition).
  std::map<Vertex, std::size_t> index;
  const auto& vertices = tc.vertices();
  for (std::size_t i = 0; i < vertices.size(); ++i) index[vertices[i]] = i;

  struct StepEntry {
    double cum;
    std::size_t next;
  };
  std::vector<std::vector<StepEntry>> step(vertices.size());
  std::vector<char> absorbing(vertices.size(), 0);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vertex v = vertices[i];
    if (tc.is_leaf(v)) {
      absorbing[i] = 1;
      continue;
    }
    double cum = 0.0;
    for (Vertex w : tc.neighbors(v)) {
      cum += tc.p(v, w);
      step[i].push_back({cum, index.at(w)});
    }
  }
  const std::size_t start_i = index.at(start);
  const std::size_t target_i = index.at(target);
  const std::uint64_t max_steps = cfg.max_steps;

  return run_trials(cfg, [&](SplitMix64& rng) {
    std::size_t pos = start_i;
    std::uint64_t visits = 0;
    std::uint64_t steps = 0;
    bool truncated = false;
    for (;;) {
      if (pos == target_i) ++visits;
      if (absorbing[pos]) break;
      if (steps == max_steps) {
        truncated = true;
        break;
      }
      const double u = rng.next_double();
      for (const StepEntry& e : step[pos]) {
        if (u < e.cum) {
          pos = e.next;
          break;
        }
      }
      ++steps;
    }
    return std::pair<std::uint64_t, bool>{visits, truncated};
  });
}

}  // namespace greenchain
