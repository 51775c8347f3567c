#pragma once

#include <cstdint>

#include "greenchain/chain.hpp"
#include "greenchain/tree.hpp"

namespace greenchain {

struct SimConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  // Per-trial step cap. Trials that hit it contribute their partial visit
  // counts (a downward bias) and are reported in truncated_trials.
  std::uint64_t max_steps = 1000000;
  // Worker threads. Statistics are identical for any thread count: trial
  // t always uses trial_stream(seed, t), and the integer visit counts are
  // combined by exact integer addition, which is order-independent.
  unsigned threads = 1;
};

struct VisitEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t truncated_trials = 0;
  // Set when more than 5% of trials were truncated.
  bool flagged = false;
};

// Samples the walk and counts visits to `target` before absorption at an
// endpoint, including the time-zero visit when start == target.
VisitEstimate simulate_line(const BirthDeathChain& chain, State start,
                            State target, const SimConfig& cfg);

// Same estimator with leaves absorbing. The step rule resolves the
// uniform draw against neighbors in ascending vertex order, then self.
VisitEstimate simulate_tree(const TreeChain& tc, Vertex start, Vertex target,
                            const SimConfig& cfg);

}  // namespace greenchain
