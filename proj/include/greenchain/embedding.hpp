#pragma once

#include <map>

#include "greenchain/chain.hpp"
#include "greenchain/green_exact.hpp"

namespace greenchain {

// A real value that may stand for an infinite limit.
struct Extent {
  double value = 0.0;
  bool finite = true;
};

// The Brownian-embedding grid of a lazy-free chain: signed spacings t_n
// between the images of consecutive states and the image points x_n
// themselves. Anchored so that x[anchor] = 0, t[anchor] = l_anchor and
// t[anchor-1] = -r_anchor; the anchor is state 0 whenever 0 is usable,
// otherwise the usable state closest to 0 (an index shift; every derived
// quantity is invariant under the shift). t[n] is positive for
// n >= anchor and negative below, with |t[n]| = x[n+1] - x[n].
//
// x and t store the true magnitudes, which is what tables and tests want
// at desk scale. log_spacing carries log|t[n]| and is the authoritative
// representation for arithmetic: spacings grow or decay geometrically and
// leave double range long before their logs do.
struct EmbeddingData {
  State lo = 0;
  State hi = 0;
  State anchor = 0;
  std::map<State, double> t;
  std::map<State, double> x;
  std::map<State, double> log_spacing;
  Extent x_minus_inf;
  Extent x_plus_inf;
};

// Builds the grid for the chain window. The chain must already be
// lazy-free (every a_n == 0); throws std::domain_error directing the
// caller to remove_laziness otherwise. For windowed chains the extent
// fields hold the finite boundary images.
EmbeddingData build_embedding(const BirthDeathChain& chain);

// Expected local time at y, accumulated by a Brownian motion started at z
// before it exits (a, b). Equal to
//   [(b - z)(y - a) + (z - a)(b - y)]/(b - a) - |z - y|,
// evaluated in the cancellation-free factored form
//   2 (min(z,y) - a)(b - max(z,y)) / (b - a).
// Requires a < z < b and a < y < b; symmetric in (z, y).
double expected_local_time(double a, double b, double z, double y);

// G(j,k) through the embedding: expected local time at x_k over the exit
// interval (x_A, x_B), divided by the local time a walk started at x_k
// collects there per visit, 2 t_{k-1} t_k / (t_{k-1} + t_k). Lazy chains
// are handled by delazifying internally and rescaling by 1/(1 - a_k).
GreenResult green_via_local_time(const BirthDeathChain& chain, State j,
                                 State k);

}  // namespace greenchain
