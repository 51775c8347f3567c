// Shared test fixtures: independent oracles and random-instance
// generators. The oracles deliberately avoid the production solvers:
// Green's functions are re-derived here by plain Gauss-Jordan elimination
// in long double and by truncated power series, so an agreement failure
// points at the library, not at a shared bug.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "greenchain/chain.hpp"
#include "greenchain/rng.hpp"
#include "greenchain/tree.hpp"

namespace testsupport {

using greenchain::BirthDeathChain;
using greenchain::ProbabilityTriple;
using greenchain::SplitMix64;
using greenchain::State;
using greenchain::TransitionRow;
using greenchain::TreeChain;
using greenchain::Vertex;

// Gauss-Jordan inverse with partial pivoting, long double. Test-local on
// purpose; O(n^3) is fine at unit-test sizes.
inline std::vector<std::vector<long double>> invert_dense(
    std::vector<std::vector<long double>> m) {
  const std::size_t n = m.size();
  std::vector<std::vector<long double>> inv(
      n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(m[r][c]) > std::fabs(m[pivot][c])) pivot = r;
    }
    if (m[pivot][c] == 0.0L) throw std::runtime_error("singular test matrix");
    std::swap(m[pivot], m[c]);
    std::swap(inv[pivot], inv[c]);
    const long double p = m[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      m[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0.0L) continue;
      const long double f = m[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Fundamental matrix of the interior block, straight from the definition
// N = (I - Q)^{-1} via the dense inverse above.
inline std::vector<std::vector<long double>> fundamental_matrix_oracle(
    const BirthDeathChain& chain) {
  const State a = chain.first_usable();
  const State b = chain.last_usable();
  const std::size_t n = static_cast<std::size_t>(b - a + 1);
  std::vector<std::vector<long double>> m(n,
                                          std::vector<long double>(n, 0.0L));
  for (State s = a; s <= b; ++s) {
    const std::size_t i = static_cast<std::size_t>(s - a);
    const ProbabilityTriple& row = chain.row(s);
    m[i][i] = 1.0L - static_cast<long double>(row.a);
    if (s - 1 >= a) m[i][i - 1] = -static_cast<long double>(row.l);
    if (s + 1 <= b) m[i][i + 1] = -static_cast<long double>(row.r);
  }
  return invert_dense(std::move(m));
}

// G(x,y) as the literal expectation: sum of Q^m mass at y, accumulated by
// repeated row-vector multiplication until the surviving mass is
// negligible. Independent of any linear solver.
inline long double power_series_green(const BirthDeathChain& chain, State x,
                                      State y,
                                      std::size_t max_terms = 2000000) {
  const State a = chain.first_usable();
  const State b = chain.last_usable();
  const std::size_t n = static_cast<std::size_t>(b - a + 1);
  std::vector<long double> mass(n, 0.0L);
  mass[static_cast<std::size_t>(x - a)] = 1.0L;
  long double total = 0.0L;
  for (std::size_t m = 0; m < max_terms; ++m) {
    total += mass[static_cast<std::size_t>(y - a)];
    std::vector<long double> next(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      if (mass[i] == 0.0L) continue;
      const ProbabilityTriple& row = chain.row(a + static_cast<State>(i));
      next[i] += mass[i] * static_cast<long double>(row.a);
      if (i > 0) next[i - 1] += mass[i] * static_cast<long double>(row.l);
      if (i + 1 < n) next[i + 1] += mass[i] * static_cast<long double>(row.r);
    }
    long double alive = 0.0L;
    for (const long double v : next) alive += v;
    mass.swap(next);
    if (alive < 1e-22L * (total + 1.0L)) break;
  }
  return total;
}

// Interior-block fundamental matrix of a tree chain, again by dense
// elimination from the definition.
inline std::map<Vertex, std::map<Vertex, long double>> tree_green_oracle(
    const TreeChain& tc) {
  const std::vector<Vertex> interior = tc.interior();
  const std::size_t n = interior.size();
  std::map<Vertex, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[interior[i]] = i;
  std::vector<std::vector<long double>> m(n,
                                          std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = interior[i];
    m[i][i] = 1.0L - static_cast<long double>(tc.p(v, v));
    for (const Vertex w : tc.neighbors(v)) {
      const auto it = index.find(w);
      if (it != index.end()) {
        m[i][it->second] -= static_cast<long double>(tc.p(v, w));
      }
    }
  }
  const auto inv = invert_dense(std::move(m));
  std::map<Vertex, std::map<Vertex, long double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[interior[i]][interior[j]] = inv[i][j];
    }
  }
  return out;
}

// Random absorbed chain on [lo, hi]: a in [0, a_max], l and r at least
// 0.05 each.
inline BirthDeathChain random_chain(SplitMix64& rng, State lo, State hi,
                                    double a_max = 0.6) {
  std::vector<ProbabilityTriple> rows(static_cast<std::size_t>(hi - lo + 1));
  for (State s = lo + 1; s <= hi - 1; ++s) {
    const double a = a_max * rng.next_double();
    const double rest = 1.0 - a;
    const double l = 0.05 + rng.next_double() * (rest - 0.10);
    rows[static_cast<std::size_t>(s - lo)] = ProbabilityTriple{l, a, rest - l};
  }
  return BirthDeathChain(lo, hi, std::move(rows), true, true);
}

// Uniform-attachment random tree on n >= 2 vertices 0..n-1 with random
// interior rows (self mass up to 0.5, every neighbor strictly positive).
inline TreeChain random_tree(SplitMix64& rng, std::size_t n) {
  std::vector<Vertex> vertices;
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    vertices.push_back(static_cast<Vertex>(v));
    if (v > 0) {
      const std::size_t parent = static_cast<std::size_t>(rng.below(v));
      edges.emplace_back(static_cast<Vertex>(parent), static_cast<Vertex>(v));
      ++degree[parent];
      ++degree[v];
    }
  }
  std::map<Vertex, TransitionRow> rows;
  std::map<Vertex, std::vector<Vertex>> adj;
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] <= 1) continue;  // leaf: no row
    TransitionRow row;
    row.self = 0.5 * rng.next_double();
    double weight_sum = 0.0;
    std::map<Vertex, double> weights;
    for (const Vertex w : adj[static_cast<Vertex>(v)]) {
      const double wgt = 0.1 + rng.next_double();
      weights[w] = wgt;
      weight_sum += wgt;
    }
    for (const auto& [w, wgt] : weights) {
      row.to[w] = (1.0 - row.self) * wgt / weight_sum;
    }
    rows[static_cast<Vertex>(v)] = std::move(row);
  }
  return TreeChain(std::move(vertices), std::move(edges), std::move(rows));
}

inline double rel_err(double got, long double want) {
  const long double denom =
      std::max<long double>(std::fabs(want), std::fabs((long double)got));
  if (denom == 0.0L) return 0.0;
  return static_cast<double>(std::fabs(got - want) / denom);
}

}  // namespace testsupport
