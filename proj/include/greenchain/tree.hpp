#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "greenchain/chain.hpp"
#include "greenchain/green_exact.hpp"
#include "greenchain/network.hpp"

namespace greenchain {

// Transition row of a tree vertex: probability of staying put plus one
// probability per tree neighbor.
struct TransitionRow {
  double self = 0.0;
  std::map<Vertex, double> to;
};

// A nearest-neighbor chain on a finite tree. Leaf vertices absorb the
// walk (they carry no transition row); every interior vertex must have a
// full row: positive probability to each neighbor, self-probability in
// [0, 1), total mass one. By default the leaves are the degree-one
// vertices; an explicit leaf set overrides that (it may even be empty,
// turning degree-one vertices into live states, which the conductance
// operations support; absorption-based operations then refuse to run).
class TreeChain {
 public:
  TreeChain(std::vector<Vertex> vertices,
            std::vector<std::pair<Vertex, Vertex>> edges,
            std::map<Vertex, TransitionRow> transitions,
            std::optional<std::set<Vertex>> leaves = std::nullopt);

  // Induced sub-chain on `keep`. Transitions leaving `keep` are deleted,
  // and a kept vertex whose row loses probability mass that way makes the
  // input inconsistent: the constructor rejects it (callers must supply
  // rows that are already stochastic on the subtree). Degree-one vertices
  // of the induced tree become its leaves.
  static TreeChain prune(const TreeChain& host, const std::set<Vertex>& keep);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Vertex>& neighbors(Vertex v) const;  // ascending
  std::size_t degree(Vertex v) const { return neighbors(v).size(); }

  bool has_vertex(Vertex v) const;
  bool is_leaf(Vertex v) const { return leaves_.count(v) != 0; }
  bool is_interior(Vertex v) const { return has_vertex(v) && !is_leaf(v); }
  const std::set<Vertex>& leaves() const { return leaves_; }
  std::vector<Vertex> interior() const;

  const TransitionRow& row(Vertex v) const;  // interior vertices only
  double p(Vertex v, Vertex w) const;        // 0 when absent; p(v,v) = self

  std::vector<Violation> validate() const;
  void require_valid() const;

 private:
  std::vector<Vertex> vertices_;
  std::map<Vertex, std::vector<Vertex>> adj_;
  std::map<Vertex, TransitionRow> rows_;
  std::set<Vertex> leaves_;
};

// The unique path between two interior vertices, endpoints excluded from
// `intermediate`.
struct TreePath {
  Vertex j = 0;
  Vertex k = 0;
  std::vector<Vertex> intermediate;
  std::size_t edge_count() const { return intermediate.size() + 1; }
};

TreePath find_path(const TreeChain& tc, Vertex j, Vertex k);

// Electric equivalent of the tree walk. The root's smallest-id edge gets
// conductance `seed`; every further edge follows C_{vw} = C_{vu} p(v,w)
// / p(v,u) outward in BFS order (children in ascending vertex order), so
// C(v) = C_{vu}/p(v,u) and the loop is C_{vv} = p(v,v) C(v). Changing the
// seed rescales every conductance by the same factor; all probability and
// ratio outputs are seed-invariant.
ConductanceNetwork assign_conductances(const TreeChain& tc, Vertex root,
                                       double seed);

// Inverse direction: p(v,w) = C_{vw}/C(v) and p(v,v) = C_{vv}/C(v) for
// every non-leaf vertex. Leaves default to the degree-one vertices that
// carry no loop; pass an explicit set to override (the network alone does
// not record absorption).
TreeChain recover_probabilities(const ConductanceNetwork& net,
                                std::optional<std::set<Vertex>> leaves =
                                    std::nullopt);

// Closed-form G(j,k)/G(k,j) on the tree: the product of transition
// probabilities along the unique j -> k path over the product along the
// reversed path. Log-space, with the same close-pair direct-product
// shortcut as symmetry_ratio.
RatioValue path_ratio(const TreeChain& tc, Vertex j, Vertex k);

// Expected visits to y starting from x before a leaf absorbs the walk;
// the time-zero visit counts. Solved on the interior block by
// leaf-peeling elimination (the interior of a tree is a tree, so
// elimination in peel order creates no fill).
GreenResult green_tree(const TreeChain& tc, Vertex x, Vertex y);

}  // namespace greenchain
